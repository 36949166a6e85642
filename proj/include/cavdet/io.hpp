// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cavdet/count_stream.hpp"

namespace cavdet::io {

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double value);

uint64_t fnv1a64(const std::string& bytes);
uint64_t file_checksum(const std::string& path);

// counts files: header `trial,bin_index,t_us,counts`
void write_counts_csv(const std::string& path, const CountStream& stream);
CountStream read_counts_csv(const std::string& path);

// curve files: header `x,y,yerr`
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> yerr;
};
void write_curve_csv(const std::string& path, const Curve& curve);
Curve read_curve_csv(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

struct ManifestEntry {
  std::string path;      // relative to the manifest directory
  uint64_t bytes = 0;
  std::string checksum;  // fnv1a64, hex
};

// Reproducibility record: a config snapshot plus the output inventory.
// Identical config and seed reproduce identical checksums; the timestamp
// lives only in the manifest itself, never in data files.
struct RunManifest {
  std::string tool = "cavdet";
  std::string version;
  std::string created_utc;
  uint64_t seed = 0;
  std::string config_text;  // serialized RunConfig JSON
  std::vector<ManifestEntry> outputs;

  void add_output(const std::string& dir, const std::string& filename);
};

RunManifest make_manifest(uint64_t seed, const nlohmann::json& config);
void write_manifest(const std::string& dir, const RunManifest& manifest);

}  // namespace cavdet::io
