// SPDX-License-Identifier: Apache-2.0
#include "cavdet/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cavdet/errors.hpp"

#ifndef CAVDET_VERSION
#define CAVDET_VERSION "0.0.0"
#endif

namespace cavdet::io {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for checksum: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

void write_counts_csv(const std::string& path, const CountStream& stream) {
  stream.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write counts file: " + path);
  out << "trial,bin_index,t_us,counts\n";
  for (size_t trial = 0; trial < stream.n_trials; ++trial) {
    for (size_t bin = 0; bin < stream.n_bins; ++bin) {
      out << trial << ',' << bin << ',' << format_double(stream.bin_time_us(bin))
          << ',' << stream.at(trial, bin) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

CountStream read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open counts file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty counts file: " + path);
  if (line != "trial,bin_index,t_us,counts") {
    throw IoError("unexpected counts header in " + path + ": " + line);
  }

  struct Row {
    size_t trial, bin;
    double t_us;
    uint32_t counts;
  };
  std::vector<Row> rows;
  size_t max_trial = 0, max_bin = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Row row{};
    char comma;
    std::istringstream ss(line);
    if (!(ss >> row.trial >> comma >> row.bin >> comma >> row.t_us >> comma >>
          row.counts)) {
      std::ostringstream msg;
      msg << "malformed counts row at " << path << ":" << line_no;
      throw IoError(msg.str());
    }
    max_trial = std::max(max_trial, row.trial);
    max_bin = std::max(max_bin, row.bin);
    rows.push_back(row);
  }
  if (rows.empty()) throw IoError("counts file has no data rows: " + path);

  CountStream stream;
  stream.n_trials = max_trial + 1;
  stream.n_bins = max_bin + 1;
  stream.counts.assign(stream.n_trials * stream.n_bins, 0);
  if (rows.size() != stream.n_trials * stream.n_bins) {
    throw IoError("counts file is not a full trials x bins grid: " + path);
  }
  // reconstruct bin width and origin from the time column
  if (stream.n_bins > 1) {
    double t0 = 0.0, t1 = 0.0;
    for (const auto& r : rows) {
      if (r.trial == 0 && r.bin == 0) t0 = r.t_us;
      if (r.trial == 0 && r.bin == 1) t1 = r.t_us;
    }
    stream.bin_us = t1 - t0;
    stream.t0_us = t0 - 0.5 * stream.bin_us;
  }
  for (const auto& r : rows) stream.at(r.trial, r.bin) = r.counts;
  stream.validate();
  return stream;
}

void write_curve_csv(const std::string& path, const Curve& curve) {
  if (curve.x.size() != curve.y.size() ||
      (!curve.yerr.empty() && curve.yerr.size() != curve.x.size())) {
    throw ValidationError("curve columns must have equal length");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve file: " + path);
  out << "x,y,yerr\n";
  for (size_t i = 0; i < curve.x.size(); ++i) {
    const double err = curve.yerr.empty() ? 0.0 : curve.yerr[i];
    out << format_double(curve.x[i]) << ',' << format_double(curve.y[i]) << ','
        << format_double(err) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Curve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "x,y,yerr") {
    throw IoError("unexpected curve header in " + path);
  }
  Curve curve;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double x, y, err;
    char comma;
    std::istringstream ss(line);
    if (!(ss >> x >> comma >> y >> comma >> err)) {
      std::ostringstream msg;
      msg << "malformed curve row at " << path << ":" << line_no;
      throw IoError(msg.str());
    }
    curve.x.push_back(x);
    curve.y.push_back(y);
    curve.yerr.push_back(err);
  }
  if (curve.x.empty()) throw IoError("curve file has no data rows: " + path);
  return curve;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write json file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open json file: " + path);
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw IoError("json parse error in " + path + ": " + e.what());
  }
}

void RunManifest::add_output(const std::string& dir,
                             const std::string& filename) {
  const std::string full = dir + "/" + filename;
  ManifestEntry entry;
  entry.path = filename;
  entry.bytes = std::filesystem::file_size(full);
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(file_checksum(full)));
  entry.checksum = buf;
  outputs.push_back(entry);
}

RunManifest make_manifest(uint64_t seed, const json& config) {
  RunManifest m;
  m.version = CAVDET_VERSION;
  m.seed = seed;
  m.config_text = config.dump();
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m.created_utc = buf;
  return m;
}

void write_manifest(const std::string& dir, const RunManifest& manifest) {
  json j;
  j["tool"] = manifest.tool;
  j["version"] = manifest.version;
  j["created_utc"] = manifest.created_utc;
  j["seed"] = manifest.seed;
  j["config"] = json::parse(manifest.config_text);
  j["outputs"] = json::array();
  for (const auto& e : manifest.outputs) {
    j["outputs"].push_back(
        {{"path", e.path}, {"bytes", e.bytes}, {"checksum", e.checksum}});
  }
  write_json_file(dir + "/manifest.json", j);
}

}  // namespace cavdet::io
