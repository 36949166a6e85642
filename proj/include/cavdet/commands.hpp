// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cavdet/config.hpp"

namespace cavdet::cli {

struct CommandOptions {
  std::string out_dir = ".";
  std::string format = "csv";   // csv | json rendering preference
  std::string counts_path;      // input for `analyze`
  int threads = 1;
};

// Each command writes its artifacts under out_dir and returns the JSON
// summary it also wrote to disk.
nlohmann::json cmd_neff(const RunConfig& config, const CommandOptions& options);
nlohmann::json cmd_simulate(const RunConfig& config,
                            const CommandOptions& options);
nlohmann::json cmd_analyze(const RunConfig& config,
                           const CommandOptions& options);
nlohmann::json cmd_table1(const RunConfig& config,
                          const CommandOptions& options);
nlohmann::json cmd_steady(const RunConfig& config,
                          const CommandOptions& options);
nlohmann::json cmd_zeeman(const RunConfig& config,
                          const CommandOptions& options);

struct Table1Row {
  std::string label;
  double s1_per_ms = 0.0;
  double b_per_ms = 0.0;
  // displayed digits after the decimal point, following the published table
  int f1_digits = 1;
  int t1_digits = 0;
  int f2_digits = 1;
};

// Published comparison rows; the last entry is this work's rate pair.
const std::vector<Table1Row>& table1_rows();

std::string render_table1_text(const nlohmann::json& table);

}  // namespace cavdet::cli
