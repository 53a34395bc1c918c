#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace fockblock::cli {

struct RunOptions {
  std::size_t workers = 1;
  std::uint64_t seed = 0;  // only the channel command draws random numbers
};

struct RunOutput {
  std::string command;
  std::map<std::string, std::string> files;  // file name -> contents
  nlohmann::json summary;
  bool checks_ok = true;
};

const std::vector<std::string>& command_names();

// Parses the config, runs the command (fanning sweep points out over
// opts.workers threads) and assembles outputs in sweep order.
RunOutput run_command(const std::string& command, const std::string& config_text, const RunOptions& opts);

// summary.json text: two-space indent, trailing newline.
std::string summary_text(const RunOutput& out);

// Machine-readable error record for a failed run.
nlohmann::json error_json(const std::string& command, const std::exception& e);

}  // namespace fockblock::cli
