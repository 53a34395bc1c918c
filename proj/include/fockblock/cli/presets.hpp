#pragma once

#include <string>
#include <vector>

namespace fockblock::cli {

struct Preset {
  std::string name;
  std::string command;
  std::string description;
  std::string config;  // config text, hashed like a file
};

const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

}  // namespace fockblock::cli
