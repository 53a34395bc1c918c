#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "fockblock/cli/commands.hpp"
#include "fockblock/cli/presets.hpp"
#include "fockblock/error.hpp"

namespace fs = std::filesystem;
using namespace fockblock::cli;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fockblock::InvalidArgument("cannot write " + path.string());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fockblock::InvalidArgument("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Displaced-frame photon blockade simulator"};
  std::string command, config_path, out_dir = ".", preset;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool list = false;
  std::string commands_help = "one of:";
  for (const auto& c : command_names()) commands_help += " " + c;
  app.add_option("command", command, commands_help);
  app.add_option("--config", config_path, "config file");
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--workers", workers, "worker threads for sweeps")->check(CLI::Range(std::size_t(1), std::size_t(256)));
  app.add_option("--seed", seed, "RNG seed for the channel command");
  app.add_option("--preset", preset, "built-in config: fig3, fig4, fig6, fig1c, figS1");
  app.add_flag("--list-presets", list, "print the presets and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& p : presets()) std::cout << p.name << "  " << p.command << "  " << p.description << "\n";
    return 0;
  }

  try {
    std::string config_text;
    if (!preset.empty()) {
      if (!config_path.empty()) throw fockblock::InvalidArgument("--preset and --config are exclusive");
      const Preset& p = find_preset(preset);
      if (command.empty()) command = p.command;
      if (command != p.command)
        throw fockblock::InvalidArgument("preset " + p.name + " runs '" + p.command + "', not '" + command + "'");
      config_text = p.config;
    } else {
      if (command.empty()) throw fockblock::InvalidArgument("missing command");
      if (config_path.empty()) throw fockblock::InvalidArgument("missing --config");
      config_text = read_file(config_path);
    }
    const RunOutput out = run_command(command, config_text, {workers, seed});
    fs::create_directories(out_dir);
    for (const auto& [name, text] : out.files) write_file(fs::path(out_dir) / name, text);
    write_file(fs::path(out_dir) / "summary.json", summary_text(out));
    if (!out.checks_ok) {
      std::cerr << "invariant checks failed, see summary.json\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cout << error_json(command, e).dump() << "\n";
    return 1;
  }
}
