// Command-line front end. Exit codes: 0 ok, 1 runtime failure, 2 bad input.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsense/errors.hpp"
#include "qsense/io.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw UsageError("config file " + path + " is not valid JSON");
  return j;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherence-stabilized qubit frequency sensing"};
  app.set_version_flag("--version", std::string(qsense::io::kToolVersion));
  app.require_subcommand(1);

  std::string config_path, output, summary;
  std::vector<std::string> overrides;
  for (const auto& name : qsense::io::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "JSON configuration file");
    sub->add_option("-s,--set", overrides, "override a field: name=value (value parsed as JSON)");
    sub->add_option("-o,--output", output, "primary output file (default: stdout)");
    sub->add_option("--summary", summary, "summary file for the shots command");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  qsense::io::RunConfig config;
  try {
    json j = load_config(config_path);
    for (const auto& o : overrides) qsense::io::apply_override(j, o);
    if (!output.empty()) j["output"] = output;
    if (!summary.empty()) j["summary"] = summary;
    config = qsense::io::parse_config(command, j);
  } catch (const qsense::io::ConfigError& e) {
    std::cerr << "qsense: config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "qsense: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto result = qsense::io::run_command(config);

    fs::path primary_path = config.output;
    fs::path summary_path = config.summary;
    if (primary_path.empty()) {
      if (const char* dir = std::getenv(qsense::io::kOutputDirEnv); dir && *dir)
        primary_path = fs::path(dir) / (command + "." + result.primary_extension);
    }
    if (summary_path.empty() && !primary_path.empty()) summary_path = primary_path.string() + ".summary.json";

    if (primary_path.empty()) {
      std::cout << result.primary;
    } else {
      write_file(primary_path, result.primary);
    }
    if (!result.summary.empty()) {
      if (summary_path.empty()) {
        std::cerr << result.summary;
      } else {
        write_file(summary_path, result.summary);
      }
    }
  } catch (const qsense::DomainError& e) {
    std::cerr << "qsense: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qsense: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
