#include "roughlab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

namespace {

std::optional<std::size_t> threads_from_env(bool& bad) {
  bad = false;
  const char* env = std::getenv("LAB_THREADS");
  if (!env || !*env) return std::nullopt;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(env, &used);
    if (used == std::string(env).size() && v >= 0 && v <= 4096) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  bad = true;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roughlab experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the JSON config")->required();
  auto* list = app.add_subcommand("list", "List registered experiments");
  auto* version = app.add_subcommand("version", "Print the version string");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : roughlab::kExitConfigError;
  }

  if (list->parsed()) {
    for (const auto& e : roughlab::list_experiments())
      std::cout << std::left << std::setw(26) << e.name << e.description << "\n";
    return 0;
  }
  if (version->parsed()) {
    std::cout << roughlab::version_string() << "\n";
    return 0;
  }
  if (run->parsed()) {
    bool bad = false;
    const auto threads = threads_from_env(bad);
    if (bad) {
      std::cerr << "config error: LAB_THREADS must be an integer in [0, 4096]\n";
      return roughlab::kExitConfigError;
    }
    try {
      return roughlab::run_config_file(config_path, std::cerr, threads);
    } catch (const std::exception& e) {
      std::cerr << "numerical error: " << e.what() << "\n";
      return roughlab::kExitNumericalError;
    }
  }
  return roughlab::kExitConfigError;
}
