#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "skewlab/experiment/config.hpp"
#include "skewlab/experiment/runner.hpp"

namespace ex = skewlab::experiment;

namespace {

constexpr int kConfigExit = 2;

std::string flag_name(const std::string& path) {
  const std::string key = path.substr(path.find('.') + 1);
  if (path == "output.dir") return "--out";
  return key.size() == 1 ? "-" + key : "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on interval maps and skew-products."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ex::kToolVersion));

  std::string config_path;
  bool dump = false;
  app.add_option("--config", config_path, "Config file; flags override its values")->check(CLI::ExistingFile);
  app.add_flag("--dump-config", dump, "Print the resolved config and exit");

  // One flag per config key, applied on top of the file.
  std::map<std::string, std::string> flag_values;
  for (const auto& path : ex::config_keys()) {
    if (path == "experiment.name") continue;
    app.add_option(flag_name(path), flag_values[path], path);
  }

  for (const auto& name : ex::kExperiments) app.add_subcommand(name, "Run the " + name + " experiment")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  ex::Overrides overrides{{"experiment.name", app.get_subcommands().front()->get_name()}};
  for (const auto& [path, value] : flag_values)
    if (app.count(flag_name(path)) > 0) overrides.emplace_back(path, value);

  ex::ExperimentConfig cfg;
  try {
    cfg = ex::parse_config(text, overrides);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  }
  if (dump) {
    std::cout << ex::serialize(cfg);
    return 0;
  }

  try {
    const auto result = ex::run_experiment(cfg);
    if (result.exit_code != 0) {
      std::cerr << "experiment failed: " << result.error << '\n';
    } else {
      std::cout << result.summary << '\n';
    }
    std::cerr << "manifest: " << result.manifest.string() << '\n';
    return result.exit_code;
  } catch (const skewlab::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
}
