#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rpf/app.hpp"
#include "rpf/error.hpp"

namespace {

// Remaining "--key value" or "--key=value" tokens become config overrides.
void apply_overrides(const std::vector<std::string>& extras, rpf::app::Config& config) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() == 2) {
      throw rpf::Error("cli", rpf::ErrorKind::Config, "unexpected argument '" + tok + "'");
    }
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      config.set(tok.substr(2, eq - 2), tok.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      config.set(tok.substr(2), extras[++i]);
    } else {
      throw rpf::Error("cli", rpf::ErrorKind::Config, "option '" + tok + "' needs a value");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity screening with randomized pick-freeze designs and the LASSO"};
  app.set_version_flag("--version", rpf::app::version());
  app.require_subcommand(1);

  std::string config_path;
  std::string experiment;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"estimate", "simulate, estimate and recover the active inputs"},
      {"path", "LASSO path and thresholded support from an E file and a design file"},
      {"bounds", "evaluate or optimize a recovery bound"},
      {"verify-design", "coherence, expansion and UDP checks of a design"},
      {"reproduce", "rerun a reference experiment: fig1, fig2, scenario232, baseline"},
      {"baseline", "one-at-a-time estimation cost audit"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config", config_path, "key=value file; --key value flags override it");
    if (name == "reproduce") sub->add_option("experiment", experiment, "experiment id")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rpf::app::kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  rpf::app::Config config;
  try {
    if (!config_path.empty()) config = rpf::app::Config::load(config_path);
    apply_overrides(sub->remaining(), config);
  } catch (const rpf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rpf::app::kConfigError;
  }
  return rpf::app::run_command(sub->get_name(), experiment, config, std::cout, std::cerr);
}
