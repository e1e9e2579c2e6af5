// Command-line runner: cryo <spectrum|simulate|classify|imaging> [flags].

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cryo/cli.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace {

void report_error(const std::string& type, const std::string& message, const std::string& key = {}) {
  nlohmann::json err = {{"type", type}, {"message", message}};
  if (!key.empty()) err["key"] = key;
  cryo::write_json(std::cerr, {{"error", err}});
  std::cerr << '\n';
}

int run(const std::string& subcommand, const std::string& config_path, const cryo::ConfigMap& flags) {
  cryo::ExperimentConfig config = cryo::default_config(subcommand);
  if (!config_path.empty()) cryo::apply_config(config, cryo::load_config_file(config_path));
  cryo::apply_config(config, flags);
  cryo::validate_config(config);
  if (openblas_set_num_threads) openblas_set_num_threads(static_cast<int>(config.threads));

  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;
  if (config.out != "-") {
    file = std::make_unique<std::ofstream>(config.out);
    if (!*file) throw cryo::InvalidConfig("out", "cannot open " + config.out + " for writing");
    os = file.get();
  }
  if (subcommand == "spectrum") {
    std::unique_ptr<std::ofstream> coeffs;
    if (config.format == "csv" && config.out != "-") {
      coeffs = std::make_unique<std::ofstream>(config.out + ".coefficients.json");
      if (!*coeffs) throw cryo::InvalidConfig("out", "cannot write the coefficient table next to " + config.out);
    }
    return cryo::run_spectrum(config, *os, coeffs.get());
  }
  if (subcommand == "simulate") return cryo::run_simulate(config, *os);
  if (subcommand == "classify") return cryo::run_classify(config, *os);
  return cryo::run_imaging(config, *os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized parallel transport: spectra, simulation and intrinsic classification"};
  app.require_subcommand(1);
  // --h is the cap height, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");

  std::string config_path;
  std::map<std::string, std::string> flag_values;
  bool end_to_end = false;

  // Every config key is also a flag; flags win over the config file.
  const std::vector<std::pair<std::string, std::string>> keys = {
      {"seed", "Random seed"},
      {"out", "Output path, - for stdout"},
      {"format", "csv or json"},
      {"threads", "Worker threads; 1 is bit-reproducible"},
      {"n_frames", "Number of frames or images"},
      {"h", "Cap height 1 - cos(a)"},
      {"n_max", "Largest eigenvalue index"},
      {"h_grid", "start:stop:step or comma list"},
      {"outlier_frac", "Fraction of planted outlier edges"},
      {"side", "Image side in pixels"},
      {"extent", "Image half-width"},
      {"n_angles", "Alignment angles"},
      {"snr", "Signal-to-noise ratio, inf for clean"},
      {"epsilon", "Graph distance threshold, auto to calibrate"},
      {"threshold", "Decision threshold, auto for 1 - h"},
      {"k", "Number of eigenvalues"},
      {"solver", "auto, dense or lanczos"},
      {"images", "Write the image stack here"},
      {"graph", "Write the graph CSV here"}};

  for (const auto& name : cryo::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--config", config_path, "key = value file or a previous JSON report");
    for (const auto& [key, help] : keys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      sub->add_option_function<std::string>(flag, [&flag_values, key](const std::string& v) { flag_values[key] = v; },
                                            help);
    }
    sub->add_flag("--end-to-end", end_to_end, "Classify the image graph");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cryo::kExitInvalidConfig;
  }
  if (end_to_end) flag_values["end_to_end"] = "true";

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    return run(subcommand, config_path, flag_values);
  } catch (const cryo::InvalidConfig& e) {
    report_error("InvalidConfig", e.what(), e.key());
    return cryo::kExitInvalidConfig;
  } catch (const cryo::NoSpectralGap& e) {
    report_error("NoSpectralGap", e.what());
    return cryo::kExitNumericalFailure;
  } catch (const cryo::ConvergenceFailure& e) {
    report_error("ConvergenceFailure", e.what());
    return cryo::kExitNumericalFailure;
  } catch (const cryo::Error& e) {
    report_error("NumericalFailure", e.what());
    return cryo::kExitNumericalFailure;
  }
}
