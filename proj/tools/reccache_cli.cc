// Command-line front end: run, preset, validate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reccache/config.h"
#include "reccache/harness.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitRuntimeFailure = 3;

namespace fs = std::filesystem;
using reccache::ExperimentConfig;

void PrintReport(const reccache::ValidationReport& report) {
  for (const auto& v : report.violations) std::cerr << "error: " << v << '\n';
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
}

// Runs one configuration and writes <stem>.csv, <stem>.summary.json and
// <stem>.config.json under `out_dir`.
void RunAndWrite(const ExperimentConfig& config, const fs::path& out_dir,
                 const std::string& stem, std::size_t threads, bool trace) {
  fs::create_directories(out_dir);
  reccache::RunOptions options;
  options.threads = threads;
  if (trace) options.trace_dir = out_dir;
  const auto output = reccache::RunExperiment(config, options);

  {
    std::ofstream csv(out_dir / (stem + ".csv"));
    reccache::WriteCsv(csv, output.results);
    if (!csv) throw std::runtime_error("failed writing " + stem + ".csv");
  }
  {
    std::ofstream json(out_dir / (stem + ".summary.json"));
    json << reccache::SummaryToJson(output.summary).dump(2) << '\n';
  }
  {
    std::ofstream json(out_dir / (stem + ".config.json"));
    json << reccache::ConfigToJson(config).dump(2) << '\n';
  }
  for (const auto& w : output.summary.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  std::cout << stem << ":";
  for (const auto& p : output.summary.policies) {
    std::cout << "  " << p.id << " regret=" << p.final_regret_mean;
    if (p.final_regret_se) std::cout << "±" << *p.final_regret_se;
    if (p.wbar_error) std::cout << " wbar_err=" << *p.wbar_error;
  }
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommendation-aware caching bandits: experiments and checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::size_t threads = 1;
  bool trace = false;

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config_path, "Configuration JSON")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--trace", trace, "Dump per-slot request traces");

  std::string preset_name;
  std::vector<std::string> overrides;
  auto* preset = app.add_subcommand("preset", "Run a named experiment preset");
  preset->add_option("name", preset_name, "fig_a .. fig_f")->required();
  preset->add_option("--out", out_dir, "Output directory");
  preset->add_option("--override", overrides, "section.key=value")->expected(1, -1);
  preset->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  preset->add_flag("--trace", trace, "Dump per-slot request traces");

  auto* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("--config", config_path, "Configuration JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto config = reccache::LoadConfig(config_path);
      const auto report = reccache::ValidateConfig(config);
      PrintReport(report);
      if (!report.ok()) return kExitInvalidConfig;
      std::cout << "ok " << reccache::ConfigDigest(config) << '\n';
      return kExitOk;
    }
    if (*run) {
      const auto config = reccache::LoadConfig(config_path);
      RunAndWrite(config, out_dir, "results", threads, trace);
      return kExitOk;
    }
    if (*preset) {
      const auto variants = reccache::Preset(preset_name);
      for (const auto& variant : variants) {
        auto doc = reccache::ConfigToJson(variant.config);
        reccache::ApplyOverrides(doc, overrides);
        const auto config = reccache::ConfigFromJson(doc);
        const std::string stem =
            variant.label.empty() ? preset_name : preset_name + "_" + variant.label;
        RunAndWrite(config, out_dir, stem, threads, trace);
      }
      return kExitOk;
    }
  } catch (const reccache::InvalidConfig& e) {
    PrintReport(e.report());
    return kExitInvalidConfig;
  } catch (const reccache::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::invalid_argument& e) {
    // Unknown preset names land here.
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntimeFailure;
  }
  return kExitOk;
}
