#ifndef RECCACHE_HARNESS_H_
#define RECCACHE_HARNESS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "reccache/analysis.h"
#include "reccache/model.h"

namespace reccache {

/// Exact CSV header of the per-slot output.
inline constexpr std::string_view kCsvHeader =
    "policy,run,t,inst_regret,cum_regret,hit_rate,wbar_est";

/// Raised when a config fails validation.
class InvalidConfig : public std::runtime_error {
 public:
  explicit InvalidConfig(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Series for one (policy, run) pair; every series has length T.
struct RunResult {
  std::string policy;
  std::size_t run = 0;
  RegretSeries regret;
  std::vector<double> hit_rate;  // cumulative
  std::vector<double> wbar;      // empty unless the policy estimates it
  double true_wbar = 0.0;
  double seconds = 0.0;
  std::optional<BoundResult> bound;  // known-acceptance UCB only

  // Filled only when RunOptions::keep_log is set.
  std::vector<Decision> decisions;
  std::vector<ObservedBatch> observations;
};

struct PolicySummary {
  std::string id;
  double final_regret_mean = 0.0;
  std::optional<double> final_regret_se;
  double final_hit_rate = 0.0;
  /// Mean acceptance of the instances, averaged over runs.
  double true_wbar = 0.0;
  std::optional<double> theorem_bound;
  std::optional<double> wbar_error;
};

struct ExperimentSummary {
  std::string config_digest;
  std::size_t horizon = 0;
  std::size_t runs = 0;
  std::vector<PolicySummary> policies;
  std::vector<std::string> warnings;

  const PolicySummary* Find(std::string_view id) const;
};

struct ExperimentOutput {
  ExperimentSummary summary;
  /// Canonical order: roster order of policies, then run index.
  std::vector<RunResult> results;
};

struct RunOptions {
  std::size_t threads = 1;
  bool keep_log = false;
  /// When set, per-slot request traces are written here, one file per
  /// (policy, run).
  std::optional<std::filesystem::path> trace_dir;
};

/// Runs every policy of the roster for every run in closed loop. Throws
/// InvalidConfig if validation fails.
ExperimentOutput RunExperiment(const ExperimentConfig& config,
                               const RunOptions& options = {});

/// One (policy, run) pair of an experiment.
RunResult RunSingle(const ExperimentConfig& config, std::string_view policy,
                    std::size_t run, bool keep_log = false,
                    std::ostream* trace = nullptr);

/// The instance faced by every policy in run `run`.
ProblemInstance InstanceForRun(const ExperimentConfig& config, std::size_t run);

ExperimentSummary SummarizeResults(const ExperimentConfig& config,
                                   const std::vector<RunResult>& results);

void WriteCsv(std::ostream& out, const std::vector<RunResult>& results);

nlohmann::json SummaryToJson(const ExperimentSummary& summary);

struct PresetVariant {
  std::string label;  // empty for single-configuration presets
  ExperimentConfig config;
};

/// Known preset names.
inline constexpr std::string_view kPresetNames[] = {
    "fig_a", "fig_b", "fig_c", "fig_d", "fig_e", "fig_f"};

/// Resolved configurations reproducing one experiment. Throws
/// std::invalid_argument for an unknown name.
std::vector<PresetVariant> Preset(std::string_view name);

}  // namespace reccache

#endif  // RECCACHE_HARNESS_H_
