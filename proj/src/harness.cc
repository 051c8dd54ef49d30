#include "reccache/harness.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "reccache/config.h"
#include "reccache/environment.h"
#include "reccache/policies.h"
#include "reccache/policy_ids.h"
#include "reccache/seeding.h"

namespace reccache {
namespace {

std::string JoinViolations(const ValidationReport& report) {
  std::string text = "invalid config";
  for (const auto& v : report.violations) text += "; " + v;
  return text;
}

void AppendNumber(std::string& line, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  line += buf;
}

}  // namespace

InvalidConfig::InvalidConfig(ValidationReport report)
    : std::runtime_error(JoinViolations(report)), report_(std::move(report)) {}

const PolicySummary* ExperimentSummary::Find(std::string_view id) const {
  for (const auto& p : policies) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

ProblemInstance InstanceForRun(const ExperimentConfig& config,
                               std::size_t run) {
  std::mt19937_64 rng(InstanceSeed(config.run.seed, run));
  return BuildInstance(config, rng);
}

RunResult RunSingle(const ExperimentConfig& config, std::string_view policy_id,
                    std::size_t run, bool keep_log, std::ostream* trace) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cat = config.catalog;
  const ProblemInstance instance = InstanceForRun(config, run);
  const OracleSolution oracle =
      SolveOracle(instance.preferences, instance.acceptance, cat.cache_capacity);

  const std::uint64_t seed = PolicyRunSeed(config.run.seed, policy_id, run);
  Environment env(instance, seed);
  auto policy =
      MakePolicy(policy_id, PolicyContext{cat, config.algo, instance.acceptance,
                                instance.induced},
                 seed);

  RunResult result;
  result.policy = std::string(policy_id);
  result.run = run;
  result.true_wbar = instance.acceptance.mean();
  result.regret.instantaneous.reserve(cat.horizon);
  result.regret.cumulative.reserve(cat.horizon);
  result.hit_rate.reserve(cat.horizon);

  double cumulative = 0.0;
  long hits = 0;
  for (std::size_t t = 1; t <= cat.horizon; ++t) {
    Decision decision = policy->Decide(t);
    RequireValidDecision(decision, cat, policy->recommends());
    const RequestBatch batch = env.Sample(decision, t);
    if (trace != nullptr) WriteTrace(*trace, batch);
    ObservedBatch observed = Observe(batch, decision.cache);
    policy->Ingest(observed, decision);

    const double r = InstantRegretHat(decision.cache, oracle);
    cumulative += r;
    hits += observed.total();
    result.regret.instantaneous.push_back(r);
    result.regret.cumulative.push_back(cumulative);
    result.hit_rate.push_back(static_cast<double>(hits) /
                              (static_cast<double>(cat.num_users) *
                               static_cast<double>(t)));
    if (auto w = policy->WbarEstimate()) result.wbar.push_back(*w);
    if (keep_log) {
      result.decisions.push_back(std::move(decision));
      result.observations.push_back(std::move(observed));
    }
  }

  if (policy_id == kUcbRec) {
    result.bound = TheoremBound(
        oracle, BoundParams{cat.num_users, config.algo.alpha, config.algo.eta,
                            result.true_wbar, cat.horizon});
  }
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

ExperimentOutput RunExperiment(const ExperimentConfig& config,
                               const RunOptions& options) {
  ValidationReport report = ValidateConfig(config);
  if (!report.ok()) throw InvalidConfig(std::move(report));

  struct Job {
    std::string policy;
    std::size_t run;
  };
  std::vector<Job> jobs;
  for (const auto& id : config.run.policies) {
    for (std::size_t r = 0; r < config.run.runs; ++r) jobs.push_back({id, r});
  }

  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        std::ofstream trace_file;
        std::ostream* trace = nullptr;
        if (options.trace_dir) {
          trace_file.open(*options.trace_dir /
                          ("trace_" + jobs[k].policy + "_" +
                           std::to_string(jobs[k].run) + ".csv"));
          trace_file << "t,content_id,count\n";
          trace = &trace_file;
        }
        results[k] = RunSingle(config, jobs[k].policy, jobs[k].run,
                               options.keep_log, trace);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
      }
    }
  };

  const std::size_t threads =
      std::max<std::size_t>(1, std::min(options.threads, jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentOutput output;
  output.summary = SummarizeResults(config, results);
  output.summary.warnings.insert(output.summary.warnings.begin(),
                                 report.warnings.begin(), report.warnings.end());
  output.results = std::move(results);
  return output;
}

ExperimentSummary SummarizeResults(const ExperimentConfig& config,
                                   const std::vector<RunResult>& results) {
  ExperimentSummary summary;
  summary.config_digest = ConfigDigest(config);
  summary.horizon = config.catalog.horizon;
  summary.runs = config.run.runs;
  for (const auto& id : config.run.policies) {
    std::vector<double> finals;
    double hit_total = 0.0;
    double true_wbar_total = 0.0;
    double wbar_error = 0.0;
    std::size_t wbar_count = 0;
    double bound_total = 0.0;
    std::size_t bound_count = 0;
    bool bound_failed = false;
    for (const auto& r : results) {
      if (r.policy != id) continue;
      finals.push_back(r.regret.cumulative.back());
      hit_total += r.hit_rate.back();
      true_wbar_total += r.true_wbar;
      if (!r.wbar.empty()) {
        wbar_error += std::abs(r.wbar.back() - r.true_wbar);
        ++wbar_count;
      }
      if (r.bound) {
        if (r.bound->ok()) {
          bound_total += *r.bound->value;
          ++bound_count;
        } else {
          bound_failed = true;
          summary.warnings.push_back("run " + std::to_string(r.run) +
                                     ": regret bound omitted (" +
                                     r.bound->error + ")");
        }
      }
    }
    if (finals.empty()) continue;
    PolicySummary p;
    p.id = id;
    const MeanStat stat = Summarize(finals);
    p.final_regret_mean = stat.mean;
    p.final_regret_se = stat.standard_error;
    p.final_hit_rate = hit_total / static_cast<double>(finals.size());
    p.true_wbar = true_wbar_total / static_cast<double>(finals.size());
    if (bound_count > 0 && !bound_failed) {
      p.theorem_bound = bound_total / static_cast<double>(bound_count);
    }
    if (wbar_count > 0) {
      p.wbar_error = wbar_error / static_cast<double>(wbar_count);
    }
    summary.policies.push_back(std::move(p));
  }
  return summary;
}

void WriteCsv(std::ostream& out, const std::vector<RunResult>& results) {
  out << kCsvHeader << '\n';
  std::string line;
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.regret.cumulative.size(); ++k) {
      line.clear();
      line += r.policy;
      line += ',';
      line += std::to_string(r.run);
      line += ',';
      line += std::to_string(k + 1);
      line += ',';
      AppendNumber(line, r.regret.instantaneous[k]);
      line += ',';
      AppendNumber(line, r.regret.cumulative[k]);
      line += ',';
      AppendNumber(line, r.hit_rate[k]);
      line += ',';
      if (!r.wbar.empty()) AppendNumber(line, r.wbar[k]);
      line += '\n';
      out << line;
    }
  }
}

nlohmann::json SummaryToJson(const ExperimentSummary& summary) {
  nlohmann::json doc;
  doc["config_digest"] = summary.config_digest;
  doc["T"] = summary.horizon;
  doc["runs"] = summary.runs;
  doc["policies"] = nlohmann::json::array();
  for (const auto& p : summary.policies) {
    nlohmann::json entry = {{"id", p.id},
                            {"final_regret_mean", p.final_regret_mean},
                            {"final_hit_rate", p.final_hit_rate},
                            {"true_wbar", p.true_wbar}};
    entry["final_regret_se"] =
        p.final_regret_se ? nlohmann::json(*p.final_regret_se) : nlohmann::json();
    if (p.theorem_bound) entry["theorem_bound"] = *p.theorem_bound;
    if (p.wbar_error) entry["wbar_error"] = *p.wbar_error;
    doc["policies"].push_back(std::move(entry));
  }
  doc["warnings"] = summary.warnings;
  return doc;
}

namespace {

// Shared setup of every experiment: N=50, C=20, U=20, eta=4, alpha=5.
ExperimentConfig BaseConfig() {
  ExperimentConfig c;
  c.catalog = {.num_contents = 50,
               .num_users = 20,
               .cache_capacity = 20,
               .recs_per_user = 5,
               .horizon = 10000};
  c.preferences.kind = PreferenceKind::kZipf;
  c.preferences.exponent = 2.0;
  c.preferences.permute = RankPermutation::kShared;
  c.acceptance.kind = AcceptanceKind::kConstant;
  c.acceptance.value = 0.95;
  c.induced.kind = InducedKind::kUniform;
  c.algo.alpha = 5.0;
  c.algo.eta = 4.0;
  c.algo.epsilon = 0.4;
  c.algo.estimator = EstimatorVariant::kRecommendationCorrected;
  c.algo.shared_recs = true;
  c.algo.baseline_recommends = true;
  c.algo.rec_rule = RecommendationRule::kTopIndex;
  c.run.runs = 30;
  c.run.seed = 20240917;
  return c;
}

ExperimentConfig WithInterval(ExperimentConfig c, double low, double high) {
  c.acceptance.kind = AcceptanceKind::kInterval;
  c.acceptance.low = low;
  c.acceptance.high = high;
  return c;
}

}  // namespace

std::vector<PresetVariant> Preset(std::string_view name) {
  const std::vector<std::string> baselines = {
      std::string(kUcbRec), std::string(kCombUcb), std::string(kGreedy),
      std::string(kEpsGreedy)};
  std::vector<PresetVariant> out;
  if (name == "fig_a") {
    auto c = BaseConfig();
    c.run.policies = baselines;
    out.push_back({"", c});
  } else if (name == "fig_b") {
    for (double w : {0.99, 0.8, 0.5}) {
      auto c = BaseConfig();
      c.acceptance.value = w;
      c.run.policies = {std::string(kUcbRec), std::string(kCombUcb)};
      char label[16];
      std::snprintf(label, sizeof(label), "w%g", w);
      out.push_back({label, c});
    }
  } else if (name == "fig_c") {
    for (std::size_t users : {2, 10, 30}) {
      auto c = BaseConfig();
      c.catalog.num_users = users;
      c.run.policies = {std::string(kUcbRec), std::string(kCombUcb)};
      out.push_back({"U" + std::to_string(users), c});
    }
  } else if (name == "fig_d") {
    auto uniform = WithInterval(BaseConfig(), 0.9, 0.99);
    uniform.run.policies = baselines;
    auto zipf = uniform;
    zipf.induced.kind = InducedKind::kZipf;
    zipf.induced.beta_interval = std::pair{1.0, 2.0};
    out.push_back({"uniform", uniform});
    out.push_back({"zipf", zipf});
  } else if (name == "fig_e") {
    auto c = WithInterval(BaseConfig(), 0.1, 0.9);
    c.run.policies = {std::string(kUcbUnknownW)};
    out.push_back({"", c});
  } else if (name == "fig_f") {
    auto c = WithInterval(BaseConfig(), 0.1, 0.9);
    c.run.policies = {std::string(kUcbUnknownW), std::string(kUcbRec),
                      std::string(kCombUcb)};
    out.push_back({"", c});
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return out;
}

}  // namespace reccache
