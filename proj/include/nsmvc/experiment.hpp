#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nsmvc/baselines.hpp"
#include "nsmvc/dataset.hpp"
#include "nsmvc/metrics.hpp"
#include "nsmvc/solver.hpp"
#include "nsmvc/synth.hpp"

namespace nsmvc {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Method { nsmvc, km_view, km_all };

const char* to_string(Method method);
Method method_from_string(const std::string& token);

struct ExperimentConfig {
    // Exactly one dataset source: a manifest path or an inline synth spec.
    std::string manifest_path;
    std::optional<SynthSpec> synth;

    Method method = Method::nsmvc;
    int k = 0;  // 0 = use the dataset's ground-truth class count
    double alpha = 0.5;
    int total_rounds = 6;
    int inner_max_iters = 100;
    double inner_rel_tol = 1e-6;
    InitMode init = InitMode::random_assignment;

    int trials = 30;
    std::uint64_t base_seed = 0;
    std::string out_dir;  // empty = compute only, write nothing
    bool trace = false;
};

// One row of the per-trial table. km_view produces one row per (trial, view);
// the other methods one row per trial with scope "all".
struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    std::string scope;
    double acc = 0.0;
    double purity = 0.0;
    double nmi = 0.0;
    std::vector<double> final_lambdas;  // nsmvc only, final round, per view
    std::vector<double> final_etas;
    std::vector<int> final_selected;
    std::optional<ConvergenceTrace> trace;
};

struct MetricSummary {
    TrialSummary acc;
    TrialSummary purity;
    TrialSummary nmi;
};

struct ResultReport {
    nlohmann::json config_echo;
    std::string dataset_name;
    std::size_t n = 0;
    int num_views = 0;
    int k = 0;
    int k_true = 0;
    std::vector<TrialResult> trials;
    std::vector<std::pair<std::string, MetricSummary>> summaries;  // keyed by scope
    std::string timestamp;
};

// Runs config.trials independent trials (trial t seeded base_seed + t),
// scores them against the ground-truth labels, and writes report.json,
// trials.csv and any traces under config.out_dir when it is set.
ResultReport run_experiment(const ExperimentConfig& config);

void write_report(const ResultReport& report, const std::string& out_dir);

// Writes trace_<trial>.csv per traced trial. Throws when no trial carries
// a trace (the run was made without --trace).
void emit_trace(const ResultReport& report, const std::string& out_dir);

struct SweepCell {
    double alpha = 0.0;
    int total_rounds = 0;
    ResultReport report;
};

struct SweepReport {
    nlohmann::json config_echo;
    std::vector<double> alphas;
    std::vector<int> total_rounds;
    std::vector<SweepCell> cells;  // row-major: alphas outer, T inner
};

// Full Cartesian product of the two grids; each cell is a complete
// run_experiment. Writes sweep.csv/sweep.json plus per-cell reports when
// the base config names an output directory.
SweepReport sweep(const ExperimentConfig& base, std::span<const double> alphas,
                  std::span<const int> total_rounds);

void write_sweep(const SweepReport& report, const std::string& out_dir);

// JSON <-> config plumbing. Unknown keys are rejected. Relative manifest
// paths resolve against base_dir (the config file's directory).
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
SynthSpec load_synth_spec(const std::string& path);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// Loads the configured dataset (manifest or synth) and resolves k.
MultiViewDataset load_experiment_dataset(const ExperimentConfig& config);

}  // namespace nsmvc
