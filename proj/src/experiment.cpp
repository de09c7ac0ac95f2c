#include "nsmvc/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace nsmvc {

const char* to_string(Method method) {
    switch (method) {
        case Method::nsmvc: return "nsmvc";
        case Method::km_view: return "km_view";
        case Method::km_all: return "km_all";
    }
    return "nsmvc";
}

Method method_from_string(const std::string& token) {
    if (token == "nsmvc") return Method::nsmvc;
    if (token == "km_view") return Method::km_view;
    if (token == "km_all") return Method::km_all;
    throw std::invalid_argument("unknown method '" + token + "' (expected nsmvc|km_view|km_all)");
}

namespace {

std::string fmt(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& what) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) { known = true; break; }
        if (!known) throw std::invalid_argument(what + ": unknown key '" + item.key() + "'");
    }
}

// Runs work(0..count-1) on up to hardware_concurrency worker threads.
// Results must be slotted by index by the caller; the first exception wins.
void parallel_for(int count, const std::function<void(int)>& work) {
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers = std::min<unsigned>(std::max(1u, hw), static_cast<unsigned>(count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<TrialResult> run_trial(const MultiViewDataset& ds, const std::vector<int>& labels,
                                   const ExperimentConfig& config, int k, int trial) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(trial);
    std::vector<TrialResult> rows;

    if (config.method == Method::nsmvc) {
        SolverConfig solver_config;
        solver_config.k = k;
        solver_config.schedule = SplSchedule::make(config.alpha, config.total_rounds);
        solver_config.inner_max_iters = config.inner_max_iters;
        solver_config.inner_rel_tol = config.inner_rel_tol;
        solver_config.seed = seed;
        solver_config.init = config.init;
        auto result = fit(ds, solver_config);

        TrialResult row;
        row.trial = trial;
        row.seed = seed;
        row.scope = "all";
        row.acc = accuracy(result.model.assignments, labels);
        row.purity = purity(result.model.assignments, labels);
        row.nmi = nmi(result.model.assignments, labels);
        const auto& last = result.trace.rounds.back();
        row.final_lambdas = last.lambdas;
        row.final_etas = last.etas;
        row.final_selected = last.selected;
        if (config.trace) row.trace = std::move(result.trace);
        rows.push_back(std::move(row));
        return rows;
    }

    KMeansConfig km_config;
    km_config.k = k;
    km_config.max_iters = config.inner_max_iters;
    km_config.rel_tol = config.inner_rel_tol;
    km_config.seed = seed;
    km_config.init = config.init;

    if (config.method == Method::km_all) {
        auto result = kmeans_concat(ds, km_config);
        TrialResult row;
        row.trial = trial;
        row.seed = seed;
        row.scope = "all";
        row.acc = accuracy(result.assignments, labels);
        row.purity = purity(result.assignments, labels);
        row.nmi = nmi(result.assignments, labels);
        rows.push_back(std::move(row));
    } else {
        auto results = kmeans_per_view(ds, km_config);
        for (std::size_t v = 0; v < results.size(); ++v) {
            TrialResult row;
            row.trial = trial;
            row.seed = seed;
            row.scope = ds.views[v].name;
            row.acc = accuracy(results[v].assignments, labels);
            row.purity = purity(results[v].assignments, labels);
            row.nmi = nmi(results[v].assignments, labels);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

SynthSpec synth_spec_from_json(const json& j) {
    require_keys(j, {"name", "n", "k", "dims", "separation", "std", "corruptions", "seed"},
                 "synth spec");
    SynthSpec spec;
    if (j.contains("name")) spec.name = j["name"].get<std::string>();
    if (!j.contains("n") || !j.contains("k") || !j.contains("dims"))
        throw std::invalid_argument("synth spec: fields 'n', 'k' and 'dims' are required");
    spec.n = j["n"].get<std::size_t>();
    spec.k = j["k"].get<int>();
    spec.dims = j["dims"].get<std::vector<std::size_t>>();
    if (j.contains("separation")) spec.separation = j["separation"].get<double>();
    if (j.contains("std")) spec.within_std = j["std"].get<double>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("corruptions")) {
        for (const auto& c : j["corruptions"]) {
            require_keys(c, {"view", "mode", "strength"}, "synth corruption");
            Corruption corruption;
            corruption.view = c.at("view").get<std::size_t>();
            corruption.mode = corrupt_mode_from_string(c.at("mode").get<std::string>());
            corruption.strength = c.at("strength").get<double>();
            spec.corruptions.push_back(corruption);
        }
    }
    return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synth spec '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("synth spec '" + path + "': " + e.what());
    }
    return synth_spec_from_json(j);
}

json synth_spec_to_json(const SynthSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["n"] = spec.n;
    j["k"] = spec.k;
    j["dims"] = spec.dims;
    j["separation"] = spec.separation;
    j["std"] = spec.within_std;
    j["seed"] = spec.seed;
    auto& corruptions = j["corruptions"] = json::array();
    for (const auto& c : spec.corruptions)
        corruptions.push_back(
            {{"view", c.view}, {"mode", to_string(c.mode)}, {"strength", c.strength}});
    return j;
}

ExperimentConfig experiment_config_from_json(const json& j, const std::string& base_dir) {
    require_keys(j,
                 {"dataset", "method", "k", "alpha", "T", "inner_max_iters", "inner_rel_tol",
                  "init", "trials", "seed", "out", "trace"},
                 "experiment config");
    ExperimentConfig config;
    if (!j.contains("dataset"))
        throw std::invalid_argument("experiment config: missing 'dataset'");
    const auto& dataset = j["dataset"];
    if (dataset.is_string()) {
        fs::path p(dataset.get<std::string>());
        config.manifest_path =
            (p.is_absolute() || base_dir.empty()) ? p.string() : (fs::path(base_dir) / p).string();
    } else if (dataset.is_object()) {
        config.synth = synth_spec_from_json(dataset);
    } else {
        throw std::invalid_argument(
            "experiment config: 'dataset' must be a manifest path or a synth spec object");
    }
    if (j.contains("method")) config.method = method_from_string(j["method"].get<std::string>());
    if (j.contains("k")) config.k = j["k"].get<int>();
    if (j.contains("alpha")) config.alpha = j["alpha"].get<double>();
    if (j.contains("T")) config.total_rounds = j["T"].get<int>();
    if (j.contains("inner_max_iters")) config.inner_max_iters = j["inner_max_iters"].get<int>();
    if (j.contains("inner_rel_tol")) config.inner_rel_tol = j["inner_rel_tol"].get<double>();
    if (j.contains("init")) config.init = init_mode_from_string(j["init"].get<std::string>());
    if (j.contains("trials")) config.trials = j["trials"].get<int>();
    if (j.contains("seed")) config.base_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) config.out_dir = j["out"].get<std::string>();
    if (j.contains("trace")) config.trace = j["trace"].get<bool>();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config '" + path + "': " + e.what());
    }
    return experiment_config_from_json(j, fs::path(path).parent_path().string());
}

json experiment_config_to_json(const ExperimentConfig& config) {
    json j;
    if (config.synth)
        j["dataset"] = synth_spec_to_json(*config.synth);
    else
        j["dataset"] = config.manifest_path;
    j["method"] = to_string(config.method);
    j["k"] = config.k;
    j["alpha"] = config.alpha;
    j["T"] = config.total_rounds;
    j["inner_max_iters"] = config.inner_max_iters;
    j["inner_rel_tol"] = config.inner_rel_tol;
    j["init"] = to_string(config.init);
    j["trials"] = config.trials;
    j["seed"] = config.base_seed;
    j["out"] = config.out_dir;
    j["trace"] = config.trace;
    return j;
}

MultiViewDataset load_experiment_dataset(const ExperimentConfig& config) {
    if (config.synth) return generate(*config.synth).dataset;
    if (config.manifest_path.empty())
        throw std::invalid_argument("experiment config names no dataset");
    return load_dataset(load_manifest(config.manifest_path));
}

ResultReport run_experiment(const ExperimentConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
    if (config.trace && config.method != Method::nsmvc)
        throw std::invalid_argument("run_experiment: --trace requires method nsmvc");

    const MultiViewDataset ds = load_experiment_dataset(config);
    if (!ds.labels) {
        const std::string source = config.synth ? ("synth spec '" + config.synth->name + "'")
                                                : ("manifest '" + config.manifest_path + "'");
        throw std::invalid_argument("metrics requested but " + source + " provides no labels");
    }
    const std::vector<int>& labels = *ds.labels;
    const int k_true = ds.num_classes();
    const int k = config.k > 0 ? config.k : k_true;
    if (k < 1) throw std::invalid_argument("run_experiment: cluster count k is unset");

    ResultReport report;
    report.config_echo = experiment_config_to_json(config);
    report.dataset_name = ds.name;
    report.n = ds.n;
    report.num_views = static_cast<int>(ds.views.size());
    report.k = k;
    report.k_true = k_true;
    report.timestamp = utc_timestamp();

    std::vector<std::vector<TrialResult>> per_trial(config.trials);
    parallel_for(config.trials,
                 [&](int t) { per_trial[t] = run_trial(ds, labels, config, k, t); });
    for (auto& rows : per_trial)
        for (auto& row : rows) report.trials.push_back(std::move(row));

    // Summaries per scope, in first-appearance order.
    std::vector<std::string> scopes;
    for (const auto& row : report.trials)
        if (std::find(scopes.begin(), scopes.end(), row.scope) == scopes.end())
            scopes.push_back(row.scope);
    for (const auto& scope : scopes) {
        std::vector<double> accs, purities, nmis;
        for (const auto& row : report.trials) {
            if (row.scope != scope) continue;
            accs.push_back(row.acc);
            purities.push_back(row.purity);
            nmis.push_back(row.nmi);
        }
        MetricSummary summary{summarize_trials(accs), summarize_trials(purities),
                              summarize_trials(nmis)};
        report.summaries.emplace_back(scope, summary);
    }

    if (!config.out_dir.empty()) {
        write_report(report, config.out_dir);
        if (config.trace) emit_trace(report, config.out_dir);
    }
    return report;
}

void write_report(const ResultReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const bool has_pace = !report.trials.empty() && !report.trials.front().final_lambdas.empty();
    const std::size_t m = has_pace ? report.trials.front().final_lambdas.size() : 0;

    json j;
    j["config"] = report.config_echo;
    j["tool_version"] = kToolVersion;
    j["timestamp"] = report.timestamp;
    j["nmi_normalization"] = "sqrt";
    j["dataset"] = {{"name", report.dataset_name},
                    {"n", report.n},
                    {"views", report.num_views},
                    {"k", report.k},
                    {"k_true", report.k_true}};
    auto& trials = j["trials"] = json::array();
    for (const auto& row : report.trials) {
        json r;
        r["trial"] = row.trial;
        r["seed"] = row.seed;
        r["scope"] = row.scope;
        r["acc"] = row.acc;
        r["purity"] = row.purity;
        r["nmi"] = row.nmi;
        if (!row.final_lambdas.empty()) {
            r["lambda"] = row.final_lambdas;
            r["eta"] = row.final_etas;
            r["selected"] = row.final_selected;
        }
        trials.push_back(std::move(r));
    }
    auto& summaries = j["summaries"] = json::array();
    for (const auto& [scope, summary] : report.summaries) {
        json s;
        s["scope"] = scope;
        s["trials"] = summary.acc.trials;
        s["acc"] = {{"mean", summary.acc.mean}, {"std", summary.acc.std_dev}};
        s["purity"] = {{"mean", summary.purity.mean}, {"std", summary.purity.std_dev}};
        s["nmi"] = {{"mean", summary.nmi.mean}, {"std", summary.nmi.std_dev}};
        summaries.push_back(std::move(s));
    }
    std::ofstream json_out(fs::path(out_dir) / "report.json");
    if (!json_out) throw std::runtime_error("cannot write report.json under '" + out_dir + "'");
    json_out << j.dump(2) << '\n';

    std::ofstream csv(fs::path(out_dir) / "trials.csv");
    if (!csv) throw std::runtime_error("cannot write trials.csv under '" + out_dir + "'");
    csv << "trial,seed,scope,acc,purity,nmi";
    for (std::size_t v = 0; v < m; ++v) csv << ",lambda_" << v;
    for (std::size_t v = 0; v < m; ++v) csv << ",eta_" << v;
    for (std::size_t v = 0; v < m; ++v) csv << ",selected_" << v;
    csv << '\n';
    for (const auto& row : report.trials) {
        csv << row.trial << ',' << row.seed << ',' << row.scope << ',' << fmt(row.acc) << ','
            << fmt(row.purity) << ',' << fmt(row.nmi);
        for (std::size_t v = 0; v < m; ++v) csv << ',' << fmt(row.final_lambdas[v]);
        for (std::size_t v = 0; v < m; ++v) csv << ',' << fmt(row.final_etas[v]);
        for (std::size_t v = 0; v < m; ++v) csv << ',' << row.final_selected[v];
        csv << '\n';
    }
}

void emit_trace(const ResultReport& report, const std::string& out_dir) {
    bool any = false;
    fs::create_directories(out_dir);
    for (const auto& row : report.trials) {
        if (!row.trace) continue;
        any = true;
        const auto path = fs::path(out_dir) / ("trace_" + std::to_string(row.trial) + ".csv");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        const std::size_t m = row.trace->rounds.empty() ? 0 : row.trace->rounds[0].lambdas.size();
        out << "outer_round,inner_iter,objective";
        for (std::size_t v = 0; v < m; ++v) out << ",lambda_" << v;
        for (std::size_t v = 0; v < m; ++v) out << ",eta_" << v;
        for (std::size_t v = 0; v < m; ++v) out << ",selected_" << v;
        out << '\n';
        for (std::size_t r = 0; r < row.trace->rounds.size(); ++r) {
            const auto& round = row.trace->rounds[r];
            auto emit_row = [&](std::size_t iter, double objective) {
                out << (r + 1) << ',' << iter << ',' << fmt(objective);
                for (double l : round.lambdas) out << ',' << fmt(l);
                for (double e : round.etas) out << ',' << fmt(e);
                for (int s : round.selected) out << ',' << s;
                out << '\n';
            };
            emit_row(0, round.initial_objective);
            for (std::size_t s = 0; s < round.inner.size(); ++s)
                emit_row(s + 1, round.inner[s].after_assignments);
        }
    }
    if (!any) throw std::runtime_error("emit_trace: the report carries no traces (run with trace)");
}

SweepReport sweep(const ExperimentConfig& base, std::span<const double> alphas,
                  std::span<const int> total_rounds) {
    if (alphas.empty() || total_rounds.empty())
        throw std::invalid_argument("sweep: both grids must be non-empty");
    if (base.method != Method::nsmvc)
        throw std::invalid_argument("sweep: pace grids only apply to method nsmvc");
    for (double a : alphas)
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("sweep: alpha " + fmt(a) + " outside [0,1]");
    for (int t : total_rounds)
        if (t < 1) throw std::invalid_argument("sweep: T must be >= 1");

    SweepReport report;
    report.config_echo = experiment_config_to_json(base);
    report.alphas.assign(alphas.begin(), alphas.end());
    report.total_rounds.assign(total_rounds.begin(), total_rounds.end());

    for (double alpha : alphas) {
        for (int rounds : total_rounds) {
            ExperimentConfig cell_config = base;
            cell_config.alpha = alpha;
            cell_config.total_rounds = rounds;
            if (!base.out_dir.empty()) {
                char cell_name[64];
                std::snprintf(cell_name, sizeof cell_name, "cell_a%g_T%d", alpha, rounds);
                cell_config.out_dir = (fs::path(base.out_dir) / cell_name).string();
            }
            SweepCell cell;
            cell.alpha = alpha;
            cell.total_rounds = rounds;
            cell.report = run_experiment(cell_config);
            report.cells.push_back(std::move(cell));
        }
    }
    if (!base.out_dir.empty()) write_sweep(report, base.out_dir);
    return report;
}

void write_sweep(const SweepReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "sweep.csv");
    if (!csv) throw std::runtime_error("cannot write sweep.csv under '" + out_dir + "'");
    csv << "alpha,T,acc_mean,acc_std,purity_mean,purity_std,nmi_mean,nmi_std\n";
    json cells = json::array();
    for (const auto& cell : report.cells) {
        const auto& summary = cell.report.summaries.front().second;
        csv << fmt(cell.alpha) << ',' << cell.total_rounds << ',' << fmt(summary.acc.mean) << ','
            << fmt(summary.acc.std_dev) << ',' << fmt(summary.purity.mean) << ','
            << fmt(summary.purity.std_dev) << ',' << fmt(summary.nmi.mean) << ','
            << fmt(summary.nmi.std_dev) << '\n';
        cells.push_back({{"alpha", cell.alpha},
                         {"T", cell.total_rounds},
                         {"acc", {{"mean", summary.acc.mean}, {"std", summary.acc.std_dev}}},
                         {"purity",
                          {{"mean", summary.purity.mean}, {"std", summary.purity.std_dev}}},
                         {"nmi", {{"mean", summary.nmi.mean}, {"std", summary.nmi.std_dev}}}});
    }
    json j;
    j["config"] = report.config_echo;
    j["tool_version"] = kToolVersion;
    j["alpha_grid"] = report.alphas;
    j["T_grid"] = report.total_rounds;
    j["cells"] = std::move(cells);
    std::ofstream json_out(fs::path(out_dir) / "sweep.json");
    if (!json_out) throw std::runtime_error("cannot write sweep.json under '" + out_dir + "'");
    json_out << j.dump(2) << '\n';
}

}  // namespace nsmvc
