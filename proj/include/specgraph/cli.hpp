#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specgraph/admm.hpp"
#include "specgraph/bench.hpp"
#include "specgraph/io.hpp"
#include "specgraph/penalty.hpp"
#include "specgraph/select.hpp"
#include "specgraph/spectral.hpp"

#ifndef SPECGRAPH_VERSION
#define SPECGRAPH_VERSION "0.0.0"
#endif

// Command implementations behind the `specgraph` tool. Each command takes a plain
// config struct, writes its artifacts under an output directory and returns the
// in-memory results.
namespace specgraph::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_data:
    case ErrorCode::ingest_error:
    case ErrorCode::shape_error: return 3;
    case ErrorCode::not_positive_definite:
    case ErrorCode::sweep_exhausted:
    case ErrorCode::search_failed:
    case ErrorCode::generation_failed: return 4;
    default: return 2;
    }
}

inline json to_json(const SolverOptions& o)
{
    return json{{"rho0", o.rho0},         {"adapt_rho", o.adapt_rho},   {"mu", o.mu},
                {"tau_incr", o.tau_incr}, {"tau_decr", o.tau_decr},     {"eps_abs", o.eps_abs},
                {"eps_rel", o.eps_rel},   {"max_inner", o.max_inner},   {"outer_iters", o.outer_iters},
                {"outer_tol", o.outer_tol}};
}

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json provenance(const json& config)
{
    return json{{"config_hash", io::hex64(io::fnv1a(config.dump()))},
                {"version", SPECGRAPH_VERSION},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"config", config},
                {"generated_at", utc_timestamp()}};
}

inline void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ingest_error, "cannot write '" + path.string() + "'");
    out << text;
}

// --- ingestion -----------------------------------------------------------------------

struct IngestOptions {
    fs::path input;
    bool center = false;
    bool log_returns = false;
    /// Keep only the first samples (after the log-return transform).
    std::optional<std::size_t> max_samples;
};

struct PreparedData {
    std::vector<std::string> labels;
    TimeSeriesMatrix series;
    std::vector<std::string> warnings;
};

inline PreparedData prepare_data(const IngestOptions& opts)
{
    io::LabeledSeries raw = io::read_series_csv(opts.input);
    RMatrix values = opts.log_returns ? io::log_returns(raw.values) : raw.values;
    PreparedData out;
    out.labels = std::move(raw.labels);
    if (opts.max_samples && static_cast<Eigen::Index>(*opts.max_samples) < values.cols())
        values.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(*opts.max_samples));
    if (values.cols() < 2) throw Error(ErrorCode::ingest_error, "need at least two samples");
    if (values.cols() % 2) {
        out.warnings.push_back("odd sample count " + std::to_string(values.cols()) + ", dropping the last sample");
        values.conservativeResize(Eigen::NoChange, values.cols() - 1);
    }
    if (values.rows() > values.cols())
        out.warnings.push_back("more variables (" + std::to_string(values.rows()) + ") than samples (" +
                               std::to_string(values.cols()) + ")");
    try {
        out.series = TimeSeriesMatrix(std::move(values));
    } catch (const Error& e) {
        throw Error(ErrorCode::ingest_error, e.what());
    }
    if (opts.center) out.series = out.series.centered();
    return out;
}

/// Window plan: with K unset, M windows (default 4) of the largest odd size that fits.
inline FrequencyPlan resolve_plan(std::size_t n, std::optional<std::size_t> window, std::optional<std::size_t> count)
{
    if (!window) {
        const std::size_t m = count.value_or(4);
        return build_frequency_plan(n, fitted_window(n, m), m);
    }
    return build_frequency_plan(n, *window, count);
}

// --- estimate / select ---------------------------------------------------------------

enum class EstimateMethod { sglsp, sgl, iid };

inline EstimateMethod parse_estimate_method(const std::string& name)
{
    if (name == "sglsp") return EstimateMethod::sglsp;
    if (name == "sgl") return EstimateMethod::sgl;
    if (name == "iid") return EstimateMethod::iid;
    throw Error(ErrorCode::usage_error, "unknown method '" + name + "' (expected sglsp, sgl or iid)");
}

struct EstimateConfig {
    IngestOptions ingest;
    fs::path output_dir;
    std::optional<std::size_t> window;
    std::optional<std::size_t> count;
    std::string method = "sglsp";
    std::optional<double> lambda;
    double alpha = 0.1;
    bool bic = false;
    double epsilon = 1e-4;
    std::size_t lambda_count = 10;
    std::vector<double> alpha_values = default_alpha_values();
    SolverOptions solver{};
};

inline json to_json(const EstimateConfig& c)
{
    return json{{"input", c.ingest.input.string()},
                {"center", c.ingest.center},
                {"log_returns", c.ingest.log_returns},
                {"max_samples", c.ingest.max_samples ? json(*c.ingest.max_samples) : json(nullptr)},
                {"window", c.window ? json(*c.window) : json(nullptr)},
                {"count", c.count ? json(*c.count) : json(nullptr)},
                {"method", c.method},
                {"lambda", c.lambda ? json(*c.lambda) : json(nullptr)},
                {"alpha", c.alpha},
                {"bic", c.bic},
                {"epsilon", c.epsilon},
                {"lambda_count", c.lambda_count},
                {"alpha_values", c.alpha_values},
                {"solver", to_json(c.solver)}};
}

struct EstimateOutput {
    std::vector<std::string> labels;
    SpectralStats stats;
    PenaltyConfig chosen;
    Estimate estimate;
    EdgeGraph graph;
    std::optional<LambdaRange> range;
    std::vector<BicRecord> records;
    std::vector<std::string> warnings;
};

namespace detail {

struct Problem {
    PreparedData data;
    SpectralStats stats;
    PenaltyKind kind = PenaltyKind::sglsp;
    bool iid = false;
};

inline Problem load_problem(const EstimateConfig& cfg)
{
    Problem pr;
    const EstimateMethod method = parse_estimate_method(cfg.method);
    pr.data = prepare_data(cfg.ingest);
    pr.iid = method == EstimateMethod::iid;
    if (pr.iid) {
        pr.stats = sample_covariance_stats(pr.data.series);
        pr.kind = PenaltyKind::sgl;
    } else {
        const FrequencyPlan plan = resolve_plan(pr.data.series.n(), cfg.window, cfg.count);
        pr.stats = smoothed_psd(dft(pr.data.series), plan);
        pr.kind = method == EstimateMethod::sgl ? PenaltyKind::sgl : PenaltyKind::sglsp;
    }
    return pr;
}

inline SearchResult run_search(const Problem& pr, const EstimateConfig& cfg, LambdaRange& range)
{
    const PenaltyConfig tmpl{1.0, 0.1, cfg.epsilon, pr.kind};
    RangeSearchOptions range_opts;
    if (pr.iid) range_opts.alpha0 = 1.0;
    range = lambda_range(pr.stats, tmpl, cfg.solver, range_opts);
    SearchGrid grid = default_grid(range, cfg.lambda_count);
    grid.alpha0 = range_opts.alpha0;
    grid.alpha_values = pr.iid ? std::vector<double>{1.0} : cfg.alpha_values;
    return search(pr.stats, grid, pr.kind, cfg.solver, SearchOptions{true, cfg.epsilon});
}

inline json records_json(const std::vector<BicRecord>& records)
{
    json out = json::array();
    for (const auto& r : records)
        out.push_back({{"stage", r.stage}, {"lambda", r.lambda}, {"alpha", r.alpha}, {"bic", r.bic},
                       {"edge_count", r.edge_count}, {"converged", r.converged}});
    return out;
}

} // namespace detail

/// Graph artifact: node labels, weighted edge list, adjacency and provenance.
inline json graph_json(const EstimateOutput& out, const json& config)
{
    json edges = json::array();
    for (const auto& e : out.graph.edges)
        edges.push_back({{"i", e.i + 1}, {"j", e.j + 1}, {"source", out.labels[e.i]}, {"target", out.labels[e.j]},
                         {"weight", e.weight}});
    json adjacency = json::array();
    const RMatrix adj = out.graph.adjacency();
    for (Eigen::Index r = 0; r < adj.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < adj.cols(); ++c) row.push_back(adj(r, c));
        adjacency.push_back(row);
    }
    return json{{"nodes", out.labels},
                {"edge_count", out.graph.size()},
                {"edges", edges},
                {"adjacency", adjacency},
                {"penalty", std::string(to_string(out.chosen.kind))},
                {"lambda", out.chosen.lambda},
                {"alpha", out.chosen.alpha},
                {"epsilon", out.chosen.epsilon},
                {"window", out.stats.window},
                {"frequencies", out.stats.frequencies},
                {"converged", out.estimate.report.converged},
                {"provenance", provenance(config)}};
}

inline EstimateOutput cmd_estimate(const EstimateConfig& cfg)
{
    if (!cfg.bic && !cfg.lambda)
        throw Error(ErrorCode::usage_error, "either a fixed lambda or BIC selection is required");
    detail::Problem pr = detail::load_problem(cfg);

    EstimateOutput out;
    out.labels = pr.data.labels;
    out.warnings = pr.data.warnings;
    if (cfg.bic) {
        LambdaRange range;
        SearchResult sr = detail::run_search(pr, cfg, range);
        out.range = range;
        out.records = std::move(sr.records);
        out.chosen = sr.best;
        out.estimate = std::move(sr.estimate);
    } else {
        out.chosen = PenaltyConfig{*cfg.lambda, pr.iid ? 1.0 : cfg.alpha, cfg.epsilon, pr.kind};
        out.estimate = solve(pr.stats, out.chosen, cfg.solver);
    }
    out.graph = select_edges(out.estimate.w);
    out.stats = std::move(pr.stats);

    if (!cfg.output_dir.empty()) {
        const json config = to_json(cfg);
        write_text(cfg.output_dir / "graph.json", graph_json(out, config).dump(2) + "\n");
        io::write_matrix_csv(cfg.output_dir / "adjacency.csv", out.graph.adjacency(), out.labels);
        io::write_edges_csv(cfg.output_dir / "edges.csv", out.graph);
        for (std::size_t k = 0; k < out.estimate.phi.count(); ++k)
            io::write_complex_matrix_csv(cfg.output_dir / ("phi_k" + std::to_string(k + 1) + ".csv"),
                                         out.estimate.phi.matrices[k]);
        if (cfg.bic) {
            std::ofstream table(cfg.output_dir / "bic_table.csv");
            io::write_bic_table(table, out.records);
        }
    }
    return out;
}

struct SelectOutput {
    LambdaRange range;
    SearchResult result;
    std::vector<std::string> warnings;
};

inline SelectOutput cmd_select(const EstimateConfig& cfg)
{
    detail::Problem pr = detail::load_problem(cfg);
    SelectOutput out;
    out.warnings = pr.data.warnings;
    out.result = detail::run_search(pr, cfg, out.range);
    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        std::ofstream table(cfg.output_dir / "bic_table.csv");
        io::write_bic_table(table, out.result.records);
        json sel{{"penalty", std::string(to_string(out.result.best.kind))},
                 {"lambda", out.result.best.lambda},
                 {"alpha", out.result.best.alpha},
                 {"epsilon", out.result.best.epsilon},
                 {"lambda_low", out.range.low},
                 {"lambda_high", out.range.high},
                 {"empty_graph_lambda", out.range.empty_graph_lambda},
                 {"hit_sweep_floor", out.range.hit_sweep_floor},
                 {"edge_count", select_edges(out.result.estimate.w).size()},
                 {"records", detail::records_json(out.result.records)},
                 {"provenance", provenance(to_json(cfg))}};
        write_text(cfg.output_dir / "selection.json", sel.dump(2) + "\n");
    }
    return out;
}

// --- simulate ------------------------------------------------------------------------

struct SimulateConfig {
    VarGeneratorConfig generator{};
    std::size_t n = 1024;
    std::size_t burn_in = 100;
    std::uint64_t seed = 1;
    std::optional<std::size_t> window;
    std::optional<std::size_t> count;
    fs::path output_dir;
};

/// `full`: 128 nodes in 16 clusters of 8.  `desk`: 16 nodes in 2 clusters.
inline VarGeneratorConfig generator_preset(const std::string& name)
{
    if (name == "full") return VarGeneratorConfig{128, 16, 3, 0.1, 0.8, 0.95, 1000};
    if (name == "desk") return VarGeneratorConfig{16, 2, 3, 0.1, 0.8, 0.95, 1000};
    throw Error(ErrorCode::usage_error, "unknown preset '" + name + "' (expected full or desk)");
}

inline json to_json(const SimulateConfig& c)
{
    const auto& g = c.generator;
    return json{{"p", g.p},
                {"clusters", g.clusters},
                {"order", g.order},
                {"density", g.density},
                {"coef_range", g.coef_range},
                {"stability_cap", g.stability_cap},
                {"n", c.n},
                {"burn_in", c.burn_in},
                {"seed", c.seed},
                {"window", c.window ? json(*c.window) : json(nullptr)},
                {"count", c.count ? json(*c.count) : json(nullptr)}};
}

struct SimulateOutput {
    VarModel model;
    TimeSeriesMatrix series;
    FrequencyPlan plan;
    GroundTruth truth;
};

inline SimulateOutput cmd_simulate(const SimulateConfig& cfg)
{
    SimulateOutput out;
    out.model = gen_var_clusters(cfg.generator, cfg.seed);
    out.series = simulate(out.model, cfg.n, cfg.burn_in, cfg.seed ^ 0x5bd1e995ULL);
    out.plan = resolve_plan(cfg.n, cfg.window, cfg.count);
    out.truth = true_ipsd(out.model, out.plan.centers);

    if (!cfg.output_dir.empty()) {
        io::write_series_csv(cfg.output_dir / "data.csv", io::default_labels(cfg.generator.p), out.series);
        io::write_edges_csv(cfg.output_dir / "truth_edges.csv", out.truth.edges);
        for (std::size_t k = 0; k < out.truth.ipsd.size(); ++k)
            io::write_complex_matrix_csv(cfg.output_dir / ("omega0_k" + std::to_string(k + 1) + ".csv"),
                                         out.truth.ipsd[k]);
        json info{{"p", cfg.generator.p},
                  {"n", cfg.n},
                  {"window", out.plan.window},
                  {"count", out.plan.count},
                  {"frequencies", out.plan.centers},
                  {"true_edges", out.truth.edges.size()},
                  {"edge_density", edge_density(out.truth.edges)},
                  {"spectral_radius", spectral_radius(out.model)},
                  {"provenance", provenance(to_json(cfg))}};
        write_text(cfg.output_dir / "truth.json", info.dump(2) + "\n");
    }
    return out;
}

// --- score ---------------------------------------------------------------------------

inline json metrics_json(const Metrics& m, std::size_t estimated, std::size_t truth)
{
    return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                {"estimated_edges", estimated}, {"true_edges", truth}};
}

inline Metrics cmd_score(const fs::path& estimated, const fs::path& truth, std::size_t p = 0,
                         const fs::path& output = {})
{
    EdgeGraph est = io::read_edges_csv(estimated, p);
    EdgeGraph tru = io::read_edges_csv(truth, p);
    est.p = tru.p = std::max(est.p, tru.p);
    const Metrics m = score(est, tru);
    if (!output.empty()) write_text(output, metrics_json(m, est.size(), tru.size()).dump(2) + "\n");
    return m;
}

// --- bench ---------------------------------------------------------------------------

struct BenchConfig {
    ExperimentConfig experiment{};
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    fs::path output;
};

/// `desk`: 16 nodes, n in {256, 1024}, 20 trials.  `full`: 128 nodes, n = 128 ... 2048, 100 trials.
inline BenchConfig bench_preset(const std::string& name)
{
    BenchConfig b;
    if (name == "desk") {
        b.experiment.generator = generator_preset("desk");
        b.experiment.samples = {four_window_setting(256), four_window_setting(1024)};
        b.experiment.methods = {Method::sglsp, Method::sgl};
        b.trials = 20;
    } else if (name == "full") {
        b.experiment.generator = generator_preset("full");
        b.experiment.samples = {four_window_setting(128), four_window_setting(256), four_window_setting(512), four_window_setting(1024),
                                four_window_setting(2048)};
        b.experiment.methods = {Method::sglsp, Method::sgl, Method::iid, Method::sglsp_bic};
        b.trials = 100;
    } else {
        throw Error(ErrorCode::usage_error, "unknown bench preset '" + name + "' (expected desk or full)");
    }
    return b;
}

inline std::vector<TrialRow> cmd_bench(const BenchConfig& cfg)
{
    std::vector<TrialRow> rows = run_trials(cfg.experiment, cfg.trials, cfg.seed);
    if (!cfg.output.empty()) {
        if (cfg.output.has_parent_path()) fs::create_directories(cfg.output.parent_path());
        std::ofstream table(cfg.output);
        if (!table) throw Error(ErrorCode::ingest_error, "cannot write '" + cfg.output.string() + "'");
        io::write_trial_table(table, rows);
        fs::path summary = cfg.output;
        summary.replace_extension(".summary.csv");
        std::ofstream sum(summary);
        io::write_summary_table(sum, summarize(rows));
    }
    return rows;
}

} // namespace specgraph::cli
