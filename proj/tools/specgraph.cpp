// specgraph: conditional independence graphs of multivariate time series.
//
//   specgraph simulate  --preset desk --n 1024 --out sim/
//   specgraph estimate  --input sim/data.csv --bic --out est/
//   specgraph select    --input sim/data.csv --out sel/
//   specgraph score     --estimated est/edges.csv --truth sim/truth_edges.csv
//   specgraph bench     --preset desk --out bench.csv
//
// Exit codes: 0 success, 2 usage, 3 ingest, 4 numerical failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specgraph/cli.hpp"

namespace sc = specgraph::cli;
using specgraph::Error;
using specgraph::ErrorCode;

namespace {

void add_solver_options(CLI::App* cmd, specgraph::SolverOptions& o)
{
    cmd->add_option("--rho0", o.rho0, "Initial ADMM penalty parameter")->capture_default_str();
    cmd->add_flag("!--fixed-rho", o.adapt_rho, "Disable residual-balancing rho updates");
    cmd->add_option("--eps-abs", o.eps_abs, "Absolute stopping tolerance")->capture_default_str();
    cmd->add_option("--eps-rel", o.eps_rel, "Relative stopping tolerance")->capture_default_str();
    cmd->add_option("--max-inner", o.max_inner, "ADMM iteration cap per pass")->capture_default_str();
    cmd->add_option("--outer-iters", o.outer_iters, "Log-sum reweighting passes")->capture_default_str();
    cmd->add_option("--outer-tol", o.outer_tol, "Relative change that ends reweighting early")
        ->capture_default_str();
}

struct EstimateArgs {
    sc::EstimateConfig cfg;
    std::string input;
    std::string out;
    std::size_t window = 0;
    std::size_t count = 0;
    std::size_t max_samples = 0;
    double lambda = -1.0;
};

void add_estimate_options(CLI::App* cmd, EstimateArgs& a, bool with_fixed_lambda)
{
    cmd->add_option("-i,--input", a.input, "CSV with a header row of names and one row per time sample")
        ->required();
    cmd->add_option("-o,--out", a.out, "Output directory");
    cmd->add_flag("--center", a.cfg.ingest.center, "Subtract each variable's sample mean");
    cmd->add_flag("--log-returns", a.cfg.ingest.log_returns, "Analyse ln(y(t) / y(t-1)) of price-like data");
    cmd->add_option("--max-samples", a.max_samples, "Keep only the first N samples");
    cmd->add_option("-K,--window", a.window, "Odd smoothing window size (default: fit M windows)");
    cmd->add_option("-M,--count", a.count, "Number of frequency windows (default 4 when K is unset)");
    cmd->add_option("--method", a.cfg.method, "sglsp | sgl | iid")->capture_default_str();
    cmd->add_option("--epsilon", a.cfg.epsilon, "Log-sum penalty offset")->capture_default_str();
    cmd->add_option("--lambda-count", a.cfg.lambda_count, "BIC lambda grid size")->capture_default_str();
    cmd->add_option("--alpha-grid", a.cfg.alpha_values, "BIC alpha grid")->delimiter(',');
    if (with_fixed_lambda) {
        cmd->add_option("--lambda", a.lambda, "Fixed penalty strength");
        cmd->add_option("--alpha", a.cfg.alpha, "Fixed lasso/group mix")->capture_default_str();
        cmd->add_flag("--bic", a.cfg.bic, "Select (lambda, alpha) by BIC");
    }
    add_solver_options(cmd, a.cfg.solver);
}

void finish_estimate_args(EstimateArgs& a)
{
    a.cfg.ingest.input = a.input;
    a.cfg.output_dir = a.out;
    if (a.window) a.cfg.window = a.window;
    if (a.count) a.cfg.count = a.count;
    if (a.max_samples) a.cfg.ingest.max_samples = a.max_samples;
    if (a.lambda >= 0.0) a.cfg.lambda = a.lambda;
}

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void save_config(const CLI::App& app, const std::string& dir)
{
    if (dir.empty()) return;
    sc::write_text(std::filesystem::path(dir) / "run_config.ini", app.config_to_str(false, false));
}

std::vector<specgraph::Method> parse_methods(const std::vector<std::string>& names)
{
    std::vector<specgraph::Method> out;
    for (const auto& n : names) out.push_back(specgraph::parse_method(n));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse inverse spectral density graphs for multivariate time series"};
    app.set_config("--config", "", "INI/TOML file with option values (flags override it)");
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw a clustered VAR model, simulate it and write the ground truth");
    sc::SimulateConfig sim_cfg;
    std::string sim_preset, sim_out;
    std::size_t sim_window = 0, sim_count = 0;
    std::optional<std::size_t> sim_p, sim_clusters;
    sim->add_option("--preset", sim_preset, "full (p=128, 16 clusters) | desk (p=16, 2 clusters)");
    sim->add_option("--p", sim_p, "Number of nodes");
    sim->add_option("--clusters", sim_clusters, "Number of equally sized clusters");
    sim->add_option("--order", sim_cfg.generator.order, "VAR order")->capture_default_str();
    sim->add_option("--density", sim_cfg.generator.density, "Nonzero fraction of coefficients")->capture_default_str();
    sim->add_option("--coef-range", sim_cfg.generator.coef_range, "Coefficients ~ U(-r, r)")->capture_default_str();
    sim->add_option("--stability-cap", sim_cfg.generator.stability_cap, "Companion spectral radius cap")
        ->capture_default_str();
    sim->add_option("--n", sim_cfg.n, "Samples kept after burn-in")->capture_default_str();
    sim->add_option("--burn-in", sim_cfg.burn_in, "Discarded leading samples")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "Random seed")->capture_default_str();
    sim->add_option("-K,--window", sim_window, "Window size for the truth frequencies");
    sim->add_option("-M,--count", sim_count, "Number of windows");
    sim->add_option("-o,--out", sim_out, "Output directory")->required();

    // estimate / select
    auto* est = app.add_subcommand("estimate", "Estimate the graph from a CSV of samples");
    EstimateArgs est_args;
    add_estimate_options(est, est_args, true);

    auto* sel = app.add_subcommand("select", "Two-stage BIC search over (lambda, alpha)");
    EstimateArgs sel_args;
    add_estimate_options(sel, sel_args, false);

    // score
    auto* scr = app.add_subcommand("score", "Precision, recall and F1 of an edge list against the truth");
    std::string scr_est, scr_truth, scr_out;
    std::size_t scr_p = 0;
    scr->add_option("--estimated", scr_est, "Estimated edge CSV (i,j[,weight], one-based)")->required();
    scr->add_option("--truth", scr_truth, "True edge CSV")->required();
    scr->add_option("--p", scr_p, "Node count (default: largest index seen)");
    scr->add_option("-o,--out", scr_out, "Write metrics JSON here instead of stdout");

    // bench
    auto* bch = app.add_subcommand("bench", "Monte Carlo comparison on synthetic clustered VAR data");
    std::string bch_preset = "desk", bch_out, bch_tuning = "oracle";
    std::vector<std::string> bch_methods;
    std::vector<std::size_t> bch_ns;
    std::optional<std::size_t> bch_trials;
    std::uint64_t bch_seed = 1;
    bch->add_option("--preset", bch_preset, "desk | full")->capture_default_str();
    bch->add_option("--methods", bch_methods, "Subset of sglsp,sgl,iid,sglsp-bic")->delimiter(',');
    bch->add_option("--n", bch_ns, "Sample sizes (M = 4, K = largest odd fit)")->delimiter(',');
    bch->add_option("--trials", bch_trials, "Trials per sample size");
    bch->add_option("--seed", bch_seed, "Base seed")->capture_default_str();
    bch->add_option("--tuning", bch_tuning, "oracle | bic")->capture_default_str();
    bch->add_option("-o,--out", bch_out, "Result table CSV (summary written alongside)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            if (!sim_preset.empty()) {
                const auto g = sc::generator_preset(sim_preset);
                sim_cfg.generator.p = g.p;
                sim_cfg.generator.clusters = g.clusters;
            }
            if (sim_p) sim_cfg.generator.p = *sim_p;
            if (sim_clusters) sim_cfg.generator.clusters = *sim_clusters;
            else if (sim_p && sim_preset.empty()) sim_cfg.generator.clusters = std::max<std::size_t>(1, *sim_p / 8);
            if (sim_window) sim_cfg.window = sim_window;
            if (sim_count) sim_cfg.count = sim_count;
            sim_cfg.output_dir = sim_out;
            const auto out = sc::cmd_simulate(sim_cfg);
            save_config(app, sim_out);
            std::cout << "wrote " << sim_cfg.generator.p << " x " << sim_cfg.n << " samples, " << out.truth.edges.size()
                      << " true edges (density " << specgraph::edge_density(out.truth.edges) << ") to " << sim_out
                      << '\n';
        } else if (*est) {
            finish_estimate_args(est_args);
            const auto out = sc::cmd_estimate(est_args.cfg);
            print_warnings(out.warnings);
            save_config(app, est_args.out);
            std::cout << out.graph.size() << " edges, lambda=" << out.chosen.lambda << " alpha=" << out.chosen.alpha
                      << (out.estimate.report.converged ? "" : " (not converged)") << '\n';
        } else if (*sel) {
            finish_estimate_args(sel_args);
            sel_args.cfg.bic = true;
            const auto out = sc::cmd_select(sel_args.cfg);
            print_warnings(out.warnings);
            save_config(app, sel_args.out);
            if (out.range.hit_sweep_floor)
                std::cerr << "warning: no lambda down to the sweep floor produced an edge\n";
            std::cout << "lambda=" << out.result.best.lambda << " alpha=" << out.result.best.alpha << " ("
                      << out.result.records.size() << " grid points)\n";
        } else if (*scr) {
            const auto m = sc::cmd_score(scr_est, scr_truth, scr_p, scr_out);
            if (scr_out.empty()) {
                const auto est_edges = specgraph::io::read_edges_csv(scr_est).size();
                const auto true_edges = specgraph::io::read_edges_csv(scr_truth).size();
                std::cout << sc::metrics_json(m, est_edges, true_edges).dump(2) << '\n';
            }
        } else if (*bch) {
            sc::BenchConfig cfg = sc::bench_preset(bch_preset);
            if (!bch_methods.empty()) cfg.experiment.methods = parse_methods(bch_methods);
            if (!bch_ns.empty()) {
                cfg.experiment.samples.clear();
                for (auto n : bch_ns) cfg.experiment.samples.push_back(specgraph::four_window_setting(n));
            }
            if (bch_trials) cfg.trials = *bch_trials;
            if (bch_tuning == "bic") cfg.experiment.tuning = specgraph::Tuning::bic;
            else if (bch_tuning != "oracle") throw Error(ErrorCode::usage_error, "unknown tuning '" + bch_tuning + "'");
            cfg.seed = bch_seed;
            cfg.output = bch_out;
            const auto rows = sc::cmd_bench(cfg);
            for (const auto& r : rows)
                if (!r.error.empty())
                    std::cerr << "trial " << r.trial << " " << r.method << " n=" << r.n << " failed: " << r.error << '\n';
            specgraph::io::write_summary_table(std::cout, specgraph::summarize(rows));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sc::exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
