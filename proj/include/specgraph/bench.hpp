#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "specgraph/admm.hpp"
#include "specgraph/common.hpp"
#include "specgraph/penalty.hpp"
#include "specgraph/select.hpp"
#include "specgraph/spectral.hpp"

namespace specgraph {

/// Block-diagonal VAR(order) model with identity innovation covariance.
struct VarModel {
    std::size_t p = 0;
    std::size_t cluster_size = 0;
    /// A_1 ... A_order, each p x p.
    std::vector<RMatrix> coefficients;

    std::size_t order() const { return coefficients.size(); }
    std::size_t clusters() const { return cluster_size ? p / cluster_size : 0; }
};

struct VarGeneratorConfig {
    std::size_t p = 128;
    std::size_t clusters = 16;
    std::size_t order = 3;
    double density = 0.1;
    double coef_range = 0.8;
    double stability_cap = 0.95;
    std::size_t max_redraws = 1000;
};

/// Spectral radius of the companion matrix of coefficient blocks A_1..A_L (each c x c).
inline double companion_spectral_radius(const std::vector<RMatrix>& blocks)
{
    if (blocks.empty()) return 0.0;
    const auto c = blocks.front().rows();
    const auto L = static_cast<Eigen::Index>(blocks.size());
    RMatrix comp = RMatrix::Zero(c * L, c * L);
    for (Eigen::Index l = 0; l < L; ++l) comp.block(0, l * c, c, c) = blocks[static_cast<std::size_t>(l)];
    if (L > 1) comp.block(c, 0, c * (L - 1), c * (L - 1)).setIdentity();
    Eigen::EigenSolver<RMatrix> es(comp, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

inline std::vector<RMatrix> cluster_blocks(const VarModel& model, std::size_t cluster)
{
    const auto c = static_cast<Eigen::Index>(model.cluster_size);
    const auto off = static_cast<Eigen::Index>(cluster * model.cluster_size);
    std::vector<RMatrix> out;
    for (const auto& a : model.coefficients) out.push_back(a.block(off, off, c, c));
    return out;
}

} // namespace detail

inline double spectral_radius(const VarModel& model)
{
    double r = 0.0;
    for (std::size_t q = 0; q < model.clusters(); ++q)
        r = std::max(r, companion_spectral_radius(detail::cluster_blocks(model, q)));
    return r;
}

inline VarModel gen_var_clusters(const VarGeneratorConfig& cfg, std::uint64_t seed)
{
    detail::require(cfg.p >= 1 && cfg.clusters >= 1 && cfg.p % cfg.clusters == 0, ErrorCode::usage_error,
                    "p must be a positive multiple of the cluster count");
    detail::require(cfg.order >= 1, ErrorCode::usage_error, "VAR order must be >= 1");
    detail::require(cfg.density >= 0.0 && cfg.density <= 1.0, ErrorCode::usage_error, "density must lie in [0, 1]");
    detail::require(cfg.coef_range >= 0.0 && cfg.stability_cap > 0.0, ErrorCode::usage_error,
                    "coefficient range must be >= 0 and stability cap > 0");

    const std::size_t c = cfg.p / cfg.clusters;
    VarModel model;
    model.p = cfg.p;
    model.cluster_size = c;
    model.coefficients.assign(cfg.order, RMatrix::Zero(static_cast<Eigen::Index>(cfg.p), static_cast<Eigen::Index>(cfg.p)));

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution support(cfg.density);
    std::uniform_real_distribution<double> value(-cfg.coef_range, cfg.coef_range);
    const auto ci = static_cast<Eigen::Index>(c);

    for (std::size_t q = 0; q < cfg.clusters; ++q) {
        bool accepted = false;
        for (std::size_t attempt = 0; attempt < cfg.max_redraws && !accepted; ++attempt) {
            std::vector<RMatrix> blocks(cfg.order, RMatrix::Zero(ci, ci));
            for (auto& b : blocks)
                for (Eigen::Index r = 0; r < ci; ++r)
                    for (Eigen::Index col = 0; col < ci; ++col)
                        if (support(rng)) b(r, col) = value(rng);
            if (companion_spectral_radius(blocks) <= cfg.stability_cap) {
                const auto off = static_cast<Eigen::Index>(q * c);
                for (std::size_t l = 0; l < cfg.order; ++l) model.coefficients[l].block(off, off, ci, ci) = blocks[l];
                accepted = true;
            }
        }
        detail::require(accepted, ErrorCode::generation_failed,
                        "no stable cluster after " + std::to_string(cfg.max_redraws) + " draws");
    }
    return model;
}

/// Run the recursion from a zero state with N(0, I) innovations and drop the first burn_in samples.
inline TimeSeriesMatrix simulate(const VarModel& model, std::size_t n, std::size_t burn_in, std::uint64_t seed)
{
    detail::require(n >= 2, ErrorCode::usage_error, "need at least two samples");
    const auto p = static_cast<Eigen::Index>(model.p);
    const auto total = static_cast<Eigen::Index>(n + burn_in);
    RMatrix x = RMatrix::Zero(p, total);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    RVector step(p);
    for (Eigen::Index t = 0; t < total; ++t) {
        for (Eigen::Index i = 0; i < p; ++i) step(i) = noise(rng);
        for (std::size_t l = 0; l < model.order(); ++l) {
            const auto lag = static_cast<Eigen::Index>(l + 1);
            if (t - lag >= 0) step.noalias() += model.coefficients[l] * x.col(t - lag);
        }
        x.col(t) = step;
    }
    return TimeSeriesMatrix(x.rightCols(static_cast<Eigen::Index>(n)));
}

/// Inverse PSD of the model, its edge set and the values at given frequencies.
struct GroundTruth {
    EdgeGraph edges;
    std::vector<double> frequencies;
    MatrixList ipsd;

    CMatrix omega0() const { return PrecisionSet{ipsd}.omega(); }
};

/// A(f)^H A(f) with A(f) = I - sum_l A_l exp(-j 2 pi f l), block by block.
inline CMatrix inverse_psd_at(const VarModel& model, double f)
{
    const auto p = static_cast<Eigen::Index>(model.p);
    const auto c = static_cast<Eigen::Index>(model.cluster_size ? model.cluster_size : model.p);
    const std::size_t clusters = static_cast<std::size_t>(p / c);
    CMatrix out = CMatrix::Zero(p, p);
    for (std::size_t q = 0; q < clusters; ++q) {
        const auto off = static_cast<Eigen::Index>(q) * c;
        CMatrix a = CMatrix::Identity(c, c);
        for (std::size_t l = 0; l < model.order(); ++l) {
            const double angle = -2.0 * std::numbers::pi * f * static_cast<double>(l + 1);
            a -= model.coefficients[l].block(off, off, c, c).cast<Complex>() * std::polar(1.0, angle);
        }
        out.block(off, off, c, c) = a.adjoint() * a;
    }
    return out;
}

struct TruthOptions {
    std::size_t grid_points = 512;
    double support_tol = 1e-10;
};

inline GroundTruth true_ipsd(const VarModel& model, const std::vector<double>& frequencies,
                             const TruthOptions& opts = {})
{
    detail::require(spectral_radius(model) < 1.0, ErrorCode::domain_error, "model is not stable");
    const auto p = static_cast<Eigen::Index>(model.p);

    RMatrix peak = RMatrix::Zero(p, p);
    for (std::size_t g = 0; g < opts.grid_points; ++g) {
        const double f = opts.grid_points > 1 ? 0.5 * static_cast<double>(g) / static_cast<double>(opts.grid_points - 1) : 0.0;
        peak = peak.cwiseMax(inverse_psd_at(model, f).cwiseAbs());
    }

    GroundTruth truth;
    truth.edges.p = model.p;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (peak(i, j) > opts.support_tol)
                truth.edges.edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), peak(i, j)});
    truth.frequencies = frequencies;
    for (double f : frequencies) truth.ipsd.push_back(inverse_psd_at(model, f));
    return truth;
}

inline double edge_density(const EdgeGraph& g)
{
    if (g.p < 2) return 0.0;
    return static_cast<double>(g.size()) / (static_cast<double>(g.p) * static_cast<double>(g.p - 1) / 2.0);
}

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double frob_error = std::numeric_limits<double>::quiet_NaN();
};

inline Metrics score(const EdgeGraph& est, const EdgeGraph& truth)
{
    detail::require(est.p == truth.p, ErrorCode::shape_error, "edge sets over different node counts");
    std::set<std::pair<std::size_t, std::size_t>> t;
    for (const auto& e : truth.edges) t.emplace(std::min(e.i, e.j), std::max(e.i, e.j));
    std::set<std::pair<std::size_t, std::size_t>> h;
    for (const auto& e : est.edges) h.emplace(std::min(e.i, e.j), std::max(e.i, e.j));
    std::size_t hits = 0;
    for (const auto& e : h) hits += t.count(e);

    Metrics m;
    m.precision = h.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(h.size());
    m.recall = t.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(t.size());
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

inline Metrics score(const EdgeGraph& est, const GroundTruth& truth)
{
    return score(est, truth.edges);
}

/// ||Omega_hat - Omega_0||_F over the stacked frequencies.
inline double frob_error(const PrecisionSet& phi_hat, const GroundTruth& truth)
{
    detail::require(phi_hat.count() == truth.ipsd.size(), ErrorCode::shape_error, "frequency count mismatch");
    for (std::size_t k = 0; k < phi_hat.count(); ++k)
        detail::require(phi_hat.matrices[k].rows() == truth.ipsd[k].rows(), ErrorCode::shape_error,
                        "dimension mismatch");
    return detail::stacked_distance(phi_hat.matrices, truth.ipsd);
}

// --- Monte Carlo harness -------------------------------------------------------------

enum class Method { sglsp, sgl, iid, sglsp_bic };

inline std::string_view to_string(Method m)
{
    switch (m) {
    case Method::sglsp: return "sglsp";
    case Method::sgl: return "sgl";
    case Method::iid: return "iid";
    case Method::sglsp_bic: return "sglsp-bic";
    }
    return "unknown";
}

inline Method parse_method(std::string_view name)
{
    if (name == "sglsp") return Method::sglsp;
    if (name == "sgl") return Method::sgl;
    if (name == "iid") return Method::iid;
    if (name == "sglsp-bic") return Method::sglsp_bic;
    throw Error(ErrorCode::usage_error, "unknown method '" + std::string(name) + "'");
}

enum class Tuning { oracle_grid, bic };

/// Sample size with its window plan.
struct SampleSetting {
    std::size_t n = 0;
    std::size_t window = 0;
    std::optional<std::size_t> count;
};

/// M = 4 windows of the largest odd size that fits (K = n/8 - 1 for powers of two).
inline SampleSetting four_window_setting(std::size_t n)
{
    return {n, fitted_window(n, 4), 4};
}

struct ExperimentConfig {
    std::vector<Method> methods{Method::sglsp, Method::sgl};
    VarGeneratorConfig generator{16, 2, 3, 0.1, 0.8, 0.95, 1000};
    std::vector<SampleSetting> samples{four_window_setting(1024)};
    std::size_t burn_in = 100;
    Tuning tuning = Tuning::oracle_grid;
    double epsilon = 1e-4;
    SolverOptions solver{};
    /// Oracle grid: lambda from the empty-graph lambda down by `oracle_lambda_span`.
    std::size_t oracle_lambda_count = 12;
    double oracle_lambda_span = 100.0;
    std::vector<double> oracle_alpha_values{0.0, 0.1, 0.2, 0.3};
    std::size_t bic_lambda_count = 10;
    std::vector<double> bic_alpha_values = default_alpha_values();
};

struct TrialRow {
    std::string method;
    std::size_t n = 0;
    std::size_t window = 0;
    std::size_t count = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    Metrics metrics{};
    double runtime_ms = 0.0;
    std::size_t edge_count = 0;
    /// Empty on success.
    std::string error;
};

struct TunedFit {
    PenaltyConfig cfg;
    Estimate estimate;
    Metrics metrics;
};

/// Exhaustive (alpha, lambda) grid, keeping the fit with the best F1 against the truth.
/// Ties go to the larger lambda, then the larger alpha.
inline TunedFit oracle_grid_fit(const SpectralStats& s, PenaltyKind kind, const std::vector<double>& alphas,
                                const EdgeGraph& truth, const ExperimentConfig& cfg)
{
    const PenaltyConfig tmpl{1.0, 0.1, cfg.epsilon, kind};
    RangeSearchOptions range_opts;
    if (alphas.size() == 1) range_opts.alpha0 = alphas.front();
    const LambdaRange range = lambda_range(s, tmpl, cfg.solver, range_opts);
    const double top = range.empty_graph_lambda;
    const auto lambdas = log_spaced_descending(top, top / cfg.oracle_lambda_span, cfg.oracle_lambda_count);

    std::optional<TunedFit> best;
    for (double alpha : alphas) {
        std::optional<AdmmState> warm;
        for (double lambda : lambdas) {
            PenaltyConfig pc{lambda, alpha, cfg.epsilon, kind};
            Estimate est = solve(s, pc, cfg.solver, warm ? &*warm : nullptr);
            warm = est.state;
            Metrics m = score(select_edges(est.w), truth);
            const bool take = !best || m.f1 > best->metrics.f1 ||
                              (m.f1 == best->metrics.f1 &&
                               (lambda > best->cfg.lambda || (lambda == best->cfg.lambda && alpha > best->cfg.alpha)));
            if (take) best = TunedFit{pc, std::move(est), m};
        }
    }
    return std::move(*best);
}

inline TunedFit bic_fit(const SpectralStats& s, PenaltyKind kind, const std::vector<double>& alphas,
                        const EdgeGraph& truth, const ExperimentConfig& cfg)
{
    const PenaltyConfig tmpl{1.0, 0.1, cfg.epsilon, kind};
    // a single-alpha grid also fixes the pilot alpha
    RangeSearchOptions range_opts;
    if (alphas.size() == 1) range_opts.alpha0 = alphas.front();
    const LambdaRange range = lambda_range(s, tmpl, cfg.solver, range_opts);
    SearchGrid grid = default_grid(range, cfg.bic_lambda_count);
    grid.alpha0 = range_opts.alpha0;
    grid.alpha_values = alphas;
    SearchResult sr = search(s, grid, kind, cfg.solver, SearchOptions{true, cfg.epsilon});
    const Metrics m = score(select_edges(sr.estimate.w), truth);
    return TunedFit{sr.best, std::move(sr.estimate), m};
}

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t trial)
{
    // splitmix64 step keeps neighbouring trials decorrelated
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Single (method, data) evaluation.
inline TrialRow run_method(Method method, const TimeSeriesMatrix& x, const SampleSetting& setting,
                           const VarModel& model, const ExperimentConfig& cfg)
{
    TrialRow row;
    row.method = std::string(to_string(method));
    row.n = setting.n;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (method == Method::iid) {
            const SpectralStats s = sample_covariance_stats(x);
            const GroundTruth truth = true_ipsd(model, {});
            row.window = s.window;
            row.count = 1;
            const std::vector<double> alphas{1.0};
            TunedFit fit = cfg.tuning == Tuning::bic ? bic_fit(s, PenaltyKind::sgl, alphas, truth.edges, cfg)
                                                     : oracle_grid_fit(s, PenaltyKind::sgl, alphas, truth.edges, cfg);
            row.lambda = fit.cfg.lambda;
            row.alpha = fit.cfg.alpha;
            row.metrics = fit.metrics;
            row.edge_count = select_edges(fit.estimate.w).size();
        } else {
            const FrequencyPlan plan = build_frequency_plan(x.n(), setting.window, setting.count);
            const SpectralStats s = smoothed_psd(dft(x), plan);
            const GroundTruth truth = true_ipsd(model, plan.centers);
            row.window = plan.window;
            row.count = plan.count;
            const PenaltyKind kind = method == Method::sgl ? PenaltyKind::sgl : PenaltyKind::sglsp;
            const bool use_bic = method == Method::sglsp_bic || cfg.tuning == Tuning::bic;
            TunedFit fit = use_bic ? bic_fit(s, kind, cfg.bic_alpha_values, truth.edges, cfg)
                                   : oracle_grid_fit(s, kind, cfg.oracle_alpha_values, truth.edges, cfg);
            row.lambda = fit.cfg.lambda;
            row.alpha = fit.cfg.alpha;
            row.metrics = fit.metrics;
            row.metrics.frob_error = frob_error(fit.estimate.phi, truth);
            row.edge_count = select_edges(fit.estimate.w).size();
        }
    } catch (const std::exception& e) {
        row.error = e.what();
        row.metrics = Metrics{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

/// generate -> simulate -> estimate -> score for every (trial, n, method).
/// The model depends on the trial only, the sample path on (trial, n).
inline std::vector<TrialRow> run_trials(const ExperimentConfig& cfg, std::size_t trials, std::uint64_t base_seed)
{
    std::vector<TrialRow> rows;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = trial_seed(base_seed, trial);
        std::optional<VarModel> model;
        std::string model_error;
        try {
            model = gen_var_clusters(cfg.generator, seed);
        } catch (const std::exception& e) {
            model_error = e.what();
        }
        for (const auto& setting : cfg.samples) {
            std::optional<TimeSeriesMatrix> x;
            if (model) x = simulate(*model, setting.n, cfg.burn_in, trial_seed(seed, setting.n));
            for (Method method : cfg.methods) {
                TrialRow row;
                if (model) {
                    row = run_method(method, *x, setting, *model, cfg);
                } else {
                    row.method = std::string(to_string(method));
                    row.n = setting.n;
                    row.error = model_error;
                    row.metrics = Metrics{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
                }
                row.trial = trial;
                row.seed = seed;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

struct SummaryRow {
    std::string method;
    std::size_t n = 0;
    std::size_t trials = 0;
    double f1_mean = 0.0, f1_stderr = 0.0;
    double precision_mean = 0.0, recall_mean = 0.0;
    double frob_mean = std::numeric_limits<double>::quiet_NaN(), frob_stderr = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::pair<double, double> mean_stderr(const std::vector<double>& v)
{
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

} // namespace detail

/// Mean and standard error per (method, n), skipping failed trials.
inline std::vector<SummaryRow> summarize(const std::vector<TrialRow>& rows)
{
    std::map<std::pair<std::string, std::size_t>, std::vector<const TrialRow*>> groups;
    for (const auto& r : rows)
        if (r.error.empty()) groups[{r.method, r.n}].push_back(&r);

    std::vector<SummaryRow> out;
    for (const auto& [key, members] : groups) {
        std::vector<double> f1, prec, rec, frob;
        for (const auto* r : members) {
            f1.push_back(r->metrics.f1);
            prec.push_back(r->metrics.precision);
            rec.push_back(r->metrics.recall);
            if (std::isfinite(r->metrics.frob_error)) frob.push_back(r->metrics.frob_error);
        }
        SummaryRow s;
        s.method = key.first;
        s.n = key.second;
        s.trials = members.size();
        std::tie(s.f1_mean, s.f1_stderr) = detail::mean_stderr(f1);
        s.precision_mean = detail::mean_stderr(prec).first;
        s.recall_mean = detail::mean_stderr(rec).first;
        std::tie(s.frob_mean, s.frob_stderr) = detail::mean_stderr(frob);
        out.push_back(s);
    }
    return out;
}

inline double median(std::vector<double> v)
{
    detail::require(!v.empty(), ErrorCode::domain_error, "median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

} // namespace specgraph
