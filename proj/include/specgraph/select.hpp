#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "specgraph/admm.hpp"
#include "specgraph/common.hpp"
#include "specgraph/penalty.hpp"
#include "specgraph/spectral.hpp"

namespace specgraph {

struct BicRecord {
    /// 1 = lambda scan at the pilot alpha, 2 = alpha scan at the chosen lambda.
    int stage = 1;
    double lambda = 0.0;
    double alpha = 0.0;
    double bic = std::numeric_limits<double>::quiet_NaN();
    std::size_t edge_count = 0;
    bool converged = false;
};

struct SearchGrid {
    std::vector<double> lambda_values;
    std::vector<double> alpha_values;
    double alpha0 = 0.1;

    void validate() const
    {
        detail::require(!lambda_values.empty() && !alpha_values.empty(), ErrorCode::domain_error,
                        "search grid must not be empty");
        for (double l : lambda_values)
            detail::require(l > 0.0 && std::isfinite(l), ErrorCode::domain_error, "grid lambda must be > 0");
        for (double a : alpha_values)
            detail::require(a >= 0.0 && a <= 1.0, ErrorCode::domain_error, "grid alpha must lie in [0, 1]");
    }
};

inline std::size_t count_nonzeros(const MatrixList& mats)
{
    std::size_t nnz = 0;
    for (const auto& m : mats)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                if (m(r, c) != Complex(0.0, 0.0)) ++nnz;
    return nnz;
}

/// 2K sum_k (-ln det Phi_k + Re tr(S_k Phi_k)) + ln(2KM) * nnz, with nonzeros counted on `support`.
inline double bic_score(const MatrixList& phi, const MatrixList& support, const SpectralStats& s,
                        std::size_t window, std::size_t count)
{
    detail::require(phi.size() == s.count() && support.size() == s.count(), ErrorCode::shape_error,
                    "BIC inputs disagree on frequency count");
    const double fit = whittle_term(phi, s);
    const double measurements = 2.0 * static_cast<double>(window) * static_cast<double>(count);
    return 2.0 * static_cast<double>(window) * fit +
           std::log(measurements) * static_cast<double>(count_nonzeros(support));
}

inline double bic_score(const Estimate& est, const SpectralStats& s)
{
    return bic_score(est.phi.matrices, est.w, s, s.window, s.count());
}

inline double bic_score(const PrecisionSet& phi, const SpectralStats& s, std::size_t window, std::size_t count)
{
    return bic_score(phi.matrices, phi.matrices, s, window, count);
}

struct LambdaRange {
    double low = 0.0;
    double high = 0.0;
    /// Smallest lambda found to give an empty graph.
    double empty_graph_lambda = 0.0;
    /// Set when no lambda down to the sweep floor produced an edge.
    bool hit_sweep_floor = false;
};

struct RangeSearchOptions {
    double alpha0 = 0.1;
    double sweep_factor = 2.0;
    std::size_t sweep_steps = 40;
    std::size_t bisection_steps = 10;
};

inline std::size_t edge_count_at(const SpectralStats& s, PenaltyConfig cfg, double lambda, const SolverOptions& opts)
{
    cfg.lambda = lambda;
    return select_edges(solve(s, cfg, opts).w).size();
}

/// Bracket the smallest lambda with an empty graph, then report [l_sm / 20, l_sm / 2].
inline LambdaRange lambda_range(const SpectralStats& s, const PenaltyConfig& cfg_template, const SolverOptions& opts,
                                const RangeSearchOptions& range_opts = {})
{
    PenaltyConfig cfg = cfg_template;
    cfg.alpha = range_opts.alpha0;
    cfg.validate();

    double start = 0.0;
    const auto p = static_cast<Eigen::Index>(s.p());
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) start = std::max(start, group_vector(s.matrices, i, j).norm());
    if (!(start > 0.0)) start = 1.0;

    const double f = range_opts.sweep_factor;
    double with_edges = 0.0;
    double empty = 0.0;
    LambdaRange out;

    if (edge_count_at(s, cfg, start, opts) > 0) {
        with_edges = start;
        double lam = start;
        bool found = false;
        for (std::size_t step = 0; step < range_opts.sweep_steps; ++step) {
            lam *= f;
            if (edge_count_at(s, cfg, lam, opts) == 0) {
                found = true;
                break;
            }
            with_edges = lam;
        }
        detail::require(found, ErrorCode::sweep_exhausted, "no empty graph reached by the upward lambda sweep");
        empty = lam;
    } else {
        empty = start;
        double lam = start;
        bool found = false;
        for (std::size_t step = 0; step < range_opts.sweep_steps; ++step) {
            lam /= f;
            if (edge_count_at(s, cfg, lam, opts) > 0) {
                found = true;
                break;
            }
            empty = lam;
        }
        if (!found) {
            out.hit_sweep_floor = true;
            out.empty_graph_lambda = empty;
            out.high = empty / 2.0;
            out.low = out.high / 10.0;
            return out;
        }
        with_edges = lam;
    }

    for (std::size_t step = 0; step < range_opts.bisection_steps; ++step) {
        const double mid = std::sqrt(with_edges * empty);
        if (edge_count_at(s, cfg, mid, opts) == 0)
            empty = mid;
        else
            with_edges = mid;
    }
    out.empty_graph_lambda = empty;
    out.high = empty / 2.0;
    out.low = out.high / 10.0;
    return out;
}

/// `count` log-spaced values from high down to low.
inline std::vector<double> log_spaced_descending(double high, double low, std::size_t count)
{
    detail::require(high > 0.0 && low > 0.0 && count >= 1, ErrorCode::domain_error, "invalid log-spaced range");
    std::vector<double> out;
    out.reserve(count);
    if (count == 1) return {high};
    const double step = std::log(low / high) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(high * std::exp(step * static_cast<double>(i)));
    out.back() = low;
    return out;
}

inline std::vector<double> default_alpha_values()
{
    return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
}

/// `lambda_count` log-spaced values over [low, high], preceded by the empty-graph lambda
/// so that the edgeless model is always a candidate.
inline SearchGrid default_grid(const LambdaRange& range, std::size_t lambda_count = 10)
{
    SearchGrid g;
    g.lambda_values = {range.empty_graph_lambda};
    const auto inner = log_spaced_descending(range.high, range.low, lambda_count);
    g.lambda_values.insert(g.lambda_values.end(), inner.begin(), inner.end());
    g.alpha_values = default_alpha_values();
    return g;
}

struct SearchResult {
    PenaltyConfig best;
    std::vector<BicRecord> records;
    /// Fitted model at the selected configuration.
    Estimate estimate;
};

struct SearchOptions {
    bool warm_start = true;
    double epsilon = 1e-4;
    /// Relative BIC difference treated as a tie.
    double tie_tolerance = 1e-9;
};

namespace detail {

/// True when candidate (b, lambda, alpha) should replace the incumbent. Ties go to
/// the larger lambda and then the larger alpha.
inline bool better_record(const BicRecord& cand, const BicRecord& inc, double tie_tol)
{
    const double scale = std::max({1.0, std::abs(cand.bic), std::abs(inc.bic)});
    if (cand.bic < inc.bic - tie_tol * scale) return true;
    if (cand.bic > inc.bic + tie_tol * scale) return false;
    if (cand.lambda != inc.lambda) return cand.lambda > inc.lambda;
    return cand.alpha > inc.alpha;
}

} // namespace detail

/// Two-stage BIC search: lambda at alpha0, then alpha at the chosen lambda.
inline SearchResult search(const SpectralStats& s, const SearchGrid& grid, PenaltyKind kind,
                           const SolverOptions& opts, const SearchOptions& search_opts = {})
{
    grid.validate();
    std::vector<double> lambdas = grid.lambda_values;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());

    SearchResult result;
    std::optional<AdmmState> warm;

    struct Candidate {
        BicRecord record;
        Estimate estimate;
    };

    auto evaluate = [&](int stage, double lambda, double alpha) {
        PenaltyConfig cfg{lambda, alpha, search_opts.epsilon, kind};
        Estimate est = solve(s, cfg, opts, search_opts.warm_start && warm ? &*warm : nullptr);
        if (search_opts.warm_start) warm = est.state;
        BicRecord rec;
        rec.stage = stage;
        rec.lambda = lambda;
        rec.alpha = alpha;
        rec.converged = est.report.converged;
        rec.edge_count = select_edges(est.w).size();
        try {
            rec.bic = bic_score(est, s);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::not_positive_definite) throw;
            rec.converged = false;
        }
        result.records.push_back(rec);
        return Candidate{rec, std::move(est)};
    };

    auto pick = [&](std::optional<Candidate>& best_conv, std::optional<Candidate>& best_any, Candidate cand) {
        if (!std::isfinite(cand.record.bic)) return;
        auto replace = [&](std::optional<Candidate>& slot) {
            if (!slot || detail::better_record(cand.record, slot->record, search_opts.tie_tolerance)) slot = cand;
        };
        if (cand.record.converged) replace(best_conv);
        replace(best_any);
    };

    std::optional<Candidate> conv1, any1;
    for (double lambda : lambdas) pick(conv1, any1, evaluate(1, lambda, grid.alpha0));
    std::optional<Candidate>& stage1 = conv1 ? conv1 : any1;
    detail::require(stage1.has_value(), ErrorCode::search_failed, "no finite BIC in the lambda scan");
    const double lambda_star = stage1->record.lambda;

    std::optional<Candidate> conv2, any2;
    for (double alpha : grid.alpha_values) pick(conv2, any2, evaluate(2, lambda_star, alpha));
    std::optional<Candidate>& stage2 = conv2 ? conv2 : any2;
    detail::require(stage2.has_value(), ErrorCode::search_failed, "no finite BIC in the alpha scan");

    const bool any_converged = std::any_of(result.records.begin(), result.records.end(),
                                           [](const BicRecord& r) { return r.converged; });
    detail::require(any_converged, ErrorCode::search_failed, "no grid point converged");

    result.best = PenaltyConfig{stage2->record.lambda, stage2->record.alpha, search_opts.epsilon, kind};
    result.estimate = std::move(stage2->estimate);
    return result;
}

} // namespace specgraph
