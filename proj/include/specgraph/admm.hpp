#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "specgraph/common.hpp"
#include "specgraph/penalty.hpp"
#include "specgraph/spectral.hpp"

namespace specgraph {

/// Iterates of the splitting Phi = W with scaled dual U.
struct AdmmState {
    MatrixList phi;
    MatrixList w;
    MatrixList u;
    double rho = 2.0;
    std::size_t iter = 0;
};

struct SolverOptions {
    double rho0 = 2.0;
    bool adapt_rho = true;
    /// Residual balance ratio that triggers a rho change.
    double mu = 10.0;
    double tau_incr = 2.0;
    double tau_decr = 2.0;
    double eps_abs = 1e-4;
    double eps_rel = 1e-4;
    std::size_t max_inner = 500;
    /// Majorization passes for the log-sum penalty.
    std::size_t outer_iters = 5;
    double outer_tol = 1e-3;
    /// Verify positive definiteness and Hermitian structure of every iterate.
    bool check_invariants = false;

    void validate() const
    {
        detail::require(rho0 > 0.0 && mu > 0.0 && tau_incr > 1.0 && tau_decr > 1.0, ErrorCode::domain_error,
                        "rho0, mu must be > 0 and tau factors > 1");
        detail::require(eps_abs > 0.0 && eps_rel > 0.0, ErrorCode::domain_error, "tolerances must be > 0");
        detail::require(max_inner >= 1 && outer_iters >= 1, ErrorCode::domain_error, "iteration caps must be >= 1");
        detail::require(outer_tol > 0.0, ErrorCode::domain_error, "outer_tol must be > 0");
    }
};

struct SolveReport {
    bool converged = false;
    /// Inner ADMM iterations used by each outer pass.
    std::vector<std::size_t> inner_iters;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    /// Objective after each outer pass, evaluated on the sparse iterate when it is positive definite.
    std::vector<double> objective_trace;
    std::size_t invariant_violations = 0;
};

struct Estimate {
    /// Dense positive definite iterate.
    PrecisionSet phi;
    /// Exactly sparse iterate.
    MatrixList w;
    SolveReport report;
    AdmmState state;
};

namespace detail {

inline CMatrix update_phi_impl(const CMatrix& s_k, const CMatrix& w_k, const CMatrix& u_k, double rho,
                               double* min_eigenvalue)
{
    require(rho > 0.0, ErrorCode::domain_error, "rho must be > 0");
    const CMatrix target = hermitian_part(s_k - rho * w_k + rho * u_k);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(target);
    require(eig.info() == Eigen::Success, ErrorCode::not_positive_definite, "eigendecomposition failed");
    const RVector& d = eig.eigenvalues();
    RVector shrunk(d.size());
    for (Eigen::Index l = 0; l < d.size(); ++l) {
        // (-d + sqrt(d^2 + 4 rho)) / (2 rho), written to avoid cancellation for large positive d
        const double root = std::sqrt(d(l) * d(l) + 4.0 * rho);
        shrunk(l) = d(l) > 0.0 ? 2.0 / (d(l) + root) : (root - d(l)) / (2.0 * rho);
    }
    if (min_eigenvalue) *min_eigenvalue = shrunk.size() ? shrunk.minCoeff() : 0.0;
    const CMatrix& v = eig.eigenvectors();
    return hermitian_part(v * shrunk.asDiagonal() * v.adjoint());
}

} // namespace detail

/// Minimizer over Phi of  Re tr(S Phi) - ln det Phi + (rho/2) ||Phi - W + U||_F^2.
inline CMatrix update_phi(const CMatrix& s_k, const CMatrix& w_k, const CMatrix& u_k, double rho)
{
    return detail::update_phi_impl(s_k, w_k, u_k, rho, nullptr);
}

/// Complex soft-thresholding (1 - beta/|b|)_+ b.
inline Complex soft_threshold(Complex b, double beta)
{
    const double mag = std::abs(b);
    if (mag <= beta) return Complex(0.0, 0.0);
    return b * (1.0 - beta / mag);
}

/// Sparse-group proximal step on A_k = Phi_k + U_k. Diagonals pass through.
inline MatrixList update_w(const MatrixList& a, const WeightMatrices& weights, double rho)
{
    detail::require(rho > 0.0, ErrorCode::domain_error, "rho must be > 0");
    detail::require(!a.empty() && weights.count() == a.size(), ErrorCode::shape_error,
                    "weights and matrices disagree on frequency count");
    const auto p = a.front().rows();
    detail::require(static_cast<Eigen::Index>(weights.p()) == p, ErrorCode::shape_error,
                    "weights and matrices disagree on dimension");

    const std::size_t count = a.size();
    MatrixList out(count, CMatrix::Zero(p, p));
    std::vector<Complex> shrunk(count);
    for (std::size_t k = 0; k < count; ++k) out[k].diagonal() = a[k].diagonal();

    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                shrunk[k] = soft_threshold(a[k](i, j), weights.entry[k](i, j) / rho);
                sq += std::norm(shrunk[k]);
            }
            const double norm = std::sqrt(sq);
            const double limit = weights.group(i, j) / rho;
            if (norm <= limit || norm == 0.0) continue;
            const double factor = 1.0 - limit / norm;
            for (std::size_t k = 0; k < count; ++k) {
                const Complex v = shrunk[k] * factor;
                out[k](i, j) = v;
                out[k](j, i) = std::conj(v);
            }
        }
    }
    return out;
}

/// Scaled dual ascent U_k + (Phi_k - W_k).
inline MatrixList update_u(const MatrixList& u, const MatrixList& phi, const MatrixList& w)
{
    detail::require(u.size() == phi.size() && phi.size() == w.size(), ErrorCode::shape_error,
                    "dual update shape mismatch");
    MatrixList out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k] + (phi[k] - w[k]);
    return out;
}

/// Starting point: W_k = diag(S_k)^-1, U_k = 0.
inline AdmmState initial_state(const SpectralStats& s, double rho)
{
    AdmmState st;
    st.rho = rho;
    const auto p = static_cast<Eigen::Index>(s.p());
    for (const auto& sk : s.matrices) {
        CMatrix w0 = CMatrix::Zero(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            const double d = sk(i, i).real();
            w0(i, i) = d > 0.0 ? 1.0 / d : 1.0;
        }
        st.phi.push_back(w0);
        st.w.push_back(w0);
        st.u.push_back(CMatrix::Zero(p, p));
    }
    return st;
}

namespace detail {

inline bool is_exactly_hermitian(const CMatrix& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, i).imag() != 0.0) return false;
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (m(j, i) != std::conj(m(i, j))) return false;
    }
    return true;
}

/// Objective on W when it is positive definite, otherwise on Phi.
inline double reported_objective(const MatrixList& phi, const MatrixList& w, const SpectralStats& s,
                                 const PenaltyConfig& cfg)
{
    try {
        return objective(w, s, cfg);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::not_positive_definite) throw;
    }
    return objective(phi, s, cfg);
}

} // namespace detail

/// ADMM on the reweighted convex subproblem with fixed weights.
inline Estimate solve_inner(const SpectralStats& s, const WeightMatrices& weights, const SolverOptions& opts,
                            const AdmmState* warm = nullptr)
{
    opts.validate();
    detail::require(s.count() >= 1, ErrorCode::shape_error, "no spectral matrices");
    detail::require(weights.count() == s.count() && weights.p() == s.p(), ErrorCode::shape_error,
                    "weights do not match the statistics");
    const auto p = static_cast<Eigen::Index>(s.p());

    AdmmState st;
    if (warm) {
        detail::require(warm->phi.size() == s.count() && warm->w.size() == s.count() &&
                            warm->u.size() == s.count() && warm->w.front().rows() == p,
                        ErrorCode::shape_error, "warm start does not match the statistics");
        st = *warm;
        st.iter = 0;
        if (!opts.adapt_rho && st.rho != opts.rho0) {
            for (auto& uk : st.u) uk *= st.rho / opts.rho0;
            st.rho = opts.rho0;
        }
    } else {
        st = initial_state(s, opts.rho0);
    }

    const std::size_t count = s.count();
    const double sqrt_dim = std::sqrt(static_cast<double>(p * p) * static_cast<double>(count));
    Estimate est;
    MatrixList a(count);
    double primal = 0.0;
    double dual = 0.0;
    bool converged = false;

    for (std::size_t it = 0; it < opts.max_inner; ++it) {
        for (std::size_t k = 0; k < count; ++k) {
            double min_eig = 0.0;
            st.phi[k] = detail::update_phi_impl(s.matrices[k], st.w[k], st.u[k], st.rho,
                                                opts.check_invariants ? &min_eig : nullptr);
            if (opts.check_invariants && !(min_eig > 0.0)) ++est.report.invariant_violations;
            a[k] = st.phi[k] + st.u[k];
        }
        MatrixList w_next = update_w(a, weights, st.rho);
        if (opts.check_invariants)
            for (const auto& wk : w_next)
                if (!detail::is_exactly_hermitian(wk)) ++est.report.invariant_violations;

        for (std::size_t k = 0; k < count; ++k) st.u[k] += st.phi[k] - w_next[k];

        primal = detail::stacked_distance(st.phi, w_next);
        dual = st.rho * detail::stacked_distance(w_next, st.w);
        st.w = std::move(w_next);
        st.iter = it + 1;

        const double eps_pri =
            sqrt_dim * opts.eps_abs + opts.eps_rel * std::max(detail::stacked_norm(st.phi), detail::stacked_norm(st.w));
        const double eps_dual = sqrt_dim * opts.eps_abs + opts.eps_rel * st.rho * detail::stacked_norm(st.u);
        if (primal <= eps_pri && dual <= eps_dual) {
            converged = true;
            break;
        }

        if (opts.adapt_rho) {
            if (primal > opts.mu * dual) {
                st.rho *= opts.tau_incr;
                for (auto& uk : st.u) uk /= opts.tau_incr;
            } else if (dual > opts.mu * primal) {
                st.rho /= opts.tau_decr;
                for (auto& uk : st.u) uk *= opts.tau_decr;
            }
        }
    }

    est.phi.matrices = st.phi;
    est.w = st.w;
    est.report.converged = converged;
    est.report.inner_iters.push_back(st.iter);
    est.report.primal_residual = primal;
    est.report.dual_residual = dual;
    est.state = std::move(st);
    return est;
}

/// Full estimator. SGL runs one pass with flat weights; the log-sum penalty
/// re-linearizes around the previous pass's sparse iterate.
inline Estimate solve(const SpectralStats& s, const PenaltyConfig& cfg, const SolverOptions& opts,
                      const AdmmState* warm = nullptr)
{
    cfg.validate();
    opts.validate();
    Estimate est = solve_inner(s, flat_weights(s.p(), s.count(), cfg), opts, warm);
    est.report.objective_trace.push_back(detail::reported_objective(est.phi.matrices, est.w, s, cfg));
    if (cfg.kind == PenaltyKind::sgl) return est;

    bool all_converged = est.report.converged;
    for (std::size_t pass = 1; pass < opts.outer_iters; ++pass) {
        const WeightMatrices weights = lla_weights(est.w, cfg);
        Estimate next = solve_inner(s, weights, opts, &est.state);
        all_converged = all_converged && next.report.converged;

        const double base = detail::stacked_norm(est.w);
        const double change = detail::stacked_distance(next.w, est.w) / std::max(base, 1e-300);

        next.report.inner_iters.insert(next.report.inner_iters.begin(), est.report.inner_iters.begin(),
                                       est.report.inner_iters.end());
        next.report.objective_trace = std::move(est.report.objective_trace);
        next.report.objective_trace.push_back(detail::reported_objective(next.phi.matrices, next.w, s, cfg));
        next.report.invariant_violations += est.report.invariant_violations;
        est = std::move(next);
        if (change < opts.outer_tol) break;
    }
    est.report.converged = all_converged;
    return est;
}

/// Undirected edge {i, j}, i < j, zero-based.
struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 0.0;

    friend bool operator==(const Edge& a, const Edge& b) { return a.i == b.i && a.j == b.j; }
};

struct EdgeGraph {
    std::size_t p = 0;
    std::vector<Edge> edges;

    std::size_t size() const { return edges.size(); }

    /// Symmetric weighted adjacency with zero diagonal.
    RMatrix adjacency() const
    {
        const auto n = static_cast<Eigen::Index>(p);
        RMatrix out = RMatrix::Zero(n, n);
        for (const auto& e : edges) {
            out(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.weight;
            out(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.weight;
        }
        return out;
    }
};

/// Edge {i,j} is present when the frequency group norm of W exceeds tol.
inline EdgeGraph select_edges(const MatrixList& w, double tol = 0.0)
{
    detail::require(tol >= 0.0, ErrorCode::domain_error, "edge tolerance must be >= 0");
    EdgeGraph g;
    if (w.empty()) return g;
    g.p = static_cast<std::size_t>(w.front().rows());
    const auto p = w.front().rows();
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            double sq = 0.0;
            for (const auto& wk : w) sq += std::norm(wk(i, j));
            const double norm = std::sqrt(sq);
            if (norm > tol)
                g.edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), norm});
        }
    }
    return g;
}

} // namespace specgraph
