#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "specgraph/common.hpp"
#include "specgraph/spectral.hpp"

namespace specgraph {

/// Inverse PSD estimates Phi_k, one Hermitian p x p matrix per frequency.
struct PrecisionSet {
    MatrixList matrices;

    std::size_t p() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
    std::size_t count() const { return matrices.size(); }

    /// Horizontal concatenation [Phi_1 ... Phi_M], p x (pM).
    CMatrix omega() const
    {
        const auto p = static_cast<Eigen::Index>(this->p());
        CMatrix out(p, p * static_cast<Eigen::Index>(count()));
        for (std::size_t k = 0; k < count(); ++k)
            out.middleCols(static_cast<Eigen::Index>(k) * p, p) = matrices[k];
        return out;
    }
};

enum class PenaltyKind { sgl, sglsp };

inline std::string_view to_string(PenaltyKind kind)
{
    return kind == PenaltyKind::sgl ? "sgl" : "sglsp";
}

inline PenaltyKind parse_penalty_kind(std::string_view name)
{
    if (name == "sgl" || name == "SGL") return PenaltyKind::sgl;
    if (name == "sglsp" || name == "SGLSP") return PenaltyKind::sglsp;
    throw Error(ErrorCode::usage_error, "unknown penalty kind '" + std::string(name) + "'");
}

struct PenaltyConfig {
    double lambda = 0.0;
    double alpha = 0.1;
    double epsilon = 1e-4;
    PenaltyKind kind = PenaltyKind::sglsp;

    /// Entrywise (lasso) strength.
    double lambda1() const { return alpha * lambda; }
    /// Group strength.
    double lambda2() const { return (1.0 - alpha) * lambda; }

    void validate() const
    {
        detail::require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::domain_error, "lambda must be >= 0");
        detail::require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::domain_error, "alpha must lie in [0, 1]");
        detail::require(epsilon > 0.0, ErrorCode::domain_error, "epsilon must be > 0");
    }
};

/// Per-entry weights entry[k](i, j) and per-group weights group(i, j). Diagonals are zero.
struct WeightMatrices {
    std::vector<RMatrix> entry;
    RMatrix group;

    std::size_t p() const { return static_cast<std::size_t>(group.rows()); }
    std::size_t count() const { return entry.size(); }
};

/// Frequency group [Phi_1]_ij ... [Phi_M]_ij.
inline CVector group_vector(const MatrixList& phi, std::size_t i, std::size_t j)
{
    detail::require(i != j, ErrorCode::invalid_pair, "group vector needs i != j");
    CVector out(static_cast<Eigen::Index>(phi.size()));
    for (std::size_t k = 0; k < phi.size(); ++k)
        out(static_cast<Eigen::Index>(k)) = phi[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

inline CVector group_vector(const PrecisionSet& phi, std::size_t i, std::size_t j)
{
    return group_vector(phi.matrices, i, j);
}

/// lambda * ln(1 + |theta| / epsilon)
inline double log_sum_penalty(double theta_abs, double lambda, double epsilon)
{
    detail::require(theta_abs >= 0.0, ErrorCode::domain_error, "log-sum penalty needs a magnitude >= 0");
    detail::require(epsilon > 0.0, ErrorCode::domain_error, "epsilon must be > 0");
    return lambda * std::log1p(theta_abs / epsilon);
}

/// ln det of a Hermitian positive definite matrix via Cholesky.
inline double hermitian_log_det(const CMatrix& m)
{
    Eigen::LLT<CMatrix> llt(m);
    detail::require(llt.info() == Eigen::Success, ErrorCode::not_positive_definite,
                    "matrix is not positive definite");
    const auto& L = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        const double d = L(i, i).real();
        detail::require(d > 0.0, ErrorCode::not_positive_definite, "matrix is not positive definite");
        acc += std::log(d);
    }
    return 2.0 * acc;
}

/// Re tr(A B) without forming the product.
inline double real_trace_product(const CMatrix& a, const CMatrix& b)
{
    return a.cwiseProduct(b.transpose()).sum().real();
}

/// Negative Whittle log-likelihood: sum_k Re tr(S_k Phi_k) - ln det Phi_k.
inline double whittle_term(const MatrixList& phi, const SpectralStats& s)
{
    detail::require(phi.size() == s.count(), ErrorCode::shape_error, "frequency count mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        detail::require(phi[k].rows() == s.matrices[k].rows() && phi[k].cols() == s.matrices[k].cols(),
                        ErrorCode::shape_error, "matrix size mismatch");
        acc += real_trace_product(s.matrices[k], phi[k]) - hermitian_log_det(phi[k]);
    }
    return acc;
}

inline double whittle_term(const PrecisionSet& phi, const SpectralStats& s)
{
    return whittle_term(phi.matrices, s);
}

/// Penalty value alone, summed over ordered pairs i != j.
inline double penalty_value(const MatrixList& phi, const PenaltyConfig& cfg)
{
    cfg.validate();
    if (phi.empty()) return 0.0;
    const auto p = phi.front().rows();
    const double l1 = cfg.lambda1();
    const double l2 = cfg.lambda2();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) continue;
            double sq = 0.0;
            for (const auto& m : phi) {
                const double a = std::abs(m(i, j));
                sq += a * a;
                acc += cfg.kind == PenaltyKind::sgl ? l1 * a : log_sum_penalty(a, l1, cfg.epsilon);
            }
            const double g = std::sqrt(sq);
            acc += cfg.kind == PenaltyKind::sgl ? l2 * g : log_sum_penalty(g, l2, cfg.epsilon);
        }
    }
    return acc;
}

/// Penalized negative log-likelihood (SGL or sparse-group log-sum).
inline double objective(const MatrixList& phi, const SpectralStats& s, const PenaltyConfig& cfg)
{
    return whittle_term(phi, s) + penalty_value(phi, cfg);
}

inline double objective(const PrecisionSet& phi, const SpectralStats& s, const PenaltyConfig& cfg)
{
    return objective(phi.matrices, s, cfg);
}

/// Weights of the first majorization pass: lambda1 per entry, lambda2 per group.
inline WeightMatrices flat_weights(std::size_t p, std::size_t count, const PenaltyConfig& cfg)
{
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(p);
    RMatrix off = RMatrix::Ones(n, n);
    off.diagonal().setZero();

    WeightMatrices w;
    w.entry.assign(count, off * cfg.lambda1());
    w.group = off * cfg.lambda2();
    return w;
}

/// Local linear approximation of the log-sum penalty around phi_bar.
inline WeightMatrices lla_weights(const MatrixList& phi_bar, const PenaltyConfig& cfg)
{
    cfg.validate();
    detail::require(!phi_bar.empty(), ErrorCode::shape_error, "empty linearization point");
    const auto p = phi_bar.front().rows();
    const double l1 = cfg.lambda1();
    const double l2 = cfg.lambda2();
    const double eps = cfg.epsilon;

    WeightMatrices w;
    w.entry.assign(phi_bar.size(), RMatrix::Zero(p, p));
    w.group = RMatrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) continue;
            double sq = 0.0;
            for (std::size_t k = 0; k < phi_bar.size(); ++k) {
                const double a = std::abs(phi_bar[k](i, j));
                sq += a * a;
                w.entry[k](i, j) = l1 / (a + eps);
            }
            w.group(i, j) = l2 / (std::sqrt(sq) + eps);
        }
    }
    return w;
}

inline WeightMatrices lla_weights(const PrecisionSet& phi_bar, const PenaltyConfig& cfg)
{
    return lla_weights(phi_bar.matrices, cfg);
}

} // namespace specgraph
