#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace specgraph {

using Complex = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// A list of M complex p x p matrices, one per frequency.
using MatrixList = std::vector<CMatrix>;

enum class ErrorCode {
    invalid_window,
    insufficient_samples,
    window_overflow,
    invalid_data,
    shape_error,
    invalid_pair,
    domain_error,
    not_positive_definite,
    sweep_exhausted,
    search_failed,
    generation_failed,
    ingest_error,
    usage_error,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_window: return "invalid-window";
    case ErrorCode::insufficient_samples: return "insufficient-samples";
    case ErrorCode::window_overflow: return "window-overflow";
    case ErrorCode::invalid_data: return "invalid-data";
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::invalid_pair: return "invalid-pair";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::sweep_exhausted: return "sweep-exhausted";
    case ErrorCode::search_failed: return "search-failed";
    case ErrorCode::generation_failed: return "generation-failed";
    case ErrorCode::ingest_error: return "ingest-error";
    case ErrorCode::usage_error: return "usage-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) throw Error(code, what);
}

/// Frobenius norm of a stack of matrices.
inline double stacked_norm(const MatrixList& mats)
{
    double acc = 0.0;
    for (const auto& m : mats) acc += m.squaredNorm();
    return std::sqrt(acc);
}

inline double stacked_distance(const MatrixList& a, const MatrixList& b)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]).squaredNorm();
    return std::sqrt(acc);
}

inline CMatrix hermitian_part(const CMatrix& m)
{
    return (m + m.adjoint()) * 0.5;
}

} // namespace detail

} // namespace specgraph
