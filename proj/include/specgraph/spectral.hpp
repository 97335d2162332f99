#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "specgraph/common.hpp"

namespace specgraph {

/// Real-valued p x n sample matrix: rows are variables, columns are time.
class TimeSeriesMatrix {
public:
    TimeSeriesMatrix() = default;

    explicit TimeSeriesMatrix(RMatrix values) : values_(std::move(values))
    {
        detail::require(values_.rows() >= 1, ErrorCode::invalid_data, "need at least one variable");
        detail::require(values_.cols() >= 2, ErrorCode::invalid_data, "need at least two samples");
        detail::require(values_.allFinite(), ErrorCode::invalid_data, "non-finite sample value");
    }

    std::size_t p() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(values_.cols()); }
    const RMatrix& values() const { return values_; }

    /// Copy with the per-row sample mean removed.
    TimeSeriesMatrix centered() const
    {
        RMatrix out = values_;
        out.colwise() -= values_.rowwise().mean();
        return TimeSeriesMatrix(std::move(out));
    }

    /// Copy keeping only the first `count` samples.
    TimeSeriesMatrix truncated(std::size_t count) const
    {
        detail::require(count <= n(), ErrorCode::shape_error, "truncation longer than series");
        return TimeSeriesMatrix(values_.leftCols(static_cast<Eigen::Index>(count)));
    }

private:
    RMatrix values_;
};

/// Disjoint windows of K = 2 m_t + 1 consecutive DFT bins and their center frequencies.
struct FrequencyPlan {
    std::size_t n = 0;
    std::size_t half_window = 0;
    std::size_t window = 0;
    std::size_t count = 0;
    /// Center frequency of each window, cycles/sample.
    std::vector<double> centers;
    /// DFT bin indices of each window, in order l = -m_t .. m_t.
    std::vector<std::vector<std::size_t>> member_indices;
};

/// Largest DFT bin strictly inside (0, 0.5).
inline std::size_t max_interior_bin(std::size_t n)
{
    return n >= 1 ? (n - 1) / 2 : 0;
}

inline FrequencyPlan build_frequency_plan(std::size_t n, std::size_t window,
                                          std::optional<std::size_t> count_override = std::nullopt)
{
    detail::require(window % 2 == 1, ErrorCode::invalid_window, "window size K must be odd");
    detail::require(window >= 3, ErrorCode::invalid_window, "window size K must be at least 3");

    FrequencyPlan plan;
    plan.n = n;
    plan.window = window;
    plan.half_window = (window - 1) / 2;

    const auto half = static_cast<long long>(n / 2);
    const auto m_t = static_cast<long long>(plan.half_window);
    const auto K = static_cast<long long>(window);
    if (count_override) {
        detail::require(*count_override >= 1, ErrorCode::insufficient_samples, "window count M must be >= 1");
        // last bin of window M is M*K
        detail::require(*count_override * window <= max_interior_bin(n), ErrorCode::window_overflow,
                        "M windows of size K do not fit below the Nyquist bin");
        plan.count = *count_override;
    } else {
        const long long slack = half - m_t - 1;
        const long long count = slack >= 0 ? slack / K : 0;
        detail::require(count >= 1, ErrorCode::insufficient_samples,
                        "too few samples for a single window of size K");
        plan.count = static_cast<std::size_t>(count);
    }

    plan.centers.reserve(plan.count);
    plan.member_indices.reserve(plan.count);
    for (std::size_t k = 0; k < plan.count; ++k) {
        const std::size_t center_bin = k * window + plan.half_window + 1;
        plan.centers.push_back(static_cast<double>(center_bin) / static_cast<double>(n));
        std::vector<std::size_t> bins;
        bins.reserve(window);
        for (std::size_t b = center_bin - plan.half_window; b <= center_bin + plan.half_window; ++b)
            bins.push_back(b);
        plan.member_indices.push_back(std::move(bins));
    }
    return plan;
}

/// Largest odd window K such that `count` windows fit below the Nyquist bin.
/// For n = 128 ... 2048 and count = 4 this gives K = n/8 - 1.
inline std::size_t fitted_window(std::size_t n, std::size_t count = 4)
{
    detail::require(count >= 1, ErrorCode::insufficient_samples, "window count M must be >= 1");
    std::size_t k = max_interior_bin(n) / count;
    if (k % 2 == 0 && k > 0) --k;
    detail::require(k >= 3, ErrorCode::insufficient_samples, "too few samples for the requested window count");
    return k;
}

/// Normalized DFT, column m holds d_x(m / n).
struct DftCoefficients {
    CMatrix coeffs;

    std::size_t p() const { return static_cast<std::size_t>(coeffs.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(coeffs.cols()); }
};

inline DftCoefficients dft(const TimeSeriesMatrix& x)
{
    const auto p = static_cast<Eigen::Index>(x.p());
    const auto n = static_cast<Eigen::Index>(x.n());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    Eigen::FFT<double> fft;
    std::vector<double> row(static_cast<std::size_t>(n));
    std::vector<Complex> spectrum;

    DftCoefficients out;
    out.coeffs.resize(p, n);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index t = 0; t < n; ++t) row[static_cast<std::size_t>(t)] = x.values()(i, t);
        fft.fwd(spectrum, row);
        for (Eigen::Index m = 0; m < n; ++m) out.coeffs(i, m) = spectrum[static_cast<std::size_t>(m)] * scale;
    }
    return out;
}

/// Per-frequency second-order statistics handed to the solver.
struct SpectralStats {
    /// Hermitian PSD estimates, one per frequency.
    MatrixList matrices;
    /// Number of DFT bins averaged into each matrix.
    std::size_t window = 0;
    std::vector<double> frequencies;

    std::size_t p() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
    std::size_t count() const { return matrices.size(); }
};

inline SpectralStats smoothed_psd(const DftCoefficients& d, const FrequencyPlan& plan)
{
    detail::require(d.n() == plan.n, ErrorCode::shape_error, "DFT length does not match the plan");
    const auto p = static_cast<Eigen::Index>(d.p());

    SpectralStats out;
    out.window = plan.window;
    out.frequencies = plan.centers;
    out.matrices.reserve(plan.count);
    for (const auto& bins : plan.member_indices) {
        CMatrix acc = CMatrix::Zero(p, p);
        for (std::size_t b : bins) {
            detail::require(b < d.n(), ErrorCode::shape_error, "plan bin outside the DFT");
            const auto col = d.coeffs.col(static_cast<Eigen::Index>(b));
            acc.noalias() += col * col.adjoint();
        }
        acc /= static_cast<double>(bins.size());
        out.matrices.push_back(detail::hermitian_part(acc));
    }
    return out;
}

/// Lag-zero sample covariance (1/n) sum x(t) x(t)^T as a single-frequency statistic.
/// The window is set to n/2 so that 2K equals the number of real samples.
inline SpectralStats sample_covariance_stats(const TimeSeriesMatrix& x)
{
    const RMatrix& v = x.values();
    RMatrix cov = (v * v.transpose()) / static_cast<double>(x.n());
    SpectralStats out;
    out.window = std::max<std::size_t>(1, x.n() / 2);
    out.frequencies = {0.0};
    out.matrices.push_back(detail::hermitian_part(cov.cast<Complex>()));
    return out;
}

/// Convenience wrapper: DFT, plan and smoothing in one step.
inline SpectralStats spectral_statistics(const TimeSeriesMatrix& x, std::size_t window,
                                         std::optional<std::size_t> count_override = std::nullopt)
{
    const auto plan = build_frequency_plan(x.n(), window, count_override);
    return smoothed_psd(dft(x), plan);
}

} // namespace specgraph
