#pragma once

// Slow, independent reference implementations used by the tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "specgraph/specgraph.hpp"

namespace oracle {

using specgraph::CMatrix;
using specgraph::Complex;
using specgraph::MatrixList;
using specgraph::RMatrix;

/// O(n^2) normalized DFT.
inline CMatrix brute_dft(const RMatrix& x)
{
    const auto p = x.rows();
    const auto n = x.cols();
    CMatrix out = CMatrix::Zero(p, n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index t = 0; t < n; ++t) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) * static_cast<double>(t) /
                                 static_cast<double>(n);
            for (Eigen::Index i = 0; i < p; ++i) out(i, m) += x(i, t) * std::polar(1.0, angle);
        }
    return out / std::sqrt(static_cast<double>(n));
}

inline CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Complex(g(rng), g(rng));
    return m;
}

inline CMatrix random_hermitian(Eigen::Index p, std::mt19937_64& rng)
{
    const CMatrix a = random_complex(p, p, rng);
    return (a + a.adjoint()) * 0.5;
}

/// B B^H / p + shift I, well conditioned.
inline CMatrix random_pd(Eigen::Index p, std::mt19937_64& rng, double shift = 0.5)
{
    const CMatrix b = random_complex(p, p, rng);
    CMatrix m = b * b.adjoint() / static_cast<double>(p) + shift * CMatrix::Identity(p, p);
    return (m + m.adjoint()) * 0.5;
}

inline specgraph::SpectralStats random_stats(Eigen::Index p, std::size_t count, std::mt19937_64& rng,
                                             std::size_t window = 5)
{
    specgraph::SpectralStats s;
    s.window = window;
    for (std::size_t k = 0; k < count; ++k) {
        s.matrices.push_back(random_pd(p, rng));
        s.frequencies.push_back(0.1 * static_cast<double>(k + 1));
    }
    return s;
}

/// log det through the eigenvalues, NaN when not positive definite.
inline double eig_log_det(const CMatrix& m)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double d = es.eigenvalues()(i);
        if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        acc += std::log(d);
    }
    return acc;
}

inline double whittle(const MatrixList& phi, const MatrixList& s)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) acc += (s[k] * phi[k]).trace().real() - eig_log_det(phi[k]);
    return acc;
}

/// SGL penalty written over unordered pairs and doubled.
inline double sgl_penalty(const MatrixList& phi, double l1, double l2)
{
    const auto p = phi.front().rows();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) {
            double sq = 0.0;
            for (const auto& m : phi) {
                acc += 2.0 * l1 * std::abs(m(i, j));
                sq += std::norm(m(i, j));
            }
            acc += 2.0 * l2 * std::sqrt(sq);
        }
    return acc;
}

inline double sgl_objective(const MatrixList& phi, const MatrixList& s, double l1, double l2)
{
    return whittle(phi, s) + sgl_penalty(phi, l1, l2);
}

/// Proximal map of t * sgl_penalty at v.
inline MatrixList sgl_prox(const MatrixList& v, double t, double l1, double l2)
{
    MatrixList out = v;
    const auto p = v.front().rows();
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) {
            std::vector<Complex> z(v.size());
            double sq = 0.0;
            for (std::size_t k = 0; k < v.size(); ++k) {
                const Complex a = v[k](i, j);
                const double r = std::max(0.0, std::abs(a) - t * l1);
                z[k] = r > 0.0 ? a / std::abs(a) * r : Complex(0.0, 0.0);
                sq += r * r;
            }
            const double norm = std::sqrt(sq);
            const double g = norm > t * l2 ? 1.0 - t * l2 / norm : 0.0;
            for (std::size_t k = 0; k < v.size(); ++k) {
                out[k](i, j) = g * z[k];
                out[k](j, i) = std::conj(g * z[k]);
            }
        }
    return out;
}

/// Accelerated proximal gradient with backtracking and restart for the SGL problem.
inline MatrixList fista_sgl(const MatrixList& s, double l1, double l2, std::size_t iters = 20000)
{
    MatrixList x;
    for (const auto& sk : s) x.push_back(CMatrix(sk.diagonal().real().cwiseInverse().cast<Complex>().asDiagonal()));
    MatrixList y = x;
    double tk = 1.0;
    double step = 1.0;
    double fx = sgl_objective(x, s, l1, l2);

    auto feasible_value = [&](const MatrixList& m) {
        const double v = sgl_objective(m, s, l1, l2);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    for (std::size_t it = 0; it < iters; ++it) {
        MatrixList grad(s.size());
        double fy = 0.0;
        bool y_ok = true;
        for (std::size_t k = 0; k < s.size(); ++k) {
            Eigen::LLT<CMatrix> llt(y[k]);
            if (llt.info() != Eigen::Success) y_ok = false;
            grad[k] = s[k] - y[k].inverse();
        }
        if (!y_ok) {
            y = x;
            tk = 1.0;
            continue;
        }
        fy = whittle(y, s);

        MatrixList next;
        for (int bt = 0; bt < 60; ++bt) {
            MatrixList v(s.size());
            for (std::size_t k = 0; k < s.size(); ++k) v[k] = y[k] - step * grad[k];
            next = sgl_prox(v, step, l1, l2);
            const double fn = whittle(next, s);
            if (std::isfinite(fn)) {
                double lin = 0.0, quad = 0.0;
                for (std::size_t k = 0; k < s.size(); ++k) {
                    const CMatrix d = next[k] - y[k];
                    lin += (grad[k].adjoint() * d).trace().real();
                    quad += d.squaredNorm();
                }
                if (fn <= fy + lin + quad / (2.0 * step) + 1e-15 * std::abs(fy)) break;
            }
            step *= 0.5;
        }
        const double fn = feasible_value(next);
        if (fn > fx) {
            // restart momentum
            y = x;
            tk = 1.0;
            continue;
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        MatrixList ny(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) ny[k] = next[k] + ((tk - 1.0) / tn) * (next[k] - x[k]);
        x = std::move(next);
        fx = fn;
        y = std::move(ny);
        tk = tn;
        step *= 1.2;
    }
    return x;
}

/// Value of the per-group proximal objective.
inline double group_prox_value(const std::vector<Complex>& w, const std::vector<Complex>& a,
                               const std::vector<double>& w1, double w2, double rho)
{
    double acc = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        acc += 0.5 * rho * std::norm(w[k] - a[k]) + w1[k] * std::abs(w[k]);
        sq += std::norm(w[k]);
    }
    return acc + w2 * std::sqrt(sq);
}

/// Nested grid refinement over the 2M real coordinates of w, run with and without
/// exact-zero probes; the lower objective wins.
inline std::vector<Complex> grid_prox(const std::vector<Complex>& a, const std::vector<double>& w1, double w2,
                                      double rho, int levels = 60, int half_points = 5)
{
    const std::size_t m = a.size();
    const std::size_t dims = 2 * m;
    std::vector<double> center(dims, 0.0);
    double span0 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        center[2 * k] = a[k].real() / 2.0;
        center[2 * k + 1] = a[k].imag() / 2.0;
        span0 = std::max(span0, std::abs(a[k]));
    }
    span0 = std::max(span0, 1e-3);

    auto to_complex = [&](const std::vector<double>& c) {
        std::vector<Complex> w(m);
        for (std::size_t k = 0; k < m; ++k) w[k] = Complex(c[2 * k], c[2 * k + 1]);
        return w;
    };
    const int side = 2 * half_points + 1;
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= static_cast<std::size_t>(side);

    std::mt19937_64 dir_rng(0x5eed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto refine = [&](bool probe_zeros) {
        std::vector<double> best = center;
        double best_val = group_prox_value(to_complex(best), a, w1, w2, rho);
        double span = span0;
        for (int level = 0; level < levels; ++level) {
            const double h = span / half_points;
            const std::vector<double> base = best;
            std::vector<double> trial(dims);
            for (std::size_t idx = 0; idx < total; ++idx) {
                std::size_t rem = idx;
                for (std::size_t d = 0; d < dims; ++d) {
                    const int off = static_cast<int>(rem % static_cast<std::size_t>(side)) - half_points;
                    rem /= static_cast<std::size_t>(side);
                    trial[d] = base[d] + off * h;
                }
                const double v = group_prox_value(to_complex(trial), a, w1, w2, rho);
                if (v < best_val) {
                    best_val = v;
                    best = trial;
                }
            }
            // random directions follow valleys that are narrower than the lattice
            for (int r = 0; r < 400; ++r) {
                std::vector<double> dir(dims);
                double len = 0.0;
                for (auto& d : dir) {
                    d = gauss(dir_rng);
                    len += d * d;
                }
                len = std::sqrt(len);
                for (double t = h; t > h * 1e-4; t *= 0.5) {
                    for (std::size_t d = 0; d < dims; ++d) trial[d] = best[d] + dir[d] / len * t;
                    const double v = group_prox_value(to_complex(trial), a, w1, w2, rho);
                    if (v < best_val) {
                        best_val = v;
                        best = trial;
                        break;
                    }
                }
            }
            if (probe_zeros) {
                // exact zeros so the kinks are reachable
                for (std::size_t k = 0; k < m; ++k) {
                    std::vector<double> z = best;
                    z[2 * k] = 0.0;
                    z[2 * k + 1] = 0.0;
                    const double v = group_prox_value(to_complex(z), a, w1, w2, rho);
                    if (v <= best_val) {
                        best_val = v;
                        best = z;
                    }
                }
                std::vector<double> zero(dims, 0.0);
                const double vz = group_prox_value(to_complex(zero), a, w1, w2, rho);
                if (vz <= best_val) {
                    best_val = vz;
                    best = zero;
                }
            }
            span *= 0.6;
        }
        return std::pair{best_val, to_complex(best)};
    };

    auto with = refine(true);
    auto without = refine(false);
    return without.first < with.first ? without.second : with.second;
}

/// Node relabeling: out(i, j) = m(perm[i], perm[j]).
inline CMatrix permute(const CMatrix& m, const std::vector<int>& perm)
{
    const auto p = m.rows();
    CMatrix out(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) out(i, j) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    return out;
}

} // namespace oracle
