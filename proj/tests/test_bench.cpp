#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"

using namespace specgraph;
using Catch::Approx;

namespace {

VarModel two_node_model()
{
    VarModel m;
    m.p = 2;
    m.cluster_size = 2;
    RMatrix a = RMatrix::Zero(2, 2);
    a(0, 1) = 0.5;
    m.coefficients = {a};
    return m;
}

EdgeGraph graph(std::size_t p, std::vector<std::pair<std::size_t, std::size_t>> pairs)
{
    EdgeGraph g;
    g.p = p;
    for (auto [i, j] : pairs) g.edges.push_back({i, j, 1.0});
    return g;
}

} // namespace

TEST_CASE("generator output is block diagonal and stable")
{
    const VarGeneratorConfig cfg{32, 4, 3, 0.1, 0.8, 0.95, 1000};
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto m = gen_var_clusters(cfg, seed);
        REQUIRE(m.order() == 3);
        CHECK(m.cluster_size == 8);
        CHECK(spectral_radius(m) <= 0.95);
        for (const auto& a : m.coefficients)
            for (Eigen::Index i = 0; i < 32; ++i)
                for (Eigen::Index j = 0; j < 32; ++j)
                    if (i / 8 != j / 8) CHECK(a(i, j) == 0.0);
        for (const auto& a : m.coefficients) CHECK(a.cwiseAbs().maxCoeff() <= 0.8);
    }
}

TEST_CASE("generator is deterministic and validates its arguments")
{
    const VarGeneratorConfig cfg{16, 2, 3, 0.1, 0.8, 0.95, 1000};
    const auto a = gen_var_clusters(cfg, 99);
    const auto b = gen_var_clusters(cfg, 99);
    for (std::size_t l = 0; l < 3; ++l) CHECK(a.coefficients[l] == b.coefficients[l]);

    auto bad = cfg;
    bad.clusters = 3;
    CHECK_THROWS_AS(gen_var_clusters(bad, 1), Error);

    auto impossible = cfg;
    impossible.density = 1.0;
    impossible.coef_range = 0.8;
    impossible.stability_cap = 1e-6;
    impossible.max_redraws = 20;
    try {
        gen_var_clusters(impossible, 1);
        FAIL("expected generation failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::generation_failed);
    }
}

TEST_CASE("zero coefficient range gives white noise with no edges")
{
    const auto m = gen_var_clusters({8, 1, 1, 1.0, 0.0, 0.95, 1000}, 3);
    CHECK(m.coefficients[0].cwiseAbs().maxCoeff() == 0.0);
    const auto truth = true_ipsd(m, {0.1, 0.2});
    CHECK(truth.edges.size() == 0);
    for (const auto& phi : truth.ipsd) CHECK((phi - CMatrix::Identity(8, 8)).norm() < 1e-15);
}

TEST_CASE("companion stability check")
{
    CHECK(companion_spectral_radius({0.9 * RMatrix::Identity(3, 3)}) == Approx(0.9).epsilon(1e-12));
    CHECK(companion_spectral_radius({RMatrix::Identity(3, 3)}) == Approx(1.0).epsilon(1e-12));
    CHECK(companion_spectral_radius({0.9 * RMatrix::Identity(3, 3)}) <= 0.95);
    CHECK(companion_spectral_radius({RMatrix::Identity(3, 3)}) > 0.95);
    // x(t) = 0.5 x(t-1) + 0.3 x(t-2): roots of z^2 - 0.5 z - 0.3
    const double r = (0.5 + std::sqrt(0.25 + 1.2)) / 2.0;
    CHECK(companion_spectral_radius({RMatrix::Constant(1, 1, 0.5), RMatrix::Constant(1, 1, 0.3)}) ==
          Approx(r).epsilon(1e-12));
}

TEST_CASE("white-noise simulation has identity covariance")
{
    const auto m = gen_var_clusters({4, 1, 1, 1.0, 0.0, 0.95, 1000}, 1);
    const auto x = simulate(m, 100000, 100, 5);
    const RMatrix cov = x.values() * x.values().transpose() / 100000.0;
    CHECK((cov - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("AR(1) lag-one autocorrelation")
{
    VarModel m;
    m.p = 1;
    m.cluster_size = 1;
    m.coefficients = {RMatrix::Constant(1, 1, 0.5)};
    const auto x = simulate(m, 100000, 100, 8).values();
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        den += x(0, t) * x(0, t);
        if (t) num += x(0, t) * x(0, t - 1);
    }
    CHECK(num / den == Approx(0.5).margin(0.05));
}

TEST_CASE("simulation is bit-identical for a fixed seed")
{
    const auto m = gen_var_clusters({16, 2, 3, 0.1, 0.8, 0.95, 1000}, 4);
    CHECK(simulate(m, 512, 100, 77).values() == simulate(m, 512, 100, 77).values());
    CHECK(simulate(m, 512, 100, 77).values() != simulate(m, 512, 100, 78).values());
    CHECK(simulate(m, 512, 0, 77).n() == 512);
}

TEST_CASE("two-node inverse psd by hand")
{
    const auto m = two_node_model();
    for (double f : {0.0, 0.05, 0.125, 0.25, 0.4}) {
        const CMatrix phi = inverse_psd_at(m, f);
        const Complex e = std::polar(1.0, -2.0 * std::numbers::pi * f);
        CHECK(std::abs(phi(0, 1) - (-0.5 * e)) < 1e-15);
        CHECK(std::abs(phi(1, 0) - std::conj(-0.5 * e)) < 1e-15);
        CHECK(std::abs(phi(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(phi(1, 1) - 1.25) < 1e-15);
    }
    const auto truth = true_ipsd(m, {0.25});
    REQUIRE(truth.edges.size() == 1);
    CHECK(truth.edges.edges[0].i == 0);
    CHECK(truth.edges.edges[0].j == 1);
}

TEST_CASE("two-node inverse psd agrees with the inverse of the estimated psd")
{
    const auto m = two_node_model();
    const std::size_t n = 1 << 16;
    const auto x = simulate(m, n, 100, 3);
    const auto plan = build_frequency_plan(n, 4095, 4);
    const auto s = smoothed_psd(dft(x), plan);
    const auto truth = true_ipsd(m, plan.centers);
    for (std::size_t k = 0; k < plan.count; ++k) {
        const CMatrix est = s.matrices[k].inverse();
        const double f = plan.centers[k];
        const Complex flipped = -0.5 * std::polar(1.0, 2.0 * std::numbers::pi * f);
        CHECK(std::abs(est(0, 1) - truth.ipsd[k](0, 1)) < 0.05);
        CHECK(std::abs(est(0, 1) - flipped) > 0.2);
    }
}

TEST_CASE("true inverse psd is block diagonal, hermitian and positive definite")
{
    const auto m = gen_var_clusters({24, 3, 3, 0.1, 0.8, 0.95, 1000}, 12);
    const std::vector<double> freqs{0.05, 0.17, 0.33, 0.49};
    const auto truth = true_ipsd(m, freqs);
    REQUIRE(truth.ipsd.size() == 4);
    for (const auto& phi : truth.ipsd) {
        CHECK((phi - phi.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(phi);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        for (Eigen::Index i = 0; i < 24; ++i)
            for (Eigen::Index j = 0; j < 24; ++j)
                if (i / 8 != j / 8) CHECK(phi(i, j) == Complex(0, 0));
    }
    for (const auto& e : truth.edges.edges) CHECK(e.i / 8 == e.j / 8);
    CHECK(truth.omega0().cols() == 24 * 4);

    VarModel unstable;
    unstable.p = 1;
    unstable.cluster_size = 1;
    unstable.coefficients = {RMatrix::Constant(1, 1, 1.1)};
    try {
        true_ipsd(unstable, {0.1});
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::domain_error);
    }
}

TEST_CASE("edge scoring")
{
    const auto truth = graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    const auto perfect = score(truth, truth);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const auto none = score(graph(6, {}), truth);
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);

    const auto partial = score(graph(6, {{0, 1}, {2, 1}, {3, 4}, {0, 5}, {1, 5}}), truth);
    CHECK(partial.precision == Approx(0.6));
    CHECK(partial.recall == Approx(0.75));
    CHECK(partial.f1 == Approx(2.0 * 0.45 / 1.35).epsilon(1e-12));
    CHECK(std::isnan(partial.frob_error));

    CHECK_THROWS_AS(score(graph(5, {}), truth), Error);
}

TEST_CASE("scoring is symmetric under relabeling")
{
    std::mt19937_64 rng(5);
    const std::vector<std::size_t> perm{4, 2, 0, 5, 1, 3, 6};
    std::bernoulli_distribution coin(0.4);
    for (int rep = 0; rep < 20; ++rep) {
        EdgeGraph a, b;
        a.p = b.p = 7;
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = i + 1; j < 7; ++j) {
                if (coin(rng)) a.edges.push_back({i, j, 1.0});
                if (coin(rng)) b.edges.push_back({i, j, 1.0});
            }
        auto relabel = [&](const EdgeGraph& g) {
            EdgeGraph out;
            out.p = g.p;
            for (const auto& e : g.edges) out.edges.push_back({perm[e.j], perm[e.i], e.weight});
            return out;
        };
        const auto m1 = score(a, b);
        const auto m2 = score(relabel(a), relabel(b));
        CHECK(m1.precision == m2.precision);
        CHECK(m1.recall == m2.recall);
        CHECK(m1.f1 == m2.f1);
    }
}

TEST_CASE("frobenius error")
{
    std::mt19937_64 rng(9);
    GroundTruth truth;
    truth.ipsd = {oracle::random_pd(5, rng), oracle::random_pd(5, rng)};
    PrecisionSet same{truth.ipsd};
    CHECK(frob_error(same, truth) == 0.0);
    PrecisionSet shifted = same;
    shifted.matrices[1] += CMatrix::Identity(5, 5);
    CHECK(frob_error(shifted, truth) == Approx(std::sqrt(5.0)).epsilon(1e-14));

    PrecisionSet other{{oracle::random_pd(5, rng), oracle::random_pd(5, rng)}};
    double sq = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < 5; ++j) sq += std::norm(other.matrices[k](i, j) - truth.ipsd[k](i, j));
    CHECK(frob_error(other, truth) == Approx(std::sqrt(sq)).epsilon(1e-13));
    CHECK(frob_error(other, truth) == Approx((other.omega() - truth.omega0()).norm()).epsilon(1e-13));

    PrecisionSet shorter{{oracle::random_pd(5, rng)}};
    CHECK_THROWS_AS(frob_error(shorter, truth), Error);
}

TEST_CASE("edge density of the 128-node configuration is near 3.5 percent")
{
    const VarGeneratorConfig cfg;
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = gen_var_clusters(cfg, seed);
        total += edge_density(true_ipsd(m, {}).edges);
    }
    CHECK(total / 10.0 == Approx(0.035).margin(0.015));
}

TEST_CASE("trial seeds are distinct and reproducible")
{
    std::set<std::uint64_t> seen;
    for (std::size_t t = 0; t < 1000; ++t) seen.insert(trial_seed(1, t));
    CHECK(seen.size() == 1000);
    CHECK(trial_seed(7, 3) == trial_seed(7, 3));
    CHECK(trial_seed(7, 3) != trial_seed(8, 3));
}

TEST_CASE("method names")
{
    CHECK(parse_method("sglsp") == Method::sglsp);
    CHECK(parse_method("sgl") == Method::sgl);
    CHECK(parse_method("iid") == Method::iid);
    CHECK(parse_method("sglsp-bic") == Method::sglsp_bic);
    try {
        parse_method("gms");
        FAIL("expected a usage error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::usage_error);
    }
    CHECK(four_window_setting(1024).window == 127);
    CHECK(*four_window_setting(1024).count == 4);
}

TEST_CASE("single trial runs are reproducible")
{
    ExperimentConfig cfg;
    cfg.methods = {Method::sglsp, Method::sgl, Method::iid, Method::sglsp_bic};
    cfg.generator = {8, 1, 3, 0.1, 0.8, 0.95, 1000};
    cfg.samples = {four_window_setting(256)};
    const auto a = run_trials(cfg, 1, 42);
    const auto b = run_trials(cfg, 1, 42);
    REQUIRE(a.size() == 4);
    REQUIRE(b.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a[i].error.empty());
        CHECK(a[i].method == b[i].method);
        CHECK(a[i].lambda == b[i].lambda);
        CHECK(a[i].alpha == b[i].alpha);
        CHECK(a[i].metrics.f1 == b[i].metrics.f1);
        CHECK((a[i].metrics.frob_error == b[i].metrics.frob_error ||
               (std::isnan(a[i].metrics.frob_error) && std::isnan(b[i].metrics.frob_error))));
        CHECK(a[i].metrics.f1 >= 0.0);
        CHECK(a[i].metrics.f1 <= 1.0);
    }
    CHECK(a[0].window == 31);
    CHECK(a[0].count == 4);
    CHECK(a[2].method == "iid");
    CHECK(a[2].alpha == 1.0);
    CHECK(a[2].count == 1);
    CHECK(std::isnan(a[2].metrics.frob_error));
    CHECK(std::isfinite(a[0].metrics.frob_error));

    CHECK(run_trials(cfg, 0, 42).empty());

    const auto summary = summarize(a);
    CHECK(summary.size() == 4);
    for (const auto& srow : summary) CHECK(srow.trials == 1);
}

TEST_CASE("summary statistics")
{
    std::vector<TrialRow> rows(3);
    for (std::size_t i = 0; i < 3; ++i) {
        rows[i].method = "sgl";
        rows[i].n = 256;
        rows[i].metrics.f1 = 0.2 * static_cast<double>(i + 1);
        rows[i].metrics.frob_error = static_cast<double>(i);
    }
    rows.push_back(rows[0]);
    rows.back().error = "failed";
    const auto s = summarize(rows);
    REQUIRE(s.size() == 1);
    CHECK(s[0].trials == 3);
    CHECK(s[0].f1_mean == Approx(0.4));
    CHECK(s[0].f1_stderr == Approx(0.2 / std::sqrt(3.0)));
    CHECK(s[0].frob_mean == Approx(1.0));
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}
