#include <doctest.h>

#include "asr/paths.hpp"
#include "asr/rng.hpp"

#include <cmath>
#include <set>

using namespace asr;

TEST_SUITE_BEGIN("paths");

TEST_CASE("zero volatility collapses to constant paths") {
    MarketParams mp;
    mp.sigma = 0.0;
    mp.rate = 0.0;
    const PathSet ps = simulate_gbm(mp, 7, 16, 123);
    for (int p = 0; p < ps.n_paths; ++p)
        for (int k = 0; k < ps.n_cols; ++k)
            CHECK(ps.at(p, k) == 45.0);
}

TEST_CASE("one log-Euler step matches the closed form") {
    // z = 0 forced: sigma * sqrt(dt) * z vanishes, only the drift remains.
    MarketParams mp; // s0 = 45, sigma = 0.21, dt = 1/252
    const double step = 45.0 * std::exp((0.0 - 0.5 * 0.21 * 0.21) / 252.0);
    CHECK(step == doctest::Approx(44.996063).epsilon(1e-6));

    // The simulator applies the same map with its own draw; replay it.
    const PathSet ps = simulate_gbm(mp, 1, 2, 99);
    const double z = normal_draw(99, 0, 0);
    const double expect =
        45.0 * std::exp(-0.5 * 0.21 * 0.21 / 252.0 + 0.21 * std::sqrt(1.0 / 252.0) * z);
    CHECK(ps.at(0, 1) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("terminal log-return mean over many paths") {
    MarketParams mp;
    const int n_paths = 100000;
    const PathSet ps = simulate_gbm(mp, n_paths, 64, 2024);
    double mean = 0.0, var = 0.0;
    for (int p = 0; p < n_paths; ++p)
        mean += std::log(ps.at(p, 63) / ps.at(p, 0));
    mean /= n_paths;
    for (int p = 0; p < n_paths; ++p) {
        const double d = std::log(ps.at(p, 63) / ps.at(p, 0)) - mean;
        var += d * d;
    }
    var /= n_paths;
    const double expect = -0.5 * 0.21 * 0.21 * 63.0 / 252.0; // -0.005513
    const double se = std::sqrt(var / n_paths);
    CHECK(std::fabs(mean - expect) < 3.0 * se);
}

TEST_CASE("one-step log-return moments within 4 standard errors") {
    MarketParams mp;
    const int n_paths = 20000;
    const PathSet ps = simulate_gbm(mp, n_paths, 3, 7);
    std::vector<double> r;
    r.reserve(2 * n_paths);
    for (int p = 0; p < n_paths; ++p)
        for (int k = 0; k + 1 < 3; ++k)
            r.push_back(std::log(ps.at(p, k + 1) / ps.at(p, k)));
    double mean = 0.0;
    for (double x : r)
        mean += x;
    mean /= r.size();
    double var = 0.0;
    for (double x : r)
        var += (x - mean) * (x - mean);
    var /= r.size();
    const double dt = 1.0 / 252;
    const double m_expect = -0.5 * 0.21 * 0.21 * dt;
    const double v_expect = 0.21 * 0.21 * dt;
    const double se_mean = std::sqrt(var / r.size());
    // Sampling error of a normal sample variance: sqrt(2 sigma^4 / n).
    const double se_var = std::sqrt(2.0 * v_expect * v_expect / r.size());
    CHECK(std::fabs(mean - m_expect) < 4.0 * se_mean);
    CHECK(std::fabs(var - v_expect) < 4.0 * se_var);
}

TEST_CASE("reproducible and positive") {
    MarketParams mp;
    const PathSet a = simulate_gbm(mp, 50, 64, 5);
    const PathSet b = simulate_gbm(mp, 50, 64, 5);
    CHECK(a.prices == b.prices);
    for (double v : a.prices)
        CHECK(v > 0.0);
}

TEST_CASE("serial reference is bit-identical to the parallel simulator") {
    MarketParams mp;
    const PathSet par = simulate_gbm(mp, 333, 64, 11);
    const PathSet ser = simulate_gbm_serial(mp, 333, 64, 11);
    CHECK(par.prices == ser.prices);
}

TEST_CASE("invalid parameters are rejected") {
    MarketParams mp;
    mp.s0 = -1.0;
    CHECK_THROWS_AS(simulate_gbm(mp, 1, 2, 0), ParameterError);
    mp = MarketParams{};
    mp.sigma = -0.1;
    CHECK_THROWS_AS(simulate_gbm(mp, 1, 2, 0), ParameterError);
    mp = MarketParams{};
    CHECK_THROWS_AS(simulate_gbm(mp, 0, 2, 0), ParameterError);
    CHECK_THROWS_AS(simulate_gbm(mp, 1, 1, 0), ParameterError);
}

TEST_CASE("split_seeds: distinct, deterministic, disjoint across bases") {
    const SeedTriple t0 = split_seeds(0);
    CHECK(t0.train != t0.validation);
    CHECK(t0.train != t0.test);
    CHECK(t0.validation != t0.test);

    const SeedTriple a = split_seeds(42);
    const SeedTriple b = split_seeds(42);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    std::set<uint64_t> seen;
    for (uint64_t base = 0; base < 100; ++base) {
        const SeedTriple t = split_seeds(base);
        seen.insert(t.train);
        seen.insert(t.validation);
        seen.insert(t.test);
    }
    CHECK(seen.size() == 300);
}

TEST_CASE("normal_icdf matches known quantiles") {
    CHECK(normal_icdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_icdf(0.05) == doctest::Approx(-1.6448536269514722).epsilon(1e-10));
    CHECK(normal_icdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    CHECK_THROWS_AS(normal_icdf(0.0), ParameterError);
    CHECK_THROWS_AS(normal_icdf(1.0), ParameterError);
}

TEST_SUITE_END();
