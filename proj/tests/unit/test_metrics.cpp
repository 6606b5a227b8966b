#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "../oracles.hpp"
#include "pacing/config.hpp"
#include "pacing/metrics.hpp"

using namespace pacing;

TEST(PacingError, Examples) {
    EXPECT_EQ(pacing_error(std::vector<double>{10, 10}, std::vector<double>{10, 10}), 0.0);
    EXPECT_DOUBLE_EQ(pacing_error(std::vector<double>{12, 8}, std::vector<double>{10, 10}), 0.2);
    EXPECT_DOUBLE_EQ(pacing_error(std::vector<double>{0, 20}, std::vector<double>{10, 10}), 1.0);
}

TEST(PacingError, ZeroTargets) {
    EXPECT_EQ(pacing_error(std::vector<double>{0, 12}, std::vector<double>{0, 10}), pacing_error(std::vector<double>{12}, std::vector<double>{10}));
    EXPECT_EQ(pacing_error(std::vector<double>{1, 10}, std::vector<double>{0, 10}), std::numeric_limits<double>::infinity());
    EXPECT_THROW(pacing_error(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(LambdaVolatility, Examples) {
    EXPECT_EQ(lambda_volatility(std::vector<double>{0.5, 0.5, 0.5}), 0.0);
    EXPECT_DOUBLE_EQ(lambda_volatility(std::vector<double>{0.4, 0.6}), 0.2);
    EXPECT_THROW(lambda_volatility(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(lambda_volatility(std::vector<double>{0.5, 0.0}), std::invalid_argument);
}

TEST(Cpm, Examples) {
    EXPECT_DOUBLE_EQ(*cpm(5.0, 2000), 2.5);
    EXPECT_FALSE(cpm(0.0, 0).has_value());
}

TEST(Delta, SignAndUndefinedCases) {
    MetricsReport base{0.2, 0.1, 2.0, 10};
    MetricsReport test{0.1, 0.15, 2.0, 10};
    const auto d = delta_vs_baseline(test, base);
    EXPECT_DOUBLE_EQ(*d.pacing_error, -50.0);
    EXPECT_DOUBLE_EQ(*d.lambda_volatility, 50.0);
    EXPECT_EQ(*d.cpm, 0.0);
    base.pacing_error = 0.0;
    base.cpm.reset();
    const auto e = delta_vs_baseline(test, base);
    EXPECT_FALSE(e.pacing_error.has_value());
    EXPECT_FALSE(e.cpm.has_value());
}

TEST(Delta, SelfComparisonIsZero) {
    const MetricsReport r{0.3, 0.07, 1.9, 288};
    const auto d = delta_vs_baseline(r, r);
    EXPECT_EQ(*d.pacing_error, 0.0);
    EXPECT_EQ(*d.lambda_volatility, 0.0);
    EXPECT_EQ(*d.cpm, 0.0);
}

namespace {
Telemetry random_telemetry(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::uniform_int_distribution<std::size_t> w(0, 300);
    Telemetry t;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        CycleRecord r;
        r.cycle = i;
        r.lambda = u(rng);
        r.cycle_spend = 30.0 * u(rng);
        cum += r.cycle_spend;
        r.cum_spend = cum;
        r.target_cycle_spend = 26.0;
        r.wins = w(rng);
        r.auctions = r.wins + w(rng);
        t.push_back(r);
    }
    return t;
}
}  // namespace

TEST(ComputeMetrics, AgreesWithOracle) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        const auto t = random_telemetry(rng, 1 + static_cast<std::size_t>(i) % 300);
        const auto got = compute_metrics(t);
        const auto want = oracle::from_telemetry(t);
        EXPECT_TRUE(oracle::rel_close(got.pacing_error, want.pe));
        EXPECT_NEAR(got.lambda_volatility, want.cv, 1e-12 * std::max(1.0, want.cv));
        ASSERT_EQ(got.cpm.has_value(), want.cpm.has_value());
        if (got.cpm) {
            EXPECT_TRUE(oracle::rel_close(*got.cpm, *want.cpm));
        }
    }
}

TEST(ComputeMetrics, InvariantToCommonScaling) {
    std::mt19937_64 rng(5);
    const auto t = random_telemetry(rng, 100);
    auto scaled = t;
    for (auto& r : scaled) {
        r.cycle_spend *= 3.0;
        r.target_cycle_spend *= 3.0;
        r.lambda *= 0.5;
    }
    const auto a = compute_metrics(t);
    const auto b = compute_metrics(scaled);
    EXPECT_TRUE(oracle::rel_close(a.pacing_error, b.pacing_error, 1e-12));
    EXPECT_TRUE(oracle::rel_close(a.lambda_volatility, b.lambda_volatility, 1e-9));
}

TEST(ComputeMetrics, WindowAndSlots) {
    std::mt19937_64 rng(6);
    const auto t = random_telemetry(rng, 40);
    const auto w = compute_metrics(t, {10, 20, 1});
    const Telemetry slice(t.begin() + 10, t.begin() + 20);
    EXPECT_TRUE(oracle::rel_close(w.pacing_error, oracle::from_telemetry(slice).pe));
    EXPECT_EQ(w.n_cycles, 10u);

    const auto s = compute_metrics(t, {0, std::nullopt, 4});
    std::vector<double> actual(10, 0.0);
    std::vector<double> target(10, 0.0);
    for (std::size_t i = 0; i < 40; ++i) {
        actual[i / 4] += t[i].cycle_spend;
        target[i / 4] += t[i].target_cycle_spend;
    }
    EXPECT_TRUE(oracle::rel_close(s.pacing_error, oracle::pacing_error(actual, target)));
}

TEST(ComputeMetrics, EmptyWindow) {
    const auto r = compute_metrics(Telemetry{});
    EXPECT_EQ(r.n_cycles, 0u);
}

TEST(Reentry, FindsFirstCycleInsideTolerance) {
    const AdLine line{"line", 10.0, 7500.0};
    const TrafficModel t = *traffic_preset("high_gain");
    const double lam = equilibrium_lambda(line, t, 26.0);
    Telemetry tel(5);
    for (std::size_t i = 0; i < tel.size(); ++i) {
        tel[i].cycle = i;
        tel[i].desired_rate = 26.0;
        tel[i].lambda = i < 3 ? 0.5 * lam : lam;
    }
    EXPECT_EQ(reentry_cycles(tel, line, t, 1, {}), std::optional<std::size_t>(2));
    tel[4].lambda = tel[3].lambda = 0.5 * lam;
    EXPECT_FALSE(reentry_cycles(tel, line, t, 0, {}).has_value());
}
