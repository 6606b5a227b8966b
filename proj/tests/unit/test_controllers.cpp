#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "../oracles.hpp"
#include "pacing/controllers.hpp"

using namespace pacing;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

BaselineParams wide_params() {
    BaselineParams p;
    p.eta_up = 0.5;
    p.eta_down = 0.5;
    p.tau = 3.0;
    p.alpha_min = 0.001;
    p.alpha_max = 0.9;
    return p;
}
}  // namespace

TEST(FluctuationFactor, MatchesBruteForceOnTabulatedTrajectories) {
    const std::vector<std::vector<double>> cases = {{1.0, 2.0, 3.0}, {1.0, 2.0, 1.0}, {0.0, 1.0, 0.5, 1.5}};
    for (const auto& xs : cases) {
        EXPECT_TRUE(oracle::rel_close(fluctuation_factor(xs), oracle::fluctuation(xs)));
    }
    EXPECT_EQ(fluctuation_factor(std::vector<double>{1.0, 2.0, 3.0}), 1.0);
    EXPECT_EQ(fluctuation_factor(std::vector<double>{1.0, 2.0, 1.0}), kInf);
    // path 1 + 0.5 + 1 over displacement 1.5
    EXPECT_NEAR(fluctuation_factor(std::vector<double>{0.0, 1.0, 0.5, 1.5}), 5.0 / 3.0, 1e-15);
}

TEST(FluctuationFactor, NeedsTwoPoints) {
    EXPECT_THROW(fluctuation_factor(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(AdaptScale, SpeedsUpOnMonotoneTrend) {
    EXPECT_NEAR(adapt_scale(0.10, std::vector<double>{1, 2, 3}, wide_params()), 0.15, 1e-15);
}

TEST(AdaptScale, SlowsDownWhenOscillating) {
    EXPECT_NEAR(adapt_scale(0.10, std::vector<double>{1, 2, 1}, wide_params()), 0.05, 1e-15);
}

TEST(AdaptScale, KeepsStepWithInsufficientHistory) {
    EXPECT_EQ(adapt_scale(0.10, std::vector<double>{1.0}, wide_params()), 0.10);
    EXPECT_EQ(adapt_scale(0.10, std::vector<double>{}, wide_params()), 0.10);
}

TEST(AdaptScale, KeepsStepInsideDeadBand) {
    // F = 2: neither <= 1 nor > tau
    EXPECT_EQ(adapt_scale(0.10, std::vector<double>{0.0, 2.0, 1.0}, wide_params()), 0.10);
}

TEST(AdaptScale, ClampsToBounds) {
    auto p = wide_params();
    p.alpha_max = 0.12;
    EXPECT_EQ(adapt_scale(0.10, std::vector<double>{1, 2, 3}, p), 0.12);
    p.alpha_min = 0.08;
    EXPECT_EQ(adapt_scale(0.10, std::vector<double>{1, 2, 1}, p), 0.08);
}

TEST(BaselineUpdate, NoMoveWithinTolerance) {
    auto p = wide_params();
    BaselineState s{0.5, 0.1, {0.5}};
    s = baseline_update(s, {1.0, 1.0}, p);
    EXPECT_EQ(s.lambda, 0.5);
    // |r_hat - r| == eps exactly still counts as within tolerance
    p.tolerance = {0.0, 0.25};
    BaselineState t{0.5, 0.1, {0.5}};
    t = baseline_update(t, {1.0, 1.25}, p);
    EXPECT_EQ(t.lambda, 0.5);
}

TEST(BaselineUpdate, UnderDeliveryRaisesLambda) {
    BaselineState s{0.5, 0.1, {0.5}};
    s = baseline_update(s, {1.0, 0.5}, wide_params());
    EXPECT_TRUE(oracle::rel_close(s.lambda, 0.55));
    EXPECT_EQ(s.alpha, 0.1);
    ASSERT_EQ(s.trajectory.size(), 2u);
    EXPECT_EQ(s.trajectory.back(), s.lambda);
}

TEST(BaselineUpdate, OverDeliveryLowersLambda) {
    BaselineState s{0.5, 0.1, {0.5}};
    s = baseline_update(s, {1.0, 2.0}, wide_params());
    EXPECT_TRUE(oracle::rel_close(s.lambda, 0.45));
}

TEST(BaselineUpdate, UsesAdaptedStep) {
    // monotone history: alpha grows to 0.15 first, then lambda moves by it
    BaselineState s{0.3, 0.1, {0.1, 0.2, 0.3}};
    s = baseline_update(s, {1.0, 0.5}, wide_params());
    EXPECT_NEAR(s.alpha, 0.15, 1e-15);
    EXPECT_TRUE(oracle::rel_close(s.lambda, 0.3 * 1.15));
}

TEST(BaselineUpdate, TrajectoryIsBounded) {
    auto p = wide_params();
    p.window_n = 3;
    auto s = make_baseline_state(0.2, p);
    for (int i = 0; i < 10; ++i) s = baseline_update(s, {1.0, 0.1}, p);
    EXPECT_EQ(s.trajectory.size(), 3u);
}

TEST(BaselineUpdate, ClampsLambdaToUnitInterval) {
    auto p = wide_params();
    BaselineState s{0.95, 0.5, {0.95}};
    s = baseline_update(s, {1.0, 0.0}, p);
    EXPECT_EQ(s.lambda, 1.0);
}

TEST(RelativeError, Examples) {
    EXPECT_EQ(relative_error({1.0, 1.0}), 0.0);
    EXPECT_EQ(relative_error({1.0, 0.5}), 0.5);
    EXPECT_EQ(relative_error({1.0, 2.0}), -1.0);
}

TEST(RelativeError, ZeroDesiredRate) {
    EXPECT_EQ(relative_error({0.0, 0.3}), -1.0);
    EXPECT_EQ(relative_error({0.0, 0.0}), 0.0);
}

TEST(SelectBand, MatchesLinearScan) {
    const BandTable bands = BandTable::standard();
    EXPECT_EQ(select_band(bands, 0.0), 0u);
    EXPECT_EQ(select_band(bands, 0.07), 1u);
    EXPECT_EQ(select_band(bands, 0.50), 2u);
    EXPECT_EQ(select_band(bands, 0.05), 1u);  // threshold itself belongs to the upper band
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double e = u(rng);
        EXPECT_EQ(select_band(bands, e), oracle::band(bands.thresholds, e));
    }
}

TEST(BandTable, Validation) {
    EXPECT_TRUE(BandTable::standard().validate().empty());
    EXPECT_TRUE(BandTable::slowed().validate().empty());
    EXPECT_FALSE((BandTable{{0.05, 0.2}, {0.01, 0.02}}.validate().empty()));
    EXPECT_FALSE((BandTable{{0.0, 0.2, 0.1}, {0.01, 0.02, 0.03}}.validate().empty()));
    EXPECT_FALSE((BandTable{{0.0, 0.2}, {0.01}}.validate().empty()));
    EXPECT_FALSE((BandTable{{0.0, 0.2}, {0.01, 1.0}}.validate().empty()));
    EXPECT_FALSE((BandTable{{0.0, 0.2}, {0.05, 0.01}}.validate().empty()));
}

TEST(BhcUpdate, Examples) {
    BhcState s{0.4, BandTable::standard(), {}, kDefaultLambdaMin};
    EXPECT_EQ(bhc_update(s, {1.0, 1.0}).lambda, 0.4);
    EXPECT_TRUE(oracle::rel_close(bhc_update(s, {1.0, 0.5}).lambda, 0.432));
    EXPECT_TRUE(oracle::rel_close(bhc_update(s, {1.0, 2.0}).lambda, 0.368));
}

TEST(BhcUpdate, StrictToleranceComparator) {
    BhcState s{0.4, BandTable::standard(), {0.0, 0.25}, kDefaultLambdaMin};
    // |o - d| == eps is outside the dead zone
    EXPECT_LT(bhc_update(s, {1.0, 1.25}).lambda, 0.4);
    EXPECT_EQ(bhc_update(s, {1.0, 1.2}).lambda, 0.4);
}

TEST(BhcUpdate, ZeroDesiredWithSpendDrivesLambdaDown) {
    BhcState s{0.4, BandTable::standard(), {}, kDefaultLambdaMin};
    EXPECT_TRUE(oracle::rel_close(bhc_update(s, {0.0, 0.3}).lambda, 0.4 * 0.92));
    EXPECT_EQ(bhc_update(s, {0.0, 0.0}).lambda, 0.4);
}

TEST(AofUpdate, WindowOfOneIsPlainBhc) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    BhcState plain{0.3, BandTable::standard(), {}, kDefaultLambdaMin};
    AofWrapper aof{plain, 1, {}};
    for (int i = 0; i < 500; ++i) {
        const ControlInput in{u(rng), u(rng)};
        plain = bhc_update(plain, in);
        aof = aof_update(aof, in);
        ASSERT_EQ(aof.inner.lambda, plain.lambda);
    }
}

TEST(AofUpdate, AveragesObservedRate) {
    BhcState inner{0.4, BandTable::standard(), {}, kDefaultLambdaMin};
    AofWrapper aof{inner, 2, {1.0}};
    aof = aof_update(aof, {2.5, 3.0});
    EXPECT_EQ(bhc_update(inner, {2.5, 2.0}).lambda, aof.inner.lambda);
    EXPECT_EQ(aof.history.size(), 2u);
}

TEST(AofUpdate, ConstantObservationsAverageToConstant) {
    AofWrapper aof{{0.4, BandTable::standard(), {}, kDefaultLambdaMin}, 5, {}};
    for (int i = 0; i < 12; ++i) aof = aof_update(aof, {1.0, 1.0});
    EXPECT_EQ(aof.inner.lambda, 0.4);
    EXPECT_EQ(aof.history.size(), 5u);
}

TEST(AluUpdate, WindowOfOneAppliesCandidate) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto chain : {AluChain::Candidate, AluChain::Applied}) {
        BhcState plain{0.3, BandTable::standard(), {}, kDefaultLambdaMin};
        auto alu = make_alu(plain, 1, chain);
        for (int i = 0; i < 500; ++i) {
            const ControlInput in{u(rng), u(rng)};
            plain = bhc_update(plain, in);
            alu = alu_update(alu, in);
            ASSERT_EQ(alu.applied, plain.lambda);
        }
    }
}

TEST(AluUpdate, AppliesMeanOfCandidates) {
    BhcState inner{0.4, {{0.0, 0.05, 0.20}, {0.005, 0.02, 0.1}}, {}, kDefaultLambdaMin};
    AluWrapper alu = make_alu(inner, 2, AluChain::Candidate);
    alu.candidates = {0.40};
    alu = alu_update(alu, {1.0, 0.5});
    EXPECT_TRUE(oracle::rel_close(alu.inner.lambda, 0.44));
    EXPECT_TRUE(oracle::rel_close(alu.applied, 0.42));
}

TEST(AluUpdate, ChainFromAppliedRestartsFromAverage) {
    BhcState inner{0.4, {{0.0, 0.05, 0.20}, {0.005, 0.02, 0.1}}, {}, kDefaultLambdaMin};
    AluWrapper alu = make_alu(inner, 2, AluChain::Applied);
    alu.candidates = {0.40};
    alu = alu_update(alu, {1.0, 0.5});
    EXPECT_TRUE(oracle::rel_close(alu.applied, 0.42));
    EXPECT_EQ(alu.inner.lambda, alu.applied);
    alu = alu_update(alu, {1.0, 0.5});
    // next candidate is 0.42 * 1.1, averaged with 0.44
    EXPECT_TRUE(oracle::rel_close(alu.applied, 0.5 * (0.44 + 0.42 * 1.1)));
}

TEST(AluUpdate, SteadySetpointConverges) {
    auto alu = make_alu({0.4, BandTable::standard(), {}, kDefaultLambdaMin}, 10, AluChain::Candidate);
    alu.candidates = {0.1, 0.2, 0.3};
    for (int i = 0; i < 10; ++i) alu = alu_update(alu, {1.0, 1.0});
    EXPECT_DOUBLE_EQ(alu.applied, 0.4);
}

TEST(Controller, HoldNeverMoves) {
    auto c = Controller::make(ControllerKind::Hold, 0.3, {});
    for (int i = 0; i < 5; ++i) EXPECT_EQ(c.update({1.0, 0.0}), 0.3);
}

TEST(Controller, KindsRoundTripThroughNames) {
    for (auto k : {ControllerKind::Baseline, ControllerKind::Bhc, ControllerKind::Aof, ControllerKind::Alu,
                   ControllerKind::SlowedBands, ControllerKind::Hold}) {
        EXPECT_EQ(controller_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(controller_kind_from_string("pid"), std::invalid_argument);
}

TEST(Controller, SlowedBandsUsesDampedSchedule) {
    auto c = Controller::make(ControllerKind::SlowedBands, 0.5, {});
    EXPECT_TRUE(oracle::rel_close(c.update({1.0, 0.5}), 0.5 * 1.016));
}

TEST(Properties, LambdaStaysInRangeAndMovesTheRightWay) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ControllerSettings settings;
    for (auto kind : {ControllerKind::Baseline, ControllerKind::Bhc, ControllerKind::Aof, ControllerKind::Alu,
                      ControllerKind::SlowedBands}) {
        auto c = Controller::make(kind, u(rng), settings);
        for (int i = 0; i < 2000; ++i) {
            const double before = c.lambda();
            const double d = 2.0 * u(rng);
            const double o = 2.0 * u(rng);
            const double after = c.update({d, o});
            ASSERT_GE(after, settings.lambda_min);
            ASSERT_LE(after, 1.0);
            if (kind == ControllerKind::Baseline || kind == ControllerKind::Bhc ||
                kind == ControllerKind::SlowedBands) {
                const double eps = settings.tolerance.at(d);
                if (o < d - eps) {
                    ASSERT_GE(after, before);
                }
                if (o > d + eps) {
                    ASSERT_LE(after, before);
                }
            }
        }
    }
}
