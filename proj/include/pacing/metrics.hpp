#ifndef PACING_METRICS_HPP
#define PACING_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pacing/plant_sim.hpp"

namespace pacing {

struct MetricsReport {
    double pacing_error = 0.0;
    double lambda_volatility = 0.0;
    std::optional<double> cpm;
    std::size_t n_cycles = 0;
};

/// Mean relative absolute deviation of actual from target spend per slot.
/// Slots where both are zero are skipped; spend against a zero target makes
/// the whole metric infinite.
inline double pacing_error(std::span<const double> actual, std::span<const double> target) {
    if (actual.size() != target.size()) {
        throw std::invalid_argument("pacing_error: actual and target lengths differ");
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < actual.size(); ++j) {
        if (target[j] == 0.0) {
            if (actual[j] == 0.0) continue;
            return std::numeric_limits<double>::infinity();
        }
        sum += std::abs(actual[j] - target[j]) / target[j];
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Coefficient of variation (population std over mean) of a lambda trace.
inline double lambda_volatility(std::span<const double> lambdas) {
    if (lambdas.empty()) {
        throw std::invalid_argument("lambda_volatility: empty series");
    }
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : lambdas) {
        if (!(x > 0.0)) {
            throw std::invalid_argument("lambda_volatility: lambdas must be > 0");
        }
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    return std::sqrt(std::max(0.0, m2 / static_cast<double>(n))) / mean;
}

/// Cost per thousand won impressions; absent when nothing was won.
inline std::optional<double> cpm(double total_spend, std::size_t impressions_won) {
    if (impressions_won == 0) return std::nullopt;
    return 1000.0 * total_spend / static_cast<double>(impressions_won);
}

struct MetricsDelta {
    std::optional<double> pacing_error;
    std::optional<double> lambda_volatility;
    std::optional<double> cpm;
};

/// Percentage change of each metric relative to the baseline. Negative is an
/// improvement for pacing error and volatility.
inline MetricsDelta delta_vs_baseline(const MetricsReport& test, const MetricsReport& baseline) {
    auto pct = [](std::optional<double> t, std::optional<double> b) -> std::optional<double> {
        if (!t || !b || *b == 0.0 || !std::isfinite(*b) || !std::isfinite(*t)) return std::nullopt;
        return 100.0 * (*t - *b) / *b;
    };
    return {pct(test.pacing_error, baseline.pacing_error),
            pct(test.lambda_volatility, baseline.lambda_volatility), pct(test.cpm, baseline.cpm)};
}

/// Which cycles count toward the metrics, and how many cycles make one pacing-error slot.
struct MetricsWindow {
    std::size_t start = 0;
    std::optional<std::size_t> end;  // exclusive
    std::size_t pe_slot_cycles = 1;
};

inline MetricsReport compute_metrics(const Telemetry& telemetry, const MetricsWindow& window = {}) {
    const std::size_t begin = std::min(window.start, telemetry.size());
    const std::size_t end = std::clamp(window.end.value_or(telemetry.size()), begin, telemetry.size());
    const std::size_t slot = std::max<std::size_t>(1, window.pe_slot_cycles);

    std::vector<double> actual;
    std::vector<double> target;
    std::vector<double> lambdas;
    double spend = 0.0;
    std::size_t wins = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const CycleRecord& r = telemetry[i];
        if ((i - begin) % slot == 0) {
            actual.push_back(0.0);
            target.push_back(0.0);
        }
        actual.back() += r.cycle_spend;
        target.back() += r.target_cycle_spend;
        lambdas.push_back(r.lambda);
        spend += r.cycle_spend;
        wins += r.wins;
    }

    MetricsReport report;
    report.n_cycles = end - begin;
    if (report.n_cycles == 0) return report;
    report.pacing_error = pacing_error(actual, target);
    report.lambda_volatility = lambda_volatility(lambdas);
    report.cpm = cpm(spend, wins);
    return report;
}

/// Cycles from `from_cycle` until the lambda applied in a cycle would deliver,
/// on the mean-field plant, within the tolerance band of that cycle's desired
/// rate. Uses expected rather than realised spend so shot noise in the auctions
/// does not decide the answer. nullopt if it never happens within the trace.
inline std::optional<std::size_t> reentry_cycles(const Telemetry& telemetry, const AdLine& adline,
                                                 const TrafficModel& traffic, std::size_t from_cycle,
                                                 const Tolerance& tolerance) {
    for (std::size_t i = from_cycle; i < telemetry.size(); ++i) {
        const CycleRecord& r = telemetry[i];
        const double expected = expected_cycle_spend(adline, r.lambda, traffic);
        if (std::abs(expected - r.desired_rate) < tolerance.at(r.desired_rate)) {
            return i - from_cycle;
        }
    }
    return std::nullopt;
}

}  // namespace pacing

#endif  // PACING_METRICS_HPP
