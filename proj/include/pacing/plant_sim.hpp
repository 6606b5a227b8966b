#ifndef PACING_PLANT_SIM_HPP
#define PACING_PLANT_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacing/auction.hpp"
#include "pacing/controllers.hpp"
#include "pacing/rng.hpp"

namespace pacing {

/// Stochastic auction traffic seen by one ad line in one control cycle.
///
/// Arrivals are Poisson (or exactly `arrivals_per_cycle` when deterministic).
/// Each opportunity has p(event) ~ U[p_lo, p_hi] and a highest competing bid
/// ~ LogNormal(competitor_log_mu, competitor_log_sigma); sigma = 0 gives a
/// constant competitor bid of exp(mu).
struct TrafficModel {
    double arrivals_per_cycle = 1000.0;
    bool deterministic_arrivals = false;
    double competitor_log_mu = 0.0;
    double competitor_log_sigma = 0.5;
    double p_lo = 0.0;
    double p_hi = 0.1;
    PricingRule pricing = PricingRule::SecondPrice;

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (!(std::isfinite(arrivals_per_cycle) && arrivals_per_cycle >= 0.0)) {
            errors.emplace_back("arrivals_per_cycle: must be finite and >= 0");
        }
        if (!std::isfinite(competitor_log_mu)) errors.emplace_back("competitor_log_mu: must be finite");
        if (!(std::isfinite(competitor_log_sigma) && competitor_log_sigma >= 0.0)) {
            errors.emplace_back("competitor_log_sigma: must be finite and >= 0");
        }
        if (!(p_lo >= 0.0 && p_lo <= 1.0)) errors.emplace_back("p_lo: must lie in [0, 1]");
        if (!(p_hi >= 0.0 && p_hi <= 1.0)) errors.emplace_back("p_hi: must lie in [0, 1]");
        if (!(p_lo <= p_hi)) errors.emplace_back("p_lo: must not exceed p_hi");
        return errors;
    }
};

/// How the total budget is meant to be spread over the horizon. Empty weights
/// means an even plan.
struct SpendPlan {
    double total_budget = 1.0;
    std::size_t horizon_cycles = 288;
    std::vector<double> weights;

    static SpendPlan even(double budget, std::size_t horizon) { return {budget, horizon, {}}; }

    /// Plan whose per-cycle weight jumps by `factor` at cycle `at`.
    static SpendPlan step(double budget, std::size_t horizon, std::size_t at, double factor) {
        std::vector<double> w(horizon, 1.0);
        for (std::size_t i = at; i < horizon; ++i) w[i] = factor;
        return {budget, horizon, std::move(w)};
    }

    double weight(std::size_t cycle) const { return weights.empty() ? 1.0 : weights[cycle]; }

    /// Ideal spend during `cycle` under the static plan.
    double target_cycle_spend(std::size_t cycle) const {
        if (weights.empty()) return total_budget / static_cast<double>(horizon_cycles);
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        return total_budget * weights[cycle] / total;
    }

    /// Ideal cumulative spend at the end of `cycle` (inclusive).
    double target_cumulative(std::size_t cycle) const {
        if (cycle + 1 >= horizon_cycles) return total_budget;
        if (weights.empty()) {
            return total_budget * static_cast<double>(cycle + 1) / static_cast<double>(horizon_cycles);
        }
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        const double upto = std::accumulate(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(cycle + 1), 0.0);
        return std::min(total_budget, total_budget * upto / total);
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (!(std::isfinite(total_budget) && total_budget > 0.0)) errors.emplace_back("budget_total: must be > 0");
        if (horizon_cycles == 0) errors.emplace_back("horizon: must be > 0");
        if (!weights.empty()) {
            if (weights.size() != horizon_cycles) errors.emplace_back("plan.weights: length must equal horizon");
            double sum = 0.0;
            for (double w : weights) {
                if (!(std::isfinite(w) && w >= 0.0)) {
                    errors.emplace_back("plan.weights: every weight must be finite and >= 0");
                    break;
                }
                sum += w;
            }
            if (!(sum > 0.0)) errors.emplace_back("plan.weights: must sum to a positive value");
        }
        return errors;
    }
};

/// Spend rate the plan asks for in `cycle` given what is left of the budget.
inline double desired_rate(const SpendPlan& plan, std::size_t cycle, double budget_remaining) {
    if (cycle >= plan.horizon_cycles || budget_remaining <= 0.0) return 0.0;
    if (plan.weights.empty()) {
        return budget_remaining / static_cast<double>(plan.horizon_cycles - cycle);
    }
    const double rest = std::accumulate(plan.weights.begin() + static_cast<std::ptrdiff_t>(cycle),
                                        plan.weights.end(), 0.0);
    if (!(rest > 0.0)) return 0.0;
    return budget_remaining * plan.weights[cycle] / rest;
}

struct CycleOutcome {
    double spend = 0.0;
    std::size_t entered = 0;
    std::size_t won = 0;
};

/// Runs one control cycle of auctions at a fixed lambda. The last charge that
/// would overrun the budget is truncated to what remains; later opportunities
/// are skipped.
template <class Rng>
CycleOutcome run_cycle(const AdLine& adline, double lambda, const TrafficModel& traffic, Rng& rng,
                       double budget_remaining) {
    CycleOutcome out;
    std::size_t arrivals = 0;
    if (traffic.deterministic_arrivals) {
        arrivals = static_cast<std::size_t>(std::llround(traffic.arrivals_per_cycle));
    } else if (traffic.arrivals_per_cycle > 0.0) {
        arrivals = static_cast<std::size_t>(std::poisson_distribution<std::int64_t>(traffic.arrivals_per_cycle)(rng));
    }
    if (budget_remaining <= 0.0) return out;

    std::uniform_real_distribution<double> p_dist(traffic.p_lo, traffic.p_hi);
    std::normal_distribution<double> z_dist(0.0, 1.0);
    for (std::size_t i = 0; i < arrivals; ++i) {
        Opportunity opp;
        opp.p_event = traffic.p_lo == traffic.p_hi ? traffic.p_lo : p_dist(rng);
        opp.competitor_bid = std::exp(traffic.competitor_log_mu + traffic.competitor_log_sigma * z_dist(rng));

        const double bid = paced_bid(lambda, final_bid(adline.max_bid, opp.p_event));
        const AuctionOutcome outcome = run_auction(bid, opp, traffic.pricing);
        ++out.entered;
        if (!outcome.won) continue;
        ++out.won;
        if (outcome.price >= budget_remaining - out.spend) {
            out.spend = budget_remaining;
            break;
        }
        out.spend += outcome.price;
    }
    return out;
}

namespace detail {
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// E[price * 1{win}] for a single opportunity with own bid `bid`.
inline double expected_charge(double bid, const TrafficModel& t) {
    if (!(bid > 0.0)) return 0.0;
    const double mu = t.competitor_log_mu;
    const double sigma = t.competitor_log_sigma;
    if (sigma == 0.0) {
        const double c = std::exp(mu);
        if (!(bid > c)) return 0.0;
        return t.pricing == PricingRule::FirstPrice ? bid : c;
    }
    const double lb = std::log(bid);
    if (t.pricing == PricingRule::FirstPrice) {
        return bid * normal_cdf((lb - mu) / sigma);
    }
    return std::exp(mu + 0.5 * sigma * sigma) * normal_cdf((lb - mu - sigma * sigma) / sigma);
}
}  // namespace detail

/// Mean-field cycle spend at a fixed lambda, ignoring the budget cap. Integrates
/// the lognormal partial expectation over the p(event) range with Simpson's rule.
inline double expected_cycle_spend(const AdLine& adline, double lambda, const TrafficModel& traffic) {
    const double arrivals = traffic.deterministic_arrivals ? std::round(traffic.arrivals_per_cycle)
                                                           : traffic.arrivals_per_cycle;
    if (traffic.p_lo == traffic.p_hi) {
        return arrivals * detail::expected_charge(lambda * adline.max_bid * traffic.p_lo, traffic);
    }
    constexpr int kIntervals = 512;
    const double h = (traffic.p_hi - traffic.p_lo) / kIntervals;
    double acc = 0.0;
    for (int i = 0; i <= kIntervals; ++i) {
        const double p = traffic.p_lo + h * i;
        const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * detail::expected_charge(lambda * adline.max_bid * p, traffic);
    }
    return arrivals * acc * h / 3.0 / (traffic.p_hi - traffic.p_lo);
}

/// Lambda at which the mean-field plant delivers `desired` per cycle, found by
/// bisection in log-lambda. Returns 1 when even full bids cannot reach it.
inline double equilibrium_lambda(const AdLine& adline, const TrafficModel& traffic, double desired,
                                 double lambda_min = kDefaultLambdaMin) {
    if (expected_cycle_spend(adline, 1.0, traffic) <= desired) return 1.0;
    if (expected_cycle_spend(adline, lambda_min, traffic) >= desired) return lambda_min;
    double lo = std::log(lambda_min);
    double hi = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (expected_cycle_spend(adline, std::exp(mid), traffic) < desired) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

struct CycleRecord {
    std::size_t cycle = 0;
    double lambda = 0.0;
    double desired_rate = 0.0;
    double cycle_spend = 0.0;
    double cum_spend = 0.0;
    double target_cycle_spend = 0.0;
    double target_cum_spend = 0.0;
    std::size_t auctions = 0;
    std::size_t wins = 0;
};

using Telemetry = std::vector<CycleRecord>;

struct ScenarioResult {
    Telemetry telemetry;
    std::uint64_t seed = 0;
    ControllerKind controller_kind = ControllerKind::Hold;
};

/// Closes the loop: each cycle applies the controller's lambda to fresh traffic,
/// records what happened and feeds (desired, observed) back. Stops at the
/// horizon or when the budget is gone.
inline ScenarioResult simulate(const AdLine& adline, Controller controller, const SpendPlan& plan,
                               const TrafficModel& traffic, std::uint64_t seed) {
    ScenarioResult result;
    result.seed = seed;
    result.controller_kind = controller.kind();
    result.telemetry.reserve(plan.horizon_cycles);

    const double budget = std::min(adline.budget_total, plan.total_budget);
    double cum = 0.0;
    for (std::size_t t = 0; t < plan.horizon_cycles; ++t) {
        const double remaining = budget - cum;
        const double desired = desired_rate(plan, t, remaining);
        const double lambda = controller.lambda();

        auto rng = substream(seed, t);
        const CycleOutcome out = run_cycle(adline, lambda, traffic, rng, remaining);
        cum = out.spend >= remaining ? budget : std::min(budget, cum + out.spend);

        result.telemetry.push_back(CycleRecord{t, lambda, desired, out.spend, cum, plan.target_cycle_spend(t),
                                               plan.target_cumulative(t), out.entered, out.won});
        if (cum >= budget) break;
        controller.update(ControlInput{desired, out.spend});
    }
    return result;
}

/// Noise-free plant with spend = gain * lambda, for limit-cycle analysis.
inline std::vector<double> run_linear_plant(Controller controller, double gain, double desired, std::size_t cycles) {
    std::vector<double> lambdas;
    lambdas.reserve(cycles);
    for (std::size_t t = 0; t < cycles; ++t) {
        const double lambda = controller.lambda();
        lambdas.push_back(lambda);
        controller.update(ControlInput{desired, gain * lambda});
    }
    return lambdas;
}

}  // namespace pacing

#endif  // PACING_PLANT_SIM_HPP
