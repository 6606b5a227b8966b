#ifndef PACING_CONTROLLERS_HPP
#define PACING_CONTROLLERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace pacing {

/// One control cycle's measurement: the spend rate the plan asks for and the
/// spend rate actually delivered during the cycle.
struct ControlInput {
    double desired_rate = 0.0;
    double observed_rate = 0.0;
};

/// Dead zone around the setpoint. The effective tolerance for a cycle is
/// max(absolute, relative * desired_rate), so it stays strictly positive even
/// when the plan asks for nothing.
struct Tolerance {
    double relative = 0.01;
    double absolute = 1e-9;

    double at(double desired_rate) const { return std::max(absolute, relative * desired_rate); }
};

inline constexpr double kDefaultLambdaMin = 1e-6;

inline double clamp_lambda(double lambda, double lambda_min) {
    return std::clamp(lambda, lambda_min, 1.0);
}

// ---------------------------------------------------------------------------
// Variable-step multiplicative controller (production baseline)
// ---------------------------------------------------------------------------

struct BaselineParams {
    double eta_up = 0.2;
    double eta_down = 0.5;
    double tau = 3.0;
    double alpha_min = 0.01;
    double alpha_max = 0.5;
    double alpha_initial = 0.05;
    std::size_t window_n = 5;
    Tolerance tolerance;
    double lambda_min = kDefaultLambdaMin;

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (!(eta_up > 0.0)) errors.emplace_back("eta_up: must be > 0");
        if (!(eta_down > 0.0 && eta_down < 1.0)) errors.emplace_back("eta_down: must lie in (0, 1)");
        if (!(tau > 1.0)) errors.emplace_back("tau: must be > 1");
        if (!(alpha_min > 0.0)) errors.emplace_back("alpha_min: must be > 0");
        if (!(alpha_max < 1.0)) errors.emplace_back("alpha_max: must be < 1");
        if (!(alpha_min <= alpha_max)) errors.emplace_back("alpha_min: must not exceed alpha_max");
        if (!(alpha_initial >= alpha_min && alpha_initial <= alpha_max)) {
            errors.emplace_back("alpha_initial: must lie in [alpha_min, alpha_max]");
        }
        if (window_n < 2) errors.emplace_back("window_n: must be >= 2");
        if (!(tolerance.absolute > 0.0)) errors.emplace_back("epsilon_abs: must be > 0");
        if (!(tolerance.relative >= 0.0)) errors.emplace_back("epsilon_rel: must be >= 0");
        if (!(lambda_min > 0.0 && lambda_min < 1.0)) errors.emplace_back("lambda_min: must lie in (0, 1)");
        return errors;
    }
};

struct BaselineState {
    double lambda = 0.1;
    double alpha = 0.05;
    /// Most recent applied lambda values, oldest first. Bounded by window_n.
    std::deque<double> trajectory;
};

/// Ratio of path length to net displacement over a trajectory. A trajectory that
/// returns exactly to its start has infinite fluctuation.
inline double fluctuation_factor(std::span<const double> trajectory) {
    if (trajectory.size() < 2) {
        throw std::invalid_argument("fluctuation_factor: need at least two points");
    }
    double distance = 0.0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        distance += std::abs(trajectory[i] - trajectory[i - 1]);
    }
    const double displacement = std::abs(trajectory.back() - trajectory.front());
    if (displacement == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    // a monotone path can land a few ulps either side of 1 after summation
    const double f = distance / displacement;
    return f < 1.0 + 1e-12 ? 1.0 : f;
}

inline double adapt_scale(double alpha, std::span<const double> trajectory, const BaselineParams& params) {
    double next = alpha;
    if (trajectory.size() >= 2) {
        const double f = fluctuation_factor(trajectory);
        if (f <= 1.0) {
            next = alpha * (1.0 + params.eta_up);
        } else if (f > params.tau) {
            next = alpha * (1.0 - params.eta_down);
        }
    }
    return std::clamp(next, params.alpha_min, params.alpha_max);
}

inline BaselineState make_baseline_state(double lambda0, const BaselineParams& params) {
    BaselineState state;
    state.lambda = clamp_lambda(lambda0, params.lambda_min);
    state.alpha = params.alpha_initial;
    state.trajectory.push_back(state.lambda);
    return state;
}

/// Adapts the step size from the recent trajectory, then moves lambda one
/// multiplicative step against the delivery error using the adapted step.
inline BaselineState baseline_update(BaselineState state, const ControlInput& input,
                                     const BaselineParams& params) {
    const std::vector<double> window(state.trajectory.begin(), state.trajectory.end());
    state.alpha = adapt_scale(state.alpha, window, params);

    const double eps = params.tolerance.at(input.desired_rate);
    const double gap = input.observed_rate - input.desired_rate;
    if (std::abs(gap) > eps) {
        const double factor = gap < 0.0 ? 1.0 + state.alpha : 1.0 - state.alpha;
        state.lambda = clamp_lambda(state.lambda * factor, params.lambda_min);
    }

    state.trajectory.push_back(state.lambda);
    while (state.trajectory.size() > params.window_n) {
        state.trajectory.pop_front();
    }
    return state;
}

// ---------------------------------------------------------------------------
// Bucketized hysteresis controller
// ---------------------------------------------------------------------------

/// Gain schedule over relative error magnitude. thresholds[0] must be 0 so every
/// error falls in some band.
struct BandTable {
    std::vector<double> thresholds;
    std::vector<double> scales;

    std::size_t size() const { return thresholds.size(); }

    static BandTable standard() { return {{0.0, 0.05, 0.20}, {0.005, 0.02, 0.08}}; }
    static BandTable slowed() { return {{0.0, 0.05, 0.20}, {0.001, 0.004, 0.016}}; }

    std::vector<std::string> validate(const std::string& field = "bands") const {
        std::vector<std::string> errors;
        if (thresholds.empty()) {
            errors.push_back(field + ".thresholds: must contain at least one band");
        } else if (thresholds.front() != 0.0) {
            errors.push_back(field + ".thresholds: first threshold must be exactly 0 (tau_1 = 0 rule)");
        }
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            if (!std::isfinite(thresholds[i])) {
                errors.push_back(field + ".thresholds[" + std::to_string(i) + "]: must be finite");
            }
            if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
                errors.push_back(field + ".thresholds: must be strictly increasing (index " +
                                 std::to_string(i) + ")");
            }
        }
        if (scales.size() != thresholds.size()) {
            errors.push_back(field + ".scales: length must equal thresholds length");
        }
        for (std::size_t i = 0; i < scales.size(); ++i) {
            if (!(scales[i] > 0.0 && scales[i] < 1.0)) {
                errors.push_back(field + ".scales[" + std::to_string(i) + "]: must lie in (0, 1)");
            }
            if (i > 0 && scales[i] < scales[i - 1]) {
                errors.push_back(field + ".scales: must be nondecreasing (index " + std::to_string(i) + ")");
            }
        }
        return errors;
    }
};

/// Signed relative delivery error, positive when under-delivering. A zero
/// desired rate with any spend counts as full over-delivery.
inline double relative_error(const ControlInput& input) {
    if (input.desired_rate == 0.0) {
        return input.observed_rate > 0.0 ? -1.0 : 0.0;
    }
    return (input.desired_rate - input.observed_rate) / input.desired_rate;
}

/// Zero-based index of the highest band whose threshold does not exceed abs_error.
inline std::size_t select_band(const BandTable& bands, double abs_error) {
    const auto it = std::upper_bound(bands.thresholds.begin(), bands.thresholds.end(), abs_error);
    if (it == bands.thresholds.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(bands.thresholds.begin(), it)) - 1;
}

struct BhcState {
    double lambda = 0.1;
    BandTable bands = BandTable::standard();
    Tolerance tolerance;
    double lambda_min = kDefaultLambdaMin;
};

inline BhcState bhc_update(BhcState state, const ControlInput& input) {
    const double eps = state.tolerance.at(input.desired_rate);
    if (std::abs(input.observed_rate - input.desired_rate) < eps) {
        return state;
    }
    const double direction = input.observed_rate < input.desired_rate ? 1.0 : -1.0;
    const std::size_t k = select_band(state.bands, std::abs(relative_error(input)));
    state.lambda = clamp_lambda(state.lambda * (1.0 + state.bands.scales[k] * direction), state.lambda_min);
    return state;
}

namespace detail {
inline double mean(const std::deque<double>& values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

inline void push_bounded(std::deque<double>& window, double value, std::size_t capacity) {
    window.push_back(value);
    while (window.size() > capacity) {
        window.pop_front();
    }
}
}  // namespace detail

/// BHC fed a moving average of observed spend (measurement low-pass).
struct AofWrapper {
    BhcState inner;
    std::size_t window_m = 20;
    std::deque<double> history;
};

inline AofWrapper aof_update(AofWrapper state, const ControlInput& input) {
    detail::push_bounded(state.history, input.observed_rate, state.window_m);
    const ControlInput filtered{input.desired_rate, detail::mean(state.history)};
    state.inner = bhc_update(std::move(state.inner), filtered);
    return state;
}

/// Where the next ALU candidate starts from: the lambda actually applied last
/// cycle, or the previous raw candidate. Chaining from the raw candidate puts
/// the averaging delay inside the loop and limit-cycles on high-gain lines.
enum class AluChain { Candidate, Applied };

/// BHC whose candidate lambdas are averaged before application (actuation low-pass).
struct AluWrapper {
    BhcState inner;
    std::size_t window_l = 10;
    std::deque<double> candidates;
    AluChain chain = AluChain::Applied;
    double applied = 0.1;
};

inline AluWrapper make_alu(BhcState inner, std::size_t window_l, AluChain chain) {
    AluWrapper alu;
    alu.applied = inner.lambda;
    alu.inner = std::move(inner);
    alu.window_l = window_l;
    alu.chain = chain;
    return alu;
}

inline AluWrapper alu_update(AluWrapper state, const ControlInput& input) {
    state.inner = bhc_update(std::move(state.inner), input);
    detail::push_bounded(state.candidates, state.inner.lambda, state.window_l);
    state.applied = clamp_lambda(detail::mean(state.candidates), state.inner.lambda_min);
    if (state.chain == AluChain::Applied) {
        state.inner.lambda = state.applied;
    }
    return state;
}

// ---------------------------------------------------------------------------
// Uniform controller surface
// ---------------------------------------------------------------------------

enum class ControllerKind { Baseline, Bhc, Aof, Alu, SlowedBands, Hold };

inline const char* to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::Baseline: return "baseline";
        case ControllerKind::Bhc: return "bhc";
        case ControllerKind::Aof: return "aof";
        case ControllerKind::Alu: return "alu";
        case ControllerKind::SlowedBands: return "slowed_bands";
        case ControllerKind::Hold: return "hold";
    }
    return "unknown";
}

inline ControllerKind controller_kind_from_string(const std::string& name) {
    for (auto kind : {ControllerKind::Baseline, ControllerKind::Bhc, ControllerKind::Aof, ControllerKind::Alu,
                      ControllerKind::SlowedBands, ControllerKind::Hold}) {
        if (name == to_string(kind)) return kind;
    }
    throw std::invalid_argument("unknown controller kind '" + name + "'");
}

/// Every tunable constant of every controller variant.
struct ControllerSettings {
    BaselineParams baseline;
    BandTable bands = BandTable::standard();
    BandTable slowed_bands = BandTable::slowed();
    std::size_t aof_window = 20;
    std::size_t alu_window = 10;
    AluChain alu_chain = AluChain::Applied;
    Tolerance tolerance;
    double lambda_min = kDefaultLambdaMin;

    std::vector<std::string> validate() const {
        auto errors = baseline.validate();
        for (auto& e : errors) e = "baseline." + e;
        for (auto& e : bands.validate("bands")) errors.push_back(std::move(e));
        for (auto& e : slowed_bands.validate("slowed_bands")) errors.push_back(std::move(e));
        if (aof_window < 1) errors.emplace_back("aof_window: must be >= 1");
        if (alu_window < 1) errors.emplace_back("alu_window: must be >= 1");
        if (!(tolerance.absolute > 0.0)) errors.emplace_back("epsilon_abs: must be > 0");
        if (!(tolerance.relative >= 0.0)) errors.emplace_back("epsilon_rel: must be >= 0");
        if (!(lambda_min > 0.0 && lambda_min < 1.0)) errors.emplace_back("lambda_min: must lie in (0, 1)");
        return errors;
    }
};

/// Type-erased pacing controller. Owns one variant's state and advances it one
/// control cycle per update().
class Controller {
public:
    struct Hold {
        double lambda;
    };
    struct Baseline {
        BaselineState state;
        BaselineParams params;
    };
    using State = std::variant<Hold, Baseline, BhcState, AofWrapper, AluWrapper>;

    Controller(ControllerKind kind, State state) : kind_(kind), state_(std::move(state)) {}

    static Controller make(ControllerKind kind, double lambda0, const ControllerSettings& settings) {
        const double lambda = clamp_lambda(lambda0, settings.lambda_min);
        auto bhc = [&](const BandTable& bands) {
            return BhcState{lambda, bands, settings.tolerance, settings.lambda_min};
        };
        switch (kind) {
            case ControllerKind::Hold:
                return {kind, Hold{lambda}};
            case ControllerKind::Baseline: {
                BaselineParams params = settings.baseline;
                params.tolerance = settings.tolerance;
                params.lambda_min = settings.lambda_min;
                return {kind, Baseline{make_baseline_state(lambda, params), params}};
            }
            case ControllerKind::Bhc:
                return {kind, bhc(settings.bands)};
            case ControllerKind::SlowedBands:
                return {kind, bhc(settings.slowed_bands)};
            case ControllerKind::Aof:
                return {kind, AofWrapper{bhc(settings.bands), settings.aof_window, {}}};
            case ControllerKind::Alu:
                return {kind, make_alu(bhc(settings.bands), settings.alu_window, settings.alu_chain)};
        }
        throw std::invalid_argument("Controller::make: unknown kind");
    }

    ControllerKind kind() const { return kind_; }

    /// The lambda to apply during the next cycle.
    double lambda() const {
        return std::visit(
            [](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Hold>) {
                    return s.lambda;
                } else if constexpr (std::is_same_v<T, Baseline>) {
                    return s.state.lambda;
                } else if constexpr (std::is_same_v<T, BhcState>) {
                    return s.lambda;
                } else if constexpr (std::is_same_v<T, AofWrapper>) {
                    return s.inner.lambda;
                } else {
                    return s.applied;
                }
            },
            state_);
    }

    double update(const ControlInput& input) {
        std::visit(
            [&](auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Baseline>) {
                    s.state = baseline_update(std::move(s.state), input, s.params);
                } else if constexpr (std::is_same_v<T, BhcState>) {
                    s = bhc_update(std::move(s), input);
                } else if constexpr (std::is_same_v<T, AofWrapper>) {
                    s = aof_update(std::move(s), input);
                } else if constexpr (std::is_same_v<T, AluWrapper>) {
                    s = alu_update(std::move(s), input);
                }
            },
            state_);
        return lambda();
    }

    const State& state() const { return state_; }

private:
    ControllerKind kind_;
    State state_;
};

}  // namespace pacing

#endif  // PACING_CONTROLLERS_HPP
