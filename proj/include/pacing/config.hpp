#ifndef PACING_CONFIG_HPP
#define PACING_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacing/controllers.hpp"
#include "pacing/metrics.hpp"
#include "pacing/plant_sim.hpp"

namespace pacing {

/// Named plant presets. "high_gain" is the small-budget / large-audience line:
/// spend elasticity to lambda is about 4.4 around its operating point.
/// "deterministic" has fixed arrivals and a constant competing bid; about half
/// the opportunities are won at the default line's operating point.
inline std::optional<TrafficModel> traffic_preset(const std::string& name) {
    if (name == "high_gain") {
        return TrafficModel{4000.0, false, -1.0, 0.5, 0.01, 0.05, PricingRule::SecondPrice};
    }
    if (name == "nominal") {
        return TrafficModel{1000.0, false, -1.0, 1.0, 0.01, 0.05, PricingRule::SecondPrice};
    }
    if (name == "deterministic") {
        return TrafficModel{20000.0, true, std::log(0.0026), 0.0, 0.01, 0.05, PricingRule::SecondPrice};
    }
    return std::nullopt;
}

enum class PlanShape { Even, Weighted, Step };

struct ScenarioConfig {
    std::string name = "scenario";
    std::string description;
    AdLine adline{"line", 10.0, 7500.0};
    std::size_t horizon = 288;

    PlanShape plan_shape = PlanShape::Even;
    std::vector<double> plan_weights;
    double step_at_fraction = 0.5;
    double step_factor = 2.0;

    std::string traffic_preset_name;
    TrafficModel traffic = *traffic_preset("high_gain");

    ControllerKind test_controller = ControllerKind::Bhc;
    ControllerKind baseline_controller = ControllerKind::Baseline;
    ControllerSettings controllers;

    /// nullopt: start at the mean-field equilibrium for the first cycle's desired rate.
    std::optional<double> initial_lambda = 0.1;

    std::vector<std::uint64_t> seeds{1};
    MetricsWindow metrics;

    /// Canonical bytes this config came from; hashed into the metadata sidecar.
    std::string source_text;

    std::size_t step_cycle() const {
        return static_cast<std::size_t>(std::llround(step_at_fraction * static_cast<double>(horizon)));
    }

    SpendPlan plan() const {
        switch (plan_shape) {
            case PlanShape::Even: return SpendPlan::even(adline.budget_total, horizon);
            case PlanShape::Weighted: return SpendPlan{adline.budget_total, horizon, plan_weights};
            case PlanShape::Step: return SpendPlan::step(adline.budget_total, horizon, step_cycle(), step_factor);
        }
        return SpendPlan::even(adline.budget_total, horizon);
    }

    double lambda0() const {
        if (initial_lambda) return clamp_lambda(*initial_lambda, controllers.lambda_min);
        const SpendPlan p = plan();
        return equilibrium_lambda(adline, traffic, desired_rate(p, 0, p.total_budget), controllers.lambda_min);
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (name.empty()) errors.emplace_back("name: must not be empty");
        if (name.find_first_of("/\\ ") != std::string::npos) {
            errors.emplace_back("name: must not contain spaces or path separators");
        }
        if (!(adline.max_bid > 0.0 && std::isfinite(adline.max_bid))) errors.emplace_back("adline.max_bid: must be > 0");
        if (plan_shape == PlanShape::Step) {
            if (!(step_at_fraction > 0.0 && step_at_fraction < 1.0)) {
                errors.emplace_back("plan.at_fraction: must lie in (0, 1)");
            }
            if (!(step_factor > 0.0 && std::isfinite(step_factor))) errors.emplace_back("plan.factor: must be > 0");
        }
        for (auto& e : plan().validate()) {
            errors.push_back(e.rfind("budget_total", 0) == 0 ? "adline." + e : e);
        }
        for (auto& e : traffic.validate()) errors.push_back("traffic." + e);
        for (auto& e : controllers.validate()) errors.push_back("controller_settings." + e);
        if (initial_lambda && !(*initial_lambda > 0.0 && *initial_lambda <= 1.0)) {
            errors.emplace_back("initial_lambda.value: must lie in (0, 1]");
        }
        if (metrics.pe_slot_cycles < 1) errors.emplace_back("metrics.pe_slot_cycles: must be >= 1");
        if (metrics.start >= horizon) errors.emplace_back("metrics.window_start: must be < horizon");
        if (metrics.end && (*metrics.end > horizon || *metrics.end <= metrics.start)) {
            errors.emplace_back("metrics.window_end: must lie in (window_start, horizon]");
        }
        return errors;
    }
};

/// Raised when a config cannot be used. Carries every problem found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string out = "invalid configuration:";
        for (const auto& e : errors) out += "\n  - " + e;
        return out;
    }
    std::vector<std::string> errors_;
};

namespace detail {

using nlohmann::json;

/// Walks a JSON object, collecting type errors and unknown keys with their field paths.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (!obj_.is_object()) {
            errors_.push_back(path_ + ": expected an object");
        }
    }

    ~ObjectReader() {
        if (!obj_.is_object()) return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) errors_.push_back(field(it.key()) + ": unknown key");
        }
    }

    ObjectReader(const ObjectReader&) = delete;
    ObjectReader& operator=(const ObjectReader&) = delete;

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.is_object() && obj_.contains(key) && !obj_.at(key).is_null();
    }

    const json& at(const std::string& key) { return obj_.at(key); }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_number()) {
            errors_.push_back(field(key) + ": expected a number");
            return;
        }
        out = v.get<double>();
    }

    void count(const std::string& key, std::size_t& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            errors_.push_back(field(key) + ": expected a non-negative integer");
            return;
        }
        out = v.get<std::size_t>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_boolean()) {
            errors_.push_back(field(key) + ": expected true or false");
            return;
        }
        out = v.get<bool>();
    }

    void text(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_string()) {
            errors_.push_back(field(key) + ": expected a string");
            return;
        }
        out = v.get<std::string>();
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_array()) {
            errors_.push_back(field(key) + ": expected an array of numbers");
            return;
        }
        out.clear();
        for (const auto& x : v) {
            if (!x.is_number()) {
                errors_.push_back(field(key) + ": expected an array of numbers");
                return;
            }
            out.push_back(x.get<double>());
        }
    }

    std::vector<std::string>& errors() { return errors_; }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

inline void read_bands(ObjectReader& parent, const std::string& key, BandTable& bands) {
    if (!parent.has(key)) return;
    ObjectReader r(parent.at(key), parent.field(key), parent.errors());
    r.numbers("thresholds", bands.thresholds);
    r.numbers("scales", bands.scales);
}

inline void read_controller_kind(ObjectReader& r, const std::string& key, ControllerKind& out) {
    std::string name;
    r.text(key, name);
    if (name.empty()) return;
    try {
        out = controller_kind_from_string(name);
    } catch (const std::invalid_argument&) {
        r.errors().push_back(r.field(key) + ": unknown controller kind '" + name +
                             "' (expected baseline, bhc, aof, alu, slowed_bands or hold)");
    }
}

inline void read_controller_settings(ObjectReader& parent, ControllerSettings& s) {
    if (!parent.has("controller_settings")) return;
    ObjectReader r(parent.at("controller_settings"), "controller_settings", parent.errors());
    r.number("lambda_min", s.lambda_min);
    r.number("epsilon_rel", s.tolerance.relative);
    r.number("epsilon_abs", s.tolerance.absolute);
    r.count("aof_window", s.aof_window);
    r.count("alu_window", s.alu_window);
    std::string chain;
    r.text("alu_chain", chain);
    if (chain == "candidate") {
        s.alu_chain = AluChain::Candidate;
    } else if (chain == "applied") {
        s.alu_chain = AluChain::Applied;
    } else if (!chain.empty()) {
        r.errors().push_back("controller_settings.alu_chain: expected 'candidate' or 'applied'");
    }
    read_bands(r, "bands", s.bands);
    read_bands(r, "slowed_bands", s.slowed_bands);
    if (r.has("baseline")) {
        ObjectReader b(r.at("baseline"), "controller_settings.baseline", r.errors());
        b.number("eta_up", s.baseline.eta_up);
        b.number("eta_down", s.baseline.eta_down);
        b.number("tau", s.baseline.tau);
        b.number("alpha_min", s.baseline.alpha_min);
        b.number("alpha_max", s.baseline.alpha_max);
        b.number("alpha_initial", s.baseline.alpha_initial);
        b.count("window_n", s.baseline.window_n);
    }
    s.baseline.tolerance = s.tolerance;
    s.baseline.lambda_min = s.lambda_min;
}

}  // namespace detail

/// Parses and validates a scenario from JSON text. Throws ConfigError listing
/// every problem found.
inline ScenarioConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }

    ScenarioConfig cfg;
    cfg.source_text = text;
    std::vector<std::string> errors;
    {
        detail::ObjectReader root(doc, "", errors);
        root.text("name", cfg.name);
        root.text("description", cfg.description);
        root.count("horizon", cfg.horizon);

        if (root.has("seeds")) {
            const json& s = root.at("seeds");
            if (s.is_array()) {
                cfg.seeds.clear();
                for (const auto& x : s) {
                    if (!x.is_number_integer() || x.get<std::int64_t>() < 0) {
                        errors.emplace_back("seeds: expected non-negative integers");
                        break;
                    }
                    cfg.seeds.push_back(x.get<std::uint64_t>());
                }
            } else if (s.is_object()) {
                detail::ObjectReader r(s, "seeds", errors);
                std::size_t first = 1;
                std::size_t count = 1;
                r.count("first", first);
                r.count("count", count);
                cfg.seeds.clear();
                for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
            } else {
                errors.emplace_back("seeds: expected an array or {first, count}");
            }
        }

        if (root.has("adline")) {
            detail::ObjectReader r(root.at("adline"), "adline", errors);
            r.text("id", cfg.adline.id);
            r.number("max_bid", cfg.adline.max_bid);
            r.number("budget_total", cfg.adline.budget_total);
        }

        if (root.has("plan")) {
            detail::ObjectReader r(root.at("plan"), "plan", errors);
            std::string shape = "even";
            r.text("shape", shape);
            if (shape == "even") {
                cfg.plan_shape = PlanShape::Even;
            } else if (shape == "weighted") {
                cfg.plan_shape = PlanShape::Weighted;
                r.numbers("weights", cfg.plan_weights);
                if (cfg.plan_weights.empty()) errors.emplace_back("plan.weights: required for shape 'weighted'");
            } else if (shape == "step") {
                cfg.plan_shape = PlanShape::Step;
                r.number("at_fraction", cfg.step_at_fraction);
                r.number("factor", cfg.step_factor);
            } else {
                errors.emplace_back("plan.shape: expected 'even', 'weighted' or 'step'");
            }
        }

        if (root.has("traffic")) {
            detail::ObjectReader r(root.at("traffic"), "traffic", errors);
            r.text("preset", cfg.traffic_preset_name);
            if (!cfg.traffic_preset_name.empty()) {
                if (auto t = traffic_preset(cfg.traffic_preset_name)) {
                    cfg.traffic = *t;
                } else {
                    errors.push_back("traffic.preset: unknown plant preset '" + cfg.traffic_preset_name + "'");
                }
            }
            r.number("arrivals_per_cycle", cfg.traffic.arrivals_per_cycle);
            r.boolean("deterministic_arrivals", cfg.traffic.deterministic_arrivals);
            r.number("competitor_log_mu", cfg.traffic.competitor_log_mu);
            r.number("competitor_log_sigma", cfg.traffic.competitor_log_sigma);
            r.number("p_lo", cfg.traffic.p_lo);
            r.number("p_hi", cfg.traffic.p_hi);
            std::string pricing;
            r.text("pricing", pricing);
            if (pricing == "first_price") {
                cfg.traffic.pricing = PricingRule::FirstPrice;
            } else if (pricing == "second_price") {
                cfg.traffic.pricing = PricingRule::SecondPrice;
            } else if (!pricing.empty()) {
                errors.emplace_back("traffic.pricing: expected 'first_price' or 'second_price'");
            }
        }

        if (root.has("initial_lambda")) {
            detail::ObjectReader r(root.at("initial_lambda"), "initial_lambda", errors);
            std::string mode = "fixed";
            r.text("mode", mode);
            if (mode == "equilibrium") {
                cfg.initial_lambda.reset();
                if (r.has("value")) errors.emplace_back("initial_lambda.value: not allowed with mode 'equilibrium'");
            } else if (mode == "fixed") {
                double v = 0.1;
                r.number("value", v);
                cfg.initial_lambda = v;
            } else {
                errors.emplace_back("initial_lambda.mode: expected 'fixed' or 'equilibrium'");
            }
        }

        detail::read_controller_kind(root, "controller", cfg.test_controller);
        detail::read_controller_kind(root, "baseline_controller", cfg.baseline_controller);
        detail::read_controller_settings(root, cfg.controllers);

        if (root.has("metrics")) {
            detail::ObjectReader r(root.at("metrics"), "metrics", errors);
            r.count("window_start", cfg.metrics.start);
            if (r.has("window_end")) {
                std::size_t end = 0;
                r.count("window_end", end);
                cfg.metrics.end = end;
            }
            r.count("pe_slot_cycles", cfg.metrics.pe_slot_cycles);
        }
    }

    for (auto& e : cfg.validate()) errors.push_back(std::move(e));
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError({"cannot open config file '" + path.string() + "'"});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace pacing

#endif  // PACING_CONFIG_HPP
