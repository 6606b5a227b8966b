#ifndef PACING_HARNESS_HPP
#define PACING_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pacing/config.hpp"
#include "pacing/metrics.hpp"
#include "pacing/plant_sim.hpp"
#include "pacing/report.hpp"

namespace pacing {

/// Both arms of one seed. The two arms see identical opportunity draws in every
/// cycle; their spend paths diverge from the first cycle their lambdas differ.
struct SeedRun {
    std::uint64_t seed = 0;
    ScenarioResult baseline;
    ScenarioResult test;
    MetricsReport baseline_metrics;
    MetricsReport test_metrics;
    MetricsDelta delta;
};

struct RunReport {
    std::string scenario;
    ControllerKind test_kind = ControllerKind::Bhc;
    ControllerKind baseline_kind = ControllerKind::Baseline;
    double initial_lambda = 0.0;
    std::vector<SeedRun> runs;
    std::optional<MetricsReport> mean_baseline;
    std::optional<MetricsReport> mean_test;
    MetricsDelta aggregate;
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> artifacts;
    std::uint64_t config_hash = 0;
    std::vector<std::uint64_t> seeds;
    std::size_t horizon = 0;
};

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {
inline MetricsReport mean_metrics(const std::vector<MetricsReport>& reports) {
    MetricsReport m;
    double cpm_sum = 0.0;
    std::size_t cpm_n = 0;
    for (const auto& r : reports) {
        m.pacing_error += r.pacing_error;
        m.lambda_volatility += r.lambda_volatility;
        m.n_cycles += r.n_cycles;
        if (r.cpm) {
            cpm_sum += *r.cpm;
            ++cpm_n;
        }
    }
    const double n = static_cast<double>(reports.size());
    m.pacing_error /= n;
    m.lambda_volatility /= n;
    m.n_cycles /= reports.size();
    if (cpm_n) m.cpm = cpm_sum / static_cast<double>(cpm_n);
    return m;
}
}  // namespace detail

inline SeedRun run_seed(const ScenarioConfig& cfg, std::uint64_t seed, double lambda0) {
    const SpendPlan plan = cfg.plan();
    SeedRun run;
    run.seed = seed;
    run.baseline = simulate(cfg.adline, Controller::make(cfg.baseline_controller, lambda0, cfg.controllers), plan,
                            cfg.traffic, seed);
    run.test = simulate(cfg.adline, Controller::make(cfg.test_controller, lambda0, cfg.controllers), plan,
                        cfg.traffic, seed);
    run.baseline_metrics = compute_metrics(run.baseline.telemetry, cfg.metrics);
    run.test_metrics = compute_metrics(run.test.telemetry, cfg.metrics);
    run.delta = delta_vs_baseline(run.test_metrics, run.baseline_metrics);
    return run;
}

/// Simulates the baseline and the test controller for every seed on coupled
/// traffic and aggregates their metrics. Seeds run on a worker pool; results
/// are ordered as in cfg.seeds regardless of scheduling.
inline RunReport run_experiment(const ScenarioConfig& cfg, unsigned workers = 0) {
    if (auto errors = cfg.validate(); !errors.empty()) throw ConfigError(std::move(errors));

    RunReport report;
    report.scenario = cfg.name;
    report.test_kind = cfg.test_controller;
    report.baseline_kind = cfg.baseline_controller;
    report.initial_lambda = cfg.lambda0();
    report.config_hash = fnv1a64(cfg.source_text);
    report.seeds = cfg.seeds;
    report.horizon = cfg.horizon;
    report.runs.resize(cfg.seeds.size());

    if (cfg.seeds.empty()) {
        report.warnings.emplace_back("seed list is empty; nothing was simulated");
        return report;
    }

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.seeds.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
            report.runs[i] = run_seed(cfg, cfg.seeds[i], report.initial_lambda);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    std::vector<MetricsReport> base;
    std::vector<MetricsReport> test;
    for (const auto& r : report.runs) {
        base.push_back(r.baseline_metrics);
        test.push_back(r.test_metrics);
    }
    report.mean_baseline = detail::mean_metrics(base);
    report.mean_test = detail::mean_metrics(test);
    report.aggregate = delta_vs_baseline(*report.mean_test, *report.mean_baseline);
    return report;
}

inline std::string arm_label(const char* role, ControllerKind kind) {
    return std::string(role) + ":" + to_string(kind);
}

/// Writes the telemetry CSV, summary CSV, one SVG per seed and a metadata
/// sidecar into out_dir. Returns the written paths (also stored in the report).
/// Wall-clock time appears only in the sidecar.
inline std::vector<std::filesystem::path> emit_report(RunReport& report, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> written;
    auto fail = [&](const std::string& what) { throw ReportIoError(what, written); };

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) fail("cannot create output directory '" + out_dir.string() + "'");

    const std::string base_label = arm_label("baseline", report.baseline_kind);
    const std::string test_label = arm_label("test", report.test_kind);

    {
        const fs::path path = out_dir / (report.scenario + "_telemetry.csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("cannot write '" + path.string() + "'");
        out << kTelemetryHeader << '\n';
        for (const auto& run : report.runs) {
            write_telemetry_rows(out, {base_label, run.seed, run.baseline.telemetry});
            write_telemetry_rows(out, {test_label, run.seed, run.test.telemetry});
        }
        if (!out) fail("failed writing '" + path.string() + "'");
        written.push_back(path);
    }

    {
        const fs::path path = out_dir / (report.scenario + "_summary.csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("cannot write '" + path.string() + "'");
        out << "metric," << base_label << ',' << test_label << ",delta_pct\n";
        if (report.mean_baseline && report.mean_test) {
            auto opt = [](std::optional<double> v) { return v ? format_number(*v) : std::string(); };
            const auto& b = *report.mean_baseline;
            const auto& t = *report.mean_test;
            out << "PE," << format_number(b.pacing_error) << ',' << format_number(t.pacing_error) << ','
                << opt(report.aggregate.pacing_error) << '\n';
            out << "CV_lambda," << format_number(b.lambda_volatility) << ',' << format_number(t.lambda_volatility)
                << ',' << opt(report.aggregate.lambda_volatility) << '\n';
            out << "CPM," << opt(b.cpm) << ',' << opt(t.cpm) << ',' << opt(report.aggregate.cpm) << '\n';
        }
        if (!out) fail("failed writing '" + path.string() + "'");
        written.push_back(path);
    }

    for (const auto& run : report.runs) {
        const fs::path path = out_dir / (report.scenario + "_seed" + std::to_string(run.seed) + ".svg");
        try {
            write_trace_svg(path, report.scenario + " (seed " + std::to_string(run.seed) + ")", run.test.telemetry,
                            run.baseline.telemetry, test_label, base_label);
        } catch (const std::runtime_error& e) {
            fail(e.what());
        }
        written.push_back(path);
    }

    {
        const fs::path path = out_dir / (report.scenario + "_metadata.json");
        nlohmann::json meta;
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
        meta["scenario"] = report.scenario;
        meta["config_hash_fnv1a64"] = hash;
        meta["seeds"] = report.seeds;
        meta["horizon"] = report.horizon;
        meta["initial_lambda"] = report.initial_lambda;
        meta["test_controller"] = to_string(report.test_kind);
        meta["baseline_controller"] = to_string(report.baseline_kind);
        meta["warnings"] = report.warnings;
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        meta["generated_at_utc"] = stamp;
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("cannot write '" + path.string() + "'");
        out << meta.dump(2) << '\n';
        if (!out) fail("failed writing '" + path.string() + "'");
        written.push_back(path);
    }

    report.artifacts = written;
    return written;
}

/// Re-renders the per-seed SVGs from every *_telemetry.csv in dir.
inline std::vector<std::filesystem::path> rerender_plots(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const std::string suffix = "_telemetry.csv";
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            csvs.push_back(entry.path());
        }
    }
    std::sort(csvs.begin(), csvs.end());

    std::vector<fs::path> written;
    for (const auto& csv : csvs) {
        const std::string filename = csv.filename().string();
        const std::string scenario = filename.substr(0, filename.size() - suffix.size());
        const auto series = read_telemetry_csv(csv);
        std::map<std::uint64_t, std::pair<const TelemetrySeries*, const TelemetrySeries*>> by_seed;
        for (const auto& s : series) {
            auto& slot = by_seed[s.seed];
            if (s.controller.rfind("baseline:", 0) == 0) {
                slot.first = &s;
            } else {
                slot.second = &s;
            }
        }
        for (const auto& [seed, arms] : by_seed) {
            if (!arms.first || !arms.second) continue;
            const fs::path path = dir / (scenario + "_seed" + std::to_string(seed) + ".svg");
            write_trace_svg(path, scenario + " (seed " + std::to_string(seed) + ")", arms.second->telemetry,
                            arms.first->telemetry, arms.second->controller, arms.first->controller);
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace pacing

#endif  // PACING_HARNESS_HPP
