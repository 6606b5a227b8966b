// pacing: run, validate and re-render budget-pacing experiments.
//
//   pacing run CONFIG OUT_DIR [--seeds 1-20] [--horizon 288]
//   pacing run --preset ssdm_vs_baseline OUT_DIR
//   pacing validate CONFIG | --preset NAME
//   pacing report OUT_DIR
//
// Exit codes: 0 success, 1 validation failure, 2 runtime I/O failure.

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pacing/pacing.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

#ifndef PACING_PRESET_DIR
#define PACING_PRESET_DIR "presets"
#endif

std::optional<fs::path> find_preset(const std::string& name) {
    for (const fs::path& dir : {fs::path("presets"), fs::path(PACING_PRESET_DIR)}) {
        const fs::path candidate = dir / (name + ".json");
        if (fs::exists(candidate)) return candidate;
    }
    return std::nullopt;
}

/// Accepts "1,2,5", "1-20", a mix of both, or an empty string.
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            seeds.push_back(std::stoull(item));
        } else {
            const std::uint64_t lo = std::stoull(item.substr(0, dash));
            const std::uint64_t hi = std::stoull(item.substr(dash + 1));
            if (hi < lo) throw std::invalid_argument("seed range '" + item + "' is reversed");
            for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        }
    }
    return seeds;
}

void print_errors(const pacing::ConfigError& e) {
    std::cerr << "error: invalid configuration\n";
    for (const auto& msg : e.errors()) std::cerr << "  - " << msg << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop budget pacing simulator"};
    app.require_subcommand(1);

    std::vector<std::string> run_args;
    std::string preset;
    std::optional<std::string> seeds_arg;
    std::optional<std::size_t> horizon_arg;
    unsigned workers = 0;

    auto* run = app.add_subcommand("run", "Simulate baseline vs test controller and write reports");
    run->add_option("args", run_args, "CONFIG OUT_DIR, or OUT_DIR with --preset")->expected(1, 2);
    run->add_option("--preset", preset, "Bundled preset name instead of a config path");
    run->add_option("--seeds", seeds_arg, "Seed override, e.g. 1-20 or 3,7,11");
    run->add_option("--horizon", horizon_arg, "Horizon override in control cycles");
    run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");

    std::string validate_path;
    std::string validate_preset;
    auto* validate = app.add_subcommand("validate", "Check a config and list every problem");
    validate->add_option("config", validate_path, "Config path");
    validate->add_option("--preset", validate_preset, "Bundled preset name");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Re-render plots from telemetry CSVs in a directory");
    report->add_option("out_dir", report_dir, "Directory holding *_telemetry.csv")->required();

    CLI11_PARSE(app, argc, argv);

    auto resolve = [](const std::string& path, const std::string& preset_name) -> std::optional<fs::path> {
        if (!preset_name.empty()) {
            auto p = find_preset(preset_name);
            if (!p) std::cerr << "error: unknown preset '" << preset_name << "'\n";
            return p;
        }
        if (path.empty()) {
            std::cerr << "error: a config path or --preset is required\n";
            return std::nullopt;
        }
        return fs::path(path);
    };

    if (*validate) {
        auto path = resolve(validate_path, validate_preset);
        if (!path) return kExitValidation;
        try {
            const auto cfg = pacing::load_config(*path);
            std::cout << "ok: " << cfg.name << " (" << pacing::to_string(cfg.test_controller) << " vs "
                      << pacing::to_string(cfg.baseline_controller) << ", " << cfg.seeds.size() << " seeds, "
                      << cfg.horizon << " cycles)\n";
            return 0;
        } catch (const pacing::ConfigError& e) {
            print_errors(e);
            return kExitValidation;
        }
    }

    if (*report) {
        try {
            const auto written = pacing::rerender_plots(report_dir);
            for (const auto& p : written) std::cout << p.string() << '\n';
            if (written.empty()) std::cerr << "warning: no telemetry found in " << report_dir << '\n';
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitIo;
        }
    }

    // run
    std::string config_path;
    std::string out_dir;
    if (!preset.empty()) {
        if (run_args.size() != 1) {
            std::cerr << "error: with --preset, give exactly one OUT_DIR\n";
            return kExitValidation;
        }
        out_dir = run_args[0];
    } else {
        if (run_args.size() != 2) {
            std::cerr << "error: expected CONFIG OUT_DIR\n";
            return kExitValidation;
        }
        config_path = run_args[0];
        out_dir = run_args[1];
    }
    auto path = resolve(config_path, preset);
    if (!path) return kExitValidation;

    pacing::ScenarioConfig cfg;
    try {
        cfg = pacing::load_config(*path);
        if (seeds_arg) cfg.seeds = parse_seed_list(*seeds_arg);
        if (horizon_arg) cfg.horizon = *horizon_arg;
        if (auto errors = cfg.validate(); !errors.empty()) throw pacing::ConfigError(std::move(errors));
    } catch (const pacing::ConfigError& e) {
        print_errors(e);
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: bad --seeds value: " << e.what() << '\n';
        return kExitValidation;
    }

    pacing::RunReport result = pacing::run_experiment(cfg, workers);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    try {
        pacing::emit_report(result, out_dir);
    } catch (const pacing::ReportIoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        for (const auto& p : e.partial_outputs()) std::cerr << "  partial output: " << p.string() << '\n';
        return kExitIo;
    }

    if (result.mean_baseline && result.mean_test) {
        auto pct = [](std::optional<double> v) {
            if (!v) return std::string("n/a");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%+.2f%%", *v);
            return std::string(buf);
        };
        std::cout << cfg.name << ": " << pacing::to_string(cfg.test_controller) << " vs "
                  << pacing::to_string(cfg.baseline_controller) << " over " << cfg.seeds.size() << " seed(s)\n"
                  << "  PE         " << pct(result.aggregate.pacing_error) << '\n'
                  << "  CV_lambda  " << pct(result.aggregate.lambda_volatility) << '\n'
                  << "  CPM        " << pct(result.aggregate.cpm) << '\n';
    }
    for (const auto& p : result.artifacts) std::cout << "wrote " << p.string() << '\n';
    return 0;
}
