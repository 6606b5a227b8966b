#ifndef PACING_REPORT_HPP
#define PACING_REPORT_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacing/plant_sim.hpp"

namespace pacing {

inline constexpr const char* kTelemetryHeader =
    "cycle,lambda,cycle_spend,cum_spend,target_cum_spend,auctions,wins,controller,seed";

/// Shortest round-trip representation of a double, locale independent.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Output failure; carries whatever was written before the error.
class ReportIoError : public std::runtime_error {
public:
    ReportIoError(const std::string& what, std::vector<std::filesystem::path> partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const std::vector<std::filesystem::path>& partial_outputs() const { return partial_; }

private:
    std::vector<std::filesystem::path> partial_;
};

/// One arm of a paired run as it appears in the telemetry CSV.
struct TelemetrySeries {
    std::string controller;
    std::uint64_t seed = 0;
    Telemetry telemetry;
};

inline void write_telemetry_rows(std::ostream& out, const TelemetrySeries& series) {
    for (const CycleRecord& r : series.telemetry) {
        out << r.cycle << ',' << format_number(r.lambda) << ',' << format_number(r.cycle_spend) << ','
            << format_number(r.cum_spend) << ',' << format_number(r.target_cum_spend) << ',' << r.auctions << ','
            << r.wins << ',' << series.controller << ',' << series.seed << '\n';
    }
}

/// Reads a telemetry CSV back into per-(controller, seed) series, in file order.
inline std::vector<TelemetrySeries> read_telemetry_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open telemetry file '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTelemetryHeader) {
        throw std::runtime_error("'" + path.string() + "' does not start with the telemetry header");
    }
    std::vector<TelemetrySeries> out;
    std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 9) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 9 columns");
        }
        try {
            CycleRecord r;
            r.cycle = std::stoull(cells[0]);
            r.lambda = std::stod(cells[1]);
            r.cycle_spend = std::stod(cells[2]);
            r.cum_spend = std::stod(cells[3]);
            r.target_cum_spend = std::stod(cells[4]);
            r.auctions = std::stoull(cells[5]);
            r.wins = std::stoull(cells[6]);
            const std::uint64_t seed = std::stoull(cells[8]);
            const auto key = std::make_pair(cells[7], seed);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, out.size()).first;
                out.push_back({cells[7], seed, {}});
            }
            out[it->second].telemetry.push_back(r);
        } catch (const std::logic_error&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return out;
}

namespace detail {

struct Polyline {
    std::vector<double> ys;
    const char* color;
    bool dashed;
};

inline void svg_panel(std::ostream& out, double x0, double y0, double w, double h, const std::string& title,
                      const std::vector<Polyline>& lines) {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 1;
    bool first = true;
    for (const auto& l : lines) {
        n = std::max(n, l.ys.size());
        for (double y : l.ys) {
            if (first) {
                lo = hi = y;
                first = false;
            }
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad_l = 60.0;
    const double pad_b = 30.0;
    const double pad_t = 24.0;
    const double pw = w - pad_l - 10.0;
    const double ph = h - pad_b - pad_t;
    auto px = [&](std::size_t i) { return x0 + pad_l + pw * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, n - 1)); };
    auto py = [&](double y) { return y0 + pad_t + ph * (1.0 - (y - lo) / (hi - lo)); };
    char buf[256];

    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"#888\"/>\n",
                  x0 + pad_l, y0 + pad_t, pw, ph);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">", x0 + pad_l + pw / 2,
                  y0 + 16.0);
    out << buf << title << "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%.4g</text>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%.4g</text>\n",
                  x0 + pad_l - 4, y0 + pad_t + 10, hi, x0 + pad_l - 4, y0 + pad_t + ph, lo);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\">0</text>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%zu</text>\n",
                  x0 + pad_l, y0 + h - 12, x0 + pad_l + pw, y0 + h - 12, n - 1);
    out << buf;

    for (const auto& l : lines) {
        if (l.ys.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.2\""
            << (l.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < l.ys.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(i), py(l.ys[i]));
            out << buf;
        }
        out << "\"/>\n";
    }
}

inline std::vector<double> column(const Telemetry& t, double CycleRecord::*field) {
    std::vector<double> out;
    out.reserve(t.size());
    for (const auto& r : t) out.push_back(r.*field);
    return out;
}

}  // namespace detail

/// Two-panel line chart: cumulative spend (test red, baseline blue, ideal black
/// dashed) on the left, lambda traces on the right.
inline void write_trace_svg(const std::filesystem::path& path, const std::string& title, const Telemetry& test,
                            const Telemetry& baseline, const std::string& test_label,
                            const std::string& baseline_label) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    const Telemetry& longest = test.size() >= baseline.size() ? test : baseline;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"380\" viewBox=\"0 0 960 380\" "
           "font-family=\"sans-serif\">\n";
    out << "<rect width=\"960\" height=\"380\" fill=\"white\"/>\n";
    out << "<text x=\"480\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">" << title << "</text>\n";
    out << "<g transform=\"translate(0,20)\">\n";
    detail::svg_panel(out, 0, 0, 480, 330, "cumulative spend",
                      {{detail::column(longest, &CycleRecord::target_cum_spend), "black", true},
                       {detail::column(baseline, &CycleRecord::cum_spend), "#1f4fd1", false},
                       {detail::column(test, &CycleRecord::cum_spend), "#d11f1f", false}});
    detail::svg_panel(out, 480, 0, 480, 330, "lambda",
                      {{detail::column(baseline, &CycleRecord::lambda), "#1f4fd1", false},
                       {detail::column(test, &CycleRecord::lambda), "#d11f1f", false}});
    out << "</g>\n";
    out << "<text x=\"70\" y=\"372\" font-size=\"11\" fill=\"#d11f1f\">" << test_label << "</text>\n";
    out << "<text x=\"300\" y=\"372\" font-size=\"11\" fill=\"#1f4fd1\">" << baseline_label << "</text>\n";
    out << "<text x=\"560\" y=\"372\" font-size=\"11\">ideal (dashed)</text>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace pacing

#endif  // PACING_REPORT_HPP
