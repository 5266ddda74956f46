#include "voltguard/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "voltguard/errors.hpp"

namespace voltguard {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string{};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace

void write_trace_csv(const TimeSeriesTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write trace CSV " + path);
    out << kTraceCsvHeader << '\n';
    for (const auto& r : trace.rows) {
        out << fmt(r.t) << ',' << fmt(r.current) << ',' << fmt(r.soc_true)
            << ',' << fmt(r.soc_cc) << ',' << fmt(r.v_true) << ','
            << fmt(r.v_meas) << ',' << fmt(r.v_pred) << ',' << fmt(r.e1) << ','
            << fmt(r.v_hat) << ',' << fmt(r.v_openloop) << ','
            << fmt(r.v_closedloop) << ',' << r.region << ','
            << (r.attack_active ? 1 : 0) << '\n';
    }
    if (!out) throw ConfigError("write failed for trace CSV " + path);
}

TimeSeriesTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read trace CSV " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceCsvHeader)
        throw ConfigError("unexpected CSV header in " + path);
    TimeSeriesTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 13)
            throw ConfigError("bad CSV row in " + path + ": " + line);
        TraceRow r;
        r.t = std::stod(f[0]);
        r.current = std::stod(f[1]);
        r.soc_true = std::stod(f[2]);
        r.soc_cc = std::stod(f[3]);
        r.v_true = std::stod(f[4]);
        r.v_meas = std::stod(f[5]);
        r.v_pred = parse_opt(f[6]);
        r.e1 = parse_opt(f[7]);
        r.v_hat = parse_opt(f[8]);
        r.v_openloop = parse_opt(f[9]);
        r.v_closedloop = parse_opt(f[10]);
        r.region = std::stoi(f[11]);
        r.attack_active = f[12] == "1";
        trace.rows.push_back(r);
    }
    if (trace.rows.size() >= 2)
        trace.dt = trace.rows[1].t - trace.rows[0].t;
    return trace;
}

void write_trace_svg(const TimeSeriesTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write SVG " + path);
    const int w = 900, h = 420, pad = 50;

    struct Series {
        const char* name;
        const char* color;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> series{{"v_true", "#000000", {}},
                               {"v_meas", "#cc0000", {}},
                               {"v_pred", "#888888", {}},
                               {"v_hat", "#0055cc", {}},
                               {"v_openloop", "#008800", {}},
                               {"v_closedloop", "#cc8800", {}}};
    for (const auto& r : trace.rows) {
        series[0].pts.emplace_back(r.t, r.v_true);
        series[1].pts.emplace_back(r.t, r.v_meas);
        if (r.v_pred) series[2].pts.emplace_back(r.t, *r.v_pred);
        if (r.v_hat) series[3].pts.emplace_back(r.t, *r.v_hat);
        if (r.v_openloop) series[4].pts.emplace_back(r.t, *r.v_openloop);
        if (r.v_closedloop) series[5].pts.emplace_back(r.t, *r.v_closedloop);
    }
    double t_min = 0, t_max = 1, v_min = 1e9, v_max = -1e9;
    if (!trace.rows.empty()) {
        t_min = trace.rows.front().t;
        t_max = std::max(trace.rows.back().t, t_min + 1.0);
    }
    for (const auto& s : series)
        for (const auto& [t, v] : s.pts) {
            v_min = std::min(v_min, v);
            v_max = std::max(v_max, v);
        }
    if (v_min > v_max) {
        v_min = 0;
        v_max = 1;
    }
    const double v_pad = 0.02 * (v_max - v_min + 1e-9);
    v_min -= v_pad;
    v_max += v_pad;

    auto sx = [&](double t) {
        return pad + (t - t_min) / (t_max - t_min) * (w - 2 * pad);
    };
    auto sy = [&](double v) {
        return h - pad - (v - v_min) / (v_max - v_min) * (h - 2 * pad);
    };

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
        << "' height='" << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<line x1='" << pad << "' y1='" << h - pad << "' x2='" << w - pad
        << "' y2='" << h - pad << "' stroke='black'/>\n";
    out << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad
        << "' y2='" << h - pad << "' stroke='black'/>\n";
    int legend_y = pad;
    for (const auto& s : series) {
        if (s.pts.empty()) continue;
        out << "<polyline fill='none' stroke='" << s.color
            << "' stroke-width='1' points='";
        for (const auto& [t, v] : s.pts) out << sx(t) << ',' << sy(v) << ' ';
        out << "'/>\n";
        out << "<text x='" << w - pad + 4 << "' y='" << legend_y
            << "' font-size='11' fill='" << s.color << "'>" << s.name
            << "</text>\n";
        legend_y += 14;
    }
    out << "<text x='" << w / 2 << "' y='" << h - 12
        << "' font-size='12'>t [s]</text>\n";
    out << "<text x='12' y='" << pad - 10
        << "' font-size='12'>V [V]</text>\n";
    out << "</svg>\n";
}

}  // namespace voltguard
