#include "agentfield/scan.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <thread>

#include "agentfield/config.hpp"
#include "agentfield/errors.hpp"

namespace agentfield {

namespace {

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ParameterError("bad number for " + what + ": '" + text + "'");
    }
    if (used != text.size()) throw ParameterError("bad number for " + what + ": '" + text + "'");
    return v;
}

PhaseSolution infeasible_solution(Phase phase, const std::string& why) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    PhaseSolution s;
    s.phase = phase;
    s.gamma_eta = nan;
    s.Gamma = {nan, nan, nan};
    s.shifts = {nan, nan, nan, nan, nan};
    s.A_bar_phase = nan;
    s.C_bar_phase = nan;
    s.mass = nan;
    s.averages = {nan, nan, nan, nan};
    s.Y_coef = nan;
    s.fixed_point_residual = nan;
    s.feasible = false;
    s.stable = false;
    s.warnings.push_back(why);
    return s;
}

}  // namespace

std::vector<double> GridSpec::values() const {
    if (points < 1) throw ParameterError("grid needs at least one point");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(points));
    if (points == 1) {
        out.push_back(start);
        return out;
    }
    for (int i = 0; i < points; ++i) {
        // Endpoints are hit exactly.
        const double f = static_cast<double>(i) / (points - 1);
        out.push_back(i == points - 1 ? stop : start + f * (stop - start));
    }
    return out;
}

GridSpec parse_grid(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParameterError("grid must look like key=start:stop:points");
    GridSpec g;
    g.key = text.substr(0, eq);
    ModelParams probe;
    get_param(probe, g.key);  // rejects unknown keys
    std::vector<std::string> parts;
    std::string rest = text.substr(eq + 1);
    std::size_t pos = 0;
    while (true) {
        const auto colon = rest.find(':', pos);
        parts.push_back(rest.substr(pos, colon - pos));
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() == 1) {
        g.start = g.stop = parse_double(parts[0], g.key);
        g.points = 1;
    } else if (parts.size() == 3) {
        g.start = parse_double(parts[0], g.key);
        g.stop = parse_double(parts[1], g.key);
        const double n = parse_double(parts[2], "points");
        if (n < 1 || n != std::floor(n)) throw ParameterError("grid points must be a positive integer");
        g.points = static_cast<int>(n);
    } else {
        throw ParameterError("grid must look like key=start:stop:points");
    }
    return g;
}

std::vector<std::string> scan_columns() {
    std::vector<std::string> cols = param_keys();
    for (const char* c : {"gamma_eta", "Gamma1", "Gamma2", "Gamma3", "C1", "K1p", "A1", "m", "avgA", "avgC", "avgK",
                          "avgY", "feasible", "stable"})
        cols.emplace_back(c);
    return cols;
}

PhaseSolution scan_point(const ModelParams& p, Phase phase) {
    if (phase == Phase::trivial) return solve_trivial(p);
    try {
        return solve_nontrivial(p);
    } catch (const InfeasiblePhaseError& e) {
        return infeasible_solution(phase, e.what());
    }
}

void write_scan_header(std::ostream& os) {
    const auto cols = scan_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
}

void write_scan_row(std::ostream& os, const ModelParams& p, const PhaseSolution& s) {
    for (const auto& key : param_keys()) os << format_number(get_param(p, key)) << ',';
    const double values[] = {s.gamma_eta,     s.Gamma[0],          s.Gamma[1],        s.Gamma[2],
                             s.shifts.consumption, s.shifts.capital, s.shifts.technology, s.mass,
                             s.averages.A,    s.averages.C,        s.averages.K,      s.averages.Y};
    for (double v : values) os << format_number(v) << ',';
    os << (s.feasible ? "true" : "false") << ',' << (s.stable ? "true" : "false") << '\n';
}

std::vector<ScanPoint> run_scan(const ModelParams& base, const GridSpec& grid, Phase phase) {
    const auto values = grid.values();
    std::vector<ScanPoint> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i].params = base;
        set_param(out[i].params, grid.key, format_number(values[i]));
    }
    const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < out.size(); begin += batch) {
        const std::size_t end = std::min(out.size(), begin + batch);
        std::vector<std::future<PhaseSolution>> jobs;
        for (std::size_t i = begin; i < end; ++i)
            jobs.push_back(std::async(std::launch::async, [&p = out[i].params, phase] { return scan_point(p, phase); }));
        for (std::size_t i = begin; i < end; ++i) out[i].solution = jobs[i - begin].get();
    }
    return out;
}

}  // namespace agentfield
