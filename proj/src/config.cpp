#include "agentfield/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "agentfield/errors.hpp"

namespace agentfield {

namespace {

using Member = double ModelParams::*;

const std::vector<std::pair<std::string, Member>>& double_members() {
    static const std::vector<std::pair<std::string, Member>> table = {
        {"varpi", &ModelParams::varpi},       {"nu", &ModelParams::nu},
        {"lambda_sq", &ModelParams::lambda_sq}, {"varsigma", &ModelParams::varsigma},
        {"delta", &ModelParams::delta},       {"r_c", &ModelParams::r_c},
        {"epsilon", &ModelParams::epsilon},   {"K_bar", &ModelParams::K_bar},
        {"C_bar", &ModelParams::C_bar},       {"A0", &ModelParams::A0},
        {"kappa", &ModelParams::kappa},       {"gamma", &ModelParams::gamma},
        {"alpha_laplace", &ModelParams::alpha_laplace}, {"C0", &ModelParams::C0},
        {"g", &ModelParams::g},               {"theta_sq", &ModelParams::theta_sq},
        {"sigma_sq", &ModelParams::sigma_sq}, {"eta_sq", &ModelParams::eta_sq},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
        throw ParameterError("invalid numeric value for " + key + ": '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParameterError("invalid boolean value for " + key + ": '" + value + "'");
}

template <class Enum>
Enum parse_choice(const std::string& key, const std::string& value,
                  std::initializer_list<std::pair<const char*, Enum>> choices) {
    for (const auto& [name, e] : choices)
        if (value == name) return e;
    throw ParameterError("invalid choice for " + key + ": '" + value + "'");
}

}  // namespace

const std::vector<std::string>& param_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, member] : double_members()) k.push_back(name);
        return k;
    }();
    return keys;
}

const std::vector<std::string>& numerics_keys() {
    static const std::vector<std::string> keys = {
        "damping",         "max_iterations",     "fixed_point_tolerance", "lambda_min",
        "spread_max",      "perturbative_max",   "capital_shift",         "consumption_shift",
        "include_technology_shift", "convention", "covariance_form",      "literal_potential",
        "small_time_switch", "ode_steps_per_unit"};
    return keys;
}

void set_param(ModelParams& p, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    for (const auto& [name, member] : double_members()) {
        if (name == key) {
            p.*member = parse_double(key, value);
            return;
        }
    }
    auto& n = p.numerics;
    if (key == "damping") n.damping = parse_double(key, value);
    else if (key == "max_iterations") n.max_iterations = static_cast<int>(parse_double(key, value));
    else if (key == "fixed_point_tolerance") n.fixed_point_tolerance = parse_double(key, value);
    else if (key == "lambda_min") n.lambda_min = parse_double(key, value);
    else if (key == "spread_max") n.spread_max = parse_double(key, value);
    else if (key == "perturbative_max") n.perturbative_max = parse_double(key, value);
    else if (key == "small_time_switch") n.small_time_switch = parse_double(key, value);
    else if (key == "ode_steps_per_unit") n.ode_steps_per_unit = static_cast<int>(parse_double(key, value));
    else if (key == "include_technology_shift") n.include_technology_shift = parse_bool(key, value);
    else if (key == "literal_potential") n.literal_potential = parse_bool(key, value);
    else if (key == "capital_shift")
        n.capital_shift = parse_choice<ShiftForm>(key, value, {{"exact", ShiftForm::exact}, {"surrogate", ShiftForm::surrogate}});
    else if (key == "consumption_shift")
        n.consumption_shift = parse_choice<ConsumptionShiftForm>(
            key, value, {{"small_target", ConsumptionShiftForm::small_target}, {"exact", ConsumptionShiftForm::exact}});
    else if (key == "convention")
        n.convention = parse_choice<Convention>(key, value, {{"full_rate", Convention::full_rate}, {"half_rate", Convention::half_rate}});
    else if (key == "covariance_form")
        n.covariance_form = parse_choice<CovarianceForm>(
            key, value, {{"corrected", CovarianceForm::corrected}, {"literal", CovarianceForm::literal}});
    else throw ParameterError("unknown config key: " + key);
}

double get_param(const ModelParams& p, const std::string& key) {
    for (const auto& [name, member] : double_members())
        if (name == key) return p.*member;
    throw ParameterError("unknown parameter key: " + key);
}

ModelParams parse_params(const std::string& text, ModelParams base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
        set_param(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return base;
}

ModelParams load_params(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ParameterError("cannot open config file: " + file);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_params(text.str());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_path_csv(std::ostream& os, const AgentPath& path) {
    os << "t,C,K,A\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& s = path.states[i];
        os << format_number(path.t0 + path.dt * static_cast<double>(i)) << ',' << format_number(s.C) << ','
           << format_number(s.K) << ',' << format_number(s.A) << '\n';
    }
}

AgentPath read_path_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "t,C,K,A") throw ShapeError("path CSV must start with t,C,K,A");
    std::vector<double> times;
    AgentPath path;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::vector<double> v;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) v.push_back(parse_double("path cell", trim(cell)));
        if (v.size() != 4) throw ShapeError("path CSV rows need 4 columns");
        times.push_back(v[0]);
        path.states.push_back({v[1], v[2], v[3]});
    }
    if (times.size() < 2) throw ShapeError("a path needs at least 2 states");
    path.t0 = times.front();
    path.dt = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (std::abs(step - path.dt) > 1e-9 * std::max(1.0, std::abs(path.dt)))
            throw ShapeError("path CSV must use a uniform time step");
    }
    path.validate();
    return path;
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble) {
    os << "path_id,C,K,A\n";
    for (std::size_t i = 0; i < ensemble.endpoints.size(); ++i) {
        const auto& s = ensemble.endpoints[i];
        os << i << ',' << format_number(s.C) << ',' << format_number(s.K) << ',' << format_number(s.A) << '\n';
    }
}

}  // namespace agentfield
