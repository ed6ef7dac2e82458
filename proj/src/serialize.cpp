#include "agentfield/serialize.hpp"

#include <cmath>
#include <sstream>

#include "agentfield/config.hpp"

namespace agentfield {

namespace {

// Non-finite values are stored as null so the document stays valid JSON.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double read_number(const Json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

void emit(std::ostringstream& os, const Json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{' << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
                emit(os, it.value(), indent, depth + 1);
            }
            os << nl << close_pad << '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << '[' << nl;
            bool first = true;
            for (const auto& v : j) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad;
                emit(os, v, indent, depth + 1);
            }
            os << nl << close_pad << ']';
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                os << "null";
                return;
            }
            std::string s = format_number(v);
            // Keep floats recognizable as floats when %.17g prints an integer.
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            os << s;
            return;
        }
        default:
            os << j.dump();
    }
}

}  // namespace

Json to_json(const AgentState& s) { return Json{{"C", number(s.C)}, {"K", number(s.K)}, {"A", number(s.A)}}; }

Json to_json(const ModelParams& p) {
    Json j;
    for (const auto& key : param_keys()) j[key] = number(get_param(p, key));
    return j;
}

Json to_json(const PhaseSolution& s) {
    return Json{{"phase", to_string(s.phase)},
                {"gamma_eta", number(s.gamma_eta)},
                {"Gamma", Json::array({number(s.Gamma[0]), number(s.Gamma[1]), number(s.Gamma[2])})},
                {"shifts",
                 {{"C1", number(s.shifts.consumption)},
                  {"K1p", number(s.shifts.capital)},
                  {"A1", number(s.shifts.technology)},
                  {"K1p_exact", number(s.shifts.capital_exact)},
                  {"K1p_approx", number(s.shifts.capital_approx)}}},
                {"A_bar_phase", number(s.A_bar_phase)},
                {"C_bar_phase", number(s.C_bar_phase)},
                {"mass", number(s.mass)},
                {"averages",
                 {{"A", number(s.averages.A)}, {"C", number(s.averages.C)}, {"K", number(s.averages.K)},
                  {"Y", number(s.averages.Y)}}},
                {"feasible", s.feasible},
                {"stable", s.stable},
                {"Y_coef", number(s.Y_coef)},
                {"fixed_point_residual", number(s.fixed_point_residual)},
                {"warnings", s.warnings}};
}

PhaseSolution phase_solution_from_json(const Json& j) {
    PhaseSolution s;
    s.phase = j.at("phase").get<std::string>() == "trivial" ? Phase::trivial : Phase::nontrivial;
    s.gamma_eta = read_number(j.at("gamma_eta"));
    for (int i = 0; i < 3; ++i) s.Gamma[static_cast<std::size_t>(i)] = read_number(j.at("Gamma").at(i));
    const auto& sh = j.at("shifts");
    s.shifts.consumption = read_number(sh.at("C1"));
    s.shifts.capital = read_number(sh.at("K1p"));
    s.shifts.technology = read_number(sh.at("A1"));
    s.shifts.capital_exact = read_number(sh.at("K1p_exact"));
    s.shifts.capital_approx = read_number(sh.at("K1p_approx"));
    s.A_bar_phase = read_number(j.at("A_bar_phase"));
    s.C_bar_phase = read_number(j.at("C_bar_phase"));
    s.mass = read_number(j.at("mass"));
    const auto& av = j.at("averages");
    s.averages = {read_number(av.at("A")), read_number(av.at("C")), read_number(av.at("K")), read_number(av.at("Y"))};
    s.feasible = j.at("feasible").get<bool>();
    s.stable = j.at("stable").get<bool>();
    s.Y_coef = read_number(j.at("Y_coef"));
    s.fixed_point_residual = read_number(j.at("fixed_point_residual"));
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    return s;
}

Json to_json(const FeasibilityReport& r) {
    return Json{{"gamma_positive", r.gamma_positive},
                {"technology_bound", r.technology_bound},
                {"technology_bound_refined", r.technology_bound_refined},
                {"lambda_large", r.lambda_large},
                {"spread_positive", r.spread_positive},
                {"spread_small", r.spread_small},
                {"C0_in_window", r.C0_in_window},
                {"D_positive", r.D_positive},
                {"root_in_window", r.root_in_window},
                {"perturbative", r.perturbative},
                {"feasible", r.feasible},
                {"spread", number(r.spread)},
                {"reasons", r.reasons}};
}

Json to_json(const StabilityReport& r) {
    return Json{{"curvature_positive", r.curvature_positive},
                {"bracket_consumption", number(r.bracket_consumption)},
                {"bracket_capital", number(r.bracket_capital)},
                {"bracket_technology", number(r.bracket_technology)},
                {"brackets_positive", r.brackets_positive},
                {"stable", r.stable}};
}

Json to_json(const GreenCoefficients& c) {
    return Json{{"alpha", number(c.alpha)},   {"beta", number(c.beta)},     {"Omega_sq", number(c.Omega_sq)},
                {"b_coef", number(c.b_coef)}, {"c_coef", number(c.c_coef)}, {"mass", number(c.mass)},
                {"A_bar", number(c.A_bar)},   {"C_bar", number(c.C_bar)}};
}

Json to_json(const DensityResult& d) {
    Json H = Json::array();
    for (int i = 0; i < 3; ++i) H.push_back(Json::array({number(d.H(i, 0)), number(d.H(i, 1)), number(d.H(i, 2))}));
    return Json{{"density", number(d.density)},
                {"log_density", number(d.log_density)},
                {"log_gaussian", number(d.log_gaussian)},
                {"mean", Json::array({number(d.mean(0)), number(d.mean(1)), number(d.mean(2))})},
                {"H", H},
                {"closed_form_covariance", d.closed_form_covariance},
                {"coefficients", to_json(d.coefficients)}};
}

Json to_json(const DivergenceReport& r) {
    Json z = Json::object();
    Json ks = Json::object();
    const char* names[3] = {"C", "K", "A"};
    for (int i = 0; i < 3; ++i) {
        z[names[i]] = {{"mean", number(r.coords[i].mean_z)}, {"variance", number(r.coords[i].variance_z)}};
        ks[names[i]] = {{"statistic", number(r.coords[i].ks_statistic)}, {"p_value", number(r.coords[i].ks_p_value)}};
    }
    return Json{{"zscores", z}, {"ks", ks}, {"z_threshold", number(r.z_threshold)},
                {"ks_p_threshold", number(r.ks_p_threshold)}, {"pass", r.pass}};
}

Json to_json(const BudgetReport& r) {
    Json residuals = Json::array();
    for (std::size_t i = 0; i < r.constraint_variances.size(); ++i)
        residuals.push_back({{"constraint_variance", number(r.constraint_variances[i])},
                             {"mean_abs_residual", number(r.mean_abs_residual[i])}});
    return Json{{"increment_variance", number(r.increment_variance)},
                {"increment_lag1", number(r.increment_lag1)},
                {"shock_lag1", number(r.shock_lag1)},
                {"n_increments", r.n_increments},
                {"terminal_residuals", residuals},
                {"variance_ok", r.variance_ok},
                {"increments_uncorrelated", r.increments_uncorrelated}};
}

Json to_json(const NegligibilityReport& r) {
    return Json{{"constraint_term", number(r.constraint_term)}, {"consumption_term", number(r.consumption_term)},
                {"ratio", number(r.ratio)},                     {"rate", number(r.rate)},
                {"horizon", number(r.horizon)},                 {"negligible", r.negligible}};
}

std::string emit_json(const Json& j, int indent) {
    std::ostringstream os;
    emit(os, j, indent, 0);
    return os.str();
}

}  // namespace agentfield
