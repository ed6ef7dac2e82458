#include "agentfield/model.hpp"

#include <cmath>

#include "agentfield/errors.hpp"

namespace agentfield {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be > 0");
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw ParameterError(std::string(name) + " must be finite");
}

void require_same_grid(const AgentPath& a, const AgentPath& b) {
    if (a.size() != b.size() || a.dt != b.dt) throw ShapeError("paths must share dt and length");
}

}  // namespace

double ModelParams::lambda() const { return std::sqrt(lambda_sq); }

void ModelParams::validate() const {
    require_positive(varpi, "varpi");
    require_positive(nu, "nu");
    require_positive(lambda_sq, "lambda_sq");
    if (!(varsigma >= 0.0) || !std::isfinite(varsigma)) throw ParameterError("varsigma must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
    require_finite(r_c, "r_c");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0,1)");
    require_positive(K_bar, "K_bar");
    require_positive(C_bar, "C_bar");
    require_positive(A0, "A0");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ParameterError("kappa must lie in [0,1)");
    require_finite(gamma, "gamma");
    require_positive(alpha_laplace, "alpha_laplace");
    require_finite(C0, "C0");
    require_finite(g, "g");
    require_positive(theta_sq, "theta_sq");
    require_positive(sigma_sq, "sigma_sq");
    require_positive(eta_sq, "eta_sq");
    const auto& n = numerics;
    if (!(n.damping > 0.0 && n.damping <= 1.0)) throw ParameterError("damping must lie in (0,1]");
    if (n.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
    require_positive(n.fixed_point_tolerance, "fixed_point_tolerance");
    require_positive(n.lambda_min, "lambda_min");
    require_positive(n.spread_max, "spread_max");
    require_positive(n.perturbative_max, "perturbative_max");
    require_positive(n.small_time_switch, "small_time_switch");
    if (n.ode_steps_per_unit < 1) throw ParameterError("ode_steps_per_unit must be >= 1");
}

double AgentPath::horizon() const {
    return states.empty() ? 0.0 : dt * static_cast<double>(states.size() - 1);
}

void AgentPath::validate() const {
    if (states.size() < 2) throw ShapeError("a path needs at least 2 states");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("path dt must be > 0");
    if (!std::isfinite(t0)) throw ParameterError("path t0 must be finite");
    for (const auto& s : states) {
        if (!std::isfinite(s.C) || !std::isfinite(s.K) || !std::isfinite(s.A))
            throw DomainError("path contains a non-finite state");
    }
}

double production(double K, double A, const ModelParams& p, ProductionMode mode) {
    if (!(K > 0.0)) throw DomainError("production requires K > 0");
    if (mode == ProductionMode::exact) return A * std::pow(K, p.epsilon);
    const double u = (K - p.K_bar) / p.K_bar;
    const double e = p.epsilon;
    return A * std::pow(p.K_bar, e) * (1.0 + e * u - 0.5 * e * (1.0 - e) * u * u);
}

double marginal_product(double K, double A, const ModelParams& p) {
    if (!(K > 0.0)) throw DomainError("marginal product requires K > 0");
    return A * p.epsilon * std::pow(K, p.epsilon - 1.0);
}

double utility_quadratic(double c, double theta, double C_hat) {
    if (!(theta > 0.0)) throw ParameterError("theta must be > 0");
    const double target = C_hat + 1.0 / theta;
    return -0.5 * theta * (c - target) * (c - target) + 1.0 / (2.0 * theta);
}

double log_weight_consumption(const AgentPath& path, const ModelParams& p) {
    path.validate();
    const double dt = path.dt;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& s = path.states[i];
        const double rate = marginal_product(s.K, s.A, p) + p.r_c;
        const double dC = (path.states[i + 1].C - s.C) / dt;
        const double dev = dC - rate * (s.C - p.C_bar);
        sum += dt * dev * dev;
    }
    return -sum / (p.varpi * p.varpi) + p.C0 * path.horizon();
}

double log_weight_capital(const AgentPath& path, const ModelParams& p, ProductionMode mode) {
    path.validate();
    const double dt = path.dt;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& s = path.states[i];
        const double dK = (path.states[i + 1].K - s.K) / dt;
        // Capital is non-negative on paths; the exact form extends continuously to F(0) = 0.
        const double output = (s.K == 0.0 && mode == ProductionMode::exact) ? 0.0 : production(s.K, s.A, p, mode);
        const double dev = dK - (output - s.C - p.delta * s.K);
        sum += dt * dev * dev;
    }
    return -sum / (p.nu * p.nu);
}

double log_weight_technology(const AgentPath& path, const ModelParams& p, double A_target) {
    path.validate();
    const double dt = path.dt;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& s = path.states[i];
        const double dA = (path.states[i + 1].A - s.A) / dt;
        const double drift = dA - p.g * s.A;
        const double gap = s.A - A_target;
        sum += dt * (drift * drift / p.lambda_sq + gap * gap);
    }
    return -sum;
}

namespace {

// -gamma * sum_{t,t'} dt^2 A_i(t) K_j(t') over the left-endpoint grid.
double cross_term(const AgentPath& tech, const AgentPath& capital, const ModelParams& p) {
    double sumA = 0.0;
    double sumK = 0.0;
    for (std::size_t i = 0; i + 1 < tech.size(); ++i) sumA += tech.states[i].A;
    for (std::size_t j = 0; j + 1 < capital.size(); ++j) sumK += capital.states[j].K;
    return -p.gamma * tech.dt * capital.dt * sumA * sumK;
}

}  // namespace

double log_weight_technology_pair(const AgentPath& first, const AgentPath& second,
                                  const ModelParams& p, double A_target) {
    first.validate();
    second.validate();
    require_same_grid(first, second);
    return log_weight_technology(first, p, A_target) + log_weight_technology(second, p, A_target) +
           cross_term(first, second, p) + cross_term(second, first, p);
}

double log_weight_consumption_penalty(const AgentPath& path, const ModelParams& p) {
    path.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const double gap = path.states[i].C - p.C_bar;
        sum += path.dt * gap * gap;
    }
    return -p.varsigma * p.varsigma * sum;
}

double log_weight_total(const std::vector<AgentPath>& paths, const ModelParams& p, double A_target,
                        ProductionMode mode) {
    if (paths.empty()) throw ShapeError("ensemble must contain at least one path");
    for (const auto& path : paths) require_same_grid(paths.front(), path);
    double total = 0.0;
    for (const auto& path : paths) {
        total += log_weight_consumption(path, p) + log_weight_capital(path, p, mode) +
                 log_weight_technology(path, p, A_target) + log_weight_consumption_penalty(path, p);
    }
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t j = 0; j < paths.size(); ++j)
            if (i != j) total += cross_term(paths[i], paths[j], p);
    return total;
}

double log_weight_intertemporal_constraint(const AgentPath& path, const ModelParams& p,
                                           const std::vector<double>& revenue) {
    path.validate();
    if (!revenue.empty() && revenue.size() != path.size())
        throw ShapeError("revenue sequence must match the path length");
    double gap = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& s = path.states[i];
        const double y = revenue.empty() ? production(s.K, s.A, p) : revenue[i];
        gap += path.dt * (y - s.C);
    }
    return -gap * gap / p.theta_sq;
}

}  // namespace agentfield
