#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace agentfield {

// Closed-form variants that the solver can switch between.
enum class ShiftForm { exact, surrogate };        // capital truncation shift
enum class ConsumptionShiftForm { small_target, exact };  // consumption truncation shift
enum class Convention { full_rate, half_rate };       // density / drift normalization
enum class CovarianceForm { corrected, literal };     // closed form of the capital variance

// Numerical controls and formula switches. Defaults are the documented choices.
struct Numerics {
    // Fixed point for the technology moment.
    double damping = 0.5;
    int max_iterations = 1000;
    double fixed_point_tolerance = 1e-10;
    // Feasibility thresholds.
    double lambda_min = 10.0;        // "lambda >> 1"
    double spread_max = 0.1;         // "1 >> marginal product - depreciation"
    double perturbative_max = 0.1;   // first-order shift relative to the spread
    // Formula switches.
    ShiftForm capital_shift = ShiftForm::exact;
    ConsumptionShiftForm consumption_shift = ConsumptionShiftForm::small_target;
    bool include_technology_shift = true;
    Convention convention = Convention::full_rate;
    CovarianceForm covariance_form = CovarianceForm::corrected;
    bool literal_potential = false;  // keep the stray coupling factor in the correction potential
    // Green functions.
    double small_time_switch = 0.05;  // s * max(|alpha|, |beta|) threshold for the linear covariance
    int ode_steps_per_unit = 1000;
};

// Economic and statistical parameters of the model.
struct ModelParams {
    double varpi = 0.1;          // consumption volatility
    double nu = 0.1;             // capital shock std
    double lambda_sq = 400.0;    // technology stiffness
    double varsigma = 0.05;      // consumption penalty
    double delta = 0.05;         // depreciation rate
    double r_c = 0.05;           // exogenous interest rate
    double epsilon = 0.3;        // Cobb-Douglas exponent
    double K_bar = 150.0;        // reference (minimal) capital
    double C_bar = 1.0;          // consumption target
    double A0 = 8.0;             // exogenous technology
    double kappa = 0.2;          // social technology feedback
    double gamma = 1.0;          // capital-technology interaction strength
    double alpha_laplace = 0.5;  // inverse mean lifespan
    double C0 = 0.6;             // cumulated risk-aversion constant
    double g = 0.0;              // technology drift
    double theta_sq = 1.0;       // intertemporal-constraint variance
    double sigma_sq = 0.005;     // generic action variance
    double eta_sq = 1.0;         // instantaneous-constraint variance
    Numerics numerics;

    double lambda() const;
    // Throws ParameterError naming the first violated invariant.
    void validate() const;
};

struct AgentState {
    double C = 0.0;
    double K = 0.0;
    double A = 0.0;
};

// A discretized path on a uniform grid t0, t0 + dt, ...
struct AgentPath {
    std::vector<AgentState> states;
    double dt = 1.0;
    double t0 = 0.0;

    std::size_t size() const { return states.size(); }
    double horizon() const;  // dt * (n - 1)
    // Rejects < 2 states, dt <= 0 and non-finite components.
    void validate() const;
};

enum class ProductionMode { exact, taylor };

// Output A * F(K) with F(K) = K^epsilon, or its second-order expansion around K_bar.
double production(double K, double A, const ModelParams& p, ProductionMode mode = ProductionMode::exact);
// Marginal product A * F'(K) of the exact Cobb-Douglas form.
double marginal_product(double K, double A, const ModelParams& p);

// Quadratic utility -(theta/2)(c - Ct)^2 + 1/(2 theta), Ct = C_hat + 1/theta.
double utility_quadratic(double c, double theta, double C_hat);

// Log statistical weights. Integrals are left Riemann sums, derivatives forward differences.
double log_weight_consumption(const AgentPath& path, const ModelParams& p);
double log_weight_capital(const AgentPath& path, const ModelParams& p,
                          ProductionMode mode = ProductionMode::exact);
// Technology weight of two agents: the single-agent parts of both plus the
// unrestricted capital-technology cross double sum over both orderings.
double log_weight_technology_pair(const AgentPath& first, const AgentPath& second,
                                  const ModelParams& p, double A_target);
// Single-agent technology part, without the cross term.
double log_weight_technology(const AgentPath& path, const ModelParams& p, double A_target);
// Consumption penalty -sum dt varsigma^2 (C - C_bar)^2.
double log_weight_consumption_penalty(const AgentPath& path, const ModelParams& p);
// Total weight of an ensemble: per-agent parts plus cross terms over ordered pairs i != j.
double log_weight_total(const std::vector<AgentPath>& paths, const ModelParams& p, double A_target,
                        ProductionMode mode = ProductionMode::exact);
// -(int Yhat dt - int X dt)^2 / theta^2. Not part of the total weight.
// An empty revenue sequence means Yhat = A F(K) along the path; X is consumption.
double log_weight_intertemporal_constraint(const AgentPath& path, const ModelParams& p,
                                           const std::vector<double>& revenue = {});

}  // namespace agentfield
