#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>

#include "agentfield/model.hpp"
#include "agentfield/phase.hpp"

namespace agentfield {

// Drift and variance coefficients of one transition, evaluated at the midpoint of its endpoints.
struct GreenCoefficients {
    double alpha = 0.0;     // delta - midpoint marginal product
    double beta = 0.0;      // return spread
    double Omega_sq = 0.0;  // mixed capital variance
    double b_coef = 0.0;    // capital variance rate
    double c_coef = 0.0;    // technology variance rate, 2 / lambda^2
    double mass = 0.0;
    double A_bar = 0.0;     // phase technology level
    double C_bar = 0.0;     // phase consumption level
    double K_power = 0.0;   // K_bar^eps
    AgentState origin;      // initial state of the transition
};

GreenCoefficients coefficients(const ModelParams& p, const PhaseSolution& phase, const AgentState& from,
                               const AgentState& to);

// Covariance H(s) and drift vector J(s) of the linearized dynamics.
struct CovarianceState {
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    Eigen::Vector3d J = Eigen::Vector3d::Zero();
    double s = 0.0;
};

// Fixed-step RK4 integration from H(0) = 0, J(0) = (C' - C_bar, K' - K_bar, A').
CovarianceState covariance_ode(const GreenCoefficients& c, const ModelParams& p, double s, int n_steps);
// Exact solution of the same system; the capital variance follows numerics.covariance_form.
CovarianceState covariance_closed_form(const GreenCoefficients& c, const ModelParams& p, double s);

struct DensityResult {
    double density = 0.0;
    double log_density = 0.0;
    double log_gaussian = 0.0;  // normalized gaussian factor alone
    GreenCoefficients coefficients;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    bool closed_form_covariance = false;
};

DensityResult transition_density(const AgentState& from, const AgentState& to, double t,
                                 const PhaseSolution& phase, const ModelParams& p);

// Endpoint where every gaussian exponent vanishes (and the technology weight is stationary).
struct MostLikelyEndpoint {
    AgentState state;
    std::array<double, 3> residuals{};  // consumption, capital, technology relations
    int iterations = 0;
};
MostLikelyEndpoint most_likely_endpoint(const AgentState& from, double t, const PhaseSolution& phase,
                                        const ModelParams& p);

// Time-integrated propagator with exponential horizon of rate mass + extra_rate.
double laplace_propagator(const AgentState& from, const AgentState& to, const PhaseSolution& phase,
                          const ModelParams& p, double extra_rate = 0.0);
// Direct quadrature of the same integral over the horizon, for cross-checks.
double laplace_propagator_quadrature(const AgentState& from, const AgentState& to, const PhaseSolution& phase,
                                     const ModelParams& p, double extra_rate = 0.0);

// Raised when the average path leaves the K > 0 domain; carries the computed prefix.
class TrajectoryTerminated : public std::runtime_error {
public:
    TrajectoryTerminated(const std::string& what, AgentPath partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const AgentPath& partial() const { return partial_; }

private:
    AgentPath partial_;
};

AgentState equilibrium(const ModelParams& p, const PhaseSolution& phase);
// Right-hand side of the average-path ODE.
AgentState average_path_rhs(const AgentState& x, const PhaseSolution& phase, const ModelParams& p);
AgentPath average_path(const AgentState& initial, double t, const PhaseSolution& phase, const ModelParams& p,
                       int n_steps);

struct EigenvalueReport {
    std::array<std::complex<double>, 2> closed_form;  // reference closed expression
    std::array<std::complex<double>, 2> jacobian;  // eigenvalues of the (C, K) Jacobian
    double technology = 0.0;                       // decoupled -1 / (2 lambda^2)
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    bool saddle = false;                           // one negative and one positive real eigenvalue
};
EigenvalueReport linearized_eigenvalues(const ModelParams& p, const PhaseSolution& phase);

}  // namespace agentfield
