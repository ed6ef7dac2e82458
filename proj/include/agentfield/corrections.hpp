#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "agentfield/green.hpp"
#include "agentfield/model.hpp"
#include "agentfield/phase.hpp"

namespace agentfield {

// First-order interaction potential between the endpoints of one transition of duration t.
// from = (C', K', A'), to = (C, K, A). Uses the raw coupling (not rescaled).
double correction_potential(const AgentState& from, const AgentState& to, double t, const ModelParams& p);

struct CorrectedDensity {
    double density = 0.0;
    double log_density = 0.0;
    double potential = 0.0;  // V
    DensityResult base;
};
// Gaussian transition density times exp(-gamma V).
CorrectedDensity corrected_density(const AgentState& from, const AgentState& to, double t, const PhaseSolution& phase,
                                   const ModelParams& p);

struct DeviationQuery {
    AgentState initial_state;
    Eigen::Vector3d initial_velocity = Eigen::Vector3d::Zero();  // (dC, dK, dA) at t = 0
    double t = 0.0;
    GreenCoefficients coeffs;
};

// Response matrices: rows (consumption, capital, technology), columns (C, K, A) of the
// initial position and of the initial velocity. The coupling factor is not included.
struct DeviationCoefficients {
    Eigen::Matrix3d position = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d velocity = Eigen::Matrix3d::Zero();
};

// Closed-form trajectory-deviation coefficients with dimensionless coupling.
DeviationCoefficients deviation_coefficients(double t, const GreenCoefficients& c);
// Coefficients rebuilt from the modified-dynamics solution with the coupling rescaled once.
DeviationCoefficients deviation_coefficients_from_dynamics(double t, const GreenCoefficients& c);

// (dC, dK, dA) at time t; dC is identically zero.
Eigen::Vector3d path_deviation(const DeviationQuery& q, const ModelParams& p);

struct Elasticity {
    std::string name;      // e.g. "dK/dK0", "dK/dCdot0"
    double value = 0.0;    // closed form, coupling included
    int expected_sign = 0;
};
std::vector<Elasticity> elasticity_table(double t, const GreenCoefficients& c, const ModelParams& p);

struct ModifiedMatrices {
    Eigen::Matrix3d R1, R2, R3;
    Eigen::Matrix3d M;            // zeroth-order drift matrix
    Eigen::Matrix3d H;            // diag(2 varpi^2, b, c) s
    Eigen::Matrix3d M_bar;        // (1 - gamma D R1)(M + gamma D R2), D the rate matrix
    Eigen::Matrix3d H_bar;        // H - gamma H R1 H
    Eigen::Matrix3d source;       // gamma (R3 - M^T (2 R2 - R1))
    Eigen::Matrix3d M_bar_reference;
    Eigen::Matrix3d H_bar_reference;
    double M_bar_discrepancy = 0.0;  // max |computed - reference|
    double H_bar_discrepancy = 0.0;
    bool H_bar_reference_symmetric = false;
};
ModifiedMatrices modified_matrices(const ModelParams& p, const GreenCoefficients& c, double s);
// X0' source X0.
double source_quadratic(const ModifiedMatrices& m, const Eigen::Vector3d& X0);

struct TwoAgentQuery {
    AgentState agent1_from, agent1_to;
    AgentState agent2_from, agent2_to;
    double t = 0.0;
};

struct TwoAgentCorrection {
    double V_I = 0.0;
    double dK_21 = 0.0, dA_21 = 0.0;  // correction of agent 1 caused by agent 2
    double dK_12 = 0.0, dA_12 = 0.0;  // correction of agent 2 caused by agent 1
};
TwoAgentCorrection two_agent_correction(const TwoAgentQuery& q, const GreenCoefficients& c, const ModelParams& p);

}  // namespace agentfield
