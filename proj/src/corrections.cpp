#include "agentfield/corrections.hpp"

#include <cmath>

#include "agentfield/errors.hpp"

namespace agentfield {

double correction_potential(const AgentState& from, const AgentState& to, double t, const ModelParams& p) {
    if (!(t >= 0.0)) throw DomainError("t must be >= 0");
    const double Kp = std::pow(p.K_bar, p.epsilon);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double dC = to.C - from.C;
    const double dK = to.K - from.K;
    const double dA = to.A - from.A;
    const double last = t2 * dA * to.K * (p.numerics.literal_potential ? p.gamma : 1.0);
    return 2.0 * t2 * to.A * to.K + t3 / 12.0 * dA * dC + t3 / 2.0 * dA * dK - Kp * t3 / 12.0 * dA * dA +
           to.A * (t3 / 3.0 * dC + t2 * dK - Kp * t3 / 3.0 * dA) + last;
}

CorrectedDensity corrected_density(const AgentState& from, const AgentState& to, double t, const PhaseSolution& phase,
                                   const ModelParams& p) {
    CorrectedDensity out;
    out.base = transition_density(from, to, t, phase, p);
    out.potential = correction_potential(from, to, t, p);
    out.log_density = out.base.log_density - p.gamma * out.potential;
    out.density = std::exp(out.log_density);
    return out;
}

DeviationCoefficients deviation_coefficients(double t, const GreenCoefficients& c) {
    if (c.A_bar == 0.0) throw SingularityError("vanishing phase technology level");
    const double A2 = c.A_bar * c.A_bar;
    const double Kp = c.K_power;
    const double b = c.b_coef;
    const double cc = c.c_coef;
    const double t3 = t * t * t;
    const double t4 = t3 * t;
    const double t5 = t4 * t;
    const double t6 = t5 * t;
    DeviationCoefficients d;
    d.position(1, 0) = 7.0 * cc * t5 / (720.0 * A2);
    d.position(1, 1) = cc * t4 / (48.0 * A2);
    d.position(1, 2) = b * t3 / (6.0 * Kp * A2) + Kp * cc * t5 / 90.0;
    d.position(2, 1) = cc * t3 / (6.0 * Kp * A2);
    d.velocity(1, 0) = -7.0 * cc * t6 / (1440.0 * A2);
    d.velocity(1, 1) = cc * t5 / (60.0 * A2);
    d.velocity(1, 2) = b * t4 / (24.0 * Kp * A2) + 3.0 * Kp * cc * t6 / (160.0 * A2);
    d.velocity(2, 1) = cc * t4 / 24.0;
    d.velocity(2, 2) = t;
    return d;
}

DeviationCoefficients deviation_coefficients_from_dynamics(double t, const GreenCoefficients& c) {
    if (c.A_bar == 0.0) throw SingularityError("vanishing phase technology level");
    const double Kp = c.K_power;
    const double scale = 1.0 / (c.A_bar * c.A_bar * Kp);
    const double b = c.b_coef;
    const double cc = c.c_coef;
    const double s3 = t * t * t;
    const double s4 = s3 * t;
    const double s5 = s4 * t;
    const double s6 = s5 * t;
    DeviationCoefficients d;
    d.position(1, 0) = 7.0 * Kp * cc * s5 / 720.0;
    d.position(1, 1) = Kp * cc * s4 / 48.0;
    d.position(1, 2) = b * s3 / 6.0 + Kp * Kp * cc * s5 / 90.0;
    d.position(2, 1) = cc * s3 / 6.0;
    d.velocity(1, 0) = -7.0 * Kp * cc * s6 / 1440.0;
    d.velocity(1, 1) = Kp * cc * s5 / 60.0;
    d.velocity(1, 2) = b * s4 / 24.0 + 3.0 * Kp * Kp * cc * s6 / 160.0;
    d.velocity(2, 1) = cc * s4 / 24.0;
    d.position *= scale;
    d.velocity *= scale;
    return d;
}

Eigen::Vector3d path_deviation(const DeviationQuery& q, const ModelParams& p) {
    if (!(q.t >= 0.0)) throw DomainError("t must be >= 0");
    const DeviationCoefficients d = deviation_coefficients(q.t, q.coeffs);
    const Eigen::Vector3d x0(q.initial_state.C, q.initial_state.K, q.initial_state.A);
    Eigen::Vector3d out = p.gamma * (d.position * x0 + d.velocity * q.initial_velocity);
    out(0) = 0.0;
    return out;
}

std::vector<Elasticity> elasticity_table(double t, const GreenCoefficients& c, const ModelParams& p) {
    if (!(t > 0.0)) throw DomainError("t must be > 0");
    const DeviationCoefficients d = deviation_coefficients(t, c);
    const double g = p.gamma;
    return {
        {"dK/dC0", g * d.position(1, 0), 1},     {"dK/dK0", g * d.position(1, 1), 1},
        {"dK/dA0", g * d.position(1, 2), 1},     {"dA/dK0", g * d.position(2, 1), 1},
        {"dK/dCdot0", g * d.velocity(1, 0), -1}, {"dK/dKdot0", g * d.velocity(1, 1), 1},
        {"dK/dAdot0", g * d.velocity(1, 2), 1},  {"dA/dKdot0", g * d.velocity(2, 1), 1},
        {"dA/dAdot0", g * d.velocity(2, 2), 1},
    };
}

ModifiedMatrices modified_matrices(const ModelParams& p, const GreenCoefficients& c, double s) {
    if (!(s >= 0.0)) throw DomainError("s must be >= 0");
    ModifiedMatrices m;
    const double g = p.gamma;
    const double Kp = c.K_power;
    const double s2 = s * s;
    const double s3 = s2 * s;
    m.R1 << 0, 0, s3 / 24.0, 0, 0, s2 / 4.0, s3 / 24.0, s2 / 4.0, -Kp * s3 / 12.0;
    m.R2 << 0, 0, s3 / 6.0, 0, 0, s2 / 2.0, 0, s2 / 2.0, -Kp * s3 / 6.0;
    m.R3 << 0, 0, 0, 0, 0, s2, 0, s2, 0;
    m.M << c.alpha + c.beta, 0, 0, 1, c.alpha, -Kp, 0, 0, 0;
    const double a = 2.0 * p.varpi * p.varpi;
    const double b = c.b_coef;
    const double cc = c.c_coef;
    const Eigen::Matrix3d rates = Eigen::Vector3d(a, b, cc).asDiagonal();
    m.H = rates * s;
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    m.M_bar = (I - g * rates * m.R1) * (m.M + g * rates * m.R2);
    m.H_bar = m.H - g * m.H * m.R1 * m.H;
    m.source = g * (m.R3 - m.M.transpose() * (2.0 * m.R2 - m.R1));

    const double s4 = s3 * s;
    const double s5 = s4 * s;
    m.M_bar_reference << c.alpha + c.beta, 0, a * s3 * g / 6.0,  //
        1, c.alpha - b * cc * s4 * g * g / 8.0, b * s2 * g / 2.0 - Kp,  //
        -cc * s2 * g / 4.0, cc * s2 * g / 2.0, Kp * cc * s2 * g / 4.0 - Kp * cc * s3 * g / 6.0;
    m.H_bar_reference << a * s, 0, -a * cc * s5 * g / 24.0,  //
        0, b * s, -b * cc * s4 * g / 8.0,  //
        0, -b * cc * s4 * g / 8.0, cc * s + Kp * cc * cc * s5 * g / 24.0;
    m.M_bar_discrepancy = (m.M_bar - m.M_bar_reference).cwiseAbs().maxCoeff();
    m.H_bar_discrepancy = (m.H_bar - m.H_bar_reference).cwiseAbs().maxCoeff();
    m.H_bar_reference_symmetric = (m.H_bar_reference - m.H_bar_reference.transpose()).cwiseAbs().maxCoeff() == 0.0;
    return m;
}

double source_quadratic(const ModifiedMatrices& m, const Eigen::Vector3d& X0) { return X0.dot(m.source * X0); }

TwoAgentCorrection two_agent_correction(const TwoAgentQuery& q, const GreenCoefficients& c, const ModelParams& p) {
    if (!(q.t > 0.0)) throw DomainError("t must be > 0");
    const double g = p.gamma;
    const double t = q.t;
    const double Kp = c.K_power;
    const double b = c.b_coef;
    const double cc = c.c_coef;
    auto mid = [](const AgentState& a, const AgentState& z) {
        return AgentState{0.5 * (a.C + z.C), 0.5 * (a.K + z.K), 0.5 * (a.A + z.A)};
    };
    auto diff = [](const AgentState& a, const AgentState& z) { return AgentState{z.C - a.C, z.K - a.K, z.A - a.A}; };
    const AgentState m1 = mid(q.agent1_from, q.agent1_to);
    const AgentState m2 = mid(q.agent2_from, q.agent2_to);
    const AgentState d1 = diff(q.agent1_from, q.agent1_to);
    const AgentState d2 = diff(q.agent2_from, q.agent2_to);
    TwoAgentCorrection out;
    out.V_I = g * t * t * (m1.A * m2.K + m1.K * m2.A) +
              g * t * t * t / 24.0 * (m1.A * d2.C + d1.C * m2.A - Kp * (m1.A * d2.A + d1.A * m2.A));
    out.dK_21 = g * b * t * m2.A;
    out.dA_21 = g * (cc * d2.C / 12.0 - cc * Kp * d2.A / 12.0) * t * t * t + g * cc * t * m2.K;
    out.dK_12 = g * b * t * m1.A;
    out.dA_12 = g * (cc * d1.C / 12.0 - cc * Kp * d1.A / 12.0) * t * t * t + g * cc * t * m1.K;
    return out;
}

}  // namespace agentfield
