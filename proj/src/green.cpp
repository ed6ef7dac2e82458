#include "agentfield/green.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "agentfield/errors.hpp"

namespace agentfield {

namespace {

double nonzero(double v, const char* what) {
    if (v == 0.0 || !std::isfinite(v)) throw SingularityError(std::string("vanishing factor: ") + what);
    return v;
}

// exp(x) - 1 - x without cancellation.
double expm1_minus_x(double x) {
    if (std::abs(x) > 0.5) return std::expm1(x) - x;
    double term = x * x / 2.0;
    double sum = term;
    for (int n = 3; n < 40 && std::abs(term) > 1e-18 * std::abs(sum); ++n) {
        term *= x / n;
        sum += term;
    }
    return sum;
}

// (2 - k) e^{2x} - 2 e^x + k + x, the capital-variance technology group.
double technology_group(double x, double k) {
    if (std::abs(x) > 0.5) return (2.0 - k) * std::exp(2.0 * x) - 2.0 * std::exp(x) + k + x;
    double sum = 0.0;
    double power = 1.0;  // x^n / n!
    double two_n = 1.0;
    for (int n = 1; n < 60; ++n) {
        power *= x / n;
        two_n *= 2.0;
        const double term = ((2.0 - k) * two_n - 2.0) * power;
        sum += term;
        if (n > 4 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum + x;
}

// Return on capital and depreciation spread at the phase technology level.
struct PhaseRates {
    double rho;    // A_bar eps K_bar^(eps-1) + r_c
    double alpha;  // delta - A_bar eps K_bar^(eps-1)
    double sigma;  // delta + r_c
    double beta;   // rho - alpha
};

PhaseRates phase_rates(const GreenCoefficients& c, const ModelParams& p) {
    const double mp = c.A_bar * p.epsilon * std::pow(p.K_bar, p.epsilon - 1.0);
    return {mp + p.r_c, p.delta - mp, p.delta + p.r_c, mp + p.r_c - (p.delta - mp)};
}

Eigen::Matrix3d drift_matrix(const PhaseRates& r, double K_power) {
    Eigen::Matrix3d N;
    N << -2.0 * r.rho, 0.0, 0.0, -2.0, -2.0 * r.alpha, 2.0 * K_power, 0.0, 0.0, 0.0;
    return N;
}

Eigen::Vector3d initial_drift(const GreenCoefficients& c, const ModelParams& p) {
    return {c.origin.C - c.C_bar, c.origin.K - p.K_bar, c.origin.A};
}

bool half_rate(const ModelParams& p) { return p.numerics.convention == Convention::half_rate; }

// Small-time means of the three coordinates.
Eigen::Vector3d drift_mean(const AgentState& from, double t, const GreenCoefficients& c, const ModelParams& p) {
    const double growth = half_rate(p) ? c.beta : c.alpha + c.beta;
    const double C = c.C_bar + (from.C - c.C_bar) * (1.0 + growth * t);
    const double K = from.K - t * (c.alpha * (from.K - p.K_bar) + p.delta * p.K_bar + from.C - from.A * c.K_power);
    return {C, K, from.A};
}

// Small-time covariance rates (diagonal).
Eigen::Vector3d variance_rates(const GreenCoefficients& c, const ModelParams& p) {
    if (half_rate(p)) return {p.varpi * p.varpi, c.Omega_sq, 1.0 / p.lambda_sq};
    return {2.0 * p.varpi * p.varpi, c.b_coef, c.c_coef};
}

}  // namespace

GreenCoefficients coefficients(const ModelParams& p, const PhaseSolution& phase, const AgentState& from,
                               const AgentState& to) {
    const double K_mid = 0.5 * (from.K + to.K);
    if (!(K_mid > 0.0)) throw DomainError("midpoint capital must be > 0");
    GreenCoefficients c;
    const double mp = 0.5 * (from.A + to.A) * p.epsilon * std::pow(K_mid, p.epsilon - 1.0);
    c.alpha = p.delta - mp;
    c.beta = (half_rate(p) ? mp : 2.0 * mp) + p.r_c - p.delta;
    nonzero(c.alpha, "alpha");
    nonzero(c.beta, "beta");
    c.K_power = std::pow(p.K_bar, p.epsilon);
    const double l2 = p.lambda_sq;
    const double Kp2 = c.K_power * c.K_power;
    const double w2 = p.varpi * p.varpi;
    const double tech = 2.0 * Kp2 / (l2 * c.alpha * c.alpha);
    c.Omega_sq = w2 / l2 *
                 (p.nu * p.nu + tech + 3.0 * w2 / (2.0 * nonzero(c.beta * c.beta - c.alpha * c.alpha, "beta^2-alpha^2")));
    c.b_coef = 2.0 * (p.nu * p.nu + tech +
                      3.0 * w2 / (2.0 * nonzero((2.0 * c.alpha + c.beta) * c.beta, "(2 alpha + beta) beta")));
    c.c_coef = 2.0 / l2;
    c.mass = phase.mass;
    c.A_bar = phase.A_bar_phase;
    c.C_bar = phase.C_bar_phase;
    c.origin = from;
    return c;
}

CovarianceState covariance_ode(const GreenCoefficients& c, const ModelParams& p, double s, int n_steps) {
    if (n_steps < 1) throw ParameterError("n_steps must be >= 1");
    if (!(s >= 0.0)) throw DomainError("s must be >= 0");
    const PhaseRates r = phase_rates(c, p);
    const Eigen::Matrix3d N = drift_matrix(r, c.K_power);
    const Eigen::Matrix3d source =
        2.0 * Eigen::Vector3d(p.varpi * p.varpi, p.nu * p.nu, 1.0 / p.lambda_sq).asDiagonal().toDenseMatrix();
    auto dH = [&](const Eigen::Matrix3d& H) -> Eigen::Matrix3d { return source - N * H - H * N.transpose(); };
    auto dJ = [&](const Eigen::Vector3d& J) -> Eigen::Vector3d { return -0.5 * N * J; };

    CovarianceState st;
    st.J = initial_drift(c, p);
    const double h = s / n_steps;
    for (int i = 0; i < n_steps; ++i) {
        const Eigen::Matrix3d k1 = dH(st.H);
        const Eigen::Matrix3d k2 = dH(st.H + 0.5 * h * k1);
        const Eigen::Matrix3d k3 = dH(st.H + 0.5 * h * k2);
        const Eigen::Matrix3d k4 = dH(st.H + h * k3);
        st.H += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const Eigen::Vector3d j1 = dJ(st.J);
        const Eigen::Vector3d j2 = dJ(st.J + 0.5 * h * j1);
        const Eigen::Vector3d j3 = dJ(st.J + 0.5 * h * j2);
        const Eigen::Vector3d j4 = dJ(st.J + h * j3);
        st.J += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    }
    st.s = s;
    return st;
}

CovarianceState covariance_closed_form(const GreenCoefficients& c, const ModelParams& p, double s) {
    if (!(s >= 0.0)) throw DomainError("s must be >= 0");
    const PhaseRates r = phase_rates(c, p);
    nonzero(r.rho, "r_c + K_bar^(eps-1) A_bar eps");
    nonzero(r.sigma, "delta + r_c");
    nonzero(r.alpha, "delta - K_bar^(eps-1) A_bar eps");
    nonzero(r.beta, "r_c - delta + 2 K_bar^(eps-1) A_bar eps");
    const double w2 = p.varpi * p.varpi;
    const double nu2 = p.nu * p.nu;
    const double l2 = p.lambda_sq;
    const double Kp = c.K_power;
    const double al = r.alpha;
    const double be = r.beta;
    const bool literal = p.numerics.covariance_form == CovarianceForm::literal;

    const double a = w2 * std::expm1(4.0 * r.rho * s) / (2.0 * r.rho);
    const double b = w2 * (std::expm1(4.0 * r.rho * s) / (2.0 * r.rho * be) - std::expm1(2.0 * r.sigma * s) / (be * r.sigma));
    const double e = -Kp / (l2 * al * al) * expm1_minus_x(2.0 * al * s);
    const double f = 2.0 * s / l2;
    // Capital variance; the integration constant in front of e^{4 alpha s} enforces d(0) = 0.
    const double tech_const = literal ? 0.5 : 1.5;
    const double cons_coef = literal ? 0.5 : 2.0;
    const double e4a = std::exp(4.0 * al * s);
    const double d = nu2 * std::expm1(4.0 * al * s) / (2.0 * al) +
                     Kp * Kp / (l2 * al * al * al) * technology_group(2.0 * al * s, tech_const) +
                     w2 * (std::expm1(4.0 * al * s) / (2.0 * al * r.sigma * r.rho) +
                           e4a * (std::expm1(4.0 * be * s) / (2.0 * r.rho * be * be) -
                                  cons_coef * std::expm1(2.0 * be * s) / (be * be * r.sigma)));

    CovarianceState st;
    st.s = s;
    st.H << a, b, 0.0, b, d, e, 0.0, e, f;
    const Eigen::Vector3d J0 = initial_drift(c, p);
    const double J1 = J0(0) * std::exp(r.rho * s);
    const double J2 = std::exp(al * s) * J0(1) +
                      J0(0) * (std::exp(r.rho * s) - std::exp(al * s)) / nonzero(r.rho - al, "rho - alpha") -
                      Kp * J0(2) * std::expm1(al * s) / al;
    st.J = {J1, J2, J0(2)};
    return st;
}

DensityResult transition_density(const AgentState& from, const AgentState& to, double t, const PhaseSolution& phase,
                                 const ModelParams& p) {
    if (!(t > 0.0)) throw DomainError("transition time t must be > 0");
    DensityResult out;
    out.coefficients = coefficients(p, phase, from, to);
    const GreenCoefficients& c = out.coefficients;
    out.mean = drift_mean(from, t, c, p);
    const double speed = t * std::max(std::abs(c.alpha), std::abs(c.beta));
    if (speed <= p.numerics.small_time_switch) {
        out.H = (variance_rates(c, p) * t).asDiagonal();
    } else {
        out.H = covariance_closed_form(c, p, t).H;
        out.closed_form_covariance = true;
    }
    const Eigen::LLT<Eigen::Matrix3d> llt(out.H);
    if (llt.info() != Eigen::Success) throw SingularityError("transition covariance is not positive definite");
    const Eigen::Vector3d X = Eigen::Vector3d(to.C, to.K, to.A) - out.mean;
    const Eigen::Vector3d L_inv_X = llt.matrixL().solve(X);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    out.log_gaussian = -0.5 * L_inv_X.squaredNorm() - 0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + log_det);
    const double gap = 0.5 * (to.A + from.A) - c.A_bar;
    out.log_density = out.log_gaussian - gap * gap * t / 2.0 - c.mass * t;
    out.density = std::exp(out.log_density);
    return out;
}

MostLikelyEndpoint most_likely_endpoint(const AgentState& from, double t, const PhaseSolution& phase,
                                        const ModelParams& p) {
    if (!(t > 0.0)) throw DomainError("transition time t must be > 0");
    MostLikelyEndpoint out;
    AgentState x = from;
    // Technology: stationarity of the gaussian exponent plus the phase weight.
    const double H_A = (half_rate(p) ? 1.0 / p.lambda_sq : 2.0 / p.lambda_sq) * t;
    const double A_bar = phase.A_bar_phase;
    x.A = (from.A * (1.0 / H_A - t / 4.0) + A_bar * t / 2.0) / (1.0 / H_A + t / 4.0);
    GreenCoefficients c;
    for (int it = 1; it <= 500; ++it) {
        c = coefficients(p, phase, from, x);
        const Eigen::Vector3d m = drift_mean(from, t, c, p);
        const double dC = m(0) - x.C;
        const double dK = m(1) - x.K;
        x.C = m(0);
        x.K = m(1);
        out.iterations = it;
        if (std::abs(dC) <= 1e-16 * std::max(1.0, std::abs(x.C)) && std::abs(dK) <= 1e-16 * std::max(1.0, std::abs(x.K)))
            break;
    }
    c = coefficients(p, phase, from, x);
    const Eigen::Vector3d m = drift_mean(from, t, c, p);
    out.state = x;
    out.residuals = {x.C - m(0), x.K - m(1),
                     (x.A - from.A) / H_A + (0.5 * (x.A + from.A) - A_bar) * t / 2.0};
    return out;
}

namespace {

struct LaplaceTerms {
    Eigen::Vector3d X;
    Eigen::Vector3d Y;
    Eigen::Vector3d H_diag;
    double m;
};

LaplaceTerms laplace_terms(const AgentState& from, const AgentState& to, const PhaseSolution& phase,
                           const ModelParams& p, double extra_rate) {
    const GreenCoefficients c = coefficients(p, phase, from, to);
    LaplaceTerms L;
    L.X = {to.C - from.C, to.K - from.K, to.A - from.A};
    const double growth = half_rate(p) ? c.beta : c.alpha + c.beta;
    L.Y = {growth * (from.C - c.C_bar),
           -(c.alpha * (from.K - p.K_bar) + p.delta * p.K_bar + from.C - from.A * c.K_power), 0.0};
    L.H_diag = variance_rates(c, p);
    L.m = c.mass + extra_rate;
    return L;
}

}  // namespace

double laplace_propagator(const AgentState& from, const AgentState& to, const PhaseSolution& phase,
                          const ModelParams& p, double extra_rate) {
    const LaplaceTerms L = laplace_terms(from, to, phase, p, extra_rate);
    const double XHX = (L.X.array().square() / L.H_diag.array()).sum();
    const double YHY = (L.Y.array().square() / L.H_diag.array()).sum();
    const double XHY = (L.X.array() * L.Y.array() / L.H_diag.array()).sum();
    const double radicand = 2.0 * L.m + YHY;
    if (!(radicand > 0.0)) throw DomainError("propagator radicand 2m + Y'H^-1 Y must be > 0");
    return std::exp(-std::sqrt(radicand * XHX) + XHY) / std::sqrt(radicand);
}

double laplace_propagator_quadrature(const AgentState& from, const AgentState& to, const PhaseSolution& phase,
                                     const ModelParams& p, double extra_rate) {
    const LaplaceTerms L = laplace_terms(from, to, phase, p, extra_rate);
    auto integrand = [&](double s) {
        if (s <= 0.0) return 0.0;
        const Eigen::Vector3d r = L.X - s * L.Y;
        const double q = (r.array().square() / L.H_diag.array()).sum();
        return std::exp(-L.m * s - q / (2.0 * s)) / std::sqrt(2.0 * std::numbers::pi * s);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
}

AgentState equilibrium(const ModelParams& p, const PhaseSolution& phase) {
    const double A = phase.A_bar_phase;
    const double e = p.epsilon;
    const double den = p.delta - std::pow(p.K_bar, e - 1.0) * A * e;
    nonzero(den, "delta - K_bar^(eps-1) A_bar eps");
    return {phase.C_bar_phase, ((1.0 - e) * A * std::pow(p.K_bar, e) - phase.C_bar_phase) / den, A};
}

AgentState average_path_rhs(const AgentState& x, const PhaseSolution& phase, const ModelParams& p) {
    const AgentState eq = equilibrium(p, phase);
    const double mp = marginal_product(x.K, x.A, p);
    const double growth = mp + p.r_c - (half_rate(p) ? p.delta : 0.0);
    return {(x.C - eq.C) * growth, (mp - p.delta) * (x.K - eq.K) - (x.C - eq.C),
            -(x.A - eq.A) / (2.0 * p.lambda_sq)};
}

AgentPath average_path(const AgentState& initial, double t, const PhaseSolution& phase, const ModelParams& p,
                       int n_steps) {
    if (!(t >= 0.0)) throw DomainError("horizon t must be >= 0");
    if (n_steps < 1) throw ParameterError("n_steps must be >= 1");
    AgentPath path;
    path.dt = t > 0.0 ? t / n_steps : 1.0;
    path.states.reserve(n_steps + 1);
    path.states.push_back(initial);
    if (t == 0.0) return path;
    const double h = path.dt;
    auto axpy = [](const AgentState& x, double a, const AgentState& k) {
        return AgentState{x.C + a * k.C, x.K + a * k.K, x.A + a * k.A};
    };
    auto rhs = [&](const AgentState& x) {
        if (!(x.K > 0.0)) throw TrajectoryTerminated("average path reached K <= 0", path);
        return average_path_rhs(x, phase, p);
    };
    AgentState x = initial;
    for (int i = 0; i < n_steps; ++i) {
        const AgentState k1 = rhs(x);
        const AgentState k2 = rhs(axpy(x, 0.5 * h, k1));
        const AgentState k3 = rhs(axpy(x, 0.5 * h, k2));
        const AgentState k4 = rhs(axpy(x, h, k3));
        x = {x.C + h / 6.0 * (k1.C + 2.0 * k2.C + 2.0 * k3.C + k4.C),
             x.K + h / 6.0 * (k1.K + 2.0 * k2.K + 2.0 * k3.K + k4.K),
             x.A + h / 6.0 * (k1.A + 2.0 * k2.A + 2.0 * k3.A + k4.A)};
        if (!(x.K > 0.0)) throw TrajectoryTerminated("average path reached K <= 0", path);
        path.states.push_back(x);
    }
    return path;
}

EigenvalueReport linearized_eigenvalues(const ModelParams& p, const PhaseSolution& phase) {
    EigenvalueReport out;
    const AgentState eq = equilibrium(p, phase);
    const double A = phase.A_bar_phase;
    const std::complex<double> root = std::sqrt(std::complex<double>(p.r_c * p.r_c - 4.0 * A, 0.0));
    const double tail = eq.K > 0.0 ? A * p.epsilon * marginal_product(eq.K, 1.0, p) * eq.K
                                   : std::numeric_limits<double>::quiet_NaN();
    out.closed_form = {0.5 * p.r_c - p.delta - 0.5 * root + tail, 0.5 * p.r_c - p.delta + 0.5 * root + tail};

    // Central differences of the (C, K) right-hand side.
    auto f = [&](double C, double K) {
        const AgentState r = average_path_rhs({C, K, A}, phase, p);
        return Eigen::Vector2d(r.C, r.K);
    };
    const double hC = 1e-6 * std::max(1.0, std::abs(eq.C));
    const double hK = 1e-6 * std::max(1.0, std::abs(eq.K));
    out.J.col(0) = (f(eq.C + hC, eq.K) - f(eq.C - hC, eq.K)) / (2.0 * hC);
    out.J.col(1) = (f(eq.C, eq.K + hK) - f(eq.C, eq.K - hK)) / (2.0 * hK);
    const Eigen::EigenSolver<Eigen::Matrix2d> solver(out.J);
    const auto ev = solver.eigenvalues();
    out.jacobian = {ev(0), ev(1)};
    if (out.jacobian[0].real() > out.jacobian[1].real()) std::swap(out.jacobian[0], out.jacobian[1]);
    out.technology = -1.0 / (2.0 * p.lambda_sq);
    out.saddle = std::abs(out.jacobian[0].imag()) == 0.0 && std::abs(out.jacobian[1].imag()) == 0.0 &&
                 out.jacobian[0].real() < 0.0 && out.jacobian[1].real() > 0.0;
    return out;
}

}  // namespace agentfield
