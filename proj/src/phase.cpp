#include "agentfield/phase.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_erf.h>

#include <cmath>
#include <limits>

#include "agentfield/errors.hpp"

namespace agentfield {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

// Inverse Mills ratio phi(x) / (1 - Phi(x)), stable for large |x|.
double inverse_mills(double x) {
    static const bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;
    gsl_sf_result r;
    const int status = gsl_sf_hazard_e(x, &r);
    if (status == GSL_EUNDRFLW) return 0.0;  // phi(x) underflows far in the left tail
    if (status != GSL_SUCCESS) throw DomainError("inverse Mills ratio failed");
    return r.val;
}

double checked_ratio(double num, double den, const char* what) {
    if (den == 0.0 || !std::isfinite(den)) throw SingularityError(std::string("vanishing denominator: ") + what);
    return num / den;
}

// Technology source (1 - kappa) A0 + (2 - kappa) kappa Gamma3.
double technology_source(const ModelParams& p, double Gamma3) {
    return (1.0 - p.kappa) * p.A0 + (2.0 - p.kappa) * p.kappa * Gamma3;
}

// Consumption variance denominator varsigma^2 varpi^2 + R^2 with R the return on capital.
double consumption_denominator(const ModelParams& p, double Gamma3) {
    const double R = Gamma3 * p.epsilon * std::pow(p.K_bar, p.epsilon - 1.0) + p.r_c;
    return p.varsigma * p.varsigma * p.varpi * p.varpi + R * R;
}

double consumption_shift(const ModelParams& p) {
    if (p.numerics.consumption_shift == ConsumptionShiftForm::small_target) return kSqrt2OverPi * p.varpi;
    return p.varpi * inverse_mills(-p.C_bar / p.varpi);
}

}  // namespace

std::string to_string(Phase phase) { return phase == Phase::trivial ? "trivial" : "nontrivial"; }

Phase phase_from_index(int index) {
    if (index == 0) return Phase::trivial;
    if (index == 1) return Phase::nontrivial;
    throw ParameterError("phase index must be 0 or 1");
}

double depreciation_spread(const ModelParams& p, double Gamma3) {
    return p.delta - Gamma3 * p.epsilon * std::pow(p.K_bar, p.epsilon - 1.0);
}

double capital_scale(const ModelParams& p) { return std::pow(p.K_bar, p.epsilon) * (1.0 - p.epsilon); }

double free_technology(const ModelParams& p) { return p.A0 / (1.0 - p.kappa); }

BoundaryShifts boundary_shifts(const ModelParams& p, double Gamma3) {
    BoundaryShifts out;
    out.consumption = consumption_shift(p);

    // Truncated gaussian in K' with width sqrt|Y| nu, cut at U.
    const double Y = depreciation_spread(p, Gamma3);
    const double width = std::sqrt(std::abs(Y)) * p.nu;
    const double cut = p.C_bar + out.consumption - Gamma3 * capital_scale(p);
    if (width > 0.0) {
        out.capital_exact = -width * inverse_mills(-cut / width);
        const double z = std::abs(cut) / (std::sqrt(2.0) * width);
        out.capital_approx = -kSqrt2OverPi * width * std::exp(-0.5 * cut * cut / (width * width)) /
                             (2.0 - std::exp(-1.9 * std::pow(z, 1.3)));
    }
    out.capital = p.numerics.capital_shift == ShiftForm::exact ? out.capital_exact : out.capital_approx;

    if (p.numerics.include_technology_shift) {
        const double lam = p.lambda();
        out.technology = std::sqrt(2.0 / lam) * inverse_mills(-std::sqrt(lam) * Gamma3);
    }
    return out;
}

double gamma3_map(const ModelParams& p, double Gamma3, double gamma_eta) {
    const double k = capital_scale(p);
    const double Y = depreciation_spread(p, Gamma3);
    const double ab = p.varpi * p.varpi / consumption_denominator(p, Gamma3) + p.nu * p.nu;
    const BoundaryShifts sh = boundary_shifts(p, Gamma3);
    const double xs = p.C_bar + sh.consumption - sh.capital;
    const double ge = gamma_eta;
    const double num = 2.0 * (2.0 * (technology_source(p, Gamma3) + sh.technology) * Y * Y + xs * ge * Y);
    const double den = 4.0 * Y * Y - ab * ge * ge * Y + 2.0 * ge * k;
    if (std::abs(den) <= 1e-14 * (4.0 * Y * Y + 2.0 * std::abs(ge) * k))
        throw SingularityError("vanishing denominator in the technology fixed point");
    return num / den;
}

FixedPointResult gamma3_fixed_point(const ModelParams& p, double gamma_eta) {
    if (!(gamma_eta >= 0.0)) throw ParameterError("gamma_eta must be >= 0");
    const auto& n = p.numerics;
    FixedPointResult out;
    double G = free_technology(p);
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= n.max_iterations; ++it) {
        const double mapped = gamma3_map(p, G, gamma_eta);
        residual = std::abs(mapped - G);
        out.iterations = it;
        if (!std::isfinite(mapped)) break;
        const double next = (1.0 - n.damping) * G + n.damping * mapped;
        const bool stalled = std::abs(next - G) <= 1e-15 * std::max(1.0, std::abs(G));
        G = next;
        if (stalled) break;
    }
    residual = std::abs(gamma3_map(p, G, gamma_eta) - G);
    out.value = G;
    out.residual = residual;
    if (!(residual < n.fixed_point_tolerance))
        throw ConvergenceError("technology fixed point did not converge", residual);
    return out;
}

double gamma3_first_order_slope(const ModelParams& p) {
    const double G0 = free_technology(p);
    const double Y = depreciation_spread(p, G0);
    if (Y == 0.0) throw SingularityError("vanishing depreciation spread");
    const BoundaryShifts sh = boundary_shifts(p, G0);
    const double x = p.C_bar + sh.consumption - sh.capital;
    const double om = 1.0 - p.kappa;
    return -0.5 * (capital_scale(p) * p.A0 - x * Y * om) / (Y * Y * om * om * om);
}

double gamma3_first_order(const ModelParams& p, double gamma_eta) {
    return free_technology(p) + gamma3_first_order_slope(p) * gamma_eta;
}

double gamma1_full(const ModelParams& p, double Gamma3, double gamma_eta) {
    const double Y = depreciation_spread(p, Gamma3);
    const double S = consumption_denominator(p, Gamma3);
    const BoundaryShifts sh = boundary_shifts(p, Gamma3);
    const double ta = checked_ratio(1.0, Y, "depreciation spread");
    const double tb = capital_scale(p) / Y;
    const double a = p.varpi * p.varpi / S;
    const double b = p.nu * p.nu;
    const double ge = gamma_eta;
    const double cs = p.C_bar + sh.consumption;
    const double q = technology_source(p, Gamma3);
    const double num = 4.0 * cs - cs * b * ta * ta * ge * ge + 2.0 * a * q * ta * ge + 2.0 * cs * ta * tb * ge +
                       ta * ta * p.varpi * p.varpi * ge * ge * sh.capital / S;
    const double den = 4.0 - (a + b) * ta * ta * ge * ge + 2.0 * ta * tb * ge;
    return checked_ratio(num, den, "consumption moment");
}

double gamma2_full(const ModelParams& p, double Gamma3, double gamma_eta) {
    const double Y = depreciation_spread(p, Gamma3);
    const double S = consumption_denominator(p, Gamma3);
    const BoundaryShifts sh = boundary_shifts(p, Gamma3);
    const double k = capital_scale(p);
    const double ta = checked_ratio(1.0, Y, "depreciation spread");
    const double tb = k / Y;
    const double a = p.varpi * p.varpi / S;
    const double b = p.nu * p.nu;
    const double ge = gamma_eta;
    const double cs = p.C_bar + sh.consumption;
    const double q = technology_source(p, Gamma3);
    const double R2 = S - p.varsigma * p.varsigma * p.varpi * p.varpi;
    const double inner = p.varsigma * p.varsigma + R2 / (p.varpi * p.varpi);
    const double num = -(ge * ge * b * ta * ta * cs + 2.0 * b * ta * ge * q -
                         (4.0 + 2.0 * k * ta * ge - (ta * ge) * (ta * ge) / inner) * sh.capital);
    const double den = 4.0 - (a + b) * ta * ta * ge * ge + 2.0 * ta * tb * ge;
    return checked_ratio(num, den, "capital moment");
}

double gamma1_first_order(const ModelParams& p, double gamma_eta) {
    const double G0 = free_technology(p);
    const double Y = depreciation_spread(p, G0);
    const double S = consumption_denominator(p, G0);
    const BoundaryShifts sh = boundary_shifts(p, G0);
    return p.C_bar + sh.consumption -
           checked_ratio(p.varpi * p.varpi * G0 * gamma_eta, 2.0 * S * std::abs(Y), "depreciation spread");
}

double gamma2_first_order(const ModelParams& p, double gamma_eta) {
    const double G0 = free_technology(p);
    const double Y = depreciation_spread(p, G0);
    const BoundaryShifts sh = boundary_shifts(p, G0);
    const double k = capital_scale(p);
    return sh.capital - checked_ratio((p.nu * p.nu * G0 * Y + k * (1.0 - Y) * sh.capital) * gamma_eta,
                                      2.0 * Y * Y, "depreciation spread");
}

CompatibilityRoot compatibility_window(const ModelParams& p) {
    CompatibilityRoot out;
    const double e = p.epsilon;
    const double Kb = p.K_bar;
    const double kap = p.kappa;
    const double d = p.delta;
    const double k = capital_scale(p);
    const double G0 = free_technology(p);
    const double Y0 = depreciation_spread(p, G0);
    const double feedback = kap * d * std::pow(Kb, 1.0 - e) / e;
    const double P = (1.0 - kap) * (p.A0 + feedback) + feedback;
    out.U = -(1.0 - kap) * Kb * kap * Y0 * ((2.0 - kap) * p.A0 + (3.0 - kap) * feedback) / (e * std::pow(Kb, e)) +
            (P * P - 2.0 * p.C_bar * P - p.C_bar * p.C_bar) / ((1.0 - e) * std::pow(Kb, e));
    const double vw2 = p.varsigma * p.varsigma * p.varpi * p.varpi;
    const double inv_lambda = 1.0 / p.lambda();
    out.C0_floor = p.alpha_laplace + std::sqrt(vw2 + p.r_c * p.r_c * p.varpi * p.varpi) + inv_lambda;
    out.C0_ceiling = p.alpha_laplace + std::sqrt(vw2 + p.r_c * p.r_c) + inv_lambda + std::abs(Y0);
    out.D = k * (out.C0_ceiling - p.C0);
    out.window_upper = 8.0 * std::abs(Y0) * out.U / k;
    return out;
}

double compatibility_residual(const ModelParams& p, double x) {
    const double A = free_technology(p);
    const double C = p.C_bar;
    const double D = compatibility_window(p).D;
    return x * (2.0 * (x + 4.0) * A * C + (x + 3.0) * C * C - (x + 4.0) * A * A) / ((x + 2.0) * (x + 2.0)) - D;
}

CompatibilityRoot compatibility_root(const ModelParams& p) {
    CompatibilityRoot out = compatibility_window(p);
    const double A = free_technology(p);
    const double C = p.C_bar;
    const double D = out.D;
    const double a2 = C * C + 2.0 * C * A - A * A - D;
    const double a1 = 3.0 * C * C + 8.0 * C * A - 4.0 * A * A - 4.0 * D;
    const double disc = a1 * a1 + 16.0 * D * a2;
    if (a2 == 0.0) throw InfeasiblePhaseError("compatibility equation degenerates to linear");
    if (disc < 0.0) throw InfeasiblePhaseError("compatibility equation has no real root");
    out.x = (-a1 - std::sqrt(disc)) / (2.0 * a2);
    const double Y0 = depreciation_spread(p, A);
    out.gamma_eta = out.x * Y0 / capital_scale(p);
    if (!(out.gamma_eta > 0.0 && out.gamma_eta < out.window_upper))
        throw InfeasiblePhaseError("compatibility root outside the admissible gamma_eta window");
    return out;
}

FeasibilityReport phase_existence(const ModelParams& p) {
    FeasibilityReport r;
    const double e = p.epsilon;
    const double G0 = free_technology(p);
    r.spread = -depreciation_spread(p, G0);

    r.gamma_positive = p.gamma > 0.0;
    if (!r.gamma_positive) r.reasons.emplace_back(p.gamma < 0.0 ? "gamma<0" : "gamma=0");

    const double bound = (1.0 + std::sqrt(2.0)) * p.C_bar;
    r.technology_bound = p.A0 > bound;
    if (!r.technology_bound) r.reasons.emplace_back("A0 <= (1+sqrt2) C_bar");
    const double refined = bound - (2.0 - p.kappa) * p.kappa * p.delta * std::pow(p.K_bar, 1.0 - e) / e / (1.0 - p.kappa);
    r.technology_bound_refined = p.A0 > refined;

    r.lambda_large = p.lambda() >= p.numerics.lambda_min;
    if (!r.lambda_large) r.reasons.emplace_back("lambda below threshold");

    r.spread_positive = r.spread > 0.0;
    r.spread_small = r.spread < p.numerics.spread_max;
    if (!r.spread_positive) r.reasons.emplace_back("marginal product below depreciation");
    if (!r.spread_small) r.reasons.emplace_back("marginal-product spread not small");

    const CompatibilityRoot w = compatibility_window(p);
    r.C0_in_window = w.U > 0.0 && p.C0 > w.C0_floor && p.C0 < w.C0_floor + w.U;
    if (!r.C0_in_window) r.reasons.emplace_back("C0 outside window");
    r.D_positive = w.D > 0.0;
    if (!r.D_positive) r.reasons.emplace_back("compatibility constant D <= 0");

    if (r.spread_positive) {
        try {
            const CompatibilityRoot root = compatibility_root(p);
            r.root_in_window = true;
            const double shift = std::abs(gamma3_first_order(p, root.gamma_eta) - G0) * e *
                                 std::pow(p.K_bar, e - 1.0);
            r.perturbative = shift <= p.numerics.perturbative_max * r.spread;
            if (!r.perturbative) r.reasons.emplace_back("interaction shift not perturbative");
        } catch (const std::exception& ex) {
            r.reasons.emplace_back(ex.what());
        }
    } else {
        r.reasons.emplace_back("compatibility root not attempted");
    }

    r.feasible = r.gamma_positive && r.technology_bound && r.lambda_large && r.spread_positive &&
                 r.spread_small && r.C0_in_window && r.D_positive && r.root_in_window && r.perturbative;
    return r;
}

namespace {

struct TrivialQuantities {
    double G0, Y, k, x, lin, S;
    BoundaryShifts shifts;
};

TrivialQuantities trivial_quantities(const ModelParams& p) {
    TrivialQuantities t{};
    t.G0 = free_technology(p);
    t.Y = depreciation_spread(p, t.G0);
    if (t.Y == 0.0) throw SingularityError("vanishing depreciation spread");
    t.k = capital_scale(p);
    t.shifts = boundary_shifts(p, t.G0);
    t.x = p.C_bar + t.shifts.consumption - t.shifts.capital;
    const double om = 1.0 - p.kappa;
    t.lin = (t.k * p.A0 - t.x * t.Y * om) / (t.Y * t.Y * om * om * om);
    t.S = consumption_denominator(p, t.G0);
    return t;
}

}  // namespace

ProductionComparison production_average(const ModelParams& p, double gamma_eta) {
    const TrivialQuantities t = trivial_quantities(p);
    const double e = p.epsilon;
    const double om = 1.0 - p.kappa;
    ProductionComparison out;
    const double base = (t.x - t.k * t.G0) / std::abs(t.Y);
    if (!(base > 0.0)) throw DomainError("trivial-phase capital average is not positive");
    out.r_bar = e * std::pow(p.K_bar, e) * p.A0 / om;
    if (out.r_bar == 0.0) throw SingularityError("vanishing reference return r_bar");
    out.coefficient = 1.0 - e * (1.0 + p.delta / out.r_bar);
    out.coefficient_full = 1.0 - out.r_bar / (out.r_bar - p.delta) * (e + (1.0 - e) * p.K_bar / base);
    const double scale = std::pow(base, e);
    out.trivial = t.G0 * scale;
    out.nontrivial = out.trivial - (t.k * p.A0 - t.Y * t.x * om) / (2.0 * t.Y * t.Y * om * om * om) *
                                       out.coefficient * scale * gamma_eta;
    out.ordered = out.nontrivial < out.trivial;
    return out;
}

PhaseAverages phase_averages(const ModelParams& p, Phase phase, double gamma_eta) {
    const TrivialQuantities t = trivial_quantities(p);
    PhaseAverages out;
    const double C_trivial = p.C_bar + t.shifts.consumption;
    const double K_trivial = (t.G0 * t.k - t.x) / t.Y;
    // Production needs a positive capital average; report NaN otherwise.
    double Y_trivial = std::numeric_limits<double>::quiet_NaN();
    double Y_nontrivial = Y_trivial;
    try {
        const ProductionComparison prod = production_average(p, gamma_eta);
        Y_trivial = prod.trivial;
        Y_nontrivial = prod.nontrivial;
    } catch (const DomainError&) {
    }
    if (phase == Phase::trivial) {
        out.A = t.G0;
        out.C = C_trivial;
        out.K = K_trivial;
        out.Y = Y_trivial;
        return out;
    }
    const double e = p.epsilon;
    const double Kb = p.K_bar;
    const double om = 1.0 - p.kappa;
    const double ge = gamma_eta;
    const double Y = t.Y;
    const double nu2 = p.nu * p.nu;
    const double w2 = p.varpi * p.varpi;
    out.A = t.G0 - 0.5 * t.lin * ge;
    out.C = C_trivial - w2 * t.G0 * ge / (2.0 * t.S * std::abs(Y));
    out.K = K_trivial -
            0.5 * std::pow(Kb, e) * (t.k * p.A0 - Y * om * t.x) * (e * t.x - Kb * p.delta * (1.0 - e)) /
                (std::pow(Y, 4) * Kb * om * om * om) * ge -
            t.k * (1.0 - Y) * t.shifts.capital * ge / (2.0 * Y * Y * Y) - nu2 * t.G0 * ge / (2.0 * Y * Y) -
            w2 * t.G0 * ge / (2.0 * t.S * Y * Y);
    out.Y = Y_nontrivial;
    return out;
}

double phase_mass(const ModelParams& p, double gamma_eta, double Gamma3) {
    const double e = p.epsilon;
    const double kap = p.kappa;
    const PhaseAverages av = phase_averages(p, Phase::nontrivial, gamma_eta);
    const double A1 = p.A0 + kap * av.A;
    const double q = (1.0 - kap) * A1 + kap * Gamma3;
    return A1 * A1 - q * q + (q * q - 2.0 * p.C_bar * A1 - av.C * av.C) / ((1.0 - e) * std::pow(p.K_bar, e));
}

StabilityReport stability_check(const ModelParams& p, const PhaseSolution& s) {
    StabilityReport r;
    const double lam = p.lambda();
    const double ge = s.gamma_eta;
    const double Y = std::abs(depreciation_spread(p, s.Gamma[2]));
    const double k = capital_scale(p);
    const double S0 = std::sqrt(p.varsigma * p.varsigma * p.varpi * p.varpi + p.r_c * p.r_c);
    r.bracket_consumption = 2.0 * S0 - ge * p.varpi / std::sqrt(lam * S0);
    r.bracket_capital = 2.0 * Y - ge * std::sqrt(Y) * p.nu / std::sqrt(lam);
    r.bracket_technology = 1.0 / lam - ge * (std::sqrt(Y) * p.nu / (2.0 * std::sqrt(lam)) +
                                             p.varpi / (2.0 * std::sqrt(lam * S0)) + 2.0 * k / (lam * Y));
    r.brackets_positive = r.bracket_consumption > 0.0 && r.bracket_capital > 0.0 && r.bracket_technology > 0.0;
    if (s.phase == Phase::trivial) {
        r.curvature_positive = true;  // no condensate, the quartic term does not enter
    } else {
        // The second variation is evaluated at leading order in gamma_eta, where the averages are
        // the free ones; the first-order capital average can change sign when it is tiny.
        const PhaseAverages free = phase_averages(p, Phase::trivial, 0.0);
        r.curvature_positive = free.K * free.A * p.gamma > 0.0;
    }
    r.stable = r.brackets_positive && r.curvature_positive;
    return r;
}

PhaseSolution solve_trivial(const ModelParams& p) {
    p.validate();
    PhaseSolution s;
    s.phase = Phase::trivial;
    s.gamma_eta = 0.0;
    const FixedPointResult fp = gamma3_fixed_point(p, 0.0);
    s.fixed_point_residual = fp.residual;
    const double G0 = free_technology(p);
    s.shifts = boundary_shifts(p, G0);
    s.Gamma = {p.C_bar + s.shifts.consumption, s.shifts.capital, fp.value};
    s.averages = phase_averages(p, Phase::trivial, 0.0);
    s.A_bar_phase = G0;
    s.C_bar_phase = p.numerics.convention == Convention::half_rate ? p.C_bar + 2.0 * p.varpi
                                                                   : p.C_bar + s.shifts.consumption;
    s.mass = 0.0;
    s.Y_coef = depreciation_spread(p, fp.value);
    s.feasible = true;
    if (s.Y_coef > 0.0) s.warnings.emplace_back("depreciation spread is positive, expected negative");
    s.stable = stability_check(p, s).stable;
    return s;
}

PhaseSolution solve_nontrivial_at(const ModelParams& p, double gamma_eta) {
    p.validate();
    PhaseSolution s;
    s.phase = Phase::nontrivial;
    s.gamma_eta = gamma_eta;
    const FixedPointResult fp = gamma3_fixed_point(p, gamma_eta);
    s.fixed_point_residual = fp.residual;
    s.shifts = boundary_shifts(p, fp.value);
    s.Gamma = {gamma1_full(p, fp.value, gamma_eta), gamma2_full(p, fp.value, gamma_eta), fp.value};
    s.averages = phase_averages(p, Phase::nontrivial, gamma_eta);
    s.A_bar_phase = p.A0 + p.kappa * s.averages.A;
    s.C_bar_phase = s.averages.C;
    s.mass = phase_mass(p, gamma_eta, fp.value);
    s.Y_coef = depreciation_spread(p, fp.value);
    if (s.Y_coef > 0.0) s.warnings.emplace_back("depreciation spread is positive, expected negative");
    if (s.averages.K < 0.0) s.warnings.emplace_back("first-order capital average is negative; expansion unreliable");
    const FeasibilityReport report = phase_existence(p);
    s.feasible = report.feasible;
    s.stable = stability_check(p, s).stable;
    return s;
}

PhaseSolution solve_nontrivial(const ModelParams& p) {
    p.validate();
    const FeasibilityReport report = phase_existence(p);
    if (!report.feasible) {
        std::string why = "nontrivial phase infeasible:";
        for (const auto& reason : report.reasons) why += " [" + reason + "]";
        throw InfeasiblePhaseError(why);
    }
    return solve_nontrivial_at(p, compatibility_root(p).gamma_eta);
}

PhaseSolution solve_phase(const ModelParams& p, Phase phase) {
    return phase == Phase::trivial ? solve_trivial(p) : solve_nontrivial(p);
}

}  // namespace agentfield
