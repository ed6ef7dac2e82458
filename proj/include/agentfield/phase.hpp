#pragma once

#include <array>
#include <string>
#include <vector>

#include "agentfield/model.hpp"

namespace agentfield {

enum class Phase { trivial, nontrivial };

std::string to_string(Phase phase);
Phase phase_from_index(int index);  // 0 -> trivial, 1 -> nontrivial

// Truncation shifts of the consumption, technology and transformed-capital moments.
struct BoundaryShifts {
    double consumption = 0.0;         // C1
    double technology = 0.0;          // A1
    double capital = 0.0;             // K1', the selected form
    double capital_exact = 0.0;       // inverse Mills ratio form
    double capital_approx = 0.0;      // rational-exponential surrogate
};

struct PhaseAverages {
    double A = 0.0;
    double C = 0.0;
    double K = 0.0;
    double Y = 0.0;
};

struct FixedPointResult {
    double value = 0.0;
    double residual = 0.0;  // |map(value) - value|
    int iterations = 0;
};

struct CompatibilityRoot {
    double gamma_eta = 0.0;
    double x = 0.0;             // gamma_eta * K_bar^eps (1 - eps) / Y
    double D = 0.0;             // right-hand side of the compatibility equation
    double window_upper = 0.0;  // upper bound of the admissible gamma_eta interval
    double U = 0.0;             // width of the C0 window
    double C0_floor = 0.0;
    double C0_ceiling = 0.0;    // C0 below which D > 0
};

struct FeasibilityReport {
    bool gamma_positive = false;
    bool technology_bound = false;          // A0 > (1 + sqrt 2) C_bar
    bool technology_bound_refined = false;  // reported only
    bool lambda_large = false;
    bool spread_positive = false;
    bool spread_small = false;
    bool C0_in_window = false;
    bool D_positive = false;
    bool root_in_window = false;
    bool perturbative = false;
    bool feasible = false;
    double spread = 0.0;  // A0 eps K_bar^(eps-1) / (1 - kappa) - delta
    std::vector<std::string> reasons;
};

struct ProductionComparison {
    double trivial = 0.0;
    double nontrivial = 0.0;
    double coefficient = 0.0;       // 1 - eps (1 + delta / r_bar)
    double coefficient_full = 0.0;  // without the large-capital simplification
    double r_bar = 0.0;
    bool ordered = false;           // nontrivial < trivial
};

struct StabilityReport {
    bool curvature_positive = false;  // <K><A> gamma > 0
    double bracket_consumption = 0.0;
    double bracket_capital = 0.0;
    double bracket_technology = 0.0;
    bool brackets_positive = false;
    bool stable = false;
};

struct PhaseSolution {
    Phase phase = Phase::trivial;
    double gamma_eta = 0.0;
    std::array<double, 3> Gamma{};  // <C>, <K'>, <A>
    BoundaryShifts shifts;
    double A_bar_phase = 0.0;
    double C_bar_phase = 0.0;
    double mass = 0.0;
    PhaseAverages averages;
    bool feasible = false;
    bool stable = false;
    double Y_coef = 0.0;  // delta - Gamma3 eps K_bar^(eps-1), signed
    double fixed_point_residual = 0.0;
    std::vector<std::string> warnings;
};

// delta - Gamma3 eps K_bar^(eps-1).
double depreciation_spread(const ModelParams& p, double Gamma3);
// K_bar^eps (1 - eps).
double capital_scale(const ModelParams& p);
// A0 / (1 - kappa).
double free_technology(const ModelParams& p);

BoundaryShifts boundary_shifts(const ModelParams& p, double Gamma3);

// Right-hand side of the technology self-consistency equation.
double gamma3_map(const ModelParams& p, double Gamma3, double gamma_eta);
FixedPointResult gamma3_fixed_point(const ModelParams& p, double gamma_eta);
double gamma3_first_order(const ModelParams& p, double gamma_eta);
// Slope of the first-order technology moment in gamma_eta.
double gamma3_first_order_slope(const ModelParams& p);

// Consumption and transformed-capital moments: full rational forms and first-order forms.
double gamma1_full(const ModelParams& p, double Gamma3, double gamma_eta);
double gamma2_full(const ModelParams& p, double Gamma3, double gamma_eta);
double gamma1_first_order(const ModelParams& p, double gamma_eta);
double gamma2_first_order(const ModelParams& p, double gamma_eta);

// Left-hand side minus right-hand side of the reduced compatibility equation in x.
double compatibility_residual(const ModelParams& p, double x);
// Throws InfeasiblePhaseError when the window is empty or the root falls outside it.
CompatibilityRoot compatibility_root(const ModelParams& p);
// Window quantities without solving (never throws on infeasibility).
CompatibilityRoot compatibility_window(const ModelParams& p);

FeasibilityReport phase_existence(const ModelParams& p);

PhaseAverages phase_averages(const ModelParams& p, Phase phase, double gamma_eta);
ProductionComparison production_average(const ModelParams& p, double gamma_eta);
double phase_mass(const ModelParams& p, double gamma_eta, double Gamma3);

StabilityReport stability_check(const ModelParams& p, const PhaseSolution& solution);

PhaseSolution solve_trivial(const ModelParams& p);
// Solves at the compatibility root; throws InfeasiblePhaseError when the phase does not exist.
PhaseSolution solve_nontrivial(const ModelParams& p);
// Solves at a prescribed gamma_eta without the feasibility gate (feasible is still reported).
PhaseSolution solve_nontrivial_at(const ModelParams& p, double gamma_eta);
PhaseSolution solve_phase(const ModelParams& p, Phase phase);

}  // namespace agentfield
