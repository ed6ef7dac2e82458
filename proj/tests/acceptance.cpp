// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agentfield/config.hpp"
#include "agentfield/corrections.hpp"
#include "agentfield/errors.hpp"
#include "agentfield/green.hpp"
#include "agentfield/montecarlo.hpp"
#include "agentfield/phase.hpp"
#include "agentfield/sampling.hpp"
#include "agentfield/scan.hpp"
#include "agentfield/serialize.hpp"

using namespace agentfield;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Least-squares slope of log(err) against log(h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const std::vector<ModelParams>& feasible_draws() {
    static const std::vector<ModelParams> draws = sample_feasible_nontrivial(100, kSeed);
    return draws;
}

// ---- criteria ----

Outcome fixed_point_criterion() {
    const auto& draws = feasible_draws();
    if (draws.size() != 100) return {false, "only " + std::to_string(draws.size()) + " feasible draws"};
    double worst_residual = 0.0;
    double worst_order = std::numeric_limits<double>::infinity();
    for (const auto& p : draws) {
        const double root = compatibility_root(p).gamma_eta;
        worst_residual = std::max(worst_residual, gamma3_fixed_point(p, root).residual);
        // Gap between the fixed point and its first-order expansion on a geometric ladder below the root.
        std::vector<double> h, gap;
        for (double f : {1.0, 0.5, 0.25, 0.125}) {
            const double ge = root * f;
            h.push_back(ge);
            gap.push_back(std::abs(gamma3_fixed_point(p, ge).value - gamma3_first_order(p, ge)));
        }
        worst_order = std::min(worst_order, fitted_order(h, gap));
    }
    const bool pass = worst_residual < 1e-10 && worst_order >= 1.9;
    return {pass, "max residual " + fmt(worst_residual) + ", min fitted order " + fmt(worst_order) + " over " +
                      std::to_string(draws.size()) + " draws"};
}

Outcome trivial_phase_criterion() {
    std::vector<ModelParams> set = feasible_draws();
    set.push_back(ModelParams{});
    double worst = 0.0;
    bool mass_zero = true;
    for (const auto& p : set) {
        const PhaseSolution s = solve_trivial(p);
        const double expected = p.A0 / (1.0 - p.kappa);
        worst = std::max(worst, std::abs(s.Gamma[2] - expected) / expected);
        mass_zero = mass_zero && s.mass == 0.0;
    }
    return {worst <= 1e-12 && mass_zero,
            "max relative error " + fmt(worst) + ", trivial mass exactly zero: " + (mass_zero ? "yes" : "no")};
}

Outcome ordering_criterion() {
    int violations = 0;
    double min_mass = std::numeric_limits<double>::infinity();
    for (const auto& p : feasible_draws()) {
        const PhaseSolution a = solve_trivial(p);
        const PhaseSolution b = solve_nontrivial(p);
        const bool ok = b.averages.C < a.averages.C && b.averages.A < a.averages.A && b.averages.Y < a.averages.Y;
        if (!ok) ++violations;
        min_mass = std::min(min_mass, b.mass);
    }
    return {violations == 0 && min_mass > 0.0,
            std::to_string(violations) + " ordering violations, min nontrivial mass " + fmt(min_mass)};
}

Outcome covariance_criterion() {
    const auto& draws = feasible_draws();
    double worst = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < 50 && i < draws.size(); ++i, ++used) {
        const ModelParams& p = draws[i];
        const PhaseSolution phase = solve_nontrivial(p);
        const AgentState from{phase.C_bar_phase * 1.01, p.K_bar * 1.02, phase.A_bar_phase * 0.99};
        const AgentState to{phase.C_bar_phase * 0.99, p.K_bar * 1.05, phase.A_bar_phase * 1.01};
        const GreenCoefficients c = coefficients(p, phase, from, to);
        for (int k = 0; k < 10; ++k) {
            const double s = 0.05 + 0.05 * k;
            const int steps = std::max(200, static_cast<int>(std::ceil(s * p.numerics.ode_steps_per_unit)));
            const Eigen::Matrix3d ode = covariance_ode(c, p, s, steps).H;
            const Eigen::Matrix3d closed = covariance_closed_form(c, p, s).H;
            worst = std::max(worst, (ode - closed).cwiseAbs().maxCoeff() / closed.cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-6 && used == 50, "max relative sup error " + fmt(worst) + " over " + std::to_string(used) +
                                             " draws x 10 horizons in [0.05, 0.5]"};
}

// Composite Simpson weights on n (odd) points.
std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (auto& v : w) v *= h / 3.0;
    return w;
}

Outcome normalization_criterion() {
    std::mt19937_64 rng(kSeed);
    constexpr int n = 61;
    constexpr double t = 0.5;
    double worst = 0.0;
    for (int draw = 0; draw < 5; ++draw) {
        const ModelParams p = draw_density_regime(rng);
        const PhaseSolution phase = solve_trivial(p);
        const AgentState from{phase.C_bar_phase, p.K_bar, phase.A_bar_phase};
        const DensityResult centre = transition_density(from, from, t, phase, p);
        std::array<std::vector<double>, 3> axis, weight;
        for (int d = 0; d < 3; ++d) {
            const double sd = std::sqrt(centre.H(d, d));
            const double h = 12.0 * sd / (n - 1);
            weight[d] = simpson_weights(n, h);
            for (int i = 0; i < n; ++i) axis[d].push_back(centre.mean(d) - 6.0 * sd + h * i);
        }
        double total = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const AgentState to{axis[0][i], axis[1][j], axis[2][k]};
                    total += weight[0][i] * weight[1][j] * weight[2][k] *
                             std::exp(transition_density(from, to, t, phase, p).log_gaussian);
                }
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return {worst <= 1e-3, "max |integral - 1| " + fmt(worst) + " over 5 draws on a 61^3 grid"};
}

Outcome most_likely_criterion() {
    const auto& draws = feasible_draws();
    double worst_residual = 0.0;
    double worst_order = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 10; ++i) {
        const ModelParams& p = draws[i];
        const PhaseSolution phase = solve_nontrivial(p);
        // Consumption displaced from its phase level; capital and technology at their reference levels.
        const AgentState from{phase.C_bar_phase * 1.05, p.K_bar, phase.A_bar_phase};
        std::vector<double> ts, err;
        for (double t : {0.2, 0.1, 0.05, 0.025}) {
            const MostLikelyEndpoint m = most_likely_endpoint(from, t, phase, p);
            const double scale = std::max({1.0, std::abs(m.state.C), std::abs(m.state.K), std::abs(m.state.A)});
            for (double r : m.residuals) worst_residual = std::max(worst_residual, std::abs(r) / scale);
            const AgentState end = average_path(from, t, phase, p, 200).states.back();
            ts.push_back(t);
            err.push_back(std::max({std::abs(end.C - m.state.C), std::abs(end.K - m.state.K),
                                    std::abs(end.A - m.state.A)}));
        }
        worst_order = std::min(worst_order, fitted_order(ts, err));
    }
    return {worst_residual <= 1e-8 && worst_order >= 1.9,
            "max relation residual " + fmt(worst_residual) + ", min fitted order " + fmt(worst_order) + " over 10 draws"};
}

Outcome equilibrium_criterion() {
    const auto draws = sample_saddle_regime(50, kSeed);
    double worst_rhs = 0.0;
    int saddles = 0;
    for (const auto& p : draws) {
        const PhaseSolution phase = solve_trivial(p);
        const AgentState eq = equilibrium(p, phase);
        const AgentState r = average_path_rhs(eq, phase, p);
        worst_rhs = std::max({worst_rhs, std::abs(r.C), std::abs(r.K), std::abs(r.A)});
        if (linearized_eigenvalues(p, phase).saddle) ++saddles;
    }
    const int n = static_cast<int>(draws.size());
    return {n == 50 && worst_rhs <= 1e-12 && saddles == n,
            "max |rhs| at equilibrium " + fmt(worst_rhs) + ", saddles " + std::to_string(saddles) + "/" +
                std::to_string(n)};
}

// Capital and technology deviations transcribed term by term, as functions of the initial data.
struct LiteralDeviation {
    double b, c, Kp, A2, gamma, t;
    double dK(const std::array<double, 6>& x) const {
        const double t3 = t * t * t, t4 = t3 * t, t5 = t4 * t, t6 = t5 * t;
        return gamma * (7.0 * c * t5 / (720.0 * A2) * x[0] + c * t4 / (48.0 * A2) * x[1] +
                        (b * t3 / (6.0 * Kp * A2) + Kp * c * t5 / 90.0) * x[2]) +
               gamma * (-7.0 * c * t6 / (1440.0 * A2) * x[3] + c * t5 / (60.0 * A2) * x[4] +
                        (b * t4 / (24.0 * Kp * A2) + 3.0 * Kp * c * t6 / (160.0 * A2)) * x[5]);
    }
    double dA(const std::array<double, 6>& x) const {
        const double t3 = t * t * t, t4 = t3 * t;
        return gamma * (c * t3 / (6.0 * Kp * A2) * x[1]) + gamma * (c * t4 / 24.0 * x[4] + t * x[5]);
    }
};

Outcome corrections_criterion() {
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_rel = 0.0;
    double worst_dC = 0.0;
    int sign_failures = 0;
    bool consumption_velocity_negative = true;
    for (const auto& p : {ModelParams{}, feasible_draws()[0], feasible_draws()[1]}) {
        for (const Phase ph : {Phase::trivial, Phase::nontrivial}) {
            const PhaseSolution phase = solve_phase(p, ph);
            const AgentState x0{phase.C_bar_phase, p.K_bar, phase.A_bar_phase};
            const GreenCoefficients c = coefficients(p, phase, x0, x0);
            for (double t : {0.25, 0.5, 1.0, 2.0}) {
                const LiteralDeviation lit{c.b_coef, c.c_coef, c.K_power, c.A_bar * c.A_bar, p.gamma, t};
                const std::array<double, 6> base{x0.C, x0.K, x0.A, 0.01, 0.1, 0.01};
                DeviationQuery q{x0, Eigen::Vector3d(base[3], base[4], base[5]), t, c};
                for (int r = 0; r < 5; ++r) {
                    q.initial_state = {x0.C * (1 + 0.1 * u(rng)), x0.K * (1 + 0.1 * u(rng)), x0.A * (1 + 0.1 * u(rng))};
                    q.initial_velocity = Eigen::Vector3d(u(rng), u(rng), u(rng));
                    worst_dC = std::max(worst_dC, std::abs(path_deviation(q, p)(0)));
                }
                // Central differences of the literal expressions; they are affine, so a unit step is exact.
                auto partial = [&](bool capital, int idx) {
                    auto plus = base, minus = base;
                    plus[static_cast<std::size_t>(idx)] += 1.0;
                    minus[static_cast<std::size_t>(idx)] -= 1.0;
                    return capital ? (lit.dK(plus) - lit.dK(minus)) / 2.0 : (lit.dA(plus) - lit.dA(minus)) / 2.0;
                };
                const std::vector<std::pair<bool, int>> order = {{true, 0}, {true, 1}, {true, 2},
                                                                 {false, 1}, {true, 3}, {true, 4},
                                                                 {true, 5}, {false, 4}, {false, 5}};
                const auto table = elasticity_table(t, c, p);
                for (std::size_t k = 0; k < table.size(); ++k) {
                    const double fd = partial(order[k].first, order[k].second);
                    worst_rel = std::max(worst_rel, std::abs(fd - table[k].value) / std::abs(table[k].value));
                    if (table[k].value * table[k].expected_sign <= 0.0) ++sign_failures;
                    if (table[k].name == "dK/dCdot0") consumption_velocity_negative &= table[k].value < 0.0;
                }
            }
        }
    }
    const bool pass = worst_dC == 0.0 && worst_rel <= 1e-8 && sign_failures == 0 && consumption_velocity_negative;
    return {pass, "max |dC| " + fmt(worst_dC) + ", max relative partial error " + fmt(worst_rel) + ", sign failures " +
                      std::to_string(sign_failures) + ", dK/dCdot0 < 0: " +
                      (consumption_velocity_negative ? "yes" : "no")};
}

Outcome two_agent_criterion() {
    std::mt19937_64 rng(kSeed + 9);
    std::uniform_real_distribution<double> u(0.9, 1.1);
    std::uniform_real_distribution<double> duration(0.1, 1.0);
    int asym = 0, reduction = 0;
    double worst_lin = 0.0;
    for (const auto& base : {ModelParams{}, feasible_draws()[2], feasible_draws()[3]}) {
        const PhaseSolution phase = solve_trivial(base);
        const AgentState ref{phase.C_bar_phase, base.K_bar, phase.A_bar_phase};
        auto jitter = [&] { return AgentState{ref.C * u(rng), ref.K * u(rng), ref.A * u(rng)}; };
        for (int r = 0; r < 20; ++r) {
            TwoAgentQuery q{jitter(), jitter(), jitter(), jitter(), duration(rng)};
            const GreenCoefficients c = coefficients(base, phase, ref, ref);
            const TwoAgentCorrection a = two_agent_correction(q, c, base);
            TwoAgentQuery swapped{q.agent2_from, q.agent2_to, q.agent1_from, q.agent1_to, q.t};
            const TwoAgentCorrection b = two_agent_correction(swapped, c, base);
            if (!(a.V_I == b.V_I && a.dK_21 == b.dK_12 && a.dA_21 == b.dA_12 && a.dK_12 == b.dK_21 &&
                  a.dA_12 == b.dA_21))
                ++asym;
            // Agent 2 with no consumption or technology change.
            TwoAgentQuery flat = q;
            flat.agent2_to.C = flat.agent2_from.C;
            flat.agent2_to.A = flat.agent2_from.A;
            const double K2 = 0.5 * (flat.agent2_from.K + flat.agent2_to.K);
            if (two_agent_correction(flat, c, base).dA_21 != base.gamma * c.c_coef * q.t * K2) ++reduction;
            // Linearity of the interaction potential in the coupling.
            for (double scale : {0.5, 2.0, 3.0}) {
                ModelParams scaled = base;
                scaled.gamma = base.gamma * scale;
                const double v = two_agent_correction(q, c, scaled).V_I;
                worst_lin = std::max(worst_lin, std::abs(v - scale * a.V_I) / std::abs(scale * a.V_I));
            }
            ModelParams off = base;
            off.gamma = 0.0;
            worst_lin = std::max(worst_lin, std::abs(two_agent_correction(q, c, off).V_I));
        }
    }
    return {asym == 0 && reduction == 0 && worst_lin <= 1e-12,
            "swap mismatches " + std::to_string(asym) + ", reduction mismatches " + std::to_string(reduction) +
                ", max linearity error " + fmt(worst_lin)};
}

Outcome monte_carlo_criterion() {
    const ModelParams p = monte_carlo_regime();
    const PhaseSolution phase = solve_trivial(p);
    const AgentState start{phase.C_bar_phase, p.K_bar, phase.A_bar_phase};
    MCConfig mc;
    mc.n_paths = 100000;
    mc.dt = 1e-3;
    mc.seed = kSeed;
    const double t = 0.1;
    const PathEnsemble ens = sample_paths(start, t, phase, p, mc);
    const AgentState mean{ens.moments.mean(0), ens.moments.mean(1), ens.moments.mean(2)};
    const DivergenceReport report = compare_to_green(ens, transition_density(start, mean, t, phase, p));
    double worst_z = 0.0;
    for (const auto& c : report.coords) worst_z = std::max({worst_z, std::abs(c.mean_z), std::abs(c.variance_z)});

    MCConfig budget_mc;
    budget_mc.n_paths = 50;
    budget_mc.seed = kSeed;
    const BudgetReport budget = budget_brownian_check(p, 10000, budget_mc);

    ModelParams q = p;
    q.nu = 0.05;
    MCConfig neg_mc;
    neg_mc.n_paths = 2000;
    neg_mc.dt = 1e-3;
    neg_mc.seed = kSeed;
    double worst_ratio = 0.0;
    for (double r : {0.0, 0.01, 0.03, 0.05})
        worst_ratio = std::max(worst_ratio, intertemporal_negligibility(start, 1.0, r, phase, q, neg_mc).ratio);

    const bool pass = worst_z <= 4.0 && budget.variance_ok && worst_ratio < 0.1;
    return {pass, "max |z| " + fmt(worst_z) + ", budget increment variance " + fmt(budget.increment_variance) +
                      ", max negligibility ratio " + fmt(worst_ratio)};
}

std::string artifacts(unsigned threads) {
    std::ostringstream os;
    const ModelParams p;
    os << emit_json(to_json(solve_trivial(p))) << emit_json(to_json(solve_nontrivial(p)));
    write_scan_header(os);
    for (const auto& pt : run_scan(p, parse_grid("gamma=-0.5:1:7"), Phase::nontrivial))
        write_scan_row(os, pt.params, pt.solution);
    write_path_csv(os, average_path({1.08, 150.0, 10.0}, 1.0, solve_trivial(p), p, 50));
    const ModelParams q = monte_carlo_regime();
    const PhaseSolution phase = solve_trivial(q);
    MCConfig mc;
    mc.n_paths = 3000;
    mc.seed = kSeed;
    mc.threads = threads;
    const AgentState start{phase.C_bar_phase, q.K_bar, phase.A_bar_phase};
    const PathEnsemble ens = sample_paths(start, 0.1, phase, q, mc);
    write_ensemble_csv(os, ens);
    os << emit_json(to_json(compare_to_green(ens, transition_density(start, start, 0.1, phase, q))));
    return os.str();
}

Outcome determinism_criterion() {
    const std::string a = artifacts(0);
    const std::string b = artifacts(0);
    const std::string c = artifacts(1);
    const bool pass = a == b && a == c;
    return {pass, std::to_string(a.size()) + " bytes of CSV/JSON; repeat identical: " + (a == b ? "yes" : "no") +
                      ", single-thread identical: " + (a == c ? "yes" : "no")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;  // 0 = no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "technology fixed point", 5.0, fixed_point_criterion},
        {2, "trivial-phase closed forms", 0.0, trivial_phase_criterion},
        {3, "phase ordering", 0.0, ordering_criterion},
        {4, "covariance ODE vs closed form", 10.0, covariance_criterion},
        {5, "density normalization", 30.0, normalization_criterion},
        {6, "most-likely endpoint vs average path", 0.0, most_likely_criterion},
        {7, "equilibrium and saddle", 0.0, equilibrium_criterion},
        {8, "trajectory corrections", 0.0, corrections_criterion},
        {9, "two-agent interaction", 0.0, two_agent_criterion},
        {10, "Monte Carlo oracle", 60.0, monte_carlo_criterion},
        {11, "determinism", 0.0, determinism_criterion},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0 && seconds >= c.budget_seconds) {
            out.pass = false;
            out.detail += " (over the " + fmt(c.budget_seconds) + " s budget)";
        }
        if (!out.pass) ++failures;
        std::printf("criterion %2d %-38s %s  [%.2f s] %s\n", c.id, c.name, out.pass ? "PASS" : "FAIL", seconds,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
