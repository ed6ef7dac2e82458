#include "agentfield/sampling.hpp"

#include <cmath>
#include <numbers>

namespace agentfield {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

constexpr double kSqrt2OverPi = 0.79788456080286535588;

}  // namespace

std::optional<ModelParams> draw_nontrivial_candidate(std::mt19937_64& rng) {
    ModelParams p;
    p.epsilon = uniform(rng, 0.2, 0.35);
    p.delta = uniform(rng, 0.02, 0.08);
    p.r_c = uniform(rng, 0.01, 0.08);
    p.kappa = uniform(rng, 0.0, 0.3);
    p.A0 = uniform(rng, 2.0, 10.0);
    p.varpi = uniform(rng, 0.02, 0.2);
    p.nu = uniform(rng, 0.02, 0.2);
    const double lam = uniform(rng, 10.0, 40.0);
    p.lambda_sq = lam * lam;
    p.varsigma = uniform(rng, 0.0, 0.1);
    p.alpha_laplace = uniform(rng, 0.1, 1.0);
    p.gamma = uniform(rng, 0.5, 2.0);
    p.C_bar = uniform(rng, 0.1, 0.35) * p.A0;
    // Reference capital chosen so the marginal-product spread is a small positive number.
    const double spread = uniform(rng, 0.005, 0.08);
    p.K_bar = std::pow(free_technology(p) * p.epsilon / (p.delta + spread), 1.0 / (1.0 - p.epsilon));
    const CompatibilityRoot w = compatibility_window(p);
    const double hi = std::min(w.C0_floor + w.U, w.C0_ceiling);
    const double u = uniform(rng, 0.05, 0.95);
    if (!(hi > w.C0_floor)) return std::nullopt;
    p.C0 = w.C0_floor + u * (hi - w.C0_floor);
    if (!phase_existence(p).feasible) return std::nullopt;
    return p;
}

std::vector<ModelParams> sample_feasible_nontrivial(std::size_t n, std::uint64_t seed, std::size_t* attempts) {
    std::mt19937_64 rng(seed);
    std::vector<ModelParams> out;
    std::size_t tries = 0;
    while (out.size() < n && tries < 1000 * n) {
        ++tries;
        if (auto p = draw_nontrivial_candidate(rng)) out.push_back(*p);
    }
    if (attempts) *attempts = tries;
    return out;
}

std::optional<ModelParams> draw_saddle_candidate(std::mt19937_64& rng) {
    ModelParams p;
    const double A = uniform(rng, 0.005, 0.04);
    p.epsilon = uniform(rng, 0.2, 0.35);
    p.delta = uniform(rng, 0.02, 0.08);
    p.r_c = p.delta;
    p.kappa = 0.0;
    p.A0 = A;
    const double spread = uniform(rng, 0.005, 0.05);
    p.K_bar = std::pow(A * p.epsilon / (p.delta + spread), 1.0 / (1.0 - p.epsilon));
    // Capital at which the marginal product equals depreciation.
    const double K_delta = std::pow(A * p.epsilon / p.delta, 1.0 / (1.0 - p.epsilon));
    const double lo = (1.0 - p.epsilon) * A * std::pow(p.K_bar, p.epsilon) + spread * K_delta;
    const double hi = A / (1.0 + std::numbers::sqrt2);
    const double u = uniform(rng, 0.05, 0.95);
    const double w = uniform(rng, 0.01, 0.1);
    if (!(hi > lo)) return std::nullopt;
    const double C_phase = lo + u * (hi - lo);
    p.varpi = w * C_phase;
    p.C_bar = C_phase - kSqrt2OverPi * p.varpi;
    p.nu = uniform(rng, 0.02, 0.2);
    const double lam = uniform(rng, 10.0, 40.0);
    p.lambda_sq = lam * lam;
    p.varsigma = uniform(rng, 0.0, 0.1);
    p.gamma = uniform(rng, 0.5, 2.0);
    return p;
}

std::vector<ModelParams> sample_saddle_regime(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ModelParams> out;
    std::size_t tries = 0;
    while (out.size() < n && tries < 1000 * n) {
        ++tries;
        if (auto p = draw_saddle_candidate(rng)) out.push_back(*p);
    }
    return out;
}

ModelParams draw_density_regime(std::mt19937_64& rng) {
    ModelParams p;
    p.epsilon = uniform(rng, 0.2, 0.35);
    p.delta = uniform(rng, 0.03, 0.08);
    p.r_c = uniform(rng, 0.02, 0.06);
    p.kappa = 0.0;
    p.K_bar = uniform(rng, 0.5, 2.0);
    // Marginal product above depreciation by a margin, so alpha and beta stay away from zero.
    const double mp = p.delta + uniform(rng, 0.01, 0.03);
    p.A0 = mp / (p.epsilon * std::pow(p.K_bar, p.epsilon - 1.0));
    p.varpi = uniform(rng, 0.002, 0.005);
    // Narrow capital spread so the endpoint-evaluated coefficients barely vary across the density.
    p.nu = uniform(rng, 0.005, 0.02);
    p.lambda_sq = uniform(rng, 1e8, 1e9);
    p.C_bar = 0.5 * (p.A0 * std::pow(p.K_bar, p.epsilon) - p.delta * p.K_bar);
    p.gamma = 0.0;
    return p;
}

ModelParams monte_carlo_regime() {
    ModelParams p;
    p.epsilon = 0.3;
    p.delta = 0.05;
    p.r_c = 0.03;
    p.K_bar = 1.0;
    p.kappa = 0.0;
    p.A0 = 0.02 / 0.3;
    p.varpi = 2e-4;
    p.nu = 0.2;
    p.lambda_sq = 1e8;
    p.gamma = 0.0;
    // Phase consumption equals production minus depreciation at K_bar, so K_bar is the equilibrium.
    p.C_bar = p.A0 - p.delta - kSqrt2OverPi * p.varpi;
    return p;
}

}  // namespace agentfield
