#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "agentfield/green.hpp"
#include "agentfield/model.hpp"
#include "agentfield/phase.hpp"

namespace agentfield {

// Diffusion amplitudes attached to the gaussian weights.
// density_matched: sqrt(2) varpi, sqrt(2) nu, sqrt(2) / lambda (variance rate equal to the
//   small-time density covariance). weight_literal: varpi / sqrt(2), nu / sqrt(2), 1 / (lambda sqrt(2)).
enum class NoiseConvention { density_matched, weight_literal };

struct MCConfig {
    std::size_t n_paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 12345;
    bool antithetic = false;
    unsigned threads = 0;  // 0 = hardware concurrency
    NoiseConvention noise = NoiseConvention::density_matched;
    double noise_scale = 1.0;  // multiplies all amplitudes; 0 gives the deterministic limit
};

// Seed of path i: splitmix64 applied to seed + (i + 1) * golden-ratio increment.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

struct EnsembleMoments {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // unbiased
};
EnsembleMoments compute_moments(const std::vector<AgentState>& endpoints);

struct PathEnsemble {
    std::vector<AgentState> endpoints;
    std::vector<std::uint8_t> negative_capital;  // 1 when the path visited K < 0
    std::size_t negative_capital_count = 0;
    EnsembleMoments moments;
    std::uint64_t seed = 0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    double t = 0.0;
};

// Euler-Maruyama simulation of the Langevin dynamics implied by the statistical weights.
PathEnsemble sample_paths(const AgentState& initial, double t, const PhaseSolution& phase, const ModelParams& p,
                          const MCConfig& mc);
// Ensemble drawn directly from a gaussian, for self-tests of the comparison.
PathEnsemble sample_gaussian(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov, std::size_t n,
                             std::uint64_t seed);

struct CoordinateComparison {
    double mean_z = 0.0;
    double variance_z = 0.0;
    double ks_statistic = 0.0;  // sqrt(n) D
    double ks_p_value = 0.0;
};

struct DivergenceReport {
    CoordinateComparison coords[3];
    double z_threshold = 4.0;
    double ks_p_threshold = 1e-3;
    bool pass = false;
};

// Asymptotic Kolmogorov distribution tail P(sqrt(n) D > x).
double kolmogorov_tail(double x);

DivergenceReport compare_to_green(const PathEnsemble& ensemble, const Eigen::Vector3d& mean,
                                  const Eigen::Matrix3d& cov);
DivergenceReport compare_to_green(const PathEnsemble& ensemble, const DensityResult& density);

struct BudgetReport {
    double increment_variance = 0.0;
    double increment_lag1 = 0.0;  // lag-1 autocorrelation of the increments
    double shock_lag1 = 0.0;      // lag-1 autocorrelation of the i.i.d. shocks
    std::size_t n_increments = 0;
    std::vector<double> constraint_variances;
    std::vector<double> mean_abs_residual;  // per constraint variance
    bool variance_ok = false;               // within 5 % of 2
    bool increments_uncorrelated = false;   // |lag-1| <= 0.02
};

// Discrete budget system with gaussian shocks and a soft terminal constraint.
BudgetReport budget_brownian_check(const ModelParams& p, int T, const MCConfig& mc,
                                   const std::vector<double>& constraint_variances = {1.0, 0.1, 0.01, 0.0});

struct NegligibilityReport {
    double constraint_term = 0.0;    // mean (2 r_bar / nu^2) (int dK e^{-r s})^2
    double consumption_term = 0.0;   // mean |drift part of the consumption weight|
    double ratio = 0.0;
    double rate = 0.0;
    double horizon = 0.0;
    bool negligible = false;         // ratio < 0.1
};

// Samples paths over the horizon and compares the dropped intertemporal term to the retained weight.
NegligibilityReport intertemporal_negligibility(const AgentState& initial, double horizon, double rate,
                                            const PhaseSolution& phase, const ModelParams& p, const MCConfig& mc);
// (2 r_bar / nu^2) (sum dK e^{-r s})^2 of one path; r_bar = r / (1 - e^{-r T}), or 1 / T at r = 0.
double discounted_capital_term(const AgentPath& path, double rate, const ModelParams& p);

}  // namespace agentfield
