#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "agentfield/model.hpp"
#include "agentfield/phase.hpp"

namespace agentfield {

// Random parameter draws for property checks. All draws are deterministic given the engine state.

// Nontrivial-phase regime: returns the draw only when every existence condition holds.
std::optional<ModelParams> draw_nontrivial_candidate(std::mt19937_64& rng);
// Collects n feasible nontrivial draws; attempts reports the number of candidates tried.
std::vector<ModelParams> sample_feasible_nontrivial(std::size_t n, std::uint64_t seed, std::size_t* attempts = nullptr);

// Small-capital regime with r_c = delta and the equilibrium capital above the level where the
// marginal product equals depreciation; trivial phase.
std::optional<ModelParams> draw_saddle_candidate(std::mt19937_64& rng);
std::vector<ModelParams> sample_saddle_regime(std::size_t n, std::uint64_t seed);

// Trivial-phase regime with the capital variance dominated by nu (weak endpoint dependence).
ModelParams draw_density_regime(std::mt19937_64& rng);

// Trivial-phase regime for the Monte Carlo comparison: the phase equilibrium sits at K_bar.
ModelParams monte_carlo_regime();

}  // namespace agentfield
