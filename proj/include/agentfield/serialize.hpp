#pragma once

#include <json.hpp>

#include <string>

#include "agentfield/corrections.hpp"
#include "agentfield/green.hpp"
#include "agentfield/model.hpp"
#include "agentfield/montecarlo.hpp"
#include "agentfield/phase.hpp"

namespace agentfield {

using Json = nlohmann::ordered_json;

Json to_json(const ModelParams& p);
Json to_json(const PhaseSolution& s);
Json to_json(const FeasibilityReport& r);
Json to_json(const StabilityReport& r);
Json to_json(const GreenCoefficients& c);
Json to_json(const DensityResult& d);
Json to_json(const DivergenceReport& r);
Json to_json(const BudgetReport& r);
Json to_json(const NegligibilityReport& r);
Json to_json(const AgentState& s);

PhaseSolution phase_solution_from_json(const Json& j);

// Serializes with every number printed by %.17g; non-finite numbers become null.
std::string emit_json(const Json& j, int indent = 2);

}  // namespace agentfield
