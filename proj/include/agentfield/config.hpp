#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "agentfield/model.hpp"
#include "agentfield/montecarlo.hpp"

namespace agentfield {

// Economic parameter keys, in declaration order (the CSV column order).
const std::vector<std::string>& param_keys();
// Numerical-control keys accepted in config files.
const std::vector<std::string>& numerics_keys();

// Sets one key from its textual value; throws ParameterError on unknown keys or bad values.
void set_param(ModelParams& p, const std::string& key, const std::string& value);
double get_param(const ModelParams& p, const std::string& key);

// Flat "key = value" text, '#' starts a comment. Unknown keys are rejected.
ModelParams parse_params(const std::string& text, ModelParams base = {});
ModelParams load_params(const std::string& file);

// %.17g formatting used for every numeric output.
std::string format_number(double v);

// CSV with header t,C,K,A.
void write_path_csv(std::ostream& os, const AgentPath& path);
AgentPath read_path_csv(std::istream& is);
// CSV with header path_id,C,K,A.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble);

}  // namespace agentfield
