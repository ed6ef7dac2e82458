#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "agentfield/model.hpp"
#include "agentfield/phase.hpp"

namespace agentfield {

// One-parameter grid: key=start:stop:points, points >= 1 (a single point uses start).
struct GridSpec {
    std::string key;
    double start = 0.0;
    double stop = 0.0;
    int points = 1;

    std::vector<double> values() const;
};

// Parses "key=start:stop:points" or "key=value"; unknown keys throw ParameterError.
GridSpec parse_grid(const std::string& text);

// Header of the scan CSV: parameter keys, then the phase columns.
std::vector<std::string> scan_columns();

// Solves one phase; an infeasible nontrivial phase yields NaN values with feasible = false.
PhaseSolution scan_point(const ModelParams& p, Phase phase);

void write_scan_header(std::ostream& os);
void write_scan_row(std::ostream& os, const ModelParams& p, const PhaseSolution& s);

struct ScanPoint {
    ModelParams params;
    PhaseSolution solution;
};

// Solutions in grid order; the grid is evaluated in parallel batches.
std::vector<ScanPoint> run_scan(const ModelParams& base, const GridSpec& grid, Phase phase);

}  // namespace agentfield
