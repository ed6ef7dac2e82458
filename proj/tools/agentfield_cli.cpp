// Command-line front end: loads a flat config, dispatches one subcommand and prints CSV or JSON.
#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "agentfield/config.hpp"
#include "agentfield/corrections.hpp"
#include "agentfield/errors.hpp"
#include "agentfield/green.hpp"
#include "agentfield/montecarlo.hpp"
#include "agentfield/phase.hpp"
#include "agentfield/scan.hpp"
#include "agentfield/serialize.hpp"

using namespace agentfield;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

// Raised for well-formed commands whose result must still be reported with a non-zero code.
struct PartialResult {
    int code;
    std::string message;
};

struct GlobalOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 12345;
    std::string format;
    std::string output;
};

AgentState parse_state(const std::string& text, const std::string& flag) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParameterError(flag + ": bad number '" + item + "'");
        }
    }
    if (v.size() != 3) throw ParameterError(flag + " expects three comma-separated values C,K,A");
    return {v[0], v[1], v[2]};
}

Eigen::Vector3d parse_vector(const std::string& text, const std::string& flag) {
    const AgentState s = parse_state(text, flag);
    return {s.C, s.K, s.A};
}

ModelParams load(const GlobalOptions& g) {
    ModelParams p = g.config.empty() ? ModelParams{} : load_params(g.config);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + kv + "'");
        set_param(p, kv.substr(0, eq), kv.substr(eq + 1));
    }
    p.validate();
    return p;
}

std::string format_or(const GlobalOptions& g, const std::string& fallback, std::initializer_list<const char*> allowed) {
    const std::string f = g.format.empty() ? fallback : g.format;
    for (const char* a : allowed)
        if (f == a) return f;
    throw ParameterError("format '" + f + "' is not supported by this subcommand");
}

void write_output(const GlobalOptions& g, const std::string& text) {
    if (g.output.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(g.output, std::ios::binary);
    if (!out) throw ParameterError("cannot open output file: " + g.output);
    out << text;
}

Phase phase_arg(int index) {
    if (index != 0 && index != 1) throw ParameterError("--phase must be 0 or 1");
    return phase_from_index(index);
}

AgentState midpoint(const AgentState& a, const AgentState& b) {
    return {0.5 * (a.C + b.C), 0.5 * (a.K + b.K), 0.5 * (a.A + b.A)};
}

// ---- subcommands ----

std::string run_phases(const GlobalOptions& g, std::optional<PartialResult>& partial) {
    const ModelParams p = load(g);
    const std::string format = format_or(g, "json", {"json", "csv"});
    const PhaseSolution trivial = solve_trivial(p);
    const FeasibilityReport feasibility = phase_existence(p);
    std::optional<PhaseSolution> nontrivial;
    if (feasibility.feasible) {
        nontrivial = solve_nontrivial(p);
    } else {
        partial = PartialResult{kExitInfeasible, "nontrivial phase infeasible"};
    }
    std::ostringstream os;
    if (format == "csv") {
        write_scan_header(os);
        write_scan_row(os, p, trivial);
        write_scan_row(os, p, nontrivial ? *nontrivial : scan_point(p, Phase::nontrivial));
        return os.str();
    }
    Json j;
    j["params"] = to_json(p);
    j["feasibility"] = to_json(feasibility);
    j["trivial"] = to_json(trivial);
    j["trivial_stability"] = to_json(stability_check(p, trivial));
    j["nontrivial"] = nontrivial ? to_json(*nontrivial) : Json(nullptr);
    j["nontrivial_stability"] = nontrivial ? to_json(stability_check(p, *nontrivial)) : Json(nullptr);
    return emit_json(j) + "\n";
}

std::string run_phase_scan(const GlobalOptions& g, const std::string& grid_text, int phase_index) {
    const ModelParams p = load(g);
    const std::string format = format_or(g, "csv", {"json", "csv"});
    const GridSpec grid = parse_grid(grid_text);
    const auto points = run_scan(p, grid, phase_arg(phase_index));
    std::ostringstream os;
    if (format == "csv") {
        write_scan_header(os);
        for (const auto& pt : points) write_scan_row(os, pt.params, pt.solution);
        return os.str();
    }
    Json rows = Json::array();
    for (const auto& pt : points) rows.push_back({{"params", to_json(pt.params)}, {"solution", to_json(pt.solution)}});
    return emit_json(rows) + "\n";
}

std::string run_transit(const GlobalOptions& g, const std::string& from, const std::string& to, double t,
                        int phase_index, bool corrected) {
    const ModelParams p = load(g);
    format_or(g, "json", {"json"});
    const AgentState a = parse_state(from, "--from");
    const AgentState b = parse_state(to, "--to");
    if (!(t > 0.0)) throw DomainError("--t must be > 0");
    const PhaseSolution phase = solve_phase(p, phase_arg(phase_index));
    const DensityResult d = transition_density(a, b, t, phase, p);
    Json j = to_json(d);
    if (corrected) {
        const CorrectedDensity cd = corrected_density(a, b, t, phase, p);
        j["corrected"] = {{"density", cd.density}, {"log_density", cd.log_density}, {"potential", cd.potential}};
    }
    return emit_json(j) + "\n";
}

std::string run_path(const GlobalOptions& g, const std::string& from, double t, int steps, int phase_index,
                     std::optional<PartialResult>& partial) {
    const ModelParams p = load(g);
    const std::string format = format_or(g, "csv", {"csv", "json"});
    const AgentState a = parse_state(from, "--from");
    if (!(t > 0.0)) throw DomainError("--t must be > 0");
    if (steps < 1) throw ParameterError("--steps must be >= 1");
    const PhaseSolution phase = solve_phase(p, phase_arg(phase_index));
    AgentPath path;
    try {
        path = average_path(a, t, phase, p, steps);
    } catch (const TrajectoryTerminated& e) {
        path = e.partial();
        partial = PartialResult{kExitNumerical, e.what()};
    }
    std::ostringstream os;
    if (format == "csv") {
        write_path_csv(os, path);
        return os.str();
    }
    Json rows = Json::array();
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& s = path.states[i];
        rows.push_back({{"t", path.t0 + path.dt * static_cast<double>(i)}, {"C", s.C}, {"K", s.K}, {"A", s.A}});
    }
    return emit_json(rows) + "\n";
}

std::string run_deviations(const GlobalOptions& g, const std::string& x0, const std::string& v0, double t,
                           int phase_index) {
    const ModelParams p = load(g);
    format_or(g, "json", {"json"});
    if (!(t > 0.0)) throw DomainError("--t must be > 0");
    const PhaseSolution phase = solve_phase(p, phase_arg(phase_index));
    DeviationQuery q;
    q.initial_state = parse_state(x0, "--x0");
    q.initial_velocity = parse_vector(v0, "--v0");
    q.t = t;
    q.coeffs = coefficients(p, phase, q.initial_state, q.initial_state);
    const Eigen::Vector3d d = path_deviation(q, p);
    Json el = Json::object();
    for (const auto& e : elasticity_table(t, q.coeffs, p)) el[e.name] = e.value;
    return emit_json(Json{{"dC", d(0)}, {"dK", d(1)}, {"dA", d(2)}, {"elasticities", el}}) + "\n";
}

std::string run_two_agent(const GlobalOptions& g, const std::vector<std::string>& from,
                          const std::vector<std::string>& to, double t, int phase_index) {
    const ModelParams p = load(g);
    format_or(g, "json", {"json"});
    if (from.size() != 2 || to.size() != 2) throw ParameterError("two-agent needs --from and --to twice each");
    if (!(t > 0.0)) throw DomainError("--t must be > 0");
    const PhaseSolution phase = solve_phase(p, phase_arg(phase_index));
    TwoAgentQuery q;
    q.agent1_from = parse_state(from[0], "--from");
    q.agent2_from = parse_state(from[1], "--from");
    q.agent1_to = parse_state(to[0], "--to");
    q.agent2_to = parse_state(to[1], "--to");
    q.t = t;
    // Coefficients at the pooled endpoints keep the result symmetric under agent exchange.
    const GreenCoefficients c = coefficients(p, phase, midpoint(q.agent1_from, q.agent2_from),
                                             midpoint(q.agent1_to, q.agent2_to));
    const TwoAgentCorrection r = two_agent_correction(q, c, p);
    return emit_json(Json{{"V_I", r.V_I},
                          {"d21", {{"K", r.dK_21}, {"A", r.dA_21}}},
                          {"d12", {{"K", r.dK_12}, {"A", r.dA_12}}}}) +
           "\n";
}

struct McOptions {
    double t = 0.1;
    std::size_t n = 100000;
    double dt = 1e-3;
    int phase = 0;
    std::string from;
    std::string ensemble_csv;
    bool antithetic = false;
    unsigned threads = 0;
};

std::string run_mc_validate(const GlobalOptions& g, const McOptions& o) {
    const ModelParams p = load(g);
    format_or(g, "json", {"json"});
    if (!(o.t > 0.0)) throw DomainError("--t must be > 0");
    if (!(o.dt > 0.0)) throw DomainError("--dt must be > 0");
    const PhaseSolution phase = solve_phase(p, phase_arg(o.phase));
    const AgentState start =
        o.from.empty() ? AgentState{phase.C_bar_phase, p.K_bar, phase.A_bar_phase} : parse_state(o.from, "--from");
    MCConfig mc;
    mc.n_paths = o.n;
    mc.dt = o.dt;
    mc.seed = g.seed;
    mc.antithetic = o.antithetic;
    mc.threads = o.threads;
    const PathEnsemble ens = sample_paths(start, o.t, phase, p, mc);
    // The density coefficients are evaluated between the start and the ensemble mean.
    const AgentState mean{ens.moments.mean(0), ens.moments.mean(1), ens.moments.mean(2)};
    const DensityResult d = transition_density(start, mean, o.t, phase, p);
    const DivergenceReport r = compare_to_green(ens, d);
    if (!o.ensemble_csv.empty()) {
        std::ofstream out(o.ensemble_csv, std::ios::binary);
        if (!out) throw ParameterError("cannot open ensemble file: " + o.ensemble_csv);
        write_ensemble_csv(out, ens);
    }
    Json j = to_json(r);
    j["n_paths"] = ens.endpoints.size();
    j["n_steps"] = ens.n_steps;
    j["t"] = o.t;
    j["dt"] = o.dt;
    j["seed"] = g.seed;
    j["start"] = to_json(start);
    j["negative_capital_paths"] = ens.negative_capital_count;
    return emit_json(j) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent field model toolkit: phases, transition densities, corrections and Monte Carlo checks"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config, "Flat key = value parameter file (defaults to the built-in reference set)");
    app.add_option("--set", g.overrides, "Override one parameter, key=value (repeatable)");
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--format", g.format, "Output format: csv or json (default depends on the subcommand)")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--output", g.output, "Write output to this file instead of stdout");

    auto* phases = app.add_subcommand("phases", "Solve the trivial and nontrivial phases");

    std::string grid;
    int scan_phase = 1;
    auto* scan = app.add_subcommand("phase-scan", "Scan one parameter over a grid");
    scan->add_option("--grid", grid, "key=start:stop:points or key=value")->required();
    scan->add_option("--phase", scan_phase, "0 = trivial, 1 = nontrivial")->capture_default_str();

    std::string from, to;
    double t = 0.1;
    int phase_index = 0;
    bool corrected = false;
    auto* transit = app.add_subcommand("transit", "Transition density between two states");
    transit->add_option("--from", from, "Initial state C,K,A")->required();
    transit->add_option("--to", to, "Final state C,K,A")->required();
    transit->add_option("--t", t, "Duration")->required();
    transit->add_option("--phase", phase_index, "0 = trivial, 1 = nontrivial")->capture_default_str();
    transit->add_flag("--corrected", corrected, "Also report the first-order interaction-corrected density");

    int steps = 1000;
    auto* path = app.add_subcommand("path", "Average path from an initial state (CSV t,C,K,A)");
    path->add_option("--from", from, "Initial state C,K,A")->required();
    path->add_option("--t", t, "Horizon")->required();
    path->add_option("--steps", steps, "RK4 steps")->capture_default_str();
    path->add_option("--phase", phase_index, "0 = trivial, 1 = nontrivial")->capture_default_str();

    std::string x0, v0 = "0,0,0";
    auto* deviations = app.add_subcommand("deviations", "First-order path deviations and elasticities");
    deviations->add_option("--x0", x0, "Initial state C,K,A")->required();
    deviations->add_option("--v0", v0, "Initial velocity dC,dK,dA")->capture_default_str();
    deviations->add_option("--t", t, "Time")->required();
    deviations->add_option("--phase", phase_index, "0 = trivial, 1 = nontrivial")->capture_default_str();

    std::vector<std::string> froms, tos;
    auto* two = app.add_subcommand("two-agent", "Two-agent interaction correction");
    two->add_option("--from", froms, "Initial state C,K,A of agent 1, then agent 2")->required()->expected(1, 2);
    two->add_option("--to", tos, "Final state C,K,A of agent 1, then agent 2")->required()->expected(1, 2);
    two->add_option("--t", t, "Duration")->required();
    two->add_option("--phase", phase_index, "0 = trivial, 1 = nontrivial")->capture_default_str();

    McOptions mco;
    auto* mcv = app.add_subcommand("mc-validate", "Compare a Langevin ensemble with the analytic density");
    mcv->add_option("--t", mco.t, "Horizon")->capture_default_str();
    mcv->add_option("--n", mco.n, "Number of paths")->capture_default_str();
    mcv->add_option("--dt", mco.dt, "Euler-Maruyama step")->capture_default_str();
    mcv->add_option("--phase", mco.phase, "0 = trivial, 1 = nontrivial")->capture_default_str();
    mcv->add_option("--from", mco.from, "Initial state C,K,A (default: phase levels at K_bar)");
    mcv->add_option("--ensemble-csv", mco.ensemble_csv, "Also write the endpoints as CSV path_id,C,K,A");
    mcv->add_flag("--antithetic", mco.antithetic, "Pair every path with its sign-flipped twin");
    mcv->add_option("--threads", mco.threads, "Worker threads (0 = all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    std::optional<PartialResult> partial;
    try {
        std::string text;
        if (*phases) text = run_phases(g, partial);
        else if (*scan) text = run_phase_scan(g, grid, scan_phase);
        else if (*transit) text = run_transit(g, from, to, t, phase_index, corrected);
        else if (*path) text = run_path(g, from, t, steps, phase_index, partial);
        else if (*deviations) text = run_deviations(g, x0, v0, t, phase_index);
        else if (*two) text = run_two_agent(g, froms, tos, t, phase_index);
        else if (*mcv) text = run_mc_validate(g, mco);
        write_output(g, text);
    } catch (const InfeasiblePhaseError& e) {
        std::cerr << "error: infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const ParameterError& e) {
        std::cerr << "error: parameter: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: domain: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ShapeError& e) {
        std::cerr << "error: shape: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: convergence: " << e.what() << " (last residual " << format_number(e.residual())
                  << ")\n";
        return kExitNumerical;
    } catch (const SingularityError& e) {
        std::cerr << "error: singularity: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return kExitNumerical;
    }
    if (partial) {
        std::cerr << "error: " << partial->message << '\n';
        return partial->code;
    }
    return 0;
}
