#include <doctest.h>

#include <cmath>

#include "agentfield/errors.hpp"
#include "agentfield/green.hpp"
#include "agentfield/sampling.hpp"

using namespace agentfield;

namespace {

AgentState phase_start(const PhaseSolution& s, const ModelParams& p) {
    return {s.C_bar_phase, p.K_bar, s.A_bar_phase};
}

}  // namespace

TEST_CASE("covariance starts from zero") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    const AgentState from{1.3, 140.0, 9.5};
    const GreenCoefficients c = coefficients(p, s, from, from);
    const CovarianceState cf = covariance_closed_form(c, p, 0.0);
    CHECK(cf.H.norm() == 0.0);
    CHECK(cf.J(0) == doctest::Approx(from.C - s.C_bar_phase).epsilon(1e-15));
    CHECK(cf.J(1) == doctest::Approx(from.K - p.K_bar).epsilon(1e-15));
    CHECK(cf.J(2) == doctest::Approx(from.A).epsilon(1e-15));
    const CovarianceState ode = covariance_ode(c, p, 0.0, 10);
    CHECK(ode.H.norm() == 0.0);
    CHECK((ode.J - cf.J).norm() == 0.0);
    CHECK_THROWS_AS(covariance_closed_form(c, p, -1.0), DomainError);
    CHECK_THROWS_AS(covariance_ode(c, p, 1.0, 0), ParameterError);
}

TEST_CASE("covariance small-time rates") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    const AgentState x = phase_start(s, p);
    const GreenCoefficients c = coefficients(p, s, x, x);
    const double t = 1e-7;
    const CovarianceState cf = covariance_closed_form(c, p, t);
    CHECK(cf.H(0, 0) / t == doctest::Approx(2.0 * p.varpi * p.varpi).epsilon(1e-5));
    CHECK(cf.H(2, 2) / t == doctest::Approx(2.0 / p.lambda_sq).epsilon(1e-12));
    CHECK(std::abs(cf.H(1, 2)) / t < 1e-5);
    CHECK(cf.H(0, 2) == 0.0);
    CHECK(cf.H == cf.H.transpose());
}

TEST_CASE("covariance closed form matches the ODE") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    const AgentState from{1.2, 151.0, 10.1};
    const AgentState to{1.1, 149.0, 10.0};
    const GreenCoefficients c = coefficients(p, s, from, to);
    for (double t : {0.05, 0.3, 1.0}) {
        const CovarianceState ode = covariance_ode(c, p, t, 2000);
        const CovarianceState cf = covariance_closed_form(c, p, t);
        CHECK((ode.H - cf.H).norm() <= 1e-9 * cf.H.norm());
        CHECK((ode.J - cf.J).norm() <= 1e-9 * cf.J.norm());
    }
}

TEST_CASE("transition density") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    const AgentState x = phase_start(s, p);
    CHECK_THROWS_AS(transition_density(x, x, 0.0, s, p), DomainError);
    CHECK_THROWS_AS(transition_density(x, x, -1.0, s, p), DomainError);
    CHECK_THROWS_AS(transition_density({1.0, -5.0, 10.0}, {1.0, 2.0, 10.0}, 0.1, s, p), DomainError);

    // Short-time peak height scales as t^(-3/2).
    const double t1 = 1e-4, t2 = 1e-3;
    const double slope = (transition_density(x, x, t2, s, p).log_gaussian -
                          transition_density(x, x, t1, s, p).log_gaussian) /
                         std::log(t2 / t1);
    CHECK(slope == doctest::Approx(-1.5).epsilon(1e-3));

    // The mass enters as exp(-m t).
    PhaseSolution heavy = s;
    heavy.mass = 0.3;
    const AgentState to{x.C + 0.01, x.K + 0.1, x.A};
    const double base = transition_density(x, to, 0.2, s, p).log_density;
    CHECK(transition_density(x, to, 0.2, heavy, p).log_density == doctest::Approx(base - 0.3 * 0.2).epsilon(1e-13));
}

TEST_CASE("most likely endpoint") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    const AgentState from{s.C_bar_phase * 1.05, p.K_bar, s.A_bar_phase * 1.01};
    const MostLikelyEndpoint e = most_likely_endpoint(from, 0.1, s, p);
    for (double r : e.residuals) CHECK(std::abs(r) < 1e-10);
    // The endpoint maximizes the density in the consumption direction. In the capital direction the
    // endpoint-dependent covariance shifts the maximum slightly, so it is not checked there.
    const double peak = transition_density(from, e.state, 0.1, s, p).log_density;
    for (double h : {-1e-3, 1e-3})
        CHECK(transition_density(from, {e.state.C + h, e.state.K, e.state.A}, 0.1, s, p).log_density < peak);
}

TEST_CASE("laplace propagator") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    // Zero drift and zero displacement: the integral reduces to 1 / sqrt(2 m).
    const double C = s.C_bar_phase;
    const AgentState x{C, p.K_bar, (p.delta * p.K_bar + C) / std::pow(p.K_bar, p.epsilon)};
    const double m = 0.5;
    CHECK(laplace_propagator(x, x, s, p, m) == doctest::Approx(1.0 / std::sqrt(2.0 * m)).epsilon(1e-14));
    CHECK(laplace_propagator_quadrature(x, x, s, p, m) == doctest::Approx(1.0).epsilon(1e-8));

    const AgentState from = phase_start(s, p);
    const AgentState to{from.C + 0.02, from.K + 0.5, from.A + 0.01};
    const double closed = laplace_propagator(from, to, s, p, 0.2);
    const double quad = laplace_propagator_quadrature(from, to, s, p, 0.2);
    CHECK(closed > 0.0);
    CHECK(std::abs(closed - quad) <= 0.02 * quad);
}

TEST_CASE("average path") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    PhaseSolution shifted = s;
    // Choose the consumption level that puts the equilibrium capital at zero.
    shifted.C_bar_phase = (1.0 - p.epsilon) * s.A_bar_phase * std::pow(p.K_bar, p.epsilon);
    CHECK(equilibrium(p, shifted).K == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(equilibrium(p, s).A == s.A_bar_phase);
    CHECK(equilibrium(p, s).C == s.C_bar_phase);

    for (const ModelParams& q : sample_saddle_regime(5, 21)) {
        const PhaseSolution ph = solve_trivial(q);
        const AgentState eq = equilibrium(q, ph);
        REQUIRE(eq.K > 0.0);
        const AgentPath still = average_path(eq, 5.0, ph, q, 100);
        CHECK(std::abs(still.states.back().C - eq.C) < 1e-12 * std::max(1.0, std::abs(eq.C)));
        CHECK(std::abs(still.states.back().K - eq.K) < 1e-9 * eq.K);

        // Technology relaxes exponentially and decouples from (C, K).
        AgentState start = eq;
        start.A += 0.5;
        const double T = 2.0;
        const AgentPath moved = average_path(start, T, ph, q, 400);
        CHECK(moved.size() == 401);
        CHECK(moved.states.back().A - eq.A ==
              doctest::Approx(0.5 * std::exp(-T / (2.0 * q.lambda_sq))).epsilon(1e-12));

        // The (C, K) linearization is triangular at the equilibrium.
        const EigenvalueReport ev = linearized_eigenvalues(q, ph);
        const double mp = marginal_product(eq.K, eq.A, q);
        CHECK(ev.jacobian[0].real() == doctest::Approx(std::min(mp + q.r_c, mp - q.delta)).epsilon(1e-6));
        CHECK(ev.jacobian[1].real() == doctest::Approx(std::max(mp + q.r_c, mp - q.delta)).epsilon(1e-6));
        CHECK(ev.technology == -1.0 / (2.0 * q.lambda_sq));
    }
}

TEST_CASE("average path termination keeps the prefix") {
    const ModelParams p;
    const PhaseSolution s = solve_trivial(p);
    // Large consumption drains capital quickly.
    const AgentState start{s.C_bar_phase + 50.0, 1.0, s.A_bar_phase};
    try {
        average_path(start, 10.0, s, p, 1000);
        FAIL("expected termination");
    } catch (const TrajectoryTerminated& e) {
        CHECK(e.partial().size() >= 1);
        CHECK(e.partial().states.front().K == 1.0);
        for (const auto& st : e.partial().states) CHECK(st.K > 0.0);
    }
    CHECK(average_path(start, 0.0, s, p, 10).size() == 1);
    CHECK_THROWS_AS(average_path(start, -1.0, s, p, 10), DomainError);
}
