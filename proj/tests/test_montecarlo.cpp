#include <doctest.h>

#include <cmath>

#include "agentfield/errors.hpp"
#include "agentfield/montecarlo.hpp"
#include "agentfield/sampling.hpp"

using namespace agentfield;

TEST_CASE("path seeds") {
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 0) != path_seed(2, 0));
    CHECK(path_seed(7, 3) == path_seed(7, 3));
}

TEST_CASE("ensemble moments") {
    const std::vector<AgentState> pts{{1, 2, 3}, {3, 2, 1}, {2, 5, 2}};
    const EnsembleMoments m = compute_moments(pts);
    CHECK(m.mean(0) == doctest::Approx(2.0));
    CHECK(m.mean(1) == doctest::Approx(3.0));
    CHECK(m.covariance(0, 0) == doctest::Approx(1.0));
    CHECK(m.covariance(1, 1) == doctest::Approx(3.0));
    CHECK(m.covariance(0, 2) == doctest::Approx(-1.0));
    CHECK(m.covariance == m.covariance.transpose());
}

TEST_CASE("kolmogorov tail") {
    CHECK(kolmogorov_tail(0.0) == 1.0);
    CHECK(kolmogorov_tail(1.358) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(kolmogorov_tail(1.628) == doctest::Approx(0.01).epsilon(0.01));
    // Both series agree at the switch point.
    CHECK(kolmogorov_tail(1.0 - 1e-12) == doctest::Approx(kolmogorov_tail(1.0)).epsilon(1e-9));
    CHECK(kolmogorov_tail(10.0) < 1e-80);
}

TEST_CASE("comparison self-test") {
    const Eigen::Vector3d mean(1.0, 2.0, 3.0);
    Eigen::Matrix3d cov;
    cov << 0.04, 0.01, 0.0, 0.01, 0.09, 0.0, 0.0, 0.0, 0.01;
    const PathEnsemble ens = sample_gaussian(mean, cov, 50000, 99);
    CHECK(compare_to_green(ens, mean, cov).pass);
    // A bias of 0.1 standard deviations is far beyond the sampling error.
    const Eigen::Vector3d biased = mean + Eigen::Vector3d(0.02, 0.0, 0.0);
    const DivergenceReport bad = compare_to_green(ens, biased, cov);
    CHECK_FALSE(bad.pass);
    CHECK(std::abs(bad.coords[0].mean_z) > 4.0);
    CHECK_FALSE(compare_to_green(ens, mean, 2.0 * cov).pass);
    CHECK_THROWS_AS(sample_gaussian(mean, -cov, 10, 1), SingularityError);
}

TEST_CASE("path sampling is deterministic and thread independent") {
    const ModelParams p = monte_carlo_regime();
    const PhaseSolution s = solve_trivial(p);
    const AgentState start{s.C_bar_phase, p.K_bar, s.A_bar_phase};
    MCConfig mc;
    mc.n_paths = 200;
    mc.dt = 0.01;
    mc.threads = 1;
    const PathEnsemble a = sample_paths(start, 0.1, s, p, mc);
    mc.threads = 3;
    const PathEnsemble b = sample_paths(start, 0.1, s, p, mc);
    REQUIRE(a.endpoints.size() == 200);
    CHECK(a.n_steps == 10);
    for (std::size_t i = 0; i < a.endpoints.size(); ++i) {
        CHECK(a.endpoints[i].C == b.endpoints[i].C);
        CHECK(a.endpoints[i].K == b.endpoints[i].K);
        CHECK(a.endpoints[i].A == b.endpoints[i].A);
    }
    const EnsembleMoments m = compute_moments(a.endpoints);
    CHECK(m.mean == a.moments.mean);

    mc.antithetic = true;
    const PathEnsemble anti = sample_paths(start, 0.1, s, p, mc);
    // Paired paths share their shocks with opposite signs.
    const double up = anti.endpoints[0].A - start.A;
    const double down = anti.endpoints[1].A - start.A;
    CHECK(up == doctest::Approx(-down).epsilon(1e-6));

    mc.dt = 0.03;
    CHECK_THROWS_AS(sample_paths(start, 0.1, s, p, mc), ParameterError);
    mc.dt = 0.01;
    CHECK_THROWS_AS(sample_paths(start, 0.0, s, p, mc), DomainError);
}

TEST_CASE("zero-noise limit follows the deterministic dynamics") {
    const ModelParams p = monte_carlo_regime();
    const PhaseSolution s = solve_trivial(p);
    // At the phase consumption and technology levels only capital moves.
    const AgentState start{s.C_bar_phase, 1.2 * p.K_bar, s.A_bar_phase};
    const double T = 1.0;
    // Reference: fine RK4 of dK = A K^eps - C - delta K.
    auto f = [&](double K) { return start.A * std::pow(K, p.epsilon) - start.C - p.delta * K; };
    double K = start.K;
    const int n = 10000;
    const double h = T / n;
    for (int i = 0; i < n; ++i) {
        const double k1 = f(K), k2 = f(K + 0.5 * h * k1), k3 = f(K + 0.5 * h * k2), k4 = f(K + h * k3);
        K += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    MCConfig mc;
    mc.n_paths = 3;
    mc.noise_scale = 0.0;
    double previous_error = 0.0;
    for (double dt : {0.01, 0.005}) {
        mc.dt = dt;
        const PathEnsemble e = sample_paths(start, T, s, p, mc);
        CHECK(e.endpoints[0].C == start.C);
        CHECK(e.endpoints[0].A == start.A);
        CHECK(e.endpoints[1].K == e.endpoints[0].K);
        const double error = std::abs(e.endpoints[0].K - K);
        if (previous_error > 0.0) CHECK(previous_error / error == doctest::Approx(2.0).epsilon(0.05));
        previous_error = error;
    }
}

TEST_CASE("budget system") {
    ModelParams p;
    MCConfig mc;
    mc.n_paths = 10;
    mc.seed = 5;
    const BudgetReport r = budget_brownian_check(p, 1000, mc, {1.0, 0.0});
    CHECK(r.mean_abs_residual[1] == 0.0);
    CHECK(r.mean_abs_residual[0] > 0.0);
    CHECK(std::abs(r.shock_lag1) < 0.05);
    CHECK(r.n_increments == 10 * 998);
    CHECK_THROWS_AS(budget_brownian_check(p, 5, mc), ParameterError);
}

TEST_CASE("discounted capital term") {
    ModelParams p;
    AgentPath path;
    path.dt = 0.5;
    path.states = {{1, 10, 1}, {1, 10.5, 1}, {1, 10.2, 1}, {1, 11.0, 1}, {1, 11.4, 1}};
    const double T = path.horizon();
    // Without discounting the increments telescope.
    CHECK(discounted_capital_term(path, 0.0, p) ==
          doctest::Approx(2.0 / T / (p.nu * p.nu) * 1.4 * 1.4).epsilon(1e-12));
    CHECK(discounted_capital_term(path, 1e-9, p) == doctest::Approx(discounted_capital_term(path, 0.0, p)).epsilon(1e-6));
}
