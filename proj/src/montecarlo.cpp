#include "agentfield/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "agentfield/errors.hpp"

namespace agentfield {

namespace {

// Runs fn(begin, end) over contiguous chunks of [0, n); results must be written by index.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    unsigned k = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    k = static_cast<unsigned>(std::min<std::size_t>(k, std::max<std::size_t>(n, 1)));
    if (k <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + k - 1) / k;
    for (unsigned w = 0; w < k; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([=] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

struct Amplitudes {
    double C, K, A;
};

Amplitudes amplitudes(const ModelParams& p, const MCConfig& mc) {
    const double lam = p.lambda();
    const double f = mc.noise == NoiseConvention::density_matched ? std::sqrt(2.0) : 1.0 / std::sqrt(2.0);
    return {mc.noise_scale * f * p.varpi, mc.noise_scale * f * p.nu, mc.noise_scale * f / lam};
}

std::size_t step_count(double t, double dt) {
    if (!(t > 0.0)) throw DomainError("horizon t must be > 0");
    if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
    const double ratio = t / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) throw ParameterError("t must be an integer multiple of dt");
    return static_cast<std::size_t>(n);
}

// One Euler-Maruyama step; returns true when K < 0 after the step.
struct Stepper {
    const ModelParams& p;
    const PhaseSolution& phase;
    Amplitudes amp;
    double dt;
    double sqrt_dt;
    double consumption_offset;  // subtracted from the consumption growth rate

    bool step(AgentState& x, double z1, double z2, double z3) const {
        const bool positive = x.K > 0.0;
        const double Kpow = positive ? std::pow(x.K, p.epsilon) : 0.0;
        const double mp = positive ? x.A * p.epsilon * Kpow / x.K : 0.0;
        const double F = x.A * Kpow;
        const double dC = (mp + p.r_c - consumption_offset) * (x.C - phase.C_bar_phase);
        const double dK = F - x.C - p.delta * x.K;
        const double dA = -(x.A - phase.A_bar_phase) / (2.0 * p.lambda_sq);
        x.C += dC * dt + amp.C * sqrt_dt * z1;
        x.K += dK * dt + amp.K * sqrt_dt * z2;
        x.A += dA * dt + amp.A * sqrt_dt * z3;
        return x.K < 0.0;
    }
};

Stepper make_stepper(const ModelParams& p, const PhaseSolution& phase, const MCConfig& mc) {
    const double offset = p.numerics.convention == Convention::half_rate ? p.delta : 0.0;
    return Stepper{p, phase, amplitudes(p, mc), mc.dt, std::sqrt(mc.dt), offset};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

EnsembleMoments compute_moments(const std::vector<AgentState>& endpoints) {
    EnsembleMoments m;
    const std::size_t n = endpoints.size();
    if (n == 0) return m;
    for (const auto& e : endpoints) m.mean += Eigen::Vector3d(e.C, e.K, e.A);
    m.mean /= static_cast<double>(n);
    if (n < 2) return m;
    for (const auto& e : endpoints) {
        const Eigen::Vector3d d = Eigen::Vector3d(e.C, e.K, e.A) - m.mean;
        m.covariance += d * d.transpose();
    }
    m.covariance /= static_cast<double>(n - 1);
    return m;
}

PathEnsemble sample_paths(const AgentState& initial, double t, const PhaseSolution& phase, const ModelParams& p,
                          const MCConfig& mc) {
    if (mc.n_paths < 1) throw ParameterError("n_paths must be >= 1");
    const std::size_t n_steps = step_count(t, mc.dt);
    const Stepper stepper = make_stepper(p, phase, mc);
    PathEnsemble ens;
    ens.endpoints.resize(mc.n_paths);
    ens.negative_capital.assign(mc.n_paths, 0);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t stream = mc.antithetic ? i / 2 : i;
            const double sign = mc.antithetic && (i % 2 == 1) ? -1.0 : 1.0;
            std::mt19937_64 rng(path_seed(mc.seed, stream));
            std::normal_distribution<double> normal;
            AgentState x = initial;
            bool negative = false;
            for (std::size_t k = 0; k < n_steps; ++k) {
                const double z1 = normal(rng);
                const double z2 = normal(rng);
                const double z3 = normal(rng);
                negative |= stepper.step(x, sign * z1, sign * z2, sign * z3);
            }
            ens.endpoints[i] = x;
            ens.negative_capital[i] = negative ? 1 : 0;
        }
    });
    ens.negative_capital_count =
        static_cast<std::size_t>(std::count(ens.negative_capital.begin(), ens.negative_capital.end(), 1));
    ens.moments = compute_moments(ens.endpoints);
    ens.seed = mc.seed;
    ens.n_steps = n_steps;
    ens.dt = mc.dt;
    ens.t = t;
    return ens;
}

PathEnsemble sample_gaussian(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov, std::size_t n,
                             std::uint64_t seed) {
    if (n < 1) throw ParameterError("sample size must be >= 1");
    const Eigen::LLT<Eigen::Matrix3d> llt(cov);
    if (llt.info() != Eigen::Success) throw SingularityError("covariance is not positive definite");
    const Eigen::Matrix3d L = llt.matrixL();
    PathEnsemble ens;
    ens.endpoints.resize(n);
    ens.negative_capital.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(path_seed(seed, i));
        std::normal_distribution<double> normal;
        Eigen::Vector3d z;
        z << normal(rng), normal(rng), normal(rng);
        const Eigen::Vector3d x = mean + L * z;
        ens.endpoints[i] = {x(0), x(1), x(2)};
    }
    ens.moments = compute_moments(ens.endpoints);
    ens.seed = seed;
    return ens;
}

double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.0) {
        // Complementary theta-function form converges fast for small x.
        double sum = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            sum += std::exp(-m * m * std::numbers::pi * std::numbers::pi / (8.0 * x * x));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

DivergenceReport compare_to_green(const PathEnsemble& ensemble, const Eigen::Vector3d& mean,
                                  const Eigen::Matrix3d& cov) {
    const std::size_t n = ensemble.endpoints.size();
    if (n < 2) throw ParameterError("ensemble must contain at least 2 endpoints");
    DivergenceReport r;
    const EnsembleMoments m = compute_moments(ensemble.endpoints);
    const double dn = static_cast<double>(n);
    std::vector<double> values(n);
    bool pass = true;
    for (int i = 0; i < 3; ++i) {
        const double var = cov(i, i);
        if (!(var > 0.0)) throw SingularityError("reference variance must be > 0");
        auto& c = r.coords[i];
        c.mean_z = (m.mean(i) - mean(i)) / std::sqrt(var / dn);
        c.variance_z = (m.covariance(i, i) - var) / (var * std::sqrt(2.0 / (dn - 1.0)));
        for (std::size_t k = 0; k < n; ++k) {
            const auto& e = ensemble.endpoints[k];
            values[k] = i == 0 ? e.C : (i == 1 ? e.K : e.A);
        }
        std::sort(values.begin(), values.end());
        const double sd = std::sqrt(var);
        double D = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double F = normal_cdf((values[k] - mean(i)) / sd);
            D = std::max({D, static_cast<double>(k + 1) / dn - F, F - static_cast<double>(k) / dn});
        }
        c.ks_statistic = std::sqrt(dn) * D;
        c.ks_p_value = kolmogorov_tail(c.ks_statistic);
        pass = pass && std::abs(c.mean_z) <= r.z_threshold && std::abs(c.variance_z) <= r.z_threshold &&
               c.ks_p_value > r.ks_p_threshold;
    }
    r.pass = pass;
    return r;
}

DivergenceReport compare_to_green(const PathEnsemble& ensemble, const DensityResult& density) {
    return compare_to_green(ensemble, density.mean, density.H);
}

BudgetReport budget_brownian_check(const ModelParams& p, int T, const MCConfig& mc,
                                   const std::vector<double>& constraint_variances) {
    if (T < 10) throw ParameterError("T must be >= 10 periods");
    if (mc.n_paths < 1) throw ParameterError("n_paths must be >= 1");
    const std::size_t replicas = mc.n_paths;
    const std::size_t nT = static_cast<std::size_t>(T);
    const double invT = 1.0 / T;
    const double sd_revenue = std::sqrt(p.sigma_sq);
    const std::size_t nv = constraint_variances.size();

    struct Partial {
        double sum = 0.0, sum_sq = 0.0, lag = 0.0;
        double x_sum_sq = 0.0, x_lag = 0.0;
        std::size_t n = 0, n_lag = 0, nx = 0, nx_lag = 0;
        std::vector<double> residual;
    };
    std::vector<Partial> parts(replicas);
    parallel_for(replicas, mc.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> X(nT + 1), Yr(nT + 1), C(nT + 1);
        for (std::size_t r = begin; r < end; ++r) {
            std::mt19937_64 rng(path_seed(mc.seed, r));
            std::normal_distribution<double> normal;
            for (std::size_t t = 1; t <= nT; ++t) {
                X[t] = normal(rng);
                Yr[t] = sd_revenue * normal(rng);
            }
            double cum_revenue = 0.0;
            double cum_consumption = 0.0;
            for (std::size_t t = 1; t <= nT; ++t) {
                cum_revenue += Yr[t];
                C[t] = X[t] + invT * (cum_revenue - cum_consumption);
                if (t < nT) cum_consumption += C[t];
            }
            Partial& part = parts[r];
            double previous = 0.0;
            for (std::size_t t = 1; t + 1 < nT; ++t) {
                const double inc = C[t] - C[t + 1] + Yr[t + 1] * invT;
                part.sum += inc;
                part.sum_sq += inc * inc;
                ++part.n;
                if (t > 1) {
                    part.lag += inc * previous;
                    ++part.n_lag;
                }
                previous = inc;
            }
            for (std::size_t t = 1; t <= nT; ++t) {
                part.x_sum_sq += X[t] * X[t];
                ++part.nx;
                if (t > 1) {
                    part.x_lag += X[t] * X[t - 1];
                    ++part.nx_lag;
                }
            }
            // Terminal period: the last shock is drawn conditionally on the soft constraint.
            const double base_last = invT * (cum_revenue - cum_consumption);
            const double R0 = cum_revenue - cum_consumption - base_last;
            part.residual.resize(nv);
            for (std::size_t v = 0; v < nv; ++v) {
                const double s2 = constraint_variances[v];
                double x_last = R0;
                if (s2 > 0.0) {
                    const double precision = 1.0 + 2.0 / s2;
                    x_last = (2.0 * R0 / s2) / precision + normal(rng) / std::sqrt(precision);
                }
                part.residual[v] = std::abs(R0 - x_last);
            }
        }
    });

    BudgetReport out;
    out.constraint_variances = constraint_variances;
    out.mean_abs_residual.assign(nv, 0.0);
    double sum = 0.0, sum_sq = 0.0, lag = 0.0, x_sum_sq = 0.0, x_lag = 0.0;
    std::size_t n = 0, n_lag = 0, nx = 0, nx_lag = 0;
    for (const auto& part : parts) {
        sum += part.sum;
        sum_sq += part.sum_sq;
        lag += part.lag;
        x_sum_sq += part.x_sum_sq;
        x_lag += part.x_lag;
        n += part.n;
        n_lag += part.n_lag;
        nx += part.nx;
        nx_lag += part.nx_lag;
        for (std::size_t v = 0; v < nv; ++v) out.mean_abs_residual[v] += part.residual[v];
    }
    for (auto& r : out.mean_abs_residual) r /= static_cast<double>(replicas);
    const double mean = sum / n;
    out.n_increments = n;
    out.increment_variance = (sum_sq - n * mean * mean) / (n - 1.0);
    // The increments have (near) zero mean, so the raw lag product estimates the autocovariance.
    out.increment_lag1 = (lag / n_lag - mean * mean) / out.increment_variance;
    out.shock_lag1 = (x_lag / nx_lag) / (x_sum_sq / nx);
    out.variance_ok = std::abs(out.increment_variance - 2.0) <= 0.05 * 2.0;
    out.increments_uncorrelated = std::abs(out.increment_lag1) <= 0.02;
    return out;
}

double discounted_capital_term(const AgentPath& path, double rate, const ModelParams& p) {
    path.validate();
    const double T = path.horizon();
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        integral += (path.states[i + 1].K - path.states[i].K) * std::exp(-rate * path.dt * static_cast<double>(i));
    const double r_bar = rate == 0.0 ? 1.0 / T : rate / -std::expm1(-rate * T);
    return 2.0 * r_bar / (p.nu * p.nu) * integral * integral;
}

NegligibilityReport intertemporal_negligibility(const AgentState& initial, double horizon, double rate,
                                            const PhaseSolution& phase, const ModelParams& p, const MCConfig& mc) {
    if (mc.n_paths < 1) throw ParameterError("n_paths must be >= 1");
    const std::size_t n_steps = step_count(horizon, mc.dt);
    const Stepper stepper = make_stepper(p, phase, mc);
    std::vector<double> constraint(mc.n_paths), consumption(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t begin, std::size_t end) {
        AgentPath path;
        path.dt = mc.dt;
        path.states.resize(n_steps + 1);
        for (std::size_t i = begin; i < end; ++i) {
            std::mt19937_64 rng(path_seed(mc.seed, i));
            std::normal_distribution<double> normal;
            AgentState x = initial;
            path.states[0] = x;
            for (std::size_t k = 0; k < n_steps; ++k) {
                const double z1 = normal(rng);
                const double z2 = normal(rng);
                const double z3 = normal(rng);
                stepper.step(x, z1, z2, z3);
                path.states[k + 1] = x;
            }
            constraint[i] = discounted_capital_term(path, rate, p);
            consumption[i] = std::abs(log_weight_consumption(path, p) - p.C0 * path.horizon());
        }
    });
    NegligibilityReport out;
    for (std::size_t i = 0; i < mc.n_paths; ++i) {
        out.constraint_term += constraint[i];
        out.consumption_term += consumption[i];
    }
    out.constraint_term /= static_cast<double>(mc.n_paths);
    out.consumption_term /= static_cast<double>(mc.n_paths);
    out.ratio = out.constraint_term / out.consumption_term;
    out.rate = rate;
    out.horizon = horizon;
    out.negligible = out.ratio < 0.1;
    return out;
}

}  // namespace agentfield
