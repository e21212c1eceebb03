#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "common.hpp"
#include "output.hpp"
#include "qho/app/commands.hpp"
#include "qho/errors.hpp"

namespace qho::app {

using nlohmann::json;

namespace {

struct Check {
    std::string name;
    double measured = std::nan("");
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

json to_json(const Check& c) {
    return {{"name", c.name},
            {"measured", number_or_null(c.measured)},
            {"tolerance", c.tolerance},
            {"passed", c.passed},
            {"detail", c.detail}};
}

void settle(Check& c) { c.passed = std::isfinite(c.measured) && c.measured <= c.tolerance; }

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Relative error of a grid density against a closed-form Gaussian, with the
// mean error scaled by max(|mean|, std).
double packet_error(const GridWavefunction& psi, const Gaussian& g) {
    const double mean_err = std::abs(psi.mean() - g.mean()) / std::max(std::abs(g.mean()), g.std());
    return std::max(mean_err, relative(psi.std_dev(), g.std()));
}

Check grid_vs_closed_form(const RunConfig& cfg) {
    Check c{"grid_vs_closed_form", std::nan(""), 1e-4, false, {}};
    const OscillatorParams p = cfg.oscillator();
    const MeasurementScheme s = cfg.scheme();
    const Grid grid = cfg.grid();
    const std::vector<WavePacket> packets{cfg.initial(), WavePacket(p.sigma_gs(), s.sigma_M())};
    std::vector<double> times{s.t_M()};
    for (int k = 1; k <= 4; ++k) {
        times.push_back(k * p.period() / 8.0);
    }
    double worst = 0.0;
    for (const WavePacket& packet : packets) {
        const GridWavefunction psi0 = init_packet(grid, packet);
        for (double t : times) {
            const GridWavefunction psi = evolve(psi0, t, p, cfg.steps_per_period);
            if (boundary_probability(psi) > kLeakageThreshold) {
                throw LeakageError("evolved packet reaches the grid boundary; enlarge the grid half extent");
            }
            worst = std::max(worst, packet_error(psi, evolved_density(p, packet, t)));
        }
    }
    c.measured = worst;
    c.detail = "max relative mean/std error over 2 packets and 5 times";
    settle(c);
    return c;
}

Check spectral_convergence(const RunConfig& cfg) {
    Check c{"spectral_convergence", std::nan(""), 1e-6, false, {}};
    const OscillatorParams p = cfg.oscillator();
    const MeasurementScheme s = cfg.scheme();
    const WavePacket packet(p.sigma_gs(), s.sigma_M());
    const Grid coarse = cfg.grid();
    const Grid fine(coarse.x_min(), coarse.x_max(), 2 * coarse.size());
    const double a = evolve(init_packet(coarse, packet), p.period(), p, cfg.steps_per_period).std_dev();
    const double b = evolve(init_packet(fine, packet), p.period(), p, 2 * cfg.steps_per_period).std_dev();
    c.measured = relative(a, b);
    std::ostringstream d;
    d.precision(10);
    d << "one-period std at " << coarse.size() << " points vs " << fine.size() << " points with half the step: " << a
      << " vs " << b;
    c.detail = d.str();
    settle(c);
    return c;
}

struct ChainChecks {
    Check stationary{"chain_vs_sigma_inf", std::nan(""), 0.0, false, {}};
    Check normality{"normality_ks", std::nan(""), 0.0, false, {}};
};

ChainChecks chain_checks(const RunConfig& cfg) {
    ChainChecks out;
    const ChainConfig chain = cfg.chain();
    const double sigma_inf = checked_limiting_sigma(cfg);
    const double rho = chain.closed_form().rho();
    const ChainRun run = run_chain(chain);
    const double n = static_cast<double>(run.stats.count());
    // Five standard errors of the sample std of a stationary AR(1) sequence.
    out.stationary.tolerance = 5.0 * std::sqrt((1 + rho * rho) / (1 - rho * rho) / (2.0 * n));
    out.stationary.measured = n >= 2 ? relative(run.stats.std_dev(), sigma_inf) : std::nan("");
    out.stationary.detail = "relative error of the sample std over " + std::to_string(run.stats.count()) + " steps";
    settle(out.stationary);

    const NormalityReport ks = normality_test(run.record.samples, sigma_inf, rho);
    out.normality.measured = ks.statistic;
    out.normality.tolerance = ks.critical;
    out.normality.detail = "KS statistic against G(0, sigma_inf) on every " + std::to_string(ks.stride) +
                           "-th sample, 1% critical value";
    settle(out.normality);
    return out;
}

Check convolution_quadrature(const RunConfig& cfg) {
    Check c{"convolution_quadrature", std::nan(""), 1e-6, false, {}};
    const ChainClosedForm cf = chain_closed_form(cfg.oscillator(), cfg.scheme(), *cfg.sigma_x0);
    using boost::math::quadrature::gauss_kronrod;
    const double s1 = cf.sigma_first();
    const double st = cf.sigma_step();
    const double rho = cf.rho();
    const Gaussian first(0.0, s1);
    // Second moment of D_2 = integral over x1 of D_1(x1) times the kernel's second moment around 0.
    auto outer = [&](double x1) {
        const Gaussian kernel(rho * x1, st);
        auto inner = [&](double x) { return x * x * kernel.pdf(x); };
        const double lo = rho * x1 - 12.0 * st;
        const double hi = rho * x1 + 12.0 * st;
        return first.pdf(x1) * gauss_kronrod<double, 61>::integrate(inner, lo, hi, 15, 1e-13);
    };
    const double var = gauss_kronrod<double, 61>::integrate(outer, -12.0 * s1, 12.0 * s1, 15, 1e-13);
    c.measured = relative(std::sqrt(var), density_before_nth(cf, 2).std());
    c.detail = "std of the second outcome density by nested quadrature vs closed form";
    settle(c);
    return c;
}

Check partial_sums(const RunConfig& cfg) {
    Check c{"partial_sums", std::nan(""), 1e-10, false, {}};
    const ChainClosedForm cf = chain_closed_form(cfg.oscillator(), cfg.scheme(), *cfg.sigma_x0);
    const long checkpoints[] = {1, 2, 10, 100, 1000, 10000};
    long double sum = 0;
    double worst = 0.0;
    long next = 0;
    for (long n = 1; n <= 10000; ++n) {
        sum += density_before_nth(cf, n).variance();
        if (n == checkpoints[next]) {
            const double brute = static_cast<double>(sum / n);
            worst = std::max(worst, relative(ensemble_variance_partial(cf, n), brute));
            ++next;
        }
    }
    c.measured = worst;
    c.detail = "ensemble variance partial sums vs direct summation, n up to 10000";
    settle(c);
    return c;
}

Check povm_round_trip(const RunConfig& cfg) {
    Check c{"povm_round_trip", std::nan(""), 1e-9, false, {}};
    Rng rng(*cfg.seed, 7);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double sigma_M = 0.01 + 4.99 * rng.uniform();
        const double x_M = 20.0 * rng.uniform() - 10.0;
        const Gaussian prior(20.0 * rng.uniform() - 10.0, sigma_M * (1.01 + 98.99 * rng.uniform()));
        const PovmParameters w = povm_parameters(sigma_M, x_M, prior);
        const Gaussian post = gaussian_product(Gaussian(w.x_W, w.sigma_W), prior).gaussian;
        worst = std::max({worst, relative(post.std(), sigma_M),
                          std::abs(post.mean() - x_M) / std::max(std::abs(x_M), sigma_M)});
    }
    c.measured = worst;
    c.detail = "1000 random priors with sigma_psi / sigma_M in [1.01, 100]";
    settle(c);
    return c;
}

Check weak_gap(const RunConfig& cfg) {
    Check c{"weak_gap", std::nan(""), cfg.weak_gap_threshold, false, {}};
    const OscillatorParams p = cfg.oscillator();
    const double t_M = cfg.scheme().t_M();
    const double sigma_M = instrument_width_for_ratio(p, t_M, cfg.weak_gap_ratio);
    ChainConfig chain{p, MeasurementScheme(t_M, sigma_M), cfg.initial(), cfg.weak_gap_steps, *cfg.seed};
    const double sigma_inf = limiting_sigma(chain.closed_form());
    const Grid grid = Grid::symmetric(10.0 * std::max(sigma_inf, p.sigma_gs()), cfg.weak_gap_grid_points);
    GridChainOptions opts;
    opts.steps_per_period = cfg.weak_gap_steps_per_period;
    double stds[2];
    const CollapseMode modes[2] = {CollapseMode::Replace, CollapseMode::WeakProduct};
    for (int m = 0; m < 2; ++m) {
        RunningStats stats({-1.0, 1.0, 1});
        for (double x : run_chain_grid(chain, grid, modes[m], opts).samples) {
            stats.push(x);
        }
        stds[m] = stats.std_dev();
    }
    c.measured = relative(stds[1], stds[0]);
    std::ostringstream d;
    d.precision(10);
    d << "sample std weak " << stds[1] << " vs replace " << stds[0] << " with sigma_M = " << sigma_M << " ("
      << cfg.weak_gap_ratio << " of sigma(t_M)), " << cfg.weak_gap_steps << " steps";
    c.detail = d.str();
    settle(c);
    return c;
}

template <class F>
auto guarded(const std::string& name, F f) {
    return [name, f](const RunConfig& cfg) -> std::vector<Check> {
        try {
            return f(cfg);
        } catch (const std::exception& e) {
            return {Check{name, std::nan(""), 0.0, false, e.what()}};
        }
    };
}

}  // namespace

json cmd_validate(const RunConfig& cfg) {
    using Battery = std::function<std::vector<Check>(const RunConfig&)>;
    const std::vector<Battery> batteries{
        guarded("grid_vs_closed_form", [](const RunConfig& c) { return std::vector{grid_vs_closed_form(c)}; }),
        guarded("spectral_convergence", [](const RunConfig& c) { return std::vector{spectral_convergence(c)}; }),
        guarded("chain_vs_sigma_inf",
                [](const RunConfig& c) {
                    const ChainChecks r = chain_checks(c);
                    return std::vector{r.stationary, r.normality};
                }),
        guarded("convolution_quadrature", [](const RunConfig& c) { return std::vector{convolution_quadrature(c)}; }),
        guarded("partial_sums", [](const RunConfig& c) { return std::vector{partial_sums(c)}; }),
        guarded("povm_round_trip", [](const RunConfig& c) { return std::vector{povm_round_trip(c)}; }),
        guarded("weak_gap", [](const RunConfig& c) { return std::vector{weak_gap(c)}; }),
    };
    std::vector<std::vector<Check>> results(batteries.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < batteries.size(); ++i) {
            pool.emplace_back([&, i] { results[i] = batteries[i](cfg); });
        }
    }

    json checks = json::array();
    bool all = true;
    for (const auto& group : results) {
        for (const Check& c : group) {
            checks.push_back(to_json(c));
            all = all && c.passed;
        }
    }
    json report;
    report["command"] = "validate";
    report["passed"] = all;
    report["checks"] = checks;
    report["config"] = qho::app::to_json(cfg);

    OutputSet out(cfg.out);
    out.write_json("validation.json", report);
    out.commit();
    return report;
}

}  // namespace qho::app
