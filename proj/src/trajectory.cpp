#include "qho/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "qho/errors.hpp"
#include "qho/rng.hpp"

namespace qho {

namespace {

constexpr std::size_t kHistogramBins = 200;
constexpr double kHistogramHalfWidth = 6.0;
constexpr double kKsCritical1Percent = 1.63;
constexpr std::size_t kMinKsSamples = 100;

// Stream layout: chain c draws outcomes from stream 2c and periods from 2c + 1.
std::uint64_t outcome_stream(int chain) { return 2 * static_cast<std::uint64_t>(chain); }
std::uint64_t period_stream(int chain) { return 2 * static_cast<std::uint64_t>(chain) + 1; }

ChainRun run_periodic(const ChainConfig& cfg, int chain) {
    cfg.validate();
    const ChainClosedForm cf = cfg.closed_form();
    limiting_sigma(cf);  // resonance guard

    Rng rng(cfg.seed, outcome_stream(chain));
    ChainRun run{{}, RunningStats(predicted_histogram(cfg))};
    run.record.samples.reserve(static_cast<std::size_t>(cfg.n_measurements));

    const double omega_t = cfg.params.omega() * cfg.scheme.t_M();
    double x = cfg.initial.x0() * std::cos(omega_t) + cf.sigma_first() * rng.normal();
    run.record.samples.push_back(x);
    run.stats.push(x);
    for (long i = 1; i < cfg.n_measurements; ++i) {
        x = chain_step(x, cf.rho(), cf.sigma_step(), rng.normal());
        run.record.samples.push_back(x);
        run.stats.push(x);
    }
    return run;
}

}  // namespace

void ChainConfig::validate() const {
    if (n_measurements < 1) {
        throw DomainError("n_measurements must be >= 1");
    }
}

ChainClosedForm ChainConfig::closed_form() const {
    return chain_closed_form(params, scheme, initial.sigma_x0());
}

HistogramSpec predicted_histogram(const ChainConfig& cfg) {
    const ChainClosedForm cf = cfg.closed_form();
    double half = 0.0;
    if (!cf.resonant()) {
        half = kHistogramHalfWidth * limiting_sigma(cf);
    }
    if (!std::isfinite(half) || half <= 0.0 || half > 1e300) {
        half = kHistogramHalfWidth * cf.sigma_step() * std::sqrt(static_cast<double>(std::max(1L, cfg.n_measurements)));
    }
    return {-half, half, kHistogramBins};
}

double chain_step(double x_prev, double rho, double sigma_step, double noise) {
    return x_prev * rho + sigma_step * noise;
}

ChainRun run_chain(const ChainConfig& cfg) { return run_periodic(cfg, 0); }

ChainRun run_chain_jittered(const ChainConfig& cfg) {
    cfg.validate();
    const double t_nominal = cfg.scheme.t_M();
    const double jitter = cfg.scheme.jitter_std();
    if (jitter == 0.0) {
        limiting_sigma(cfg.closed_form());
    }
    const double t_min = kMinPeriodFraction * t_nominal;
    const double omega = cfg.params.omega();
    const double sigma_M = cfg.scheme.sigma_M();

    Rng outcomes(cfg.seed, outcome_stream(0));
    Rng periods(cfg.seed, period_stream(0));
    ChainRun run{{}, RunningStats(predicted_histogram(cfg))};
    const auto n = static_cast<std::size_t>(cfg.n_measurements);
    run.record.samples.reserve(n);
    run.record.periods.reserve(n);

    auto next_period = [&] { return std::max(t_min, t_nominal + jitter * periods.normal()); };

    double t = next_period();
    double x = cfg.initial.x0() * std::cos(omega * t) +
               evolved_width(cfg.params, cfg.initial.sigma_x0(), t) * outcomes.normal();
    run.record.samples.push_back(x);
    run.record.periods.push_back(t);
    run.stats.push(x);
    for (std::size_t i = 1; i < n; ++i) {
        t = next_period();
        x = chain_step(x, std::cos(omega * t), evolved_width(cfg.params, sigma_M, t), outcomes.normal());
        run.record.samples.push_back(x);
        run.record.periods.push_back(t);
        run.stats.push(x);
    }
    return run;
}

RunningStats run_ensemble(const ChainConfig& cfg, int n_chains) {
    if (n_chains < 1) {
        throw DomainError("n_chains must be >= 1");
    }
    std::vector<RunningStats> per_chain(static_cast<std::size_t>(n_chains), RunningStats(predicted_histogram(cfg)));
    std::vector<std::exception_ptr> failures(per_chain.size());

    const unsigned workers = std::clamp(std::thread::hardware_concurrency(), 1u, static_cast<unsigned>(n_chains));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (auto c = static_cast<std::size_t>(w); c < per_chain.size(); c += workers) {
                    try {
                        per_chain[c] = run_periodic(cfg, static_cast<int>(c)).stats;
                    } catch (...) {
                        failures[c] = std::current_exception();
                    }
                }
            });
        }
    }
    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    RunningStats merged = per_chain.front();
    for (std::size_t c = 1; c < per_chain.size(); ++c) {
        merged.merge(per_chain[c]);
    }
    return merged;
}

double normality_statistic(std::span<const double> samples, double sigma_target) {
    if (samples.size() < kMinKsSamples) {
        throw InsufficientSamples("KS test needs at least " + std::to_string(kMinKsSamples) + " samples, got " +
                                  std::to_string(samples.size()));
    }
    const Gaussian reference(0.0, sigma_target);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = reference.cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

std::size_t thinning_stride(double rho) {
    const double r = std::abs(rho);
    if (r < 0.05) {
        return 1;
    }
    if (!(r < 1.0)) {
        throw ResonanceError("|rho| = 1: chain samples never decorrelate");
    }
    auto k = static_cast<std::size_t>(std::ceil(std::log(0.05) / std::log(r)));
    while (std::pow(r, static_cast<double>(k)) >= 0.05) {
        ++k;
    }
    return std::max<std::size_t>(k, 1);
}

NormalityReport normality_test(std::span<const double> samples, double sigma_target, double rho) {
    const std::size_t stride = thinning_stride(rho);
    std::vector<double> thinned;
    thinned.reserve(samples.size() / stride + 1);
    for (std::size_t i = 0; i < samples.size(); i += stride) {
        thinned.push_back(samples[i]);
    }
    const double d = normality_statistic(thinned, sigma_target);
    const double critical = kKsCritical1Percent / std::sqrt(static_cast<double>(thinned.size()));
    return {d, critical, stride, thinned.size(), d < critical};
}

}  // namespace qho
