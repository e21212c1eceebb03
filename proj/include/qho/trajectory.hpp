#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qho/chain_analytics.hpp"
#include "qho/gaussian.hpp"
#include "qho/running_stats.hpp"

namespace qho {

struct ChainConfig {
    OscillatorParams params;
    MeasurementScheme scheme;
    WavePacket initial;
    long n_measurements = 1;
    std::uint64_t seed = 0;

    // Throws DomainError when n_measurements < 1.
    void validate() const;
    ChainClosedForm closed_form() const;
};

struct MeasurementRecord {
    std::vector<double> samples;
    // Effective period before each sample; empty for strictly periodic runs.
    std::vector<double> periods;
};

struct ChainRun {
    MeasurementRecord record;
    RunningStats stats;
};

// Jittered periods never drop below this fraction of t_M.
inline constexpr double kMinPeriodFraction = 1e-6;

// 200 bins over +-6 sigma_inf. Near or at resonance, where sigma_inf is not
// finite, the span falls back to 6 sigma_step sqrt(n).
HistogramSpec predicted_histogram(const ChainConfig& cfg);

// One exact draw from G(x - x_prev rho, sigma_step), given a standard normal.
double chain_step(double x_prev, double rho, double sigma_step, double noise);

// Strictly periodic chain; ignores scheme.jitter_std. Throws ResonanceError.
ChainRun run_chain(const ChainConfig& cfg);

// Each period is max(t_min, t_M + jitter_std * eta_i). Periods come from a
// separate random stream, so jitter_std == 0 reproduces run_chain exactly.
ChainRun run_chain_jittered(const ChainConfig& cfg);

// Independent chains with per-chain random streams, merged in chain order.
// Chain 0 uses the same streams as run_chain.
RunningStats run_ensemble(const ChainConfig& cfg, int n_chains);

// Kolmogorov-Smirnov statistic of the samples against G(0, sigma_target).
// Throws InsufficientSamples below 100 samples.
double normality_statistic(std::span<const double> samples, double sigma_target);

// Smallest k >= 1 with |rho|^k < 0.05.
std::size_t thinning_stride(double rho);

struct NormalityReport {
    double statistic;
    double critical;  // 1.63 / sqrt(n_used), the 1% level
    std::size_t stride;
    std::size_t n_used;
    bool passed;
};

// Thins every stride-th sample (see thinning_stride) and runs the KS test at the 1% level.
NormalityReport normality_test(std::span<const double> samples, double sigma_target, double rho);

}  // namespace qho
