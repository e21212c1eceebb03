#pragma once

#include "qho/gaussian.hpp"

namespace qho {

// Cut-off on |sin(omega t_M)| below which the chain is treated as resonant.
inline constexpr double kResonanceTolerance = 1e-9;

// Periodic position measurement: period t_M, instrument width sigma_M and an
// optional Gaussian jitter (std, time units) on each period.
class MeasurementScheme {
public:
    MeasurementScheme(double t_M, double sigma_M, double jitter_std = 0.0);

    double t_M() const { return t_M_; }
    double sigma_M() const { return sigma_M_; }
    double jitter_std() const { return jitter_std_; }

    // cos(omega t_M): the memory coefficient of the outcome chain.
    double rho(const OscillatorParams& params) const;

private:
    double t_M_;
    double sigma_M_;
    double jitter_std_;
};

// Closed-form description of the measurement chain.
//   sigma_step  - sigma(t_M) for a packet collapsed to width sigma_M
//   sigma_first - sigma_0(t_M), the evolved width of the initial packet
//   rho         - cos(omega t_M)
//   sin_abs     - |sin(omega t_M)|, kept separately so that 1 - rho^2 does not
//                 lose digits near resonance
class ChainClosedForm {
public:
    ChainClosedForm(double sigma_step, double sigma_first, double rho);
    ChainClosedForm(double sigma_step, double sigma_first, double rho, double sin_abs);

    double sigma_step() const { return sigma_step_; }
    double sigma_first() const { return sigma_first_; }
    double rho() const { return rho_; }
    double sin_abs() const { return sin_abs_; }
    bool resonant() const { return sin_abs_ <= kResonanceTolerance; }

private:
    double sigma_step_;
    double sigma_first_;
    double rho_;
    double sin_abs_;
};

ChainClosedForm chain_closed_form(const OscillatorParams& params, const MeasurementScheme& scheme,
                                  double sigma_x0);

// Density of the n-th outcome (n >= 1), averaged over all earlier outcomes.
// Assumes the initial packet is centred at the origin.
Gaussian density_before_nth(const ChainClosedForm& cf, long n);

// sigma_inf = |sigma(t_M) / sin(omega t_M)|. Throws ResonanceError.
double limiting_sigma(const ChainClosedForm& cf);

// sqrt(sigma_M^2 cot^2(omega t_M) + sigma_gs^4 / (4 sigma_M^2)). Throws ResonanceError.
double limiting_sigma_simplified(const OscillatorParams& params, const MeasurementScheme& scheme);

// Dimensionless scheme: varsigma_M = sigma_M / sigma_gs, tau_M = t_M / T.
class NondimPoint {
public:
    NondimPoint(double varsigma_M, double tau_M);

    double varsigma_M() const { return varsigma_M_; }
    double tau_M() const { return tau_M_; }

private:
    double varsigma_M_;
    double tau_M_;
};

NondimPoint to_nondim(const OscillatorParams& params, const MeasurementScheme& scheme);
MeasurementScheme from_nondim(const OscillatorParams& params, const NondimPoint& point,
                              double jitter_std = 0.0);

// varsigma_inf = sqrt(varsigma_M^2 cot^2(2 pi tau_M) + 1 / (4 varsigma_M^2)).
double nondim_limit(const NondimPoint& point);

// varsigma_M minimising nondim_limit at fixed tau_M: sqrt(tan(2 pi tau_M) / 2).
// DomainError unless tan(2 pi tau_M) is positive and finite.
double optimal_precision(double tau_M);

// s_n^2 = (1/n) sum_{i=1..n} sigma_i^2, the variance of the outcome mixture after
// n measurements. Throws ResonanceError.
double ensemble_variance_partial(const ChainClosedForm& cf, long n);

struct PovmParameters {
    double sigma_W;
    double x_W;
};

// Window (x_W, sigma_W) such that G(x - x_W, sigma_W) * prior, renormalized, is
// G(x - x_M, sigma_M). PrecisionError unless prior.std() > sigma_M.
PovmParameters povm_parameters(double sigma_M, double x_M, const Gaussian& prior);

// Instrument width sigma_M with sigma_M = ratio * sigma(t_M; sigma_M).
double instrument_width_for_ratio(const OscillatorParams& params, double t_M, double ratio);

}  // namespace qho
