#include "qho/chain_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "qho/errors.hpp"

namespace qho {

namespace {

void require_not_resonant(double sin_abs) {
    if (!(sin_abs > kResonanceTolerance)) {
        std::ostringstream msg;
        msg << "resonant measurement period: |sin(omega t_M)| = " << sin_abs
            << " <= " << kResonanceTolerance;
        throw ResonanceError(msg.str());
    }
}

// sum_{k=0}^{n-1} q^k with 1 - q supplied directly (q = rho^2, 1 - q = sin^2).
double geometric_sum(double q, double one_minus_q, long n) {
    if (n <= 0) {
        return 0.0;
    }
    if (one_minus_q == 0.0) {
        return static_cast<double>(n);
    }
    if (q == 0.0) {
        return 1.0;
    }
    return -std::expm1(static_cast<double>(n) * std::log1p(-one_minus_q)) / one_minus_q;
}

}  // namespace

MeasurementScheme::MeasurementScheme(double t_M, double sigma_M, double jitter_std)
    : t_M_(t_M), sigma_M_(sigma_M), jitter_std_(jitter_std) {
    if (!(t_M > 0.0) || !std::isfinite(t_M)) {
        throw DomainError("measurement period t_M must be positive");
    }
    if (!(sigma_M > 0.0) || !std::isfinite(sigma_M)) {
        throw DomainError("instrument width sigma_M must be positive");
    }
    if (!(jitter_std >= 0.0) || !std::isfinite(jitter_std)) {
        throw DomainError("jitter std must be non-negative");
    }
}

double MeasurementScheme::rho(const OscillatorParams& params) const {
    return std::cos(params.omega() * t_M_);
}

ChainClosedForm::ChainClosedForm(double sigma_step, double sigma_first, double rho)
    : ChainClosedForm(sigma_step, sigma_first, rho, std::sqrt(std::max(0.0, (1.0 - rho) * (1.0 + rho)))) {}

ChainClosedForm::ChainClosedForm(double sigma_step, double sigma_first, double rho, double sin_abs)
    : sigma_step_(sigma_step), sigma_first_(sigma_first), rho_(rho), sin_abs_(std::abs(sin_abs)) {
    if (!(sigma_step > 0.0) || !(sigma_first > 0.0)) {
        throw DomainError("chain widths must be positive");
    }
    if (!(std::abs(rho) <= 1.0)) {
        throw DomainError("|rho| must not exceed 1");
    }
}

ChainClosedForm chain_closed_form(const OscillatorParams& params, const MeasurementScheme& scheme,
                                  double sigma_x0) {
    const double phase = params.omega() * scheme.t_M();
    return ChainClosedForm(evolved_width(params, scheme.sigma_M(), scheme.t_M()),
                           evolved_width(params, sigma_x0, scheme.t_M()), std::cos(phase),
                           std::sin(phase));
}

Gaussian density_before_nth(const ChainClosedForm& cf, long n) {
    if (n < 1) {
        throw DomainError("measurement index must be >= 1");
    }
    const double q = cf.rho() * cf.rho();
    const double one_minus_q = cf.sin_abs() * cf.sin_abs();
    const double steps = geometric_sum(q, one_minus_q, n - 1);
    const double memory = std::pow(q, static_cast<double>(n - 1));
    const double variance = cf.sigma_step() * cf.sigma_step() * steps + cf.sigma_first() * cf.sigma_first() * memory;
    return Gaussian(0.0, std::sqrt(variance));
}

double limiting_sigma(const ChainClosedForm& cf) {
    require_not_resonant(cf.sin_abs());
    return cf.sigma_step() / cf.sin_abs();
}

double limiting_sigma_simplified(const OscillatorParams& params, const MeasurementScheme& scheme) {
    const double phase = params.omega() * scheme.t_M();
    const double s = std::sin(phase);
    require_not_resonant(std::abs(s));
    const double cot = std::cos(phase) / s;
    const double sm = scheme.sigma_M();
    const double gs2 = params.sigma_gs() * params.sigma_gs();
    return std::sqrt(sm * sm * cot * cot + gs2 * gs2 / (4.0 * sm * sm));
}

NondimPoint::NondimPoint(double varsigma_M, double tau_M) : varsigma_M_(varsigma_M), tau_M_(tau_M) {
    if (!(varsigma_M > 0.0) || !std::isfinite(varsigma_M)) {
        throw DomainError("varsigma_M must be positive");
    }
    if (!(tau_M > 0.0) || !std::isfinite(tau_M)) {
        throw DomainError("tau_M must be positive");
    }
}

NondimPoint to_nondim(const OscillatorParams& params, const MeasurementScheme& scheme) {
    return NondimPoint(scheme.sigma_M() / params.sigma_gs(), scheme.t_M() / params.period());
}

MeasurementScheme from_nondim(const OscillatorParams& params, const NondimPoint& point, double jitter_std) {
    return MeasurementScheme(point.tau_M() * params.period(), point.varsigma_M() * params.sigma_gs(),
                             jitter_std);
}

double nondim_limit(const NondimPoint& point) {
    const double angle = 2.0 * kPi * point.tau_M();
    const double s = std::sin(angle);
    require_not_resonant(std::abs(s));
    const double cot = std::cos(angle) / s;
    const double v = point.varsigma_M();
    return std::sqrt(v * v * cot * cot + 1.0 / (4.0 * v * v));
}

double optimal_precision(double tau_M) {
    const double angle = 2.0 * kPi * tau_M;
    const double s = std::sin(angle);
    const double c = std::cos(angle);
    // tan diverges at tau_M = 1/4 mod 1/2; the optimum runs off to infinity there.
    if (std::abs(c) <= kResonanceTolerance || !(s / c > 0.0)) {
        std::ostringstream msg;
        msg << "no interior optimum at tau_M = " << tau_M << " (tan(2 pi tau_M) must be positive and finite)";
        throw DomainError(msg.str());
    }
    return std::sqrt(s / c / 2.0);
}

double ensemble_variance_partial(const ChainClosedForm& cf, long n) {
    if (n < 1) {
        throw DomainError("number of measurements must be >= 1");
    }
    require_not_resonant(cf.sin_abs());
    // sigma_i^2 = sigma_inf^2 + (sigma_first^2 - sigma_inf^2) q^(i-1), so the
    // arithmetico-geometric sum over i collapses to one geometric partial sum.
    const double q = cf.rho() * cf.rho();
    const double one_minus_q = cf.sin_abs() * cf.sin_abs();
    const double limit = cf.sigma_step() * cf.sigma_step() / one_minus_q;
    const double first = cf.sigma_first() * cf.sigma_first();
    return limit + (first - limit) * geometric_sum(q, one_minus_q, n) / static_cast<double>(n);
}

PovmParameters povm_parameters(double sigma_M, double x_M, const Gaussian& prior) {
    if (!(sigma_M > 0.0)) {
        throw DomainError("sigma_M must be positive");
    }
    const double vp = prior.variance();
    const double vm = sigma_M * sigma_M;
    if (!(prior.std() > sigma_M)) {
        std::ostringstream msg;
        msg << "prior std " << prior.std() << " must exceed sigma_M " << sigma_M;
        throw PrecisionError(msg.str());
    }
    const double gap = vp - vm;
    const double vw = vm * vp / gap;
    return {std::sqrt(vw), x_M + (x_M - prior.mean()) * (vm / gap)};
}

double instrument_width_for_ratio(const OscillatorParams& params, double t_M, double ratio) {
    if (!(ratio > 0.0)) {
        throw DomainError("width ratio must be positive");
    }
    // sigma(t)^2 = sm^2 c^2 + gs^4 s^2 / (4 sm^2) = sm^2 / ratio^2
    const double phase = params.omega() * t_M;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double denom = 1.0 / (ratio * ratio) - c * c;
    if (!(denom > 0.0) || std::abs(s) <= kResonanceTolerance) {
        throw DomainError("no instrument width realises the requested ratio");
    }
    const double gs = params.sigma_gs();
    return gs * std::pow(s * s / (4.0 * denom), 0.25);
}

}  // namespace qho
