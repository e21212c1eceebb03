#include "qho/gaussian.hpp"

#include <cmath>
#include <string>

#include "qho/errors.hpp"

namespace qho {

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(what) + " must be positive and finite, got " + std::to_string(value));
    }
}

}  // namespace

Gaussian::Gaussian(double mean, double std) : mean_(mean), std_(std) {
    if (!std::isfinite(mean)) {
        throw DomainError("Gaussian mean must be finite");
    }
    require_positive(std, "Gaussian std");
}

double Gaussian::pdf(double x) const {
    const double z = (x - mean_) / std_;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * std_);
}

double Gaussian::cdf(double x) const {
    return 0.5 * std::erfc(-(x - mean_) / (std_ * std::numbers::sqrt2));
}

OscillatorParams::OscillatorParams(double mass, double omega, double hbar)
    : mass_(mass), omega_(omega), hbar_(hbar) {
    require_positive(mass, "mass");
    require_positive(omega, "omega");
    require_positive(hbar, "hbar");
}

double OscillatorParams::sigma_gs() const { return std::sqrt(hbar_ / (mass_ * omega_)); }

WavePacket::WavePacket(double x0, double sigma_x0) : x0_(x0), sigma_x0_(sigma_x0) {
    if (!std::isfinite(x0)) {
        throw DomainError("packet centre must be finite");
    }
    require_positive(sigma_x0, "packet width");
}

double ground_state_width(const OscillatorParams& params) { return params.sigma_gs(); }

double evolved_width(const OscillatorParams& params, double sigma_x0, double t) {
    require_positive(sigma_x0, "sigma_x0");
    const double gs = params.sigma_gs();
    // Expanding cos 2wt keeps the t=0 value exact and avoids cancellation for narrow packets.
    const double phase = params.omega() * t;
    return std::hypot(sigma_x0 * std::cos(phase), gs * gs * std::sin(phase) / (2.0 * sigma_x0));
}

Gaussian evolved_density(const OscillatorParams& params, const WavePacket& packet, double t) {
    return Gaussian(packet.x0() * std::cos(params.omega() * t),
                    evolved_width(params, packet.sigma_x0(), t));
}

GaussianProduct gaussian_product(const Gaussian& a, const Gaussian& b) {
    const double va = a.variance();
    const double vb = b.variance();
    const double sum = va + vb;
    const double mean = (a.mean() * vb + b.mean() * va) / sum;
    const double std = std::sqrt(va * vb / sum);
    return {Gaussian(mean, std), gaussian_overlap_integral(a, b)};
}

double gaussian_overlap_integral(const Gaussian& a, const Gaussian& b) {
    const double combined = std::hypot(a.std(), b.std());
    return Gaussian(0.0, combined).pdf(a.mean() - b.mean());
}

}  // namespace qho
