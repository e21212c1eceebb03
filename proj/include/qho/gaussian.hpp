#pragma once

#include <numbers>

namespace qho {

inline constexpr double kPi = std::numbers::pi;

// Normalized Gaussian probability density with mean and standard deviation.
class Gaussian {
public:
    // Throws DomainError unless std > 0 (and both values are finite).
    Gaussian(double mean, double std);

    double mean() const { return mean_; }
    double std() const { return std_; }
    double variance() const { return std_ * std_; }

    double pdf(double x) const;
    double cdf(double x) const;

private:
    double mean_;
    double std_;
};

// Harmonic oscillator V = m omega^2 x^2 / 2. hbar defaults to natural units.
class OscillatorParams {
public:
    OscillatorParams(double mass, double omega, double hbar = 1.0);

    double mass() const { return mass_; }
    double omega() const { return omega_; }
    double hbar() const { return hbar_; }

    // sqrt(hbar / (m omega))
    double sigma_gs() const;
    double period() const { return 2.0 * kPi / omega_; }

private:
    double mass_;
    double omega_;
    double hbar_;
};

// Gaussian wave packet |psi|^2 = G(x - x0, sigma_x0) with a flat phase.
class WavePacket {
public:
    WavePacket(double x0, double sigma_x0);

    double x0() const { return x0_; }
    double sigma_x0() const { return sigma_x0_; }

private:
    double x0_;
    double sigma_x0_;
};

double ground_state_width(const OscillatorParams& params);

// Width of |psi(x, t)|^2 for a packet that starts unchirped with width sigma_x0:
//   sigma(t) = sigma_gs^2 / (2 sqrt(2) sigma_x0)
//              * sqrt(4 r^4 + 1 + (4 r^4 - 1) cos(2 omega t)),  r = sigma_x0 / sigma_gs
double evolved_width(const OscillatorParams& params, double sigma_x0, double t);

// |psi(x, t)|^2 for the packet: centre follows x0 cos(omega t).
Gaussian evolved_density(const OscillatorParams& params, const WavePacket& packet, double t);

struct GaussianProduct {
    Gaussian gaussian;
    // a.pdf(x) * b.pdf(x) == scale * gaussian.pdf(x)
    double scale;
};

GaussianProduct gaussian_product(const Gaussian& a, const Gaussian& b);

// Integral of a.pdf(x) * b.pdf(x) over the real line.
double gaussian_overlap_integral(const Gaussian& a, const Gaussian& b);

}  // namespace qho
