#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "qho/chain_analytics.hpp"
#include "qho/gaussian.hpp"
#include "qho/rng.hpp"
#include "qho/trajectory.hpp"

namespace qho {

// Uniform periodic grid x_j = x_min + j dx, j = 0..n-1, dx = (x_max - x_min) / n.
// n must be a power of two, at least 256.
class Grid {
public:
    Grid(double x_min, double x_max, std::size_t n_points);
    static Grid symmetric(double half_extent, std::size_t n_points);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return (x_max_ - x_min_) / static_cast<double>(n_); }
    double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx(); }
    // Angular wavenumber of FFT bin j (standard FFT ordering).
    double k(std::size_t j) const;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
};

inline constexpr std::size_t kDefaultGridPoints = 4096;
inline constexpr int kDefaultStepsPerPeriod = 1024;

// Half extent max(12 sigma_inf, 12 sigma_gs) with 4096 points.
Grid default_grid(const OscillatorParams& params, const MeasurementScheme& scheme);

class GridWavefunction {
public:
    GridWavefunction(Grid grid, std::vector<std::complex<double>> amplitudes);

    const Grid& grid() const { return grid_; }
    std::span<const std::complex<double>> amplitudes() const { return amplitudes_; }
    std::span<std::complex<double>> amplitudes() { return amplitudes_; }

    double norm() const;  // sum |psi|^2 dx
    double mean() const;
    double std_dev() const;
    std::vector<double> density() const;
    void normalize();

private:
    Grid grid_;
    std::vector<std::complex<double>> amplitudes_;
};

enum class CollapseMode { Replace, WeakProduct };

std::string_view to_string(CollapseMode mode);

// Discretized flat-phase packet, renormalized on the grid. Throws GridTooSmall
// unless |x0| + 8 sigma_x0 fits inside the grid and GridTooCoarse unless
// sigma_x0 > 4 dx.
GridWavefunction init_packet(const Grid& grid, const WavePacket& packet);

// Symmetric split-operator (Strang) propagator for the harmonic potential with
// spectral kinetic term. Owns its FFT plans and work buffer; not shareable
// between threads, but separate instances can run concurrently.
class SplitOperatorPropagator {
public:
    SplitOperatorPropagator(const Grid& grid, const OscillatorParams& params,
                            int steps_per_period = kDefaultStepsPerPeriod);
    ~SplitOperatorPropagator();
    SplitOperatorPropagator(const SplitOperatorPropagator&) = delete;
    SplitOperatorPropagator& operator=(const SplitOperatorPropagator&) = delete;

    // Advances psi in place by t >= 0 using ceil(t / dt_max) equal steps.
    void advance(GridWavefunction& psi, double t);

    double max_step() const { return max_dt_; }
    // <H> of psi, kinetic part evaluated spectrally.
    double energy(const GridWavefunction& psi);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    double max_dt_;
};

GridWavefunction evolve(const GridWavefunction& psi, double t, const OscillatorParams& params,
                        int steps_per_period = kDefaultStepsPerPeriod);

struct Collapse {
    double x_M;
    GridWavefunction psi;
};

// Draws x_M from |psi|^2 by inverse CDF (linear within each cell of width dx
// centred on a grid point), then
//   Replace:     psi' = discretized G(x - x_M, sigma_M) packet
//   WeakProduct: psi' = exp(-(x - x_M)^2 / (4 sigma_M^2)) |psi|, renormalized,
//                i.e. |psi'|^2 is |psi|^2 times a Gaussian of std sigma_M, flat phase.
// Throws GridTooCoarse when sigma_M < 4 dx.
Collapse measure_and_collapse(const GridWavefunction& psi, double sigma_M, CollapseMode mode, Rng& rng);

// Probability in the outer `fraction` of the grid on each side.
double boundary_probability(const GridWavefunction& psi, double fraction = 0.05);

inline constexpr double kLeakageThreshold = 1e-6;

enum class SnapshotPhase { BeforeMeasurement, AfterCollapse };

struct GridChainOptions {
    int steps_per_period = kDefaultStepsPerPeriod;
    // Called with the measurement index (1-based) before and after each collapse.
    std::function<void(long, SnapshotPhase, const GridWavefunction&)> observer;
};

// Measurement chain driven by grid dynamics. Throws GridTooSmall when the grid
// does not reach +-8 sigma_inf, LeakageError when the pre-measurement density
// puts more than 1e-6 in the outer 5% of the grid.
MeasurementRecord run_chain_grid(const ChainConfig& cfg, const Grid& grid, CollapseMode mode,
                                 const GridChainOptions& options = {});

}  // namespace qho
