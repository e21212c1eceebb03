#include "qho/grid_oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <sstream>
#include <string>

#include "qho/errors.hpp"

namespace qho {

namespace {

constexpr std::size_t kMinGridPoints = 256;
constexpr double kMinWidthInCells = 4.0;
constexpr double kPacketFitWidths = 8.0;
constexpr double kChainGridWidths = 8.0;
constexpr double kDefaultGridWidths = 12.0;

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

void require_resolved(const Grid& grid, double width, const char* what) {
    if (width < kMinWidthInCells * grid.dx()) {
        std::ostringstream msg;
        msg << what << " " << width << " is below " << kMinWidthInCells << " grid cells (dx = " << grid.dx() << ")";
        throw GridTooCoarse(msg.str());
    }
}

std::vector<std::complex<double>> gaussian_amplitudes(const Grid& grid, double centre, double width) {
    std::vector<std::complex<double>> amps(grid.size());
    const double norm = 1.0 / std::sqrt(std::sqrt(2.0 * kPi) * width);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double z = grid.x(j) - centre;
        amps[j] = norm * std::exp(-z * z / (4.0 * width * width));
    }
    return amps;
}

}  // namespace

Grid::Grid(double x_min, double x_max, std::size_t n_points) : x_min_(x_min), x_max_(x_max), n_(n_points) {
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw DomainError("grid needs x_max > x_min");
    }
    if (n_points < kMinGridPoints || !std::has_single_bit(n_points)) {
        throw DomainError("grid size must be a power of two >= 256, got " + std::to_string(n_points));
    }
}

Grid Grid::symmetric(double half_extent, std::size_t n_points) { return Grid(-half_extent, half_extent, n_points); }

double Grid::k(std::size_t j) const {
    const auto n = static_cast<double>(n_);
    const double index = j < n_ / 2 ? static_cast<double>(j) : static_cast<double>(j) - n;
    return 2.0 * kPi * index / (n * dx());
}

Grid default_grid(const OscillatorParams& params, const MeasurementScheme& scheme) {
    const double sigma_inf = limiting_sigma_simplified(params, scheme);
    return Grid::symmetric(kDefaultGridWidths * std::max(sigma_inf, params.sigma_gs()), kDefaultGridPoints);
}

GridWavefunction::GridWavefunction(Grid grid, std::vector<std::complex<double>> amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != grid_.size()) {
        throw DomainError("amplitude count does not match the grid");
    }
}

double GridWavefunction::norm() const {
    double sum = 0.0;
    for (const auto& a : amplitudes_) {
        sum += std::norm(a);
    }
    return sum * grid_.dx();
}

double GridWavefunction::mean() const {
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < amplitudes_.size(); ++j) {
        const double p = std::norm(amplitudes_[j]);
        weighted += grid_.x(j) * p;
        total += p;
    }
    return weighted / total;
}

double GridWavefunction::std_dev() const {
    const double mu = mean();
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < amplitudes_.size(); ++j) {
        const double p = std::norm(amplitudes_[j]);
        const double z = grid_.x(j) - mu;
        weighted += z * z * p;
        total += p;
    }
    return std::sqrt(weighted / total);
}

std::vector<double> GridWavefunction::density() const {
    std::vector<double> out(amplitudes_.size());
    std::transform(amplitudes_.begin(), amplitudes_.end(), out.begin(),
                   [](const std::complex<double>& a) { return std::norm(a); });
    return out;
}

void GridWavefunction::normalize() {
    const double n = norm();
    if (!(n > 0.0)) {
        throw DomainError("cannot normalize a zero wavefunction");
    }
    const double scale = 1.0 / std::sqrt(n);
    for (auto& a : amplitudes_) {
        a *= scale;
    }
}

std::string_view to_string(CollapseMode mode) {
    return mode == CollapseMode::Replace ? "replace" : "weak";
}

GridWavefunction init_packet(const Grid& grid, const WavePacket& packet) {
    const double reach = std::abs(packet.x0()) + kPacketFitWidths * packet.sigma_x0();
    if (!(reach < grid.x_max()) || !(-reach > grid.x_min())) {
        std::ostringstream msg;
        msg << "packet at " << packet.x0() << " with width " << packet.sigma_x0() << " needs |x| < " << reach
            << ", grid spans [" << grid.x_min() << ", " << grid.x_max() << ")";
        throw GridTooSmall(msg.str());
    }
    require_resolved(grid, packet.sigma_x0(), "packet width");
    GridWavefunction psi(grid, gaussian_amplitudes(grid, packet.x0(), packet.sigma_x0()));
    psi.normalize();
    return psi;
}

struct SplitOperatorPropagator::Impl {
    struct FftwFree {
        void operator()(fftw_complex* p) const { fftw_free(p); }
    };

    Impl(const Grid& g, const OscillatorParams& p) : grid(g), params(p) {
        const int n = static_cast<int>(grid.size());
        buffer.reset(fftw_alloc_complex(grid.size()));
        std::lock_guard lock(fftw_planner_mutex());
        // FFTW_ESTIMATE keeps the plan, and hence the rounding, run-independent.
        forward = fftw_plan_dft_1d(n, buffer.get(), buffer.get(), FFTW_FORWARD, FFTW_ESTIMATE);
        backward = fftw_plan_dft_1d(n, buffer.get(), buffer.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Impl() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }

    void prepare(double h) {
        if (h == cached_step) {
            return;
        }
        const std::size_t n = grid.size();
        kinetic.resize(n);
        potential_half.resize(n);
        potential_full.resize(n);
        const double hbar = params.hbar();
        const double m = params.mass();
        const double w = params.omega();
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double k = grid.k(j);
            kinetic[j] = std::polar(inv_n, -hbar * k * k * h / (2.0 * m));
            const double x = grid.x(j);
            const double v = 0.5 * m * w * w * x * x;
            potential_half[j] = std::polar(1.0, -v * h / (2.0 * hbar));
            potential_full[j] = std::polar(1.0, -v * h / hbar);
        }
        cached_step = h;
    }

    static void multiply(fftw_complex* data, const std::vector<std::complex<double>>& phase) {
        const std::size_t n = phase.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double re = data[j][0];
            const double im = data[j][1];
            const double pr = phase[j].real();
            const double pi = phase[j].imag();
            data[j][0] = re * pr - im * pi;
            data[j][1] = re * pi + im * pr;
        }
    }

    void load(const GridWavefunction& psi) {
        const auto amps = psi.amplitudes();
        for (std::size_t j = 0; j < amps.size(); ++j) {
            buffer[j][0] = amps[j].real();
            buffer[j][1] = amps[j].imag();
        }
    }

    void store(GridWavefunction& psi) const {
        auto amps = psi.amplitudes();
        for (std::size_t j = 0; j < amps.size(); ++j) {
            amps[j] = {buffer[j][0], buffer[j][1]};
        }
    }

    Grid grid;
    OscillatorParams params;
    std::unique_ptr<fftw_complex[], FftwFree> buffer;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    double cached_step = -1.0;
    std::vector<std::complex<double>> kinetic;
    std::vector<std::complex<double>> potential_half;
    std::vector<std::complex<double>> potential_full;
};

SplitOperatorPropagator::SplitOperatorPropagator(const Grid& grid, const OscillatorParams& params,
                                                 int steps_per_period)
    : impl_(std::make_unique<Impl>(grid, params)), max_dt_(0.0) {
    if (steps_per_period < 1) {
        throw DomainError("steps_per_period must be >= 1");
    }
    max_dt_ = params.period() / steps_per_period;
}

SplitOperatorPropagator::~SplitOperatorPropagator() = default;

void SplitOperatorPropagator::advance(GridWavefunction& psi, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("evolution time must be non-negative");
    }
    const Grid& g = psi.grid();
    if (g.size() != impl_->grid.size() || g.x_min() != impl_->grid.x_min() || g.x_max() != impl_->grid.x_max()) {
        throw DomainError("wavefunction grid does not match the propagator grid");
    }
    if (t == 0.0) {
        return;
    }
    const auto steps = static_cast<long>(std::max(1.0, std::ceil(t / max_dt_ - 1e-9)));
    const double h = t / static_cast<double>(steps);
    impl_->prepare(h);
    fftw_complex* data = impl_->buffer.get();
    impl_->load(psi);
    // V/2 (K V)^(steps-1) K V/2, with adjacent half kicks fused.
    Impl::multiply(data, impl_->potential_half);
    for (long s = 0; s < steps; ++s) {
        fftw_execute(impl_->forward);
        Impl::multiply(data, impl_->kinetic);
        fftw_execute(impl_->backward);
        Impl::multiply(data, s + 1 < steps ? impl_->potential_full : impl_->potential_half);
    }
    impl_->store(psi);
}

double SplitOperatorPropagator::energy(const GridWavefunction& psi) {
    const Grid& g = psi.grid();
    const double m = impl_->params.mass();
    const double w = impl_->params.omega();
    const double hbar = impl_->params.hbar();
    double potential = 0.0;
    double total = 0.0;
    const auto amps = psi.amplitudes();
    for (std::size_t j = 0; j < amps.size(); ++j) {
        const double p = std::norm(amps[j]);
        const double x = g.x(j);
        potential += 0.5 * m * w * w * x * x * p;
        total += p;
    }
    impl_->load(psi);
    fftw_execute(impl_->forward);
    double kinetic = 0.0;
    double spectral_total = 0.0;
    for (std::size_t j = 0; j < amps.size(); ++j) {
        const double p = impl_->buffer[j][0] * impl_->buffer[j][0] + impl_->buffer[j][1] * impl_->buffer[j][1];
        const double k = g.k(j);
        kinetic += hbar * hbar * k * k / (2.0 * m) * p;
        spectral_total += p;
    }
    return potential / total + kinetic / spectral_total;
}

GridWavefunction evolve(const GridWavefunction& psi, double t, const OscillatorParams& params, int steps_per_period) {
    SplitOperatorPropagator propagator(psi.grid(), params, steps_per_period);
    GridWavefunction out = psi;
    propagator.advance(out, t);
    return out;
}

Collapse measure_and_collapse(const GridWavefunction& psi, double sigma_M, CollapseMode mode, Rng& rng) {
    const Grid& grid = psi.grid();
    require_resolved(grid, sigma_M, "instrument width");

    const auto amps = psi.amplitudes();
    std::vector<double> cumulative(amps.size() + 1, 0.0);
    for (std::size_t j = 0; j < amps.size(); ++j) {
        cumulative[j + 1] = cumulative[j] + std::norm(amps[j]);
    }
    const double total = cumulative.back();
    if (!(total > 0.0)) {
        throw DomainError("cannot sample from a zero wavefunction");
    }
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin() + 1, cumulative.end(), u);
    if (it == cumulative.end()) {
        it = std::prev(it);
    }
    const auto j = static_cast<std::size_t>(std::distance(cumulative.begin(), it) - 1);
    const double cell = cumulative[j + 1] - cumulative[j];
    const double frac = cell > 0.0 ? std::clamp((u - cumulative[j]) / cell, 0.0, 1.0) : 0.5;
    const double dx = grid.dx();
    const double x_M = grid.x(j) - 0.5 * dx + frac * dx;

    if (mode == CollapseMode::Replace) {
        GridWavefunction out(grid, gaussian_amplitudes(grid, x_M, sigma_M));
        out.normalize();
        return {x_M, std::move(out)};
    }
    // The window acts on the real envelope |psi|. Keeping the phase would carry the
    // pre-measurement momentum across the collapse and the chain would never settle.
    GridWavefunction out = psi;
    auto out_amps = out.amplitudes();
    for (std::size_t i = 0; i < out_amps.size(); ++i) {
        const double z = grid.x(i) - x_M;
        out_amps[i] = std::abs(out_amps[i]) * std::exp(-z * z / (4.0 * sigma_M * sigma_M));
    }
    out.normalize();
    return {x_M, std::move(out)};
}

double boundary_probability(const GridWavefunction& psi, double fraction) {
    const Grid& grid = psi.grid();
    const double span = grid.x_max() - grid.x_min();
    const double lo = grid.x_min() + fraction * span;
    const double hi = grid.x_max() - fraction * span;
    double outer = 0.0;
    double total = 0.0;
    const auto amps = psi.amplitudes();
    for (std::size_t j = 0; j < amps.size(); ++j) {
        const double p = std::norm(amps[j]);
        total += p;
        const double x = grid.x(j);
        if (x < lo || x > hi) {
            outer += p;
        }
    }
    return outer / total;
}

MeasurementRecord run_chain_grid(const ChainConfig& cfg, const Grid& grid, CollapseMode mode,
                                 const GridChainOptions& options) {
    cfg.validate();
    const double sigma_inf = limiting_sigma(cfg.closed_form());
    const double reach = kChainGridWidths * sigma_inf;
    if (grid.x_max() < reach || grid.x_min() > -reach) {
        std::ostringstream msg;
        msg << "grid [" << grid.x_min() << ", " << grid.x_max() << ") does not reach +-8 sigma_inf = +-" << reach;
        throw GridTooSmall(msg.str());
    }
    const double sigma_M = cfg.scheme.sigma_M();
    require_resolved(grid, sigma_M, "instrument width");

    GridWavefunction psi = init_packet(grid, cfg.initial);
    SplitOperatorPropagator propagator(grid, cfg.params, options.steps_per_period);
    Rng rng(cfg.seed, 0);

    MeasurementRecord record;
    record.samples.reserve(static_cast<std::size_t>(cfg.n_measurements));
    for (long i = 1; i <= cfg.n_measurements; ++i) {
        propagator.advance(psi, cfg.scheme.t_M());
        const double leaked = boundary_probability(psi);
        if (leaked > kLeakageThreshold) {
            std::ostringstream msg;
            msg << "boundary probability " << leaked << " exceeds " << kLeakageThreshold << " before measurement " << i;
            throw LeakageError(msg.str());
        }
        if (options.observer) {
            options.observer(i, SnapshotPhase::BeforeMeasurement, psi);
        }
        Collapse collapse = measure_and_collapse(psi, sigma_M, mode, rng);
        record.samples.push_back(collapse.x_M);
        psi = std::move(collapse.psi);
        if (options.observer) {
            options.observer(i, SnapshotPhase::AfterCollapse, psi);
        }
    }
    return record;
}

}  // namespace qho
