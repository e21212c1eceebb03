#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "qho/chain_analytics.hpp"
#include "qho/gaussian.hpp"
#include "qho/grid_oracle.hpp"
#include "qho/trajectory.hpp"

namespace qho::app {

enum class Engine { Chain, Grid };

std::string_view to_string(Engine engine);

// "min:max:count[:lin|log]" spans an axis; a bare number pins the coordinate.
struct AxisSpec {
    double min = 0.0;
    double max = 0.0;
    int count = 1;
    bool log = false;

    bool fixed() const { return count == 1; }
    double at(int i) const;

    static AxisSpec parse(const std::string& text);
    static AxisSpec pinned(double value) { return {value, value, 1, false}; }
};

struct RunConfig {
    double mass = 1.0;
    double omega = 0.707;
    double hbar = 1.0;

    // Exactly one of each pair; resolve() fills in defaults when both are absent.
    std::optional<double> t_M;
    std::optional<double> tau_M;
    std::optional<double> sigma_M;
    std::optional<double> varsigma_M;
    double jitter_std = 0.0;

    double x0 = 0.0;
    std::optional<double> sigma_x0;  // defaults to sigma_gs / sqrt(2)

    long n_measurements = 500000;
    std::optional<std::uint64_t> seed;
    Engine engine = Engine::Chain;
    CollapseMode collapse = CollapseMode::Replace;
    std::string out = "qho-out";

    std::size_t grid_points = kDefaultGridPoints;
    std::optional<double> grid_half_extent;
    int steps_per_period = kDefaultStepsPerPeriod;
    long snapshot_every = 0;  // 0 disables density snapshots

    std::optional<AxisSpec> varsigma_axis;
    std::optional<AxisSpec> tau_axis;

    double weak_gap_ratio = 0.1;
    double weak_gap_threshold = 0.05;
    long weak_gap_steps = 10000;
    std::size_t weak_gap_grid_points = 1024;
    int weak_gap_steps_per_period = 256;

    // Setting one form of the period or width clears the other.
    void set_t_M(double v) { t_M = v; tau_M.reset(); }
    void set_tau_M(double v) { tau_M = v; t_M.reset(); }
    void set_sigma_M(double v) { sigma_M = v; varsigma_M.reset(); }
    void set_varsigma_M(double v) { varsigma_M = v; sigma_M.reset(); }

    OscillatorParams oscillator() const { return OscillatorParams(mass, omega, hbar); }
    MeasurementScheme scheme() const;
    WavePacket initial() const { return WavePacket(x0, *sigma_x0); }
    ChainConfig chain() const;
    Grid grid() const { return Grid::symmetric(*grid_half_extent, grid_points); }
};

// Materializes every default (seed falls back to QHO_SEED, then 1) and checks
// the invariants. Without sweep axes both get default spans; with only one,
// the other is pinned at the scheme's point. Throws ConfigError; resonance is
// left to the commands.
RunConfig resolve(RunConfig cfg);

// Accepts either a bare config object or any output JSON carrying a "config" echo.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace qho::app
