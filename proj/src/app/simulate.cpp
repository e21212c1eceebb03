#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"
#include "output.hpp"
#include "qho/app/commands.hpp"
#include "qho/errors.hpp"

namespace qho::app {

using nlohmann::json;

namespace {

// Every n up to 1000, then roughly 1% apart, always ending at the last sample.
bool running_checkpoint(std::size_t n, std::size_t total, std::size_t& next) {
    if (n == total || n >= next) {
        next = n < 1000 ? n + 1 : std::max(n + 1, static_cast<std::size_t>(std::ceil(n * 1.01)));
        return true;
    }
    return false;
}

std::string samples_csv(const std::vector<double>& samples, const std::vector<double>& periods, double t_M) {
    std::string out = csv_header("samples", {}, {"index", "x_M", "t_eff"});
    out.reserve(out.size() + samples.size() * 48);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out += std::to_string(i + 1) + ',' + fmt(samples[i]) + ',' + fmt(periods.empty() ? t_M : periods[i]) + '\n';
    }
    return out;
}

std::string running_std_csv(const std::vector<double>& samples) {
    std::string out = csv_header("running_std", {"std is the n-1 sample std; null where undefined"}, {"n", "std"});
    RunningStats acc({-1.0, 1.0, 1});
    std::size_t next = 1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        acc.push(samples[i]);
        const std::size_t n = i + 1;
        if (running_checkpoint(n, samples.size(), next)) {
            out += std::to_string(n) + ',' + (n < 2 ? std::string("null") : fmt(acc.std_dev())) + '\n';
        }
    }
    return out;
}

std::string histogram_csv(const RunningStats& stats, double sigma_inf) {
    const HistogramSpec& spec = stats.histogram_spec();
    const auto& counts = stats.counts();
    const double width = stats.bin_width();
    const double total = static_cast<double>(stats.count());
    std::string out = csv_header(
        "histogram",
        {"analytic is the bin average of G(0, sigma_inf)",
         "first and last rows hold underflow and overflow with empty density"},
        {"bin_lo", "bin_hi", "count", "density", "analytic"});
    out += "-inf," + fmt(spec.lo) + ',' + std::to_string(counts.front()) + ",,\n";
    const bool overlay = std::isfinite(sigma_inf);
    for (std::size_t b = 0; b < spec.bins; ++b) {
        const double lo = spec.lo + static_cast<double>(b) * width;
        const double hi = b + 1 == spec.bins ? spec.hi : lo + width;
        const double density = total > 0 ? static_cast<double>(counts[b + 1]) / (total * (hi - lo)) : 0.0;
        std::string analytic;
        if (overlay) {
            const Gaussian g(0.0, sigma_inf);
            analytic = fmt((g.cdf(hi) - g.cdf(lo)) / (hi - lo));
        }
        out += fmt(lo) + ',' + fmt(hi) + ',' + std::to_string(counts[b + 1]) + ',' + fmt(density) + ',' + analytic + '\n';
    }
    out += fmt(spec.hi) + ",inf," + std::to_string(counts.back()) + ",,\n";
    return out;
}

}  // namespace

json cmd_simulate(const RunConfig& cfg) {
    const OscillatorParams p = cfg.oscillator();
    const MeasurementScheme s = cfg.scheme();
    const ChainConfig chain = cfg.chain();

    double sigma_inf = std::nan("");
    if (cfg.engine == Engine::Grid || s.jitter_std() == 0.0) {
        sigma_inf = checked_limiting_sigma(cfg);
    } else {
        try {
            sigma_inf = checked_limiting_sigma(cfg);
        } catch (const ResonanceError&) {
        }
    }

    MeasurementRecord record;
    std::string snapshots;
    if (cfg.engine == Engine::Chain) {
        record = run_chain_jittered(chain).record;
    } else {
        if (s.jitter_std() != 0.0) {
            throw ConfigError("the grid engine runs strictly periodic chains; set jitter_std to 0");
        }
        GridChainOptions opts;
        opts.steps_per_period = cfg.steps_per_period;
        if (cfg.snapshot_every > 0) {
            snapshots = csv_header("density_snapshots", {"phase is before (pre-measurement) or after (post-collapse)"},
                                   {"step", "phase", "x", "density"});
            opts.observer = [&](long step, SnapshotPhase phase, const GridWavefunction& psi) {
                if (step % cfg.snapshot_every != 0) {
                    return;
                }
                const auto density = psi.density();
                const std::string prefix =
                    std::to_string(step) + (phase == SnapshotPhase::BeforeMeasurement ? ",before," : ",after,");
                for (std::size_t j = 0; j < density.size(); ++j) {
                    snapshots += prefix + fmt(psi.grid().x(j)) + ',' + fmt(density[j]) + '\n';
                }
            };
        }
        record = run_chain_grid(chain, cfg.grid(), cfg.collapse, opts);
    }

    RunningStats stats(predicted_histogram(chain));
    for (double x : record.samples) {
        stats.push(x);
    }

    json ks = nullptr;
    const double rho = s.rho(p);
    if (std::isfinite(sigma_inf)) {
        try {
            const NormalityReport r = normality_test(record.samples, sigma_inf, rho);
            ks = {{"statistic", r.statistic}, {"critical_1pct", r.critical}, {"stride", r.stride},
                  {"n_used", r.n_used},       {"passed", r.passed}};
        } catch (const InsufficientSamples&) {
        }
    }
    const double std_dev = stats.count() >= 2 ? stats.std_dev() : std::nan("");

    json summary = scheme_summary(cfg);
    summary["command"] = "simulate";
    summary["engine"] = std::string(to_string(cfg.engine));
    summary["n"] = stats.count();
    summary["mean"] = stats.mean();
    summary["std"] = number_or_null(std_dev);
    summary["sigma_inf"] = number_or_null(sigma_inf);
    summary["rel_err"] = number_or_null(std_dev / sigma_inf - 1.0);
    summary["ks"] = ks;

    OutputSet out(cfg.out);
    out.write("samples.csv", samples_csv(record.samples, record.periods, s.t_M()));
    out.write("running_std.csv", running_std_csv(record.samples));
    out.write("histogram.csv", histogram_csv(stats, sigma_inf));
    if (!snapshots.empty()) {
        out.write("density_snapshots.csv", snapshots);
    }
    std::vector<std::string> files = out.names();
    files.push_back("summary.json");
    summary["files"] = files;
    summary["config"] = to_json(cfg);
    out.write_json("summary.json", summary);
    out.commit();
    return summary;
}

}  // namespace qho::app
