#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "output.hpp"
#include "qho/app/commands.hpp"
#include "qho/errors.hpp"

namespace qho::app {

using nlohmann::json;

namespace {

struct Cell {
    double value = std::numeric_limits<double>::quiet_NaN();
    const char* flag = "ok";
};

Cell evaluate(double varsigma, double tau) {
    try {
        return {nondim_limit(NondimPoint(varsigma, tau)), "ok"};
    } catch (const ResonanceError&) {
        return {std::numeric_limits<double>::quiet_NaN(), "resonant"};
    } catch (const DomainError&) {
        return {std::numeric_limits<double>::quiet_NaN(), "domain"};
    }
}

// Rows are independent, so they are dealt out round-robin to worker threads.
std::vector<Cell> evaluate_grid(const AxisSpec& tau, const AxisSpec& varsigma) {
    std::vector<Cell> cells(static_cast<std::size_t>(tau.count) * varsigma.count);
    const int workers = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 16u));
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < tau.count; i += workers) {
                for (int j = 0; j < varsigma.count; ++j) {
                    cells[static_cast<std::size_t>(i) * varsigma.count + j] = evaluate(varsigma.at(j), tau.at(i));
                }
            }
        });
    }
    pool.clear();
    return cells;
}

}  // namespace

json cmd_sweep(const RunConfig& cfg) {
    const AxisSpec& tau = *cfg.tau_axis;
    const AxisSpec& varsigma = *cfg.varsigma_axis;
    const std::vector<Cell> cells = evaluate_grid(tau, varsigma);

    std::string csv = csv_header("sweep", {"flag is ok, resonant or domain; value is empty unless ok"},
                                 {"varsigma_M", "tau_M", "varsigma_inf", "flag"});
    std::map<std::string, long> flags;
    for (int i = 0; i < tau.count; ++i) {
        for (int j = 0; j < varsigma.count; ++j) {
            const Cell& c = cells[static_cast<std::size_t>(i) * varsigma.count + j];
            csv += fmt(varsigma.at(j)) + ',' + fmt(tau.at(i)) + ',' + fmt(c.value) + ',' + c.flag + '\n';
            ++flags[c.flag];
        }
    }

    OutputSet out(cfg.out);
    out.write("sweep.csv", csv);

    if (!varsigma.fixed()) {
        std::string optima = csv_header(
            "sweep_optima",
            {"grid_* columns locate the minimum over the varsigma_M axis",
             "optimal_* columns are the analytic optimum; empty where tan(2 pi tau_M) <= 0"},
            {"tau_M", "grid_varsigma_M", "grid_varsigma_inf", "optimal_varsigma_M", "optimal_varsigma_inf"});
        for (int i = 0; i < tau.count; ++i) {
            int best = -1;
            for (int j = 0; j < varsigma.count; ++j) {
                const double v = cells[static_cast<std::size_t>(i) * varsigma.count + j].value;
                if (std::isfinite(v) &&
                    (best < 0 || v < cells[static_cast<std::size_t>(i) * varsigma.count + best].value)) {
                    best = j;
                }
            }
            std::string opt_v, opt_min;
            try {
                const double v = optimal_precision(tau.at(i));
                opt_v = fmt(v);
                opt_min = fmt(nondim_limit(NondimPoint(v, tau.at(i))));
            } catch (const Error&) {
            }
            optima += fmt(tau.at(i)) + ',' + (best < 0 ? "" : fmt(varsigma.at(best))) + ',' +
                      (best < 0 ? "" : fmt(cells[static_cast<std::size_t>(i) * varsigma.count + best].value)) +
                      ',' + opt_v + ',' + opt_min + '\n';
        }
        out.write("sweep_optima.csv", optima);
    }

    json summary;
    summary["command"] = "sweep";
    summary["cells"] = cells.size();
    summary["flags"] = flags;
    std::vector<std::string> files = out.names();
    files.push_back("sweep_summary.json");
    summary["files"] = files;
    summary["config"] = to_json(cfg);
    out.write_json("sweep_summary.json", summary);
    out.commit();
    return summary;
}

}  // namespace qho::app
