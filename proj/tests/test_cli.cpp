#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qho/app/commands.hpp"
#include "qho/app/run_config.hpp"
#include "qho/errors.hpp"

using namespace qho;
using namespace qho::app;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qho_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Data rows of a CSV, skipping '#' metadata and the column row.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> out;
    bool header_seen = false;
    for (std::string line; std::getline(f, line);) {
        if (line.starts_with('#')) continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (line.ends_with(',')) cells.emplace_back();
        out.push_back(cells);
    }
    return out;
}

RunConfig reference(const fs::path& out) {
    RunConfig cfg;
    cfg.set_tau_M(0.2);
    cfg.set_sigma_M(0.5);
    cfg.seed = 11;
    cfg.out = out.string();
    return resolve(cfg);
}

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + QHO_CLI_PATH + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAreMaterialized) {
    ::unsetenv("QHO_SEED");
    const RunConfig cfg = resolve(RunConfig{});
    EXPECT_EQ(*cfg.tau_M, 0.2);
    EXPECT_EQ(*cfg.sigma_M, 0.5);
    EXPECT_FALSE(cfg.t_M);
    EXPECT_EQ(*cfg.seed, 1u);
    EXPECT_NEAR(*cfg.sigma_x0, cfg.oscillator().sigma_gs() / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(*cfg.grid_half_extent, 12 * 1.42372658355216677, 1e-12);
    EXPECT_EQ(cfg.n_measurements, 500000);
}

TEST(Config, ExactlyOneFormPerPair) {
    RunConfig both;
    both.t_M = 1.0;
    both.tau_M = 0.2;
    EXPECT_THROW(resolve(both), ConfigError);
    RunConfig widths;
    widths.sigma_M = 0.5;
    widths.varsigma_M = 0.5;
    EXPECT_THROW(resolve(widths), ConfigError);
    RunConfig cfg;
    cfg.tau_M = 0.2;
    cfg.set_t_M(1.0);
    EXPECT_FALSE(cfg.tau_M);
}

TEST(Config, RejectsInvalidValues) {
    RunConfig neg;
    neg.mass = -1;
    EXPECT_THROW(resolve(neg), ConfigError);
    RunConfig zero_n;
    zero_n.n_measurements = 0;
    EXPECT_THROW(resolve(zero_n), ConfigError);
    RunConfig grid;
    grid.grid_points = 1000;
    EXPECT_THROW(resolve(grid), ConfigError);
    EXPECT_THROW(config_from_json(json{{"bogus", 1}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"scheme", {{"tau", 0.2}}}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"engine", "fast"}}), ConfigError);
    EXPECT_THROW(AxisSpec::parse("1:2"), ConfigError);
    EXPECT_THROW(AxisSpec::parse("1:2:1"), ConfigError);
    EXPECT_THROW(AxisSpec::parse("1:2:10:cubic"), ConfigError);
    RunConfig log_axis;
    log_axis.varsigma_axis = AxisSpec::parse("0:1:10:log");
    EXPECT_THROW(resolve(log_axis), ConfigError);
}

TEST(Config, SeedPrecedence) {
    ::setenv("QHO_SEED", "77", 1);
    EXPECT_EQ(*resolve(RunConfig{}).seed, 77u);
    RunConfig explicit_seed;
    explicit_seed.seed = 5;
    EXPECT_EQ(*resolve(explicit_seed).seed, 5u);
    ::setenv("QHO_SEED", "abc", 1);
    EXPECT_THROW(resolve(RunConfig{}), ConfigError);
    ::unsetenv("QHO_SEED");
}

TEST(Config, EchoRoundTripsExactly) {
    RunConfig cfg;
    cfg.set_t_M(1.2345678901234567);
    cfg.set_varsigma_M(0.3);
    cfg.jitter_std = 0.01;
    cfg.x0 = -2.5;
    cfg.seed = 18446744073709551615ull;
    cfg.engine = Engine::Grid;
    cfg.collapse = CollapseMode::WeakProduct;
    cfg.varsigma_axis = AxisSpec::parse("0.1:10:7:log");
    const RunConfig resolved = resolve(cfg);
    const json echo = to_json(resolved);
    const RunConfig again = resolve(config_from_json(json{{"config", echo}}));
    EXPECT_EQ(to_json(again), echo);
    EXPECT_EQ(*again.t_M, 1.2345678901234567);
    EXPECT_EQ(*again.seed, 18446744073709551615ull);
    EXPECT_TRUE(again.tau_axis->fixed());
}

TEST(Analyze, ReferenceAndDimensionlessExamples) {
    const fs::path out = scratch("analyze");
    const json j = cmd_analyze(reference(out));
    EXPECT_NEAR(j["sigma_inf"].get<double>(), 1.42372658355216677, 1e-13);
    EXPECT_NEAR(j["sigma_gs"].get<double>(), 1.18929691709068784, 1e-15);
    EXPECT_NEAR(j["rho"].get<double>(), 0.309016994374947424, 1e-15);
    EXPECT_TRUE(j.contains("config"));
    EXPECT_EQ(json::parse(slurp(out / "analysis.json")), j);

    RunConfig quarter;
    quarter.set_tau_M(0.25);
    quarter.set_varsigma_M(0.5);
    quarter.out = scratch("analyze_quarter").string();
    EXPECT_NEAR(cmd_analyze(resolve(quarter))["varsigma_inf"].get<double>(), 1.0, 1e-12);
}

TEST(Analyze, ResonanceIsReported) {
    RunConfig cfg;
    cfg.set_tau_M(0.5);
    cfg.out = scratch("analyze_res").string();
    try {
        cmd_analyze(resolve(cfg));
        FAIL() << "expected ResonanceError";
    } catch (const ResonanceError& e) {
        EXPECT_NE(std::string(e.what()).find("tau_M = 0.5"), std::string::npos);
    }
    EXPECT_EQ(run_cli("analyze --tau-m 0.5 --out " + cfg.out), kExitResonanceOrDomain);
}

TEST(Simulate, ReferenceWithinOnePercent) {
    const fs::path out = scratch("sim_reference");
    const json s = cmd_simulate(reference(out));
    EXPECT_LT(std::abs(s["rel_err"].get<double>()), 0.01);
    EXPECT_EQ(s["n"].get<long>(), 500000);
    EXPECT_TRUE(s["ks"]["passed"].get<bool>());
    for (const char* f : {"samples.csv", "running_std.csv", "histogram.csv", "summary.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    EXPECT_TRUE(slurp(out / "samples.csv").starts_with("# qho samples v1\nindex,x_M,t_eff\n"));
    EXPECT_EQ(rows(out / "samples.csv").size(), 500000u);

    const auto hist = rows(out / "histogram.csv");
    ASSERT_EQ(hist.size(), 202u);
    EXPECT_EQ(hist.front()[0], "-inf");
    EXPECT_EQ(hist.back()[1], "inf");
    long total = 0;
    double mass = 0;
    for (const auto& r : hist) {
        total += std::stol(r[2]);
        if (!r[3].empty()) mass += std::stod(r[3]) * (std::stod(r[1]) - std::stod(r[0]));
    }
    EXPECT_EQ(total, 500000);
    EXPECT_NEAR(mass, 1.0, 1e-6);

    const auto running = rows(out / "running_std.csv");
    EXPECT_EQ(running.front()[1], "null");
    EXPECT_EQ(running.back()[0], "500000");
    EXPECT_NEAR(std::stod(running.back()[1]), s["std"].get<double>(), 1e-12);
}

TEST(Simulate, SingleMeasurement) {
    RunConfig cfg = reference(scratch("sim_one"));
    cfg.n_measurements = 1;
    const json s = cmd_simulate(cfg);
    EXPECT_TRUE(s["std"].is_null());
    EXPECT_TRUE(s["ks"].is_null());
    const auto running = rows(fs::path(cfg.out) / "running_std.csv");
    ASSERT_EQ(running.size(), 1u);
    EXPECT_EQ(running[0][0], "1");
    EXPECT_EQ(running[0][1], "null");
    EXPECT_EQ(rows(fs::path(cfg.out) / "samples.csv").size(), 1u);
}

TEST(Simulate, ByteIdenticalReruns) {
    RunConfig a = reference(scratch("sim_det_a"));
    a.n_measurements = 20000;
    a.jitter_std = 0.01;
    RunConfig b = a;
    b.out = scratch("sim_det_b").string();
    cmd_simulate(a);
    cmd_simulate(b);
    for (const char* f : {"samples.csv", "running_std.csv", "histogram.csv"}) {
        EXPECT_EQ(slurp(fs::path(a.out) / f), slurp(fs::path(b.out) / f)) << f;
    }
    // Rerun from the echo embedded in the summary.
    const fs::path c = scratch("sim_det_c");
    ASSERT_EQ(run_cli("simulate --config " + (fs::path(a.out) / "summary.json").string() + " --out " + c.string()),
              kExitOk);
    EXPECT_EQ(slurp(fs::path(a.out) / "samples.csv"), slurp(c / "samples.csv"));
}

TEST(Simulate, PartialFilesRemovedOnFailure) {
    const fs::path out = scratch("sim_fail");
    fs::create_directories(out / "histogram.csv");  // blocks the third file
    RunConfig cfg = reference(out);
    cfg.n_measurements = 100;
    EXPECT_THROW(cmd_simulate(cfg), Error);
    EXPECT_FALSE(fs::exists(out / "samples.csv"));
    EXPECT_FALSE(fs::exists(out / "running_std.csv"));
    EXPECT_FALSE(fs::exists(out / "summary.json"));
}

TEST(Simulate, GridEngineWithSnapshots) {
    RunConfig cfg = reference(scratch("sim_grid"));
    cfg.engine = Engine::Grid;
    cfg.n_measurements = 40;
    cfg.grid_points = 1024;
    cfg.steps_per_period = 128;
    cfg.snapshot_every = 20;
    const json s = cmd_simulate(cfg);
    EXPECT_EQ(s["engine"], "grid");
    const auto snaps = rows(fs::path(cfg.out) / "density_snapshots.csv");
    EXPECT_EQ(snaps.size(), 2u * 2u * 1024u);
    EXPECT_EQ(snaps.front()[0], "20");
    EXPECT_EQ(snaps.front()[1], "before");

    cfg.jitter_std = 0.01;
    EXPECT_THROW(cmd_simulate(cfg), ConfigError);
}

TEST(Sweep, OneDimensionalOptimum) {
    RunConfig cfg;
    cfg.varsigma_axis = AxisSpec::parse("0.1:10:2001:log");
    cfg.tau_axis = AxisSpec::pinned(0.125);
    cfg.out = scratch("sweep_1d").string();
    cmd_sweep(resolve(cfg));
    const auto cells = rows(fs::path(cfg.out) / "sweep.csv");
    ASSERT_EQ(cells.size(), 2001u);
    std::size_t best = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        ASSERT_EQ(cells[i][3], "ok");
        if (std::stod(cells[i][2]) < std::stod(cells[best][2])) best = i;
    }
    const double step = std::pow(100.0, 1.0 / 2000);
    EXPECT_NEAR(std::log(std::stod(cells[best][0]) / std::sqrt(0.5)), 0.0, std::log(step));
    EXPECT_NEAR(std::stod(cells[best][2]), 1.0, 1e-5);
    const auto optima = rows(fs::path(cfg.out) / "sweep_optima.csv");
    ASSERT_EQ(optima.size(), 1u);
    EXPECT_NEAR(std::stod(optima[0][3]), std::sqrt(0.5), 1e-15);
}

TEST(Sweep, ResonanceFlagsAndPeriodicity) {
    RunConfig cfg;
    cfg.varsigma_axis = AxisSpec::parse("0.2:3:15:log");
    cfg.tau_axis = AxisSpec::parse("0:1:201");
    cfg.out = scratch("sweep_2d").string();
    const json summary = cmd_sweep(resolve(cfg));
    EXPECT_EQ(summary["cells"], 15 * 201);
    const auto cells = rows(fs::path(cfg.out) / "sweep.csv");
    auto at = [&](int i, int j) { return cells[static_cast<std::size_t>(i) * 15 + j]; };
    for (int j = 0; j < 15; ++j) {
        EXPECT_EQ(at(100, j)[3], "resonant");
        EXPECT_EQ(at(100, j)[2], "");
        EXPECT_EQ(at(200, j)[3], "resonant");
        for (int i = 1; i < 100; ++i) {
            const double a = std::stod(at(i, j)[2]);
            const double b = std::stod(at(i + 100, j)[2]);
            EXPECT_NEAR(a, b, 1e-12 * a) << i << " " << j;
        }
    }
    // For each varsigma_M the tau_M minimum sits at 1/4 and 3/4.
    for (int j = 0; j < 15; ++j) {
        int best = 1;
        for (int i = 1; i < 100; ++i) {
            if (std::stod(at(i, j)[2]) < std::stod(at(best, j)[2])) best = i;
        }
        EXPECT_EQ(best, 50);
    }
}

TEST(Validate, CoarseGridFailsWithDiagnostic) {
    RunConfig cfg;
    cfg.grid_points = 256;
    cfg.weak_gap_steps = 300;
    cfg.out = scratch("validate_coarse").string();
    const json report = cmd_validate(resolve(cfg));
    EXPECT_FALSE(report["passed"].get<bool>());
    bool seen = false;
    for (const auto& c : report["checks"]) {
        if (c["name"] == "spectral_convergence") {
            seen = true;
            EXPECT_FALSE(c["passed"].get<bool>());
            EXPECT_NE(c["detail"].get<std::string>().find("grid"), std::string::npos);
        }
    }
    EXPECT_TRUE(seen);
    EXPECT_EQ(run_cli("validate --grid-points 256 --weak-gap-steps 300 --out " + cfg.out), kExitValidationFailed);
}

TEST(Validate, DefaultConfigPasses) {
    RunConfig cfg;
    cfg.out = scratch("validate_default").string();
    const json report = cmd_validate(resolve(cfg));
    for (const auto& c : report["checks"]) {
        EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
    }
    EXPECT_TRUE(report["passed"].get<bool>());
    double gap = -1;
    for (const auto& c : report["checks"]) {
        if (c["name"] == "weak_gap") gap = c["measured"].get<double>();
    }
    EXPECT_GE(gap, 0.0);
}

TEST(Cli, ExitCodesAndOverrides) {
    const fs::path dir = scratch("cli_overrides");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "cfg.json");
        f << R"({"scheme": {"tau_M": 0.3, "sigma_M": 0.7}, "seed": 9})";
    }
    ASSERT_EQ(run_cli("analyze --config " + (dir / "cfg.json").string() + " --tau-m 0.2 --out " + dir.string()),
              kExitOk);
    const json j = json::parse(slurp(dir / "analysis.json"));
    EXPECT_EQ(j["config"]["scheme"]["tau_M"], 0.2);
    EXPECT_EQ(j["config"]["scheme"]["sigma_M"], 0.7);
    EXPECT_EQ(j["config"]["seed"], 9);

    ASSERT_EQ(run_cli("analyze --config " + (dir / "cfg.json").string() + " --t-m 1 --out " + dir.string()), kExitOk);
    const json k = json::parse(slurp(dir / "analysis.json"));
    EXPECT_FALSE(k["config"]["scheme"].contains("tau_M"));
    EXPECT_EQ(k["config"]["scheme"]["t_M"], 1.0);

    EXPECT_EQ(run_cli("analyze --out " + dir.string(), "QHO_SEED=42"), kExitOk);
    EXPECT_EQ(json::parse(slurp(dir / "analysis.json"))["config"]["seed"], 42);

    EXPECT_EQ(run_cli("analyze --tau-m 0.2 --t-m 1"), kExitConfigError);
    EXPECT_EQ(run_cli("analyze --bogus"), kExitConfigError);
    EXPECT_EQ(run_cli("simulate --n 0"), kExitConfigError);
    EXPECT_EQ(run_cli("analyze --config /nonexistent.json"), kExitConfigError);
    EXPECT_EQ(run_cli(""), kExitConfigError);
}
