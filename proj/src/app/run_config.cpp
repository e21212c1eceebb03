#include "qho/app/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "output.hpp"
#include "qho/errors.hpp"

namespace qho::app {

using nlohmann::json;

namespace {

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    }
    return v;
}

void require_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError("unknown config key '" + where + "." + key + "'");
        }
    }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class T>
void read(const json& obj, const char* key, std::optional<T>& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) {
        T v{};
        read(obj, key, v);
        out = v;
    }
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << name << " must be positive and finite, got " << v;
        throw ConfigError(msg.str());
    }
}

AxisSpec axis_from_json(const json& j, const char* name) {
    if (j.is_number()) {
        return AxisSpec::pinned(j.get<double>());
    }
    if (j.is_string()) {
        return AxisSpec::parse(j.get<std::string>());
    }
    throw ConfigError(std::string("sweep.") + name + " must be a number or an axis string");
}

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json axis_to_json(const AxisSpec& a) {
    if (a.fixed()) {
        return a.min;
    }
    return shortest(a.min) + ":" + shortest(a.max) + ":" + std::to_string(a.count) + (a.log ? ":log" : ":lin");
}

void check_axis(const AxisSpec& a, const char* name) {
    if (a.fixed()) {
        if (!std::isfinite(a.min)) {
            throw ConfigError(std::string(name) + " must be finite");
        }
        return;
    }
    if (a.count < 2 || !(a.min < a.max) || !std::isfinite(a.min) || !std::isfinite(a.max)) {
        throw ConfigError(std::string(name) + " axis needs min < max and count >= 2");
    }
    if (a.log && !(a.min > 0.0)) {
        throw ConfigError(std::string(name) + " log axis needs min > 0");
    }
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

std::string_view to_string(Engine engine) { return engine == Engine::Chain ? "chain" : "grid"; }

double AxisSpec::at(int i) const {
    if (count == 1) {
        return min;
    }
    if (i == count - 1) {
        return max;
    }
    const double f = static_cast<double>(i) / (count - 1);
    return log ? min * std::pow(max / min, f) : min + (max - min) * f;
}

AxisSpec AxisSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) {
        parts.push_back(item);
    }
    if (parts.size() == 1) {
        return pinned(parse_number(parts[0], "axis value"));
    }
    if (parts.size() != 3 && parts.size() != 4) {
        throw ConfigError("axis must be 'min:max:count[:lin|log]' or a number, got '" + text + "'");
    }
    AxisSpec a;
    a.min = parse_number(parts[0], "axis min");
    a.max = parse_number(parts[1], "axis max");
    const double count = parse_number(parts[2], "axis count");
    if (count != std::floor(count) || count < 2 || count > 1e7) {
        throw ConfigError("axis count must be an integer >= 2, got '" + parts[2] + "'");
    }
    a.count = static_cast<int>(count);
    if (parts.size() == 4) {
        if (parts[3] != "lin" && parts[3] != "log") {
            throw ConfigError("axis spacing must be lin or log, got '" + parts[3] + "'");
        }
        a.log = parts[3] == "log";
    }
    return a;
}

MeasurementScheme RunConfig::scheme() const {
    const OscillatorParams p = oscillator();
    const double t = t_M ? *t_M : *tau_M * p.period();
    const double s = sigma_M ? *sigma_M : *varsigma_M * p.sigma_gs();
    return MeasurementScheme(t, s, jitter_std);
}

ChainConfig RunConfig::chain() const {
    return ChainConfig{oscillator(), scheme(), initial(), n_measurements, *seed};
}

RunConfig resolve(RunConfig cfg) {
    require_positive(cfg.mass, "mass");
    require_positive(cfg.omega, "omega");
    require_positive(cfg.hbar, "hbar");
    if (cfg.t_M && cfg.tau_M) {
        throw ConfigError("give exactly one of t_M and tau_M");
    }
    if (cfg.sigma_M && cfg.varsigma_M) {
        throw ConfigError("give exactly one of sigma_M and varsigma_M");
    }
    if (!cfg.t_M && !cfg.tau_M) {
        cfg.tau_M = 0.2;
    }
    if (!cfg.sigma_M && !cfg.varsigma_M) {
        cfg.sigma_M = 0.5;
    }
    require_positive(cfg.t_M ? *cfg.t_M : *cfg.tau_M, cfg.t_M ? "t_M" : "tau_M");
    require_positive(cfg.sigma_M ? *cfg.sigma_M : *cfg.varsigma_M, cfg.sigma_M ? "sigma_M" : "varsigma_M");
    if (!(cfg.jitter_std >= 0.0) || !std::isfinite(cfg.jitter_std)) {
        throw ConfigError("jitter_std must be non-negative");
    }
    if (!std::isfinite(cfg.x0)) {
        throw ConfigError("x0 must be finite");
    }
    const OscillatorParams p = cfg.oscillator();
    if (!cfg.sigma_x0) {
        cfg.sigma_x0 = p.sigma_gs() / std::sqrt(2.0);
    }
    require_positive(*cfg.sigma_x0, "sigma_x0");
    if (cfg.n_measurements < 1) {
        throw ConfigError("n_measurements must be at least 1");
    }
    if (!cfg.seed) {
        cfg.seed = 1;
        if (const char* env = std::getenv("QHO_SEED"); env && *env) {
            std::uint64_t v = 0;
            const char* end = env + std::char_traits<char>::length(env);
            const auto [ptr, ec] = std::from_chars(env, end, v);
            if (ec != std::errc() || ptr != end) {
                throw ConfigError(std::string("QHO_SEED is not an unsigned integer: '") + env + "'");
            }
            cfg.seed = v;
        }
    }
    if (!is_power_of_two(cfg.grid_points) || cfg.grid_points < 256) {
        throw ConfigError("grid points must be a power of two, at least 256");
    }
    if (!is_power_of_two(cfg.weak_gap_grid_points) || cfg.weak_gap_grid_points < 256) {
        throw ConfigError("weak-gap grid points must be a power of two, at least 256");
    }
    if (cfg.steps_per_period < 1 || cfg.weak_gap_steps_per_period < 1) {
        throw ConfigError("steps per period must be at least 1");
    }
    if (cfg.snapshot_every < 0) {
        throw ConfigError("snapshot interval must be non-negative");
    }
    const MeasurementScheme scheme = cfg.scheme();
    if (!cfg.grid_half_extent) {
        double width = p.sigma_gs();
        try {
            width = std::max(width, limiting_sigma(chain_closed_form(p, scheme, *cfg.sigma_x0)));
        } catch (const ResonanceError&) {
        }
        cfg.grid_half_extent = 12.0 * width;
    }
    require_positive(*cfg.grid_half_extent, "grid half extent");

    const NondimPoint point = to_nondim(p, scheme);
    if (!cfg.varsigma_axis && !cfg.tau_axis) {
        cfg.varsigma_axis = AxisSpec{0.1, 10.0, 101, true};
        cfg.tau_axis = AxisSpec{0.0, 1.0, 201, false};
    } else if (!cfg.varsigma_axis) {
        cfg.varsigma_axis = AxisSpec::pinned(point.varsigma_M());
    } else if (!cfg.tau_axis) {
        cfg.tau_axis = AxisSpec::pinned(point.tau_M());
    }
    check_axis(*cfg.varsigma_axis, "varsigma_M");
    check_axis(*cfg.tau_axis, "tau_M");
    if (cfg.varsigma_axis->fixed() && !(cfg.varsigma_axis->min > 0.0)) {
        throw ConfigError("pinned varsigma_M must be positive");
    }
    if (cfg.varsigma_axis->min <= 0.0) {
        throw ConfigError("varsigma_M axis must stay positive");
    }

    require_positive(cfg.weak_gap_ratio, "weak-gap ratio");
    if (!(cfg.weak_gap_ratio < 1.0)) {
        throw ConfigError("weak-gap ratio must be below 1");
    }
    require_positive(cfg.weak_gap_threshold, "weak-gap threshold");
    if (cfg.weak_gap_steps < 100) {
        throw ConfigError("weak-gap steps must be at least 100");
    }
    return cfg;
}

RunConfig config_from_json(const json& input) {
    const json& j = input.contains("config") ? input.at("config") : input;
    require_keys(j, "config",
                 {"oscillator", "scheme", "initial", "n_measurements", "seed", "engine", "collapse", "out",
                  "grid", "sweep", "validate"});
    RunConfig cfg;
    if (j.contains("oscillator")) {
        const json& o = j.at("oscillator");
        require_keys(o, "oscillator", {"mass", "omega", "hbar"});
        read(o, "mass", cfg.mass);
        read(o, "omega", cfg.omega);
        read(o, "hbar", cfg.hbar);
    }
    if (j.contains("scheme")) {
        const json& s = j.at("scheme");
        require_keys(s, "scheme", {"t_M", "tau_M", "sigma_M", "varsigma_M", "jitter_std"});
        read(s, "t_M", cfg.t_M);
        read(s, "tau_M", cfg.tau_M);
        read(s, "sigma_M", cfg.sigma_M);
        read(s, "varsigma_M", cfg.varsigma_M);
        read(s, "jitter_std", cfg.jitter_std);
    }
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        require_keys(i, "initial", {"x0", "sigma_x0"});
        read(i, "x0", cfg.x0);
        read(i, "sigma_x0", cfg.sigma_x0);
    }
    read(j, "n_measurements", cfg.n_measurements);
    read(j, "seed", cfg.seed);
    if (j.contains("engine")) {
        std::string e;
        read(j, "engine", e);
        if (e != "chain" && e != "grid") {
            throw ConfigError("engine must be chain or grid, got '" + e + "'");
        }
        cfg.engine = e == "chain" ? Engine::Chain : Engine::Grid;
    }
    if (j.contains("collapse")) {
        std::string c;
        read(j, "collapse", c);
        if (c != "replace" && c != "weak") {
            throw ConfigError("collapse must be replace or weak, got '" + c + "'");
        }
        cfg.collapse = c == "replace" ? CollapseMode::Replace : CollapseMode::WeakProduct;
    }
    read(j, "out", cfg.out);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        require_keys(g, "grid", {"points", "half_extent", "steps_per_period", "snapshot_every"});
        read(g, "points", cfg.grid_points);
        read(g, "half_extent", cfg.grid_half_extent);
        read(g, "steps_per_period", cfg.steps_per_period);
        read(g, "snapshot_every", cfg.snapshot_every);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        require_keys(s, "sweep", {"varsigma_M", "tau_M"});
        if (s.contains("varsigma_M")) cfg.varsigma_axis = axis_from_json(s.at("varsigma_M"), "varsigma_M");
        if (s.contains("tau_M")) cfg.tau_axis = axis_from_json(s.at("tau_M"), "tau_M");
    }
    if (j.contains("validate")) {
        const json& v = j.at("validate");
        require_keys(v, "validate",
                     {"weak_gap_ratio", "weak_gap_threshold", "weak_gap_steps", "weak_gap_grid_points",
                      "weak_gap_steps_per_period"});
        read(v, "weak_gap_ratio", cfg.weak_gap_ratio);
        read(v, "weak_gap_threshold", cfg.weak_gap_threshold);
        read(v, "weak_gap_steps", cfg.weak_gap_steps);
        read(v, "weak_gap_grid_points", cfg.weak_gap_grid_points);
        read(v, "weak_gap_steps_per_period", cfg.weak_gap_steps_per_period);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file " + path);
    }
    try {
        return config_from_json(json::parse(f));
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
}

json to_json(const RunConfig& cfg) {
    json scheme = json::object();
    if (cfg.t_M) scheme["t_M"] = *cfg.t_M;
    if (cfg.tau_M) scheme["tau_M"] = *cfg.tau_M;
    if (cfg.sigma_M) scheme["sigma_M"] = *cfg.sigma_M;
    if (cfg.varsigma_M) scheme["varsigma_M"] = *cfg.varsigma_M;
    scheme["jitter_std"] = cfg.jitter_std;

    json j;
    j["oscillator"] = {{"mass", cfg.mass}, {"omega", cfg.omega}, {"hbar", cfg.hbar}};
    j["scheme"] = scheme;
    j["initial"] = {{"x0", cfg.x0}, {"sigma_x0", cfg.sigma_x0 ? json(*cfg.sigma_x0) : json(nullptr)}};
    j["n_measurements"] = cfg.n_measurements;
    j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    j["engine"] = std::string(to_string(cfg.engine));
    j["collapse"] = std::string(to_string(cfg.collapse));
    j["out"] = cfg.out;
    j["grid"] = {{"points", cfg.grid_points},
                 {"half_extent", cfg.grid_half_extent ? json(*cfg.grid_half_extent) : json(nullptr)},
                 {"steps_per_period", cfg.steps_per_period},
                 {"snapshot_every", cfg.snapshot_every}};
    json sweep = json::object();
    if (cfg.varsigma_axis) sweep["varsigma_M"] = axis_to_json(*cfg.varsigma_axis);
    if (cfg.tau_axis) sweep["tau_M"] = axis_to_json(*cfg.tau_axis);
    j["sweep"] = sweep;
    j["validate"] = {{"weak_gap_ratio", cfg.weak_gap_ratio},
                     {"weak_gap_threshold", cfg.weak_gap_threshold},
                     {"weak_gap_steps", cfg.weak_gap_steps},
                     {"weak_gap_grid_points", cfg.weak_gap_grid_points},
                     {"weak_gap_steps_per_period", cfg.weak_gap_steps_per_period}};
    return j;
}

}  // namespace qho::app
