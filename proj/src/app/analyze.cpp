#include <cmath>
#include <sstream>

#include "common.hpp"
#include "output.hpp"
#include "qho/app/commands.hpp"
#include "qho/errors.hpp"

namespace qho::app {

using nlohmann::json;

json scheme_summary(const RunConfig& cfg) {
    const OscillatorParams p = cfg.oscillator();
    const MeasurementScheme s = cfg.scheme();
    const NondimPoint nd = to_nondim(p, s);
    return {{"sigma_gs", p.sigma_gs()},     {"period", p.period()},
            {"t_M", s.t_M()},               {"tau_M", nd.tau_M()},
            {"sigma_M", s.sigma_M()},       {"varsigma_M", nd.varsigma_M()},
            {"rho", s.rho(p)},              {"sigma_t_M", evolved_width(p, s.sigma_M(), s.t_M())}};
}

double checked_limiting_sigma(const RunConfig& cfg) {
    const OscillatorParams p = cfg.oscillator();
    const MeasurementScheme s = cfg.scheme();
    try {
        return limiting_sigma(chain_closed_form(p, s, *cfg.sigma_x0));
    } catch (const ResonanceError& e) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "tau_M = " << s.t_M() / p.period() << ": " << e.what();
        throw ResonanceError(msg.str());
    }
}

json cmd_analyze(const RunConfig& cfg) {
    const OscillatorParams p = cfg.oscillator();
    const MeasurementScheme s = cfg.scheme();
    const double sigma_inf = checked_limiting_sigma(cfg);
    const NondimPoint nd = to_nondim(p, s);

    json j = scheme_summary(cfg);
    j["command"] = "analyze";
    j["sigma_inf"] = sigma_inf;
    j["varsigma_inf"] = nondim_limit(nd);
    j["sigma_inf_simplified"] = limiting_sigma_simplified(p, s);
    try {
        const double v = optimal_precision(nd.tau_M());
        j["optimal"] = {{"varsigma_M", v},
                        {"sigma_M", v * p.sigma_gs()},
                        {"varsigma_inf", nondim_limit(NondimPoint(v, nd.tau_M()))}};
    } catch (const DomainError& e) {
        j["optimal"] = {{"varsigma_M", nullptr}, {"reason", e.what()}};
    }
    j["config"] = to_json(cfg);

    OutputSet out(cfg.out);
    out.write_json("analysis.json", j);
    out.commit();
    return j;
}

}  // namespace qho::app
