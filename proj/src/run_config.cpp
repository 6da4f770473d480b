#include "chi2cav/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "chi2cav/errors.hpp"

namespace chi2cav {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError(where + key, "unknown key \"" + where + key + "\"");
}

const json& require_object(const json& j, const std::string& name) {
    if (!j.is_object()) throw ConfigError(name, "\"" + name + "\" must be a JSON object");
    return j;
}

double number(const json& obj, const std::string& key, const std::string& where = "") {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + key, "missing required key \"" + where + key + "\"");
    if (!it->is_number()) throw ConfigError(where + key, "\"" + where + key + "\" must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + key, "\"" + where + key + "\" must be finite");
    return v;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where = "") {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::size_t count(const json& obj, const std::string& key, std::size_t fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw ConfigError(where + key, "\"" + where + key + "\" must be a positive integer");
    return v.get<std::size_t>();
}

std::string text(const json& obj, const std::string& key, const std::string& fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) throw ConfigError(where + key, "\"" + where + key + "\" must be a string");
    return obj.at(key).get<std::string>();
}

void require_positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError(key, "\"" + key + "\" must be > 0");
}

}  // namespace

RunConfig parse_config(const json& j) {
    require_object(j, "<root>");
    reject_unknown(j,
                   {"gamma1", "gamma1_c", "gamma_s", "gamma_i", "delta1", "delta_s", "delta_i", "mu1", "mu2", "nu_hz",
                    "pump_power", "tol", "kick", "sweep", "spectrum", "cascade", "output"},
                   "");
    RunConfig rc;
    CavityConfig& c = rc.cavity;
    const double g1 = number(j, "gamma1"), g1c = number(j, "gamma1_c");
    const double gs = number(j, "gamma_s"), gi = number(j, "gamma_i");
    require_positive(g1, "gamma1");
    require_positive(g1c, "gamma1_c");
    require_positive(gs, "gamma_s");
    require_positive(gi, "gamma_i");
    if (g1c > g1) throw ConfigError("gamma1_c", "\"gamma1_c\" must not exceed \"gamma1\"");
    c.fundamental = {g1, g1c, number_or(j, "delta1", 0.0)};
    c.signal = {gs, gs, number_or(j, "delta_s", 0.0)};
    c.idler = {gi, gi, number_or(j, "delta_i", 0.0)};
    c.mu1 = number(j, "mu1");
    c.mu2 = number(j, "mu2");
    c.nu = number(j, "nu_hz");
    require_positive(c.mu1, "mu1");
    require_positive(c.mu2, "mu2");
    require_positive(c.nu, "nu_hz");
    try {
        validate(c);
    } catch (const InvalidConfig& e) {
        throw ConfigError(e.key(), e.what());
    }

    if (j.contains("pump_power")) {
        rc.pump_power = number(j, "pump_power");
        if (!(*rc.pump_power >= 0.0)) throw ConfigError("pump_power", "\"pump_power\" must be >= 0");
    }
    rc.tol = number_or(j, "tol", rc.tol);
    if (!(rc.tol >= 1e-12 && rc.tol <= 1e-3)) throw ConfigError("tol", "\"tol\" must lie in [1e-12, 1e-3]");
    rc.kick = number_or(j, "kick", rc.kick);
    require_positive(rc.kick, "kick");

    if (j.contains("sweep")) {
        const json& s = require_object(j.at("sweep"), "sweep");
        reject_unknown(s, {"start", "stop", "steps", "spacing"}, "sweep.");
        SweepSpec sw;
        sw.start = number(s, "start", "sweep.");
        sw.stop = number(s, "stop", "sweep.");
        sw.steps = count(s, "steps", sw.steps, "sweep.");
        const std::string spacing = text(s, "spacing", "linear", "sweep.");
        if (spacing == "linear")
            sw.spacing = Spacing::linear;
        else if (spacing == "log")
            sw.spacing = Spacing::log;
        else
            throw ConfigError("sweep.spacing", "\"sweep.spacing\" must be \"linear\" or \"log\"");
        if (!(sw.start >= 0.0) || !(sw.stop >= sw.start))
            throw ConfigError("sweep.start", "\"sweep.start\"/\"sweep.stop\" must satisfy 0 <= start <= stop");
        if (sw.spacing == Spacing::log && !(sw.start > 0.0))
            throw ConfigError("sweep.start", "log spacing needs \"sweep.start\" > 0");
        rc.sweep = sw;
    }

    if (j.contains("spectrum")) {
        const json& s = require_object(j.at("spectrum"), "spectrum");
        reject_unknown(s, {"model", "n_scaled", "omega_max_over_gamma1", "points", "v1_in"}, "spectrum.");
        SpectrumSpec sp;
        const std::string model = text(s, "model", "eq6", "spectrum.");
        const auto m = parse_spectrum_model(model);
        if (!m) throw ConfigError("spectrum.model", "\"spectrum.model\" must be eq4, eq5 or eq6");
        sp.model = *m;
        sp.n_scaled = number_or(s, "n_scaled", sp.n_scaled, "spectrum.");
        sp.omega_max_over_gamma1 = number_or(s, "omega_max_over_gamma1", sp.omega_max_over_gamma1, "spectrum.");
        sp.points = count(s, "points", sp.points, "spectrum.");
        sp.v1_in = number_or(s, "v1_in", sp.v1_in, "spectrum.");
        if (!(sp.n_scaled >= 0.0)) throw ConfigError("spectrum.n_scaled", "\"spectrum.n_scaled\" must be >= 0");
        require_positive(sp.omega_max_over_gamma1, "spectrum.omega_max_over_gamma1");
        if (!(sp.v1_in >= 0.0)) throw ConfigError("spectrum.v1_in", "\"spectrum.v1_in\" must be >= 0");
        rc.spectrum = sp;
    }

    if (j.contains("cascade")) {
        const json& s = require_object(j.at("cascade"), "cascade");
        reject_unknown(s, {"delta_hz", "order"}, "cascade.");
        rc.cascade.delta_hz = number_or(s, "delta_hz", 0.0, "cascade.");
        if (!(rc.cascade.delta_hz >= 0.0)) throw ConfigError("cascade.delta_hz", "\"cascade.delta_hz\" must be >= 0");
        rc.cascade.order = static_cast<int>(count(s, "order", default_cascade_order, "cascade."));
    }

    if (j.contains("output")) {
        const json& s = require_object(j.at("output"), "output");
        reject_unknown(s, {"path", "format"}, "output.");
        rc.output.path = text(s, "path", "", "output.");
        const std::string fmt = text(s, "format", "csv", "output.");
        if (fmt == "csv")
            rc.output.format = OutputFormat::csv;
        else if (fmt == "json")
            rc.output.format = OutputFormat::json;
        else
            throw ConfigError("output.format", "\"output.format\" must be \"csv\" or \"json\"");
    }
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& rc) {
    const CavityConfig& c = rc.cavity;
    json j = {{"gamma1", c.fundamental.gamma_total}, {"gamma1_c", c.fundamental.gamma_coupling},
              {"gamma_s", c.signal.gamma_total},     {"gamma_i", c.idler.gamma_total},
              {"delta1", c.fundamental.detuning},    {"delta_s", c.signal.detuning},
              {"delta_i", c.idler.detuning},         {"mu1", c.mu1},
              {"mu2", c.mu2},                        {"nu_hz", c.nu},
              {"tol", rc.tol},                       {"kick", rc.kick}};
    if (rc.pump_power) j["pump_power"] = *rc.pump_power;
    if (rc.sweep)
        j["sweep"] = {{"start", rc.sweep->start},
                      {"stop", rc.sweep->stop},
                      {"steps", rc.sweep->steps},
                      {"spacing", rc.sweep->spacing == Spacing::log ? "log" : "linear"}};
    if (rc.spectrum)
        j["spectrum"] = {{"model", to_string(rc.spectrum->model)},
                         {"n_scaled", rc.spectrum->n_scaled},
                         {"omega_max_over_gamma1", rc.spectrum->omega_max_over_gamma1},
                         {"points", rc.spectrum->points},
                         {"v1_in", rc.spectrum->v1_in}};
    j["cascade"] = {{"delta_hz", rc.cascade.delta_hz}, {"order", rc.cascade.order}};
    j["output"] = {{"path", rc.output.path}, {"format", rc.output.format == OutputFormat::json ? "json" : "csv"}};
    return j;
}

std::vector<double> sweep_grid(const SweepSpec& s) {
    std::vector<double> grid;
    if (s.steps == 1) return {s.start};
    grid.reserve(s.steps);
    for (std::size_t k = 0; k < s.steps; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(s.steps - 1);
        if (s.spacing == Spacing::linear)
            grid.push_back(k + 1 == s.steps ? s.stop : s.start + f * (s.stop - s.start));
        else
            grid.push_back(k + 1 == s.steps ? s.stop : s.start * std::pow(s.stop / s.start, f));
    }
    return grid;
}

}  // namespace chi2cav
