#include "scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qbd/errors.hpp"
#include "qbd/states.hpp"

namespace qbd::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config: " + path + ": " + what);
}

void expect_object(const json& node, const std::string& path,
                   const std::set<std::string>& allowed) {
    if (!node.is_object()) fail(path, "expected an object");
    for (const auto& item : node.items()) {
        if (!allowed.count(item.key()))
            fail(path.empty() ? item.key() : path + "." + item.key(),
                 "unknown field");
    }
}

double get_number(const json& node, const std::string& path) {
    if (!node.is_number()) fail(path, "expected a number");
    const double v = node.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double get_number_or(const json& obj, const char* key, const std::string& path,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    return get_number(obj.at(key), path + "." + key);
}

int get_int(const json& node, const std::string& path) {
    if (!node.is_number_integer()) fail(path, "expected an integer");
    return node.get<int>();
}

std::string get_string(const json& node, const std::string& path) {
    if (!node.is_string()) fail(path, "expected a string");
    return node.get<std::string>();
}

void parse_state(const json& node, StateConfig& out) {
    expect_object(node, "state",
                  {"type", "sigma", "a", "c", "b", "r", "u", "omega0"});
    if (node.contains("type"))
        out.type = get_string(node.at("type"), "state.type");

    const std::set<std::string> known = {"gaussian", "gaussian_ac", "displaced",
                                        "cat", "mehler"};
    if (!known.count(out.type))
        fail("state.type", "must be one of gaussian, gaussian_ac, displaced, "
                           "cat, mehler (got '" + out.type + "')");

    out.sigma = get_number_or(node, "sigma", "state", out.sigma);
    out.a = get_number_or(node, "a", "state", out.a);
    out.c = get_number_or(node, "c", "state", out.c);
    out.b = get_number_or(node, "b", "state", out.b);
    out.r = get_number_or(node, "r", "state", out.r);
    out.u = get_number_or(node, "u", "state", out.u);
    out.omega0 = get_number_or(node, "omega0", "state", out.omega0);

    if ((out.type == "gaussian" || out.type == "cat") && !(out.sigma > 0.0))
        fail("state.sigma", "must be > 0");
    if (out.type == "gaussian_ac" || out.type == "displaced") {
        if (!(out.a > std::abs(out.c)))
            fail("state.a", "need a > |c| for a normalizable state");
    }
    if (out.type == "cat" && !(out.r >= 0.0)) fail("state.r", "must be >= 0");
    if (out.type == "mehler") {
        if (!(out.omega0 > 0.0)) fail("state.omega0", "must be > 0");
        if (!(out.u >= 0.0 && out.u < 1.0))
            fail("state.u", "must lie in [0, 1)");
    }
}

void parse_bath(const json& node, BathParams& out) {
    expect_object(node, "bath", {"gamma", "D", "temperature", "hbar", "mass"});
    const bool hasD = node.contains("D");
    const bool hasT = node.contains("temperature");
    if (hasD == hasT)
        fail("bath", "exactly one of D or temperature must be given");

    const double gamma = get_number_or(node, "gamma", "bath", 0.0);
    const double hbar = get_number_or(node, "hbar", "bath", 1.0);
    const double mass = get_number_or(node, "mass", "bath", 1.0);
    if (!(gamma >= 0.0)) fail("bath.gamma", "must be >= 0");
    if (!(hbar > 0.0)) fail("bath.hbar", "must be > 0");
    if (!(mass > 0.0)) fail("bath.mass", "must be > 0");

    if (hasD) {
        const double D = get_number(node.at("D"), "bath.D");
        if (!(D >= 0.0)) fail("bath.D", "must be >= 0");
        out = BathParams{gamma, D, hbar, mass};
    } else {
        const double kT = get_number(node.at("temperature"), "bath.temperature");
        if (!(kT >= 0.0)) fail("bath.temperature", "must be >= 0");
        out = BathParams{gamma, 2.0 * mass * gamma * kT / (hbar * hbar), hbar,
                         mass};
    }
    try {
        out.validate();
    } catch (const Error& e) {
        fail("bath", e.what());
    }
}

void parse_sweep(const json& node, SweepConfig& out) {
    expect_object(node, "sweep",
                  {"tMin", "tMax", "nPoints", "spacing", "inTauD"});
    out.tMin = get_number_or(node, "tMin", "sweep", out.tMin);
    out.tMax = get_number_or(node, "tMax", "sweep", out.tMax);
    if (node.contains("nPoints"))
        out.nPoints = get_int(node.at("nPoints"), "sweep.nPoints");
    if (node.contains("spacing"))
        out.spacing = get_string(node.at("spacing"), "sweep.spacing");
    if (node.contains("inTauD")) {
        if (!node.at("inTauD").is_boolean())
            fail("sweep.inTauD", "expected a boolean");
        out.inTauD = node.at("inTauD").get<bool>();
    }

    if (out.spacing != "log" && out.spacing != "linear")
        fail("sweep.spacing", "must be 'log' or 'linear'");
    if (out.nPoints < 1) fail("sweep.nPoints", "must be >= 1");
    if (out.spacing == "log" && !(out.tMin > 0.0))
        fail("sweep.tMin", "must be > 0 for log spacing");
    if (!(out.tMin >= 0.0)) fail("sweep.tMin", "must be >= 0");
    if (out.nPoints > 1 && !(out.tMax > out.tMin))
        fail("sweep.tMax", "must exceed tMin");
}

void parse_oracle(const json& node, OracleConfig& out) {
    expect_object(node, "oracle", {"N", "L", "dt", "tMaxGrid"});
    if (node.contains("N")) out.N = get_int(node.at("N"), "oracle.N");
    out.L = get_number_or(node, "L", "oracle", out.L);
    out.dt = get_number_or(node, "dt", "oracle", out.dt);
    out.tMaxGrid = get_number_or(node, "tMaxGrid", "oracle", out.tMaxGrid);

    if (out.N < 8 || out.N > 32768) fail("oracle.N", "must lie in [8, 32768]");
    if (!(out.L >= 0.0)) fail("oracle.L", "must be >= 0 (0 = auto)");
    if (!(out.dt >= 0.0)) fail("oracle.dt", "must be >= 0 (0 = auto)");
    if (!(out.tMaxGrid > 0.0)) fail("oracle.tMaxGrid", "must be > 0");
}

void parse_output(const json& node, std::string& path) {
    if (node.is_string()) {
        path = node.get<std::string>();
        return;
    }
    expect_object(node, "output", {"path", "format"});
    if (node.contains("path"))
        path = get_string(node.at("path"), "output.path");
    if (node.contains("format")) {
        const std::string fmt = get_string(node.at("format"), "output.format");
        if (fmt != "csv") fail("output.format", "only 'csv' is supported");
    }
}

}  // namespace

GaussianMixtureState ScenarioConfig::make_state() const {
    if (state.type == "gaussian")
        return make_gaussian_packet(state.sigma, 0.0, 0.0, bath.hbar);
    if (state.type == "gaussian_ac")
        return make_gaussian_ac(state.a, state.c);
    if (state.type == "displaced")
        return make_gaussian_ac(state.a, state.c, state.b);
    if (state.type == "cat")
        return make_cat(state.sigma, 2.0 * state.r);
    if (state.type == "mehler")
        return make_thermal_oscillator(
            std::sqrt(bath.hbar / (bath.mass * state.omega0)), state.u);
    throw ValidationError("config: state.type: unknown type '" + state.type +
                          "'");
}

void ScenarioConfig::envelope(double* a, double* c) const {
    if (state.type == "gaussian" || state.type == "cat") {
        *a = 1.0 / (state.sigma * state.sigma);
        *c = 0.0;
    } else if (state.type == "gaussian_ac" || state.type == "displaced") {
        *a = state.a;
        *c = state.c;
    } else if (state.type == "mehler") {
        const double xi0sq = bath.hbar / (bath.mass * state.omega0);
        const double inv = 1.0 / (xi0sq * (1.0 - state.u * state.u));
        *a = (1.0 + state.u * state.u) * inv;
        *c = 2.0 * state.u * inv;
    } else {
        throw ValidationError("config: state.type: unknown type '" +
                              state.type + "'");
    }
}

ScenarioConfig parse_scenario(const nlohmann::json& doc) {
    ScenarioConfig cfg;
    expect_object(doc, "", {"state", "bath", "sweep", "oracle", "output"});
    if (doc.contains("state")) parse_state(doc.at("state"), cfg.state);
    if (doc.contains("bath")) parse_bath(doc.at("bath"), cfg.bath);
    if (doc.contains("sweep")) parse_sweep(doc.at("sweep"), cfg.sweep);
    if (doc.contains("oracle")) {
        OracleConfig oc;
        parse_oracle(doc.at("oracle"), oc);
        cfg.oracle = oc;
    }
    if (doc.contains("output")) parse_output(doc.at("output"), cfg.outputPath);
    return cfg;
}

void apply_override(nlohmann::json& doc, const std::string& dotPath,
                    const std::string& value) {
    if (dotPath.empty()) throw ValidationError("override: empty field path");

    nlohmann::json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotPath.find('.', start);
        const std::string key = dotPath.substr(
            start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty())
            throw ValidationError("override: bad field path '" + dotPath + "'");
        if (dot == std::string::npos) {
            // Leaf: numbers and booleans become typed JSON values so the
            // scenario parser sees the same document a file would produce.
            char* end = nullptr;
            const double num = std::strtod(value.c_str(), &end);
            if (end && *end == '\0' && end != value.c_str()) {
                if (num == static_cast<long long>(num) &&
                    std::abs(num) < 9e15 &&
                    value.find_first_of(".eE") == std::string::npos)
                    (*node)[key] = static_cast<long long>(num);
                else
                    (*node)[key] = num;
            } else if (value == "true" || value == "false") {
                (*node)[key] = (value == "true");
            } else {
                (*node)[key] = value;
            }
            return;
        }
        nlohmann::json& next = (*node)[key];
        if (!next.is_object() && !next.is_null())
            throw ValidationError("override: '" + dotPath.substr(0, dot) +
                                  "' is not an object");
        node = &next;
        start = dot + 1;
    }
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("config: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ValidationError("config: '" + path + "': " + e.what());
    }
    return doc;
}

}  // namespace qbd::cli
