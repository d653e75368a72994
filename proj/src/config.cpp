#include "sqdf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sqdf/error.hpp"

namespace sqdf {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
    fail(Errc::config_error, fmt::format("{}: {}", field, msg));
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad(where.empty() ? "<root>" : where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.contains(key)) bad(where.empty() ? key : where + "." + key, "unknown key");
    }
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

double number(const json& v, const std::string& field) {
    if (!v.is_number()) bad(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(field, "must be finite");
    return x;
}

double positive(const json& v, const std::string& field) {
    const double x = number(v, field);
    if (!(x > 0.0)) bad(field, fmt::format("must be positive, got {}", x));
    return x;
}

std::vector<double> numbers(const json& v, const std::string& field) {
    if (!v.is_array()) bad(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], fmt::format("{}[{}]", field, i)));
    return out;
}

std::size_t count(const json& v, const std::string& field) {
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(field, "expected a nonnegative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

std::vector<double> grid(const json& v, const std::string& field) {
    std::vector<double> out;
    if (v.is_array()) {
        out = numbers(v, field);
    } else {
        only_keys(v, field, {"min", "max", "count", "spacing"});
        for (const char* key : {"min", "max", "count"}) {
            if (!v.contains(key)) bad(join(field, key), "missing");
        }
        const double lo = number(v["min"], join(field, "min"));
        const double hi = number(v["max"], join(field, "max"));
        const std::size_t m = count(v["count"], join(field, "count"));
        std::string spacing = "log";
        if (v.contains("spacing")) {
            if (!v["spacing"].is_string()) bad(join(field, "spacing"), "expected \"log\" or \"linear\"");
            spacing = v["spacing"].get<std::string>();
        }
        if (m < 2) bad(join(field, "count"), "need at least 2 points");
        if (!(hi > lo)) bad(field, "max must exceed min");
        if (spacing == "log") {
            if (!(lo > 0.0)) bad(join(field, "min"), "log spacing needs a positive minimum");
            for (std::size_t i = 0; i < m; ++i) {
                out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(m - 1)));
            }
        } else if (spacing == "linear") {
            for (std::size_t i = 0; i < m; ++i) {
                out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
            }
        } else {
            bad(join(field, "spacing"), fmt::format("expected \"log\" or \"linear\", got \"{}\"", spacing));
        }
        out.back() = hi;
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i] > out[i - 1])) bad(field, "grid must be strictly increasing");
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t m) {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(m - 1));
    out.back() = hi;
    return out;
}

NonlinearitySpec parse_nonlinearity(const json& v, const std::string& field) {
    if (!v.is_object()) bad(field, "expected an object");
    if (!v.contains("type") || !v["type"].is_string()) bad(join(field, "type"), "missing or not a string");
    NonlinearitySpec spec;
    spec.type = v["type"].get<std::string>();
    const auto& t = spec.type;
    if (t == "sat") {
        only_keys(v, field, {"type", "k"});
        if (v.contains("k")) spec.k = positive(v["k"], join(field, "k"));
    } else if (t == "relay" || t == "cubic") {
        only_keys(v, field, {"type"});
    } else if (t == "deadzone") {
        only_keys(v, field, {"type", "width"});
        if (!v.contains("width")) bad(join(field, "width"), "missing");
        spec.width = number(v["width"], join(field, "width"));
        if (spec.width < 0.0) bad(join(field, "width"), "must be nonnegative");
    } else if (t == "linear") {
        only_keys(v, field, {"type", "gain"});
        if (v.contains("gain")) spec.gain = number(v["gain"], join(field, "gain"));
    } else if (t == "table") {
        only_keys(v, field, {"type", "x", "y"});
        if (!v.contains("x") || !v.contains("y")) bad(field, "table needs x and y");
        spec.x = numbers(v["x"], join(field, "x"));
        spec.y = numbers(v["y"], join(field, "y"));
    } else if (t == "sat_delay" || t == "delay") {
        only_keys(v, field, {"type"});
    } else {
        bad(join(field, "type"), fmt::format("unknown nonlinearity \"{}\"", t));
    }
    try {
        make_operator(spec);
    } catch (const Error& e) {
        bad(field, e.what());
    }
    return spec;
}

SimConfig parse_sim(const json& v, const std::string& field, std::size_t& stride, double& window) {
    only_keys(v, field, {"solver", "step", "max_step", "rtol", "atol", "horizon", "transient_fraction", "initial_state",
                         "initial_output", "seed", "memory_window", "output_stride"});
    SimConfig cfg;
    if (v.contains("solver")) {
        const auto& s = v["solver"];
        if (s == "rk4") {
            cfg.solver = Solver::rk4;
        } else if (s == "rk45") {
            cfg.solver = Solver::rk45;
        } else {
            bad(join(field, "solver"), "expected \"rk4\" or \"rk45\"");
        }
    }
    if (v.contains("step")) cfg.step = positive(v["step"], join(field, "step"));
    if (v.contains("max_step")) cfg.max_step = positive(v["max_step"], join(field, "max_step"));
    if (v.contains("rtol")) cfg.rtol = positive(v["rtol"], join(field, "rtol"));
    if (v.contains("atol")) cfg.atol = positive(v["atol"], join(field, "atol"));
    if (v.contains("horizon")) cfg.horizon = positive(v["horizon"], join(field, "horizon"));
    if (v.contains("transient_fraction")) {
        cfg.transient_fraction = number(v["transient_fraction"], join(field, "transient_fraction"));
        if (!(cfg.transient_fraction >= 0.0 && cfg.transient_fraction < 1.0)) {
            bad(join(field, "transient_fraction"), "must lie in [0, 1)");
        }
    }
    if (v.contains("initial_state")) cfg.initial_state = numbers(v["initial_state"], join(field, "initial_state"));
    if (v.contains("initial_output")) cfg.initial_output = number(v["initial_output"], join(field, "initial_output"));
    if (v.contains("seed")) cfg.seed = count(v["seed"], join(field, "seed"));
    if (v.contains("memory_window") && !v["memory_window"].is_null()) {
        window = positive(v["memory_window"], join(field, "memory_window"));
    }
    if (v.contains("output_stride")) {
        stride = count(v["output_stride"], join(field, "output_stride"));
        if (stride == 0) bad(join(field, "output_stride"), "must be at least 1");
    }
    return cfg;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

StaticNonlinearity make_static(const NonlinearitySpec& spec) {
    const auto& t = spec.type;
    if (t == "sat") return StaticNonlinearity::saturation(spec.k);
    if (t == "relay") return StaticNonlinearity::relay();
    if (t == "deadzone") return StaticNonlinearity::dead_zone(spec.width);
    if (t == "cubic") return StaticNonlinearity::cubic();
    if (t == "linear") return StaticNonlinearity::linear(spec.gain);
    if (t == "table") return StaticNonlinearity::table(spec.x, spec.y);
    fail(Errc::invalid_argument, fmt::format("nonlinearity \"{}\" has memory and no static map", t));
}

SquarePreservingOp make_operator(const NonlinearitySpec& spec) {
    if (spec.type == "sat_delay") return saturated_delay_op();
    if (spec.type == "delay") return amplitude_delay_op();
    return as_square_preserving(make_static(spec));
}

Feedback make_feedback(const NonlinearitySpec& spec, double window) {
    if (spec.type == "sat_delay" || spec.type == "delay") {
        DelayFeedback d;
        d.phi = spec.type == "sat_delay" ? StaticNonlinearity::saturation(1.0) : StaticNonlinearity::linear(1.0);
        d.window = window;
        return d;
    }
    return make_static(spec);
}

SystemSpec with_gain(const SystemSpec& spec, double k) {
    SystemSpec out = spec;
    if (spec.k_target == KTarget::tf) {
        if (!spec.tf) fail(Errc::config_error, "k_target \"tf\" needs a tf entry");
        out.tf = spec.tf->scaled(k);
        return out;
    }
    if (!spec.nonlinearity) fail(Errc::config_error, "k_target \"nonlinearity\" needs a nonlinearity entry");
    auto& nl = *out.nonlinearity;
    if (nl.type == "sat") {
        nl.k = k;
    } else if (nl.type == "linear") {
        nl.gain = k;
    } else {
        fail(Errc::config_error, fmt::format("nonlinearity \"{}\" has no gain to sweep; use k_target \"tf\"", nl.type));
    }
    return out;
}

SystemSpec parse_config(std::string_view text, std::string_view source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(Errc::config_error, fmt::format("{}:{}: invalid JSON: {}", source, line_of(text, e.byte), e.what()));
    }
    try {
        only_keys(doc, "", {"tf", "nonlinearity", "T_grid", "alpha_grid", "omega_grid", "n", "T_init", "tol", "max_iter",
                            "sim", "k_sweep", "k_target"});
        SystemSpec spec;
        if (doc.contains("tf")) {
            const auto& v = doc["tf"];
            only_keys(v, "tf", {"num", "den"});
            if (!v.contains("num") || !v.contains("den")) bad("tf", "needs num and den");
            try {
                spec.tf = TransferFunction(numbers(v["num"], "tf.num"), numbers(v["den"], "tf.den"));
            } catch (const Error& e) {
                if (e.code() == Errc::config_error) throw;
                bad("tf", e.what());
            }
        }
        if (doc.contains("nonlinearity")) spec.nonlinearity = parse_nonlinearity(doc["nonlinearity"], "nonlinearity");
        spec.T_grid = doc.contains("T_grid") ? grid(doc["T_grid"], "T_grid") : log_grid(0.2, 100.0, 400);
        spec.alpha_grid = doc.contains("alpha_grid") ? grid(doc["alpha_grid"], "alpha_grid") : log_grid(1e-3, 1e3, 600);
        spec.omega_grid = doc.contains("omega_grid") ? grid(doc["omega_grid"], "omega_grid") : log_grid(1e-2, 1e2, 2000);
        for (double T : spec.T_grid) {
            if (!(T > 0.0)) bad("T_grid", "periods must be positive");
        }
        for (double w : spec.omega_grid) {
            if (!(w > 0.0)) bad("omega_grid", "frequencies must be positive");
        }
        for (double a : spec.alpha_grid) {
            if (a == 0.0) bad("alpha_grid", "amplitudes must be nonzero");
        }
        if (doc.contains("n")) {
            spec.n = count(doc["n"], "n");
            if (spec.n < 8 || spec.n % 2 != 0) bad("n", "must be even and at least 8");
        }
        if (doc.contains("T_init")) spec.T_init = positive(doc["T_init"], "T_init");
        if (doc.contains("tol")) spec.tol = positive(doc["tol"], "tol");
        if (doc.contains("max_iter")) {
            const auto m = count(doc["max_iter"], "max_iter");
            if (m < 2) bad("max_iter", "must be at least 2");
            spec.max_iter = static_cast<int>(m);
        }
        if (doc.contains("sim")) spec.sim = parse_sim(doc["sim"], "sim", spec.output_stride, spec.memory_window);
        if (doc.contains("k_sweep")) spec.k_sweep = numbers(doc["k_sweep"], "k_sweep");
        for (std::size_t i = 1; i < spec.k_sweep.size(); ++i) {
            if (!(spec.k_sweep[i] > spec.k_sweep[i - 1])) bad("k_sweep", "gains must be strictly increasing");
        }
        if (doc.contains("k_target")) {
            const auto& v = doc["k_target"];
            if (v == "nonlinearity") {
                spec.k_target = KTarget::nonlinearity;
            } else if (v == "tf") {
                spec.k_target = KTarget::tf;
            } else {
                bad("k_target", "expected \"nonlinearity\" or \"tf\"");
            }
        }
        return spec;
    } catch (const Error& e) {
        if (e.code() == Errc::config_error) fail(Errc::config_error, fmt::format("{}: {}", source, e.what()));
        throw;
    }
}

SystemSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::config_error, fmt::format("{}: cannot open", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

}  // namespace sqdf
