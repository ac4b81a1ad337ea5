#include "geophase/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string>

#include "geophase/errors.hpp"
#include "geophase/io.hpp"
#include "json.hpp"

namespace geophase {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError("config: " + message); }

std::string joined(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) fail("unknown key '" + joined(where, it.key()) + "'");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_real(const json& obj, const char* key, const std::string& where, double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail("'" + joined(where, key) + "' must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail("'" + joined(where, key) + "' must be finite");
    return x;
}

long long get_integer(const json& obj, const char* key, const std::string& where,
                      long long fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail("'" + joined(where, key) + "' must be an integer");
    return v->get<long long>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail("'" + joined(where, key) + "' must be a boolean");
    return v->get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) fail("'" + joined(where, key) + "' must be a string");
    return v->get<std::string>();
}

std::vector<double> parse_triple(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) fail("'" + path + "' must be an array of 3 numbers");
    std::vector<double> out(3);
    for (int c = 0; c < 3; ++c) {
        if (!v[c].is_number() || !std::isfinite(v[c].get<double>())) {
            fail("'" + path + "' must contain finite numbers");
        }
        out[c] = v[c].get<double>();
    }
    return out;
}

void parse_levels(const json& obj, const char* key, const std::string& where, bool allow_empty,
                  std::vector<int>& out) {
    const json* v = find(obj, key);
    if (!v) return;
    const std::string path = joined(where, key);
    if (!v->is_array()) fail("'" + path + "' must be an array of integers");
    std::vector<int> levels;
    for (const json& e : *v) {
        if (!e.is_number_integer()) fail("'" + path + "' must contain integers");
        const long long n = e.get<long long>();
        if (n < 0 || n > 128) fail("'" + path + "' entries must lie in [0, 128]");
        levels.push_back(static_cast<int>(n));
    }
    if (!allow_empty && levels.empty()) fail("'" + path + "' must not be empty");
    out = std::move(levels);
}

CircuitSpec parse_circuit(const json& obj) {
    CircuitSpec spec;
    const std::string type = get_string(obj, "type", "circuit", "cap");
    if (type == "cap") {
        spec.kind = CircuitKind::Cap;
        check_keys(obj, "circuit", {"type", "omega0", "r", "samples", "reverse"});
        spec.omega0 = get_real(obj, "omega0", "circuit", spec.omega0);
        spec.r = get_real(obj, "r", "circuit", spec.r);
        if (spec.omega0 <= 0.0) fail("'circuit.omega0' must be positive");
        if (spec.r < 0.0) fail("'circuit.r' must be non-negative");
    } else if (type == "planar") {
        spec.kind = CircuitKind::Planar;
        check_keys(obj, "circuit", {"type", "x0", "z0", "radius", "samples", "reverse"});
        spec.x0 = get_real(obj, "x0", "circuit", spec.x0);
        spec.z0 = get_real(obj, "z0", "circuit", spec.z0);
        spec.radius = get_real(obj, "radius", "circuit", spec.radius);
        if (spec.radius < 0.0) fail("'circuit.radius' must be non-negative");
    } else if (type == "constant") {
        spec.kind = CircuitKind::Constant;
        check_keys(obj, "circuit", {"type", "point", "samples", "reverse"});
        if (const json* p = find(obj, "point")) spec.point = parse_triple(*p, "circuit.point");
    } else {
        fail("'circuit.type' must be one of \"cap\", \"planar\", \"constant\"");
    }
    const long long samples = get_integer(obj, "samples", "circuit", spec.samples);
    if (samples < 8 || samples > 65536) fail("'circuit.samples' must lie in [8, 65536]");
    spec.samples = static_cast<int>(samples);
    spec.reverse = get_bool(obj, "reverse", "circuit", spec.reverse);
    return spec;
}

GridSpec parse_grid(const json& obj) {
    GridSpec spec;
    check_keys(obj, "grid", {"auto", "q_min", "q_max", "n_points"});
    spec.automatic = get_bool(obj, "auto", "grid", spec.automatic);
    spec.q_min = get_real(obj, "q_min", "grid", spec.q_min);
    spec.q_max = get_real(obj, "q_max", "grid", spec.q_max);
    const long long n = get_integer(obj, "n_points", "grid", spec.n_points);
    if (!spec.automatic) {
        if (spec.q_max <= spec.q_min) fail("'grid.q_max' must exceed 'grid.q_min'");
        if (n < 128 || n > 4096 || (n & (n - 1)) != 0) {
            fail("'grid.n_points' must be a power of two in [128, 4096]");
        }
    }
    spec.n_points = static_cast<int>(n);
    return spec;
}

QuadratureSpec parse_quadrature(const json& obj) {
    QuadratureSpec spec;
    check_keys(obj, "quadrature", {"radial_order", "surface_order", "torus_order"});
    const long long radial = get_integer(obj, "radial_order", "quadrature", spec.radial_order);
    const long long surface = get_integer(obj, "surface_order", "quadrature", spec.surface_order);
    const long long torus = get_integer(obj, "torus_order", "quadrature", spec.torus_order);
    if (radial < 2 || radial > 512) fail("'quadrature.radial_order' must lie in [2, 512]");
    if (surface < 2 || surface > 128) fail("'quadrature.surface_order' must lie in [2, 128]");
    if (torus < 4 || torus > 4096) fail("'quadrature.torus_order' must lie in [4, 4096]");
    spec.radial_order = static_cast<int>(radial);
    spec.surface_order = static_cast<int>(surface);
    spec.torus_order = static_cast<int>(torus);
    return spec;
}

StepSpec parse_steps(const json& obj) {
    StepSpec spec;
    check_keys(obj, "steps", {"plaquette_delta", "chart_delta", "action_delta"});
    spec.plaquette_delta = get_real(obj, "plaquette_delta", "steps", spec.plaquette_delta);
    spec.chart_delta = get_real(obj, "chart_delta", "steps", spec.chart_delta);
    spec.action_delta = get_real(obj, "action_delta", "steps", spec.action_delta);
    for (const auto& [name, value] : {std::pair<const char*, double>{"plaquette_delta",
                                                                     spec.plaquette_delta},
                                      {"chart_delta", spec.chart_delta},
                                      {"action_delta", spec.action_delta}}) {
        if (value <= 0.0 || value > 0.5) fail(std::string("'steps.") + name +
                                              "' must lie in (0, 0.5]");
    }
    return spec;
}

ScheduleSpec parse_schedule(const json& obj) {
    ScheduleSpec spec;
    check_keys(obj, "schedule", {"total_time", "time_steps", "profile", "times"});
    spec.total_time = get_real(obj, "total_time", "schedule", spec.total_time);
    if (spec.total_time <= 0.0) fail("'schedule.total_time' must be positive");
    const long long steps = get_integer(obj, "time_steps", "schedule", spec.time_steps);
    if (steps < 1 || steps > 100000000) fail("'schedule.time_steps' must lie in [1, 1e8]");
    spec.time_steps = static_cast<int>(steps);
    spec.profile = get_string(obj, "profile", "schedule", spec.profile);
    if (spec.profile != "smooth" && spec.profile != "linear") {
        fail("'schedule.profile' must be \"smooth\" or \"linear\"");
    }
    if (const json* v = find(obj, "times")) {
        if (!v->is_array()) fail("'schedule.times' must be an array of numbers");
        double prev = 0.0;
        for (const json& e : *v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                fail("'schedule.times' must contain finite numbers");
            }
            const double t = e.get<double>();
            if (t <= prev) fail("'schedule.times' must be positive and strictly increasing");
            spec.times.push_back(t);
            prev = t;
        }
    }
    return spec;
}

std::string short_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

}  // namespace

const char* to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::Oscillator: return "oscillator";
        case SystemKind::GridCustom: return "grid-custom";
        case SystemKind::SeparableProduct: return "separable-product";
    }
    return "oscillator";
}

const char* to_string(CircuitKind kind) {
    switch (kind) {
        case CircuitKind::Cap: return "cap";
        case CircuitKind::Planar: return "planar";
        case CircuitKind::Constant: return "constant";
    }
    return "cap";
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("the top-level document must be a JSON object");
    check_keys(doc, "",
               {"system", "hbar", "levels", "circuit", "points", "grid", "quadrature", "steps",
                "schedule", "mixture_weights", "wz_levels", "maslov", "output_dir", "seed"});

    RunConfig cfg;

    const std::string system = get_string(doc, "system", "", "oscillator");
    if (system == "oscillator") {
        cfg.system = SystemKind::Oscillator;
    } else if (system == "grid-custom") {
        cfg.system = SystemKind::GridCustom;
    } else if (system == "separable-product") {
        cfg.system = SystemKind::SeparableProduct;
    } else {
        fail("'system' must be one of \"oscillator\", \"grid-custom\", \"separable-product\"");
    }

    cfg.hbar = get_real(doc, "hbar", "", cfg.hbar);
    if (cfg.hbar <= 0.0) fail("'hbar' must be positive");

    parse_levels(doc, "levels", "", /*allow_empty=*/false, cfg.levels);

    if (const json* v = find(doc, "circuit")) {
        if (!v->is_object()) fail("'circuit' must be an object");
        cfg.circuit = parse_circuit(*v);
    }

    if (const json* v = find(doc, "points")) {
        if (!v->is_array()) fail("'points' must be an array of [X, Y, Z] triples");
        for (std::size_t k = 0; k < v->size(); ++k) {
            cfg.points.push_back(parse_triple((*v)[k], "points[" + std::to_string(k) + "]"));
        }
    }

    if (const json* v = find(doc, "grid")) {
        if (!v->is_object()) fail("'grid' must be an object");
        cfg.grid = parse_grid(*v);
    }
    if (const json* v = find(doc, "quadrature")) {
        if (!v->is_object()) fail("'quadrature' must be an object");
        cfg.quadrature = parse_quadrature(*v);
    }
    if (const json* v = find(doc, "steps")) {
        if (!v->is_object()) fail("'steps' must be an object");
        cfg.steps = parse_steps(*v);
    }
    if (const json* v = find(doc, "schedule")) {
        if (!v->is_object()) fail("'schedule' must be an object");
        cfg.schedule = parse_schedule(*v);
    }

    if (const json* v = find(doc, "mixture_weights")) {
        if (!v->is_array()) fail("'mixture_weights' must be an array of numbers");
        double sum = 0.0;
        for (const json& e : *v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) {
                fail("'mixture_weights' must contain finite numbers");
            }
            const double w = e.get<double>();
            if (w < 0.0) fail("'mixture_weights' must be non-negative");
            cfg.mixture_weights.push_back(w);
            sum += w;
        }
        if (!cfg.mixture_weights.empty() && std::abs(sum - 1.0) > 1e-10) {
            fail("'mixture_weights' must sum to 1 within 1e-10");
        }
    }

    parse_levels(doc, "wz_levels", "", /*allow_empty=*/true, cfg.wz_levels);
    if (cfg.wz_levels.size() > 16) fail("'wz_levels' supports at most 16 levels");
    for (std::size_t a = 0; a < cfg.wz_levels.size(); ++a) {
        for (std::size_t b = a + 1; b < cfg.wz_levels.size(); ++b) {
            if (cfg.wz_levels[a] == cfg.wz_levels[b]) fail("'wz_levels' must be distinct");
        }
    }

    cfg.maslov = get_real(doc, "maslov", "", cfg.maslov);
    if (cfg.maslov < 0.0) fail("'maslov' must be non-negative");

    cfg.output_dir = get_string(doc, "output_dir", "", cfg.output_dir);
    if (cfg.output_dir.empty()) fail("'output_dir' must not be empty");

    if (const json* v = find(doc, "seed")) {
        if (v->is_number_unsigned()) {
            cfg.seed = v->get<std::uint64_t>();
        } else if (v->is_number_integer() && v->get<long long>() >= 0) {
            cfg.seed = static_cast<std::uint64_t>(v->get<long long>());
        } else {
            fail("'seed' must be a non-negative integer");
        }
    }

    return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

std::string resolved_config_json(const RunConfig& config) {
    ordered_json j;
    j["system"] = to_string(config.system);
    j["hbar"] = config.hbar;
    j["levels"] = config.levels;

    ordered_json c;
    c["type"] = to_string(config.circuit.kind);
    switch (config.circuit.kind) {
        case CircuitKind::Cap:
            c["omega0"] = config.circuit.omega0;
            c["r"] = config.circuit.r;
            break;
        case CircuitKind::Planar:
            c["x0"] = config.circuit.x0;
            c["z0"] = config.circuit.z0;
            c["radius"] = config.circuit.radius;
            break;
        case CircuitKind::Constant:
            c["point"] = config.circuit.point;
            break;
    }
    c["samples"] = config.circuit.samples;
    c["reverse"] = config.circuit.reverse;
    j["circuit"] = c;

    j["points"] = config.points;

    ordered_json g;
    g["auto"] = config.grid.automatic;
    g["q_min"] = config.grid.q_min;
    g["q_max"] = config.grid.q_max;
    g["n_points"] = config.grid.n_points;
    j["grid"] = g;

    ordered_json q;
    q["radial_order"] = config.quadrature.radial_order;
    q["surface_order"] = config.quadrature.surface_order;
    q["torus_order"] = config.quadrature.torus_order;
    j["quadrature"] = q;

    ordered_json s;
    s["plaquette_delta"] = config.steps.plaquette_delta;
    s["chart_delta"] = config.steps.chart_delta;
    s["action_delta"] = config.steps.action_delta;
    j["steps"] = s;

    ordered_json sch;
    sch["total_time"] = config.schedule.total_time;
    sch["time_steps"] = config.schedule.time_steps;
    sch["profile"] = config.schedule.profile;
    sch["times"] = config.schedule.times;
    j["schedule"] = sch;

    j["mixture_weights"] = config.mixture_weights;
    j["wz_levels"] = config.wz_levels;
    j["maslov"] = config.maslov;
    j["output_dir"] = config.output_dir;
    j["seed"] = config.seed;

    return j.dump(2) + "\n";
}

Circuit make_circuit(const CircuitSpec& spec) {
    Circuit circuit;
    switch (spec.kind) {
        case CircuitKind::Cap:
            circuit = make_cap_circuit(spec.omega0, spec.r, spec.samples);
            break;
        case CircuitKind::Planar:
            circuit = make_planar_circuit(spec.x0, spec.z0, spec.radius, spec.samples);
            break;
        case CircuitKind::Constant: {
            const ParamPoint X{spec.point[0], spec.point[1], spec.point[2]};
            circuit.path = [X](double) { return X; };
            circuit.samples = spec.samples;
            break;
        }
    }
    return spec.reverse ? reversed(circuit) : circuit;
}

Surface make_surface(const CircuitSpec& spec) {
    Surface sigma;
    switch (spec.kind) {
        case CircuitKind::Cap:
            sigma = make_cap_surface(spec.omega0, spec.r);
            break;
        case CircuitKind::Planar:
            sigma = make_planar_surface(spec.x0, spec.z0, spec.radius);
            break;
        case CircuitKind::Constant: {
            const ParamPoint X{spec.point[0], spec.point[1], spec.point[2]};
            sigma.map = [X](double, double) { return X; };
            sigma.boundary.path = [X](double) { return X; };
            sigma.boundary.samples = spec.samples;
            break;
        }
    }
    return spec.reverse ? reversed(sigma) : sigma;
}

std::string circuit_label(const CircuitSpec& spec) {
    std::string label;
    switch (spec.kind) {
        case CircuitKind::Cap:
            label = "cap(omega0=" + short_real(spec.omega0) + ", r=" + short_real(spec.r) + ")";
            break;
        case CircuitKind::Planar:
            label = "planar(x0=" + short_real(spec.x0) + ", z0=" + short_real(spec.z0) +
                    ", radius=" + short_real(spec.radius) + ")";
            break;
        case CircuitKind::Constant:
            label = "constant(" + short_real(spec.point[0]) + ", " + short_real(spec.point[1]) +
                    ", " + short_real(spec.point[2]) + ")";
            break;
    }
    if (spec.reverse) label += " reversed";
    return label;
}

Schedule::Profile schedule_profile(const ScheduleSpec& spec) {
    return spec.profile == "linear" ? Schedule::Profile::Linear : Schedule::Profile::Smooth;
}

}  // namespace geophase
