#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geophase/dynamics.hpp"
#include "geophase/geometry.hpp"
#include "geophase/quantum.hpp"

namespace geophase {

enum class SystemKind { Oscillator, GridCustom, SeparableProduct };
enum class CircuitKind { Cap, Planar, Constant };

// Parameter circuit and its spanning surface. Only the keys of the chosen
// type are accepted by the parser; `samples` and `reverse` apply to all types.
struct CircuitSpec {
    CircuitKind kind = CircuitKind::Cap;
    double omega0 = 1.0;  // cap: constant frequency along the rim
    double r = 1.0;       // cap: hyperbolic radius
    double x0 = 2.0;      // planar: circle center (x0, 0, z0) in the Y = 0 plane
    double z0 = 2.0;
    double radius = 0.5;
    std::vector<double> point = {1.0, 0.0, 1.0};  // constant: fixed (X, Y, Z)
    int samples = 256;
    bool reverse = false;
};

struct GridSpec {
    bool automatic = true;  // size the grid from the parameter span and levels
    double q_min = -16.0;
    double q_max = 16.0;
    int n_points = 256;
};

struct QuadratureSpec {
    int radial_order = 64;   // half-line rule for action integrals
    int surface_order = 12;  // tensor Gauss-Legendre order for surface pullbacks
    int torus_order = 64;    // periodic rule for angle averages
};

struct StepSpec {
    double plaquette_delta = 1e-2;  // relative parameter step of overlap plaquettes
    double chart_delta = 1e-4;      // relative step of chart derivatives in X
    double action_delta = 1e-4;     // absolute step of d/dI central differences
};

struct ScheduleSpec {
    double total_time = 200.0;
    int time_steps = 4000;
    std::string profile = "smooth";  // "smooth" (C^2 ramp) or "linear"
    std::vector<double> times;       // traversal times for convergence sweeps
};

struct RunConfig {
    SystemKind system = SystemKind::Oscillator;
    double hbar = 1.0;
    std::vector<int> levels = {0};
    CircuitSpec circuit;
    std::vector<std::vector<double>> points;  // parameter-grid samples (X, Y, Z)
    GridSpec grid;
    QuadratureSpec quadrature;
    StepSpec steps;
    ScheduleSpec schedule;
    std::vector<double> mixture_weights;  // optional: weights of levels 0..m-1
    std::vector<int> wz_levels;           // optional: holonomy frame levels
    double maslov = 0.5;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
};

// Parse and schema-validate a JSON document. Every field is optional and
// defaults as above; types and ranges are checked and unknown keys are
// rejected with their dotted path. Throws ConfigError on any violation.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Canonical JSON document with every default materialized. Parsing the
// result reproduces the same configuration (round-trip identity).
std::string resolved_config_json(const RunConfig& config);

// Library objects assembled from a validated spec.
Circuit make_circuit(const CircuitSpec& spec);
Surface make_surface(const CircuitSpec& spec);
std::string circuit_label(const CircuitSpec& spec);
Schedule::Profile schedule_profile(const ScheduleSpec& spec);

const char* to_string(SystemKind kind);
const char* to_string(CircuitKind kind);

}  // namespace geophase
