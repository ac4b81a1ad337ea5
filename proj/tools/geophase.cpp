// Batch front door: configuration parsing, experiment orchestration, and file
// emission for the curvature / phase / Wigner / Hannay / dynamics-verification
// computations of the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geophase/classical.hpp"
#include "geophase/config.hpp"
#include "geophase/dynamics.hpp"
#include "geophase/errors.hpp"
#include "geophase/geometry.hpp"
#include "geophase/io.hpp"
#include "geophase/phasespace.hpp"
#include "geophase/quantum.hpp"
#include "geophase/specfun.hpp"
#include "geophase/wigner.hpp"
#include "json.hpp"

namespace {

using geophase::ActionAngleChart;
using geophase::BerryPhaseResult;
using geophase::Circuit;
using geophase::CircuitKind;
using geophase::ClassicalTwoFormFamily;
using geophase::ConfigError;
using geophase::CsvTable;
using geophase::DegenerateFamily;
using geophase::DomainError;
using geophase::NumericalError;
using geophase::ParamPoint;
using geophase::PhaseReport;
using geophase::PhaseSpaceGrid;
using geophase::QuantumBackend;
using geophase::QuantumStateFamily;
using geophase::RadialWigner;
using geophase::RunConfig;
using geophase::Schedule;
using geophase::SpatialGrid;
using geophase::Surface;
using geophase::SystemKind;
using nlohmann::ordered_json;

std::string short_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string point_text(const ParamPoint& X) {
    return "(" + short_real(X[0]) + ", " + short_real(X[1]) + ", " + short_real(X[2]) + ")";
}

void ensure_elliptic(const ParamPoint& X) {
    if (!geophase::oscillator_domain_ok(X)) {
        throw DomainError("parameter point " + point_text(X) +
                          " lies outside the elliptic domain (X*Z - Y^2 must be positive "
                          "with Z > 0)");
    }
}

// ---------------------------------------------------------------------------
// Config-driven assembly

struct CommandContext {
    RunConfig cfg;
    std::filesystem::path out;

    std::string file(const std::string& name) const { return (out / name).string(); }
};

CommandContext prepare(const RunConfig& cfg) {
    CommandContext ctx;
    ctx.cfg = cfg;
    ctx.out = cfg.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + ctx.out.string() +
                          "': " + ec.message());
    }
    geophase::write_text_atomic(ctx.file("resolved_config.json"),
                                geophase::resolved_config_json(cfg));
    return ctx;
}

int max_level(const RunConfig& cfg) {
    int m = 0;
    for (int n : cfg.levels) m = std::max(m, n);
    for (int n : cfg.wz_levels) m = std::max(m, n);
    m = std::max(m, static_cast<int>(cfg.mixture_weights.size()) - 1);
    return m;
}

std::vector<ParamPoint> circuit_samples(const Circuit& circuit, int count) {
    std::vector<ParamPoint> pts;
    pts.reserve(count + 1);
    for (int k = 0; k <= count; ++k) pts.push_back(circuit.path(double(k) / count));
    return pts;
}

std::vector<ParamPoint> sweep_points(const RunConfig& cfg, const Circuit& circuit) {
    std::vector<ParamPoint> pts;
    if (!cfg.points.empty()) {
        for (const std::vector<double>& p : cfg.points) pts.push_back(ParamPoint{p[0], p[1], p[2]});
    } else if (cfg.circuit.kind == CircuitKind::Constant) {
        pts.push_back(circuit.path(0.0));
    } else {
        for (int k = 0; k < 16; ++k) pts.push_back(circuit.path(k / 16.0));
    }
    for (const ParamPoint& X : pts) ensure_elliptic(X);
    return pts;
}

SpatialGrid choose_grid(const RunConfig& cfg, const std::vector<ParamPoint>& span, int n_max,
                        bool for_wigner) {
    if (!cfg.grid.automatic) {
        const SpatialGrid grid{cfg.grid.q_min, cfg.grid.q_max, cfg.grid.n_points};
        geophase::validate_grid(grid);
        return grid;
    }
    return geophase::auto_grid(span, cfg.hbar, n_max, for_wigner);
}

QuantumStateFamily choose_family(const RunConfig& cfg, const SpatialGrid& grid) {
    if (cfg.system == SystemKind::GridCustom) {
        return geophase::grid_state_family(grid, cfg.hbar, max_level(cfg) + 3);
    }
    return geophase::analytic_state_family(grid, cfg.hbar);
}

ClassicalTwoFormFamily chart_curvature(const RunConfig& cfg) {
    return geophase::classical_curvature_family(geophase::oscillator_chart(),
                                                cfg.steps.chart_delta);
}

// Multiply every level by a random smooth parameter-dependent phase; all
// gauge-invariant outputs must not move. Seeded deterministically.
QuantumStateFamily gauge_redressed(const QuantumStateFamily& base, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.2, 1.2);
    std::uniform_real_distribution<double> wave(-1.0, 1.0);
    std::uniform_real_distribution<double> offset(0.0, 2.0 * M_PI);
    const double a1 = amp(rng), a2 = amp(rng);
    const double k1x = wave(rng), k1y = wave(rng), k1z = wave(rng);
    const double k2x = wave(rng), k2y = wave(rng), k2z = wave(rng);
    const double c1 = offset(rng), c2 = offset(rng);
    auto phi = [=](int n, const ParamPoint& X) {
        const double t1 = k1x * X[0] + k1y * X[1] + k1z * X[2] + c1 + 0.7 * n;
        const double t2 = k2x * X[0] + k2y * X[1] + k2z * X[2] + c2 - 0.4 * n;
        return a1 * std::sin(t1) + a2 * std::cos(t2);
    };
    QuantumStateFamily out = base;
    out.state = [base, phi](int n, const ParamPoint& X) {
        Eigen::VectorXcd psi = base.state(n, X);
        psi *= std::exp(std::complex<double>(0.0, phi(n, X)));
        return psi;
    };
    return out;
}

std::string level_suffix(const RunConfig& cfg, int n) {
    return cfg.levels.size() > 1 ? "_n" + std::to_string(n) : "";
}

ordered_json conventions_json(const RunConfig& cfg) {
    ordered_json c;
    c["orientation"] =
        "surfaces are parameterized over (u, v) in [0,1]^2 with the boundary circuit traced "
        "by the u = 1 edge; 'reverse' remaps v -> 1 - v (circuits: s -> 1 - s)";
    c["gamma"] =
        "gamma = - surface integral of the level curvature; 'raw' is the unwrapped value, "
        "'principal' wraps into (-pi, pi]";
    c["hannay"] =
        "delta theta = - d/dI of the surface integral of the angle-averaged classical "
        "two-form <d_i p d_j q - d_j p d_i q>_theta";
    c["mixed_phase"] =
        "phi = + surface integral of the statistical curvature F_rho; for a pure level "
        "phi = -gamma_n";
    c["theta_origin"] = "theta = 0 at q = 0 with p + (Y/Z) q maximal, increasing with the flow";
    c["action"] = "level n carries action I = hbar * (n + maslov)";
    c["curvature_columns"] = "F_YZ, F_ZX, F_XY are the (Y,Z), (Z,X), (X,Y) plane components";
    c["hbar"] = cfg.hbar;
    return c;
}

// ---------------------------------------------------------------------------
// curvature: both curvature routes swept over explicit parameter points.

void run_curvature(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Circuit circuit = geophase::make_circuit(cfg.circuit);
    const std::vector<ParamPoint> points = sweep_points(cfg, circuit);
    const SpatialGrid grid = choose_grid(cfg, points, max_level(cfg) + 2, false);
    const QuantumStateFamily family = choose_family(cfg, grid);
    const ClassicalTwoFormFamily Fc = chart_curvature(cfg);
    const std::vector<std::string> header = {"X", "Y", "Z", "F_YZ", "F_ZX", "F_XY"};

    auto append_row = [](CsvTable& table, const ParamPoint& X, const Eigen::MatrixXd& F) {
        table.rows.push_back({X[0], X[1], X[2], F(1, 2), F(2, 0), F(0, 1)});
    };

    auto emit = [&](const std::string& suffix,
                    const std::function<Eigen::MatrixXd(const ParamPoint&)>& hilbert,
                    const std::function<Eigen::MatrixXd(const ParamPoint&)>& phasespace) {
        CsvTable h{header, {}}, ps{header, {}}, diff{header, {}};
        for (const ParamPoint& X : points) {
            const Eigen::MatrixXd Fh = hilbert(X);
            const Eigen::MatrixXd Fp = phasespace(X);
            append_row(h, X, Fh);
            append_row(ps, X, Fp);
            append_row(diff, X, Fh - Fp);
        }
        geophase::write_csv(ctx.file("curvature_hilbert" + suffix + ".csv"), h);
        geophase::write_csv(ctx.file("curvature_phasespace" + suffix + ".csv"), ps);
        geophase::write_csv(ctx.file("curvature_diff" + suffix + ".csv"), diff);
    };

    if (cfg.system == SystemKind::SeparableProduct) {
        // One decoupled mode per entry of `levels`, sharing the parameter point;
        // the mode curvatures add.
        std::vector<RadialWigner> profiles;
        std::vector<ClassicalTwoFormFamily> modes;
        std::vector<geophase::TwoFormField> fields;
        for (int n : cfg.levels) {
            profiles.push_back(geophase::oscillator_radial_wigner(n, cfg.hbar));
            modes.push_back(Fc);
            fields.push_back(
                geophase::berry_curvature_field(family, n, cfg.steps.plaquette_delta));
        }
        emit("",
             [&](const ParamPoint& X) {
                 Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 3);
                 for (const geophase::TwoFormField& f : fields) F += f.eval(X);
                 return F;
             },
             [&](const ParamPoint& X) {
                 return geophase::curvature_separable(profiles, modes, X, cfg.hbar,
                                                      cfg.quadrature.radial_order);
             });
        return;
    }

    for (int n : cfg.levels) {
        const geophase::TwoFormField field =
            geophase::berry_curvature_field(family, n, cfg.steps.plaquette_delta);
        const RadialWigner profile = geophase::oscillator_radial_wigner(n, cfg.hbar);
        emit(level_suffix(cfg, n),
             [&](const ParamPoint& X) { return field.eval(X); },
             [&](const ParamPoint& X) {
                 return geophase::curvature_from_wigner(profile, Fc, X, cfg.hbar,
                                                        cfg.quadrature.radial_order);
             });
    }
}

// ---------------------------------------------------------------------------
// phase: the full multi-route report for one circuit/surface pair.

void run_phase(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.system == SystemKind::SeparableProduct) {
        throw ConfigError("the phase command supports the oscillator and grid-custom systems");
    }
    const Circuit circuit = geophase::make_circuit(cfg.circuit);
    const Surface sigma = geophase::make_surface(cfg.circuit);
    const std::vector<ParamPoint> span = circuit_samples(circuit, cfg.circuit.samples);
    for (const ParamPoint& X : span) ensure_elliptic(X);
    const SpatialGrid grid = choose_grid(cfg, span, max_level(cfg) + 2, false);
    const QuantumStateFamily family = choose_family(cfg, grid);
    const QuantumStateFamily redressed = gauge_redressed(family, cfg.seed);
    const ActionAngleChart chart = geophase::oscillator_chart();
    const ClassicalTwoFormFamily Fc = chart_curvature(cfg);
    const std::string label = geophase::circuit_label(cfg.circuit);

    ordered_json report;
    report["circuit"] = label;
    report["surface"] = label;
    report["hbar"] = cfg.hbar;
    report["maslov"] = cfg.maslov;
    report["conventions"] = conventions_json(cfg);

    ordered_json levels = ordered_json::array();
    for (int n : cfg.levels) {
        const BerryPhaseResult gq = geophase::berry_phase(
            family, n, sigma, cfg.steps.plaquette_delta, cfg.quadrature.surface_order);
        const RadialWigner profile = geophase::oscillator_radial_wigner(n, cfg.hbar);
        const BerryPhaseResult gps =
            geophase::phase_from_wigner(profile, Fc, sigma, cfg.hbar,
                                        cfg.quadrature.radial_order,
                                        cfg.quadrature.surface_order);
        const BerryPhaseResult gps_refined =
            geophase::phase_from_wigner(profile, Fc, sigma, cfg.hbar,
                                        cfg.quadrature.radial_order,
                                        cfg.quadrature.surface_order + 4);
        const double residual = std::abs(gps.raw - gps_refined.raw);
        const double action = cfg.hbar * (n + cfg.maslov);
        const double hannay = geophase::hannay_angle(chart, action, sigma,
                                                     cfg.steps.action_delta,
                                                     cfg.quadrature.surface_order);
        const double gq_redressed =
            geophase::berry_phase(redressed, n, sigma, cfg.steps.plaquette_delta,
                                  cfg.quadrature.surface_order)
                .raw;
        const double gauge_delta = std::abs(gq.raw - gq_redressed);

        PhaseReport rep;
        rep.circuit_id = label;
        rep.surface_id = label;
        rep.gamma_q = gq;
        rep.gamma_ps = gps;
        rep.hannay = hannay;
        rep.dynamical_phase = 0.0;
        rep.diagnostics.quadrature_residual = residual;
        rep.diagnostics.gauge_note =
            "loop quantities recomputed after a random smooth gauge redress (seed " +
            std::to_string(cfg.seed) + "): |delta gamma_q| = " + short_real(gauge_delta);
        geophase::validate_report(rep);

        ordered_json entry;
        entry["n"] = n;
        entry["action"] = action;
        entry["gamma_q"] = {{"raw", gq.raw}, {"principal", gq.principal}};
        entry["gamma_ps"] = {{"raw", gps.raw}, {"principal", gps.principal}};
        entry["hannay"] = hannay;
        entry["dynamical_phase"] = 0.0;
        entry["diagnostics"] = {{"quadrature_residual", residual},
                                {"gauge_redress_delta", gauge_delta},
                                {"gauge_note", rep.diagnostics.gauge_note}};
        levels.push_back(entry);
    }
    report["levels"] = levels;

    if (!cfg.mixture_weights.empty()) {
        std::vector<RadialWigner> profiles;
        for (std::size_t n = 0; n < cfg.mixture_weights.size(); ++n) {
            profiles.push_back(geophase::oscillator_radial_wigner(static_cast<int>(n), cfg.hbar));
        }
        const RadialWigner mixed =
            geophase::mixed_radial_wigner(cfg.mixture_weights, profiles);
        const double phi =
            geophase::mixed_phase(mixed, Fc, sigma, cfg.hbar, cfg.quadrature.radial_order,
                                  cfg.quadrature.surface_order);
        if (!std::isfinite(phi)) throw NumericalError("mixed phase is not finite");
        report["mixed_weights"] = cfg.mixture_weights;
        report["mixed_phase"] = phi;
    }

    if (!cfg.wz_levels.empty()) {
        DegenerateFamily frame;
        frame.size = static_cast<int>(cfg.wz_levels.size());
        frame.inner_scale = grid.spacing();
        const std::vector<int> wz_levels = cfg.wz_levels;
        frame.frame = [family, wz_levels](const ParamPoint& X) {
            std::vector<Eigen::VectorXcd> states;
            states.reserve(wz_levels.size());
            for (int n : wz_levels) states.push_back(family.state(n, X));
            return states;
        };
        geophase::validate_family(frame, circuit.path(0.0));
        const Eigen::MatrixXcd W = geophase::wz_connection_loop(frame, circuit);
        if (!W.allFinite()) throw NumericalError("holonomy matrix is not finite");
        ordered_json rows = ordered_json::array();
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            ordered_json row = ordered_json::array();
            for (Eigen::Index j = 0; j < W.cols(); ++j) {
                row.push_back({W(i, j).real(), W(i, j).imag()});
            }
            rows.push_back(row);
        }
        report["wz_levels"] = cfg.wz_levels;
        report["wz_holonomy"] = rows;
    }

    geophase::write_text_atomic(ctx.file("phase_report.json"), report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// wigner: phase-space raster and action-radial profile of the chosen levels.

void run_wigner(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.system == SystemKind::SeparableProduct) {
        throw ConfigError("the wigner command supports the oscillator and grid-custom systems");
    }
    const Circuit circuit = geophase::make_circuit(cfg.circuit);
    const ParamPoint X0 = cfg.points.empty()
                              ? circuit.path(0.0)
                              : ParamPoint{cfg.points[0][0], cfg.points[0][1], cfg.points[0][2]};
    ensure_elliptic(X0);
    const SpatialGrid grid = choose_grid(cfg, {X0}, max_level(cfg) + 2, /*for_wigner=*/true);
    const QuantumStateFamily family = choose_family(cfg, grid);
    const PhaseSpaceGrid ps{grid, cfg.hbar};
    geophase::validate_phase_space_grid(ps);

    for (int n : cfg.levels) {
        const Eigen::VectorXcd psi = family.state(n, X0);
        const Eigen::MatrixXd W = geophase::wigner_transform(psi, ps);

        CsvTable qp{{"q", "p", "W"}, {}};
        qp.rows.reserve(static_cast<std::size_t>(grid.n_points) * ps.n_p());
        for (int j = 0; j < grid.n_points; ++j) {
            for (int c = 0; c < ps.n_p(); ++c) {
                qp.rows.push_back({grid.point(j), ps.p_point(c), W(j, c)});
            }
        }
        geophase::write_csv(ctx.file("wigner_qp" + level_suffix(cfg, n) + ".csv"), qp);

        const RadialWigner profile = geophase::oscillator_radial_wigner(n, cfg.hbar);
        const double I_max = cfg.hbar * (n + 8.0);
        const int n_rows = 512;
        CsvTable radial{{"I", "W"}, {}};
        for (int k = 0; k <= n_rows; ++k) {
            const double I = I_max * k / n_rows;
            radial.rows.push_back({I, profile.scalar(I)});
        }
        geophase::write_csv(ctx.file("wigner_radial" + level_suffix(cfg, n) + ".csv"), radial);
    }
}

// ---------------------------------------------------------------------------
// hannay: the semiclassical correspondence report per level.

void run_hannay(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.system != SystemKind::Oscillator) {
        throw ConfigError("the hannay command requires the oscillator system");
    }
    const Surface sigma = geophase::make_surface(cfg.circuit);
    const std::string label = geophase::circuit_label(cfg.circuit);

    ordered_json report;
    report["circuit"] = label;
    report["surface"] = label;
    report["hbar"] = cfg.hbar;
    report["maslov"] = cfg.maslov;
    report["conventions"] = conventions_json(cfg);

    ordered_json levels = ordered_json::array();
    for (int n : cfg.levels) {
        const geophase::SemiclassicalReport r = geophase::semiclassical_check(
            sigma, n, cfg.hbar, cfg.maslov, cfg.quadrature.surface_order);
        ordered_json entry;
        entry["n"] = n;
        entry["action"] = cfg.hbar * (n + cfg.maslov);
        entry["hannay"] = r.hannay;
        entry["level_difference"] = r.level_difference;
        entry["action_slope"] = r.action_slope;
        entry["spread"] = r.spread();
        levels.push_back(entry);
    }
    report["levels"] = levels;
    geophase::write_text_atomic(ctx.file("hannay_report.json"), report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// verify: direct time evolution against the surface-integral reference.

double fit_slope(const std::vector<geophase::ConvergencePoint>& table) {
    std::vector<double> xs, ys;
    for (const geophase::ConvergencePoint& row : table) {
        if (row.error > 0.0) {
            xs.push_back(std::log(row.total_time));
            ys.push_back(std::log(row.error));
        }
    }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    return sxy / sxx;
}

void run_verify(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.system == SystemKind::SeparableProduct) {
        throw ConfigError("the verify command supports the oscillator and grid-custom systems");
    }
    const int n = cfg.levels.front();
    const Circuit circuit = geophase::make_circuit(cfg.circuit);
    const Surface sigma = geophase::make_surface(cfg.circuit);
    const std::vector<ParamPoint> span = circuit_samples(circuit, cfg.circuit.samples);
    for (const ParamPoint& X : span) ensure_elliptic(X);
    const SpatialGrid grid = choose_grid(cfg, span, n + 2, false);
    const QuantumStateFamily family = choose_family(cfg, grid);
    const QuantumBackend backend = cfg.system == SystemKind::GridCustom
                                       ? QuantumBackend::Grid
                                       : QuantumBackend::AnalyticOscillator;

    // Surface-integral reference, independent of the time evolution.
    const double gamma_ref = geophase::berry_phase(family, n, sigma, cfg.steps.plaquette_delta,
                                                   cfg.quadrature.surface_order)
                                 .raw;

    std::vector<double> times = cfg.schedule.times;
    if (times.empty()) {
        times = {cfg.schedule.total_time, 2.0 * cfg.schedule.total_time,
                 4.0 * cfg.schedule.total_time};
    }
    const double dt = cfg.schedule.total_time / cfg.schedule.time_steps;
    const Schedule::Profile profile = geophase::schedule_profile(cfg.schedule);

    const std::vector<geophase::ConvergencePoint> table = geophase::adiabatic_convergence(
        backend, n, circuit, grid, cfg.hbar, gamma_ref, times, dt, profile);

    CsvTable csv{{"total_time", "leakage", "gamma", "error"}, {}};
    for (const geophase::ConvergencePoint& row : table) {
        csv.rows.push_back({row.total_time, row.leakage, row.gamma, row.error});
    }
    geophase::write_csv(ctx.file("convergence.csv"), csv);

    // Classical transport on the slowest schedule of the sweep.
    const ActionAngleChart chart = geophase::oscillator_chart();
    const double action = cfg.hbar * (n + cfg.maslov);
    Schedule slowest;
    slowest.circuit = circuit;
    slowest.total_time = times.back();
    slowest.time_steps = std::max<int>(1, static_cast<int>(std::lround(times.back() / dt)));
    slowest.profile = profile;
    const geophase::ClassicalEnsembleResult ens =
        geophase::evolve_classical_ensemble(chart, action, 16, slowest);
    const double hannay_ref = geophase::hannay_angle(chart, action, sigma,
                                                     cfg.steps.action_delta,
                                                     cfg.quadrature.surface_order);

    ordered_json report;
    report["circuit"] = geophase::circuit_label(cfg.circuit);
    report["level"] = n;
    report["hbar"] = cfg.hbar;
    report["gamma_reference"] = gamma_ref;
    ordered_json rows = ordered_json::array();
    for (const geophase::ConvergencePoint& row : table) {
        rows.push_back({{"total_time", row.total_time},
                        {"leakage", row.leakage},
                        {"gamma", row.gamma},
                        {"error", row.error}});
    }
    report["convergence"] = rows;
    const double slope = fit_slope(table);
    if (std::isfinite(slope)) {
        report["slope"] = slope;
    } else {
        report["slope"] = nullptr;
    }
    report["final"] = {{"total_time", table.back().total_time},
                       {"leakage", table.back().leakage},
                       {"gamma", table.back().gamma},
                       {"error", table.back().error}};
    report["classical"] = {{"action", action},
                           {"delta_theta", ens.delta_theta},
                           {"hannay_reference", hannay_ref},
                           {"difference", std::remainder(ens.delta_theta - hannay_ref,
                                                         2.0 * M_PI)},
                           {"dynamical_angle", ens.dynamical_angle},
                           {"max_action_drift", ens.max_action_drift}};
    geophase::write_text_atomic(ctx.file("verify_report.json"), report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// selftest: golden closed-form values, one PASS/FAIL line per check.

struct Check {
    std::string name;
    std::function<std::string()> run;  // empty string on pass, detail on failure
};

std::string expect_near(const std::string& what, double got, double want, double tol) {
    if (std::abs(got - want) <= tol) return "";
    return what + " = " + geophase::format_double(got) + ", want " +
           geophase::format_double(want) + " within " + short_real(tol);
}

int run_selftest() {
    using namespace geophase;
    const ParamPoint iso{1.0, 0.0, 1.0};
    const ClassicalTwoFormFamily Fc = classical_curvature_family(oscillator_chart());

    std::vector<Check> checks;

    checks.push_back({"classical two-form of the quadratic family at (1,0,1), I=1", [&] {
        const Eigen::MatrixXd F = classical_two_form(oscillator_chart(), 1.0, iso);
        std::string err = expect_near("F_YZ", F(1, 2), -0.25, 1e-6);
        if (err.empty()) err = expect_near("F_ZX", F(2, 0), 0.0, 1e-6);
        if (err.empty()) err = expect_near("F_XY", F(0, 1), -0.25, 1e-6);
        return err;
    }});

    checks.push_back({"grid spectrum at (1,0,1) is hbar*(n + 1/2)", [&] {
        const SpatialGrid grid = auto_grid(iso, 1.0, 6);
        const EigenstateSet set = solve_eigenstates(iso, 1.0, grid, 4);
        for (int n = 0; n < 4; ++n) {
            const std::string err = expect_near("E_" + std::to_string(n), set.energies[n],
                                                n + 0.5, 1e-6);
            if (!err.empty()) return err;
        }
        return std::string();
    }});

    checks.push_back({"plaquette curvature F_XY at (1,0,1), level 0", [&] {
        const SpatialGrid grid = auto_grid(iso, 1.0, 2);
        const QuantumStateFamily fam = analytic_state_family(grid, 1.0);
        const double F = berry_curvature_plaquette(fam, 0, iso, 1e-2, 0, 1);
        return expect_near("F_XY", F, 0.125, 1e-3);
    }});

    checks.push_back({"plaquette curvature F_ZX at (1,0,1), level 0", [&] {
        const SpatialGrid grid = auto_grid(iso, 1.0, 2);
        const QuantumStateFamily fam = analytic_state_family(grid, 1.0);
        const double F = berry_curvature_plaquette(fam, 0, iso, 1e-2, 2, 0);
        return expect_near("F_ZX", F, 0.0, 1e-3);
    }});

    checks.push_back({"ground-state Wigner value at the phase-space origin", [&] {
        const SpatialGrid grid = auto_grid(iso, 1.0, 2, /*for_wigner=*/true);
        const PhaseSpaceGrid ps{grid, 1.0};
        const Eigen::VectorXcd psi = analytic_oscillator_state(0, iso, 1.0, grid);
        const Eigen::MatrixXd W = wigner_transform(psi, ps);
        return expect_near("W(0,0)", sample_phase_space(W, ps, 0.0, 0.0), 1.0 / M_PI, 1e-6);
    }});

    checks.push_back({"first radial action moment of the ground profile", [&] {
        const double moment = radial_scalar_integrate(oscillator_radial_wigner(0, 1.0),
                                                      [](double I) { return I; });
        return expect_near("Int W_0 I dI", moment, 1.0 / (4.0 * M_PI), 1e-10);
    }});

    checks.push_back({"action-weighted curvature at (1,0,1), level 0", [&] {
        const Eigen::MatrixXd F =
            curvature_from_wigner(oscillator_radial_wigner(0, 1.0), Fc, iso, 1.0);
        std::string err = expect_near("F_YZ", F(1, 2), 0.125, 1e-6);
        if (err.empty()) err = expect_near("F_ZX", F(2, 0), 0.0, 1e-6);
        if (err.empty()) err = expect_near("F_XY", F(0, 1), 0.125, 1e-6);
        return err;
    }});

    checks.push_back({"point-profile curvature equals minus the classical two-form over hbar",
                      [&] {
        const double I0 = 0.7, hbar = 0.5;
        const ParamPoint X{1.3, 0.2, 0.9};
        const Eigen::MatrixXd F = curvature_from_wigner(dirac_radial_wigner(I0), Fc, X, hbar);
        const Eigen::MatrixXd target = -classical_two_form(oscillator_chart(), I0, X) / hbar;
        return expect_near("max |F + F_c/hbar|", (F - target).cwiseAbs().maxCoeff(), 0.0, 1e-10);
    }});

    checks.push_back({"pure statistical profile reduces to the level curvature", [&] {
        const ParamPoint X{1.0, 0.3, 1.2};
        const RadialWigner w1 = oscillator_radial_wigner(1, 1.0);
        const Eigen::MatrixXd Fm = mixed_curvature(mixed_radial_wigner({1.0}, {w1}), Fc, X, 1.0);
        const Eigen::MatrixXd Fp = curvature_from_wigner(w1, Fc, X, 1.0);
        return expect_near("max |F_rho - F_1|", (Fm - Fp).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    }});

    int failures = 0;
    for (const Check& check : checks) {
        std::string detail;
        try {
            detail = check.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (detail.empty()) {
            std::cout << "PASS  " << check.name << "\n";
        } else {
            ++failures;
            std::cout << "FAIL  " << check.name << ": " << detail << "\n";
        }
    }
    std::cout << (failures == 0 ? "selftest: all checks passed"
                                : "selftest: " + std::to_string(failures) + " check(s) failed")
              << "\n";
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "geophase: adiabatic geometric phases of the generalized harmonic oscillator\n"
        "computed three ways (Hilbert-space plaquettes, action-weighted phase-space\n"
        "curvature, classical angle transport) with direct-evolution verification.\n"
        "Flags can also be supplied via environment variables with the GEOPHASE_ prefix\n"
        "(GEOPHASE_CONFIG, GEOPHASE_OUT, GEOPHASE_THREADS, GEOPHASE_SEED); explicit\n"
        "flags take precedence."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 1;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        CLI::Option* c = sub->add_option("--config", config_path, "JSON run configuration")
                             ->envname("GEOPHASE_CONFIG");
        if (config_required) c->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)")
            ->envname("GEOPHASE_OUT");
        sub->add_option("--seed", seed, "seed for randomized gauge diagnostics")
            ->envname("GEOPHASE_SEED");
        sub->add_option("--threads", threads,
                        "worker thread cap (outputs are identical for any value)")
            ->envname("GEOPHASE_THREADS")
            ->check(CLI::Range(1, 256));
    };

    CLI::App* curvature = app.add_subcommand(
        "curvature", "Sweep the level curvature over parameter points by both routes");
    CLI::App* phase = app.add_subcommand(
        "phase", "Geometric phases of one circuit/surface pair via every route");
    CLI::App* wigner = app.add_subcommand(
        "wigner", "Phase-space raster and action-radial profile of the chosen levels");
    CLI::App* hannay = app.add_subcommand(
        "hannay", "Semiclassical correspondence: angle shift vs level phase differences");
    CLI::App* verify = app.add_subcommand(
        "verify", "Direct adiabatic evolution against the surface-integral reference");
    CLI::App* selftest =
        app.add_subcommand("selftest", "Golden closed-form value suite (PASS/FAIL per check)");
    for (CLI::App* sub : {curvature, phase, wigner, hannay, verify}) add_common(sub, true);
    add_common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (sub == selftest) return run_selftest();

        RunConfig cfg = geophase::load_config(config_path);
        if (sub->count("--out") > 0) cfg.output_dir = out_dir;
        if (sub->count("--seed") > 0) cfg.seed = seed;
        const CommandContext ctx = prepare(cfg);

        if (sub == curvature) {
            run_curvature(ctx);
        } else if (sub == phase) {
            run_phase(ctx);
        } else if (sub == wigner) {
            run_wigner(ctx);
        } else if (sub == hannay) {
            run_hannay(ctx);
        } else if (sub == verify) {
            run_verify(ctx);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
