#include "geophase/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "geophase/errors.hpp"

namespace geophase {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kMaxLeakage = 0.01;
constexpr double kMaxActionDrift = 0.05;

QuantumStateFamily family_for(QuantumBackend backend, const SpatialGrid& grid,
                              double hbar, int n) {
    if (backend == QuantumBackend::AnalyticOscillator) {
        return analytic_state_family(grid, hbar);
    }
    return grid_state_family(grid, hbar, n + 1);
}

// Smallest frequency met along the schedule; the adjacent-level gap of the
// quadratic Hamiltonian is hbar times this.
double min_omega(const Schedule& schedule) {
    const int samples = std::max(schedule.circuit.samples, 256);
    double w = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        w = std::min(w, oscillator_omega(schedule.circuit.path(k / double(samples))));
    }
    return w;
}

}  // namespace

double Schedule::s_of(double t) const {
    const double x = std::clamp(t / total_time, 0.0, 1.0);
    if (profile == Profile::Linear) return x;
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

void validate_schedule(const Schedule& schedule) {
    if (!(schedule.total_time > 0.0)) {
        throw DomainError("Schedule: total_time must be positive");
    }
    if (schedule.time_steps < 1) {
        throw DomainError("Schedule: at least one time step required");
    }
    validate_circuit(schedule.circuit);
}

double schedule_slowness(const Schedule& schedule, double gap_scale) {
    if (!(gap_scale > 0.0)) {
        throw DomainError("schedule_slowness: gap scale must be positive");
    }
    const int samples = std::max(schedule.time_steps, 256);
    const double dt = schedule.total_time / samples;
    double vmax = 0.0;
    ParamPoint prev = schedule.point_at(0.0);
    for (int k = 1; k <= samples; ++k) {
        const ParamPoint cur = schedule.point_at(k * dt);
        vmax = std::max(vmax, (cur.coords - prev.coords).norm() / dt);
        prev = cur;
    }
    return vmax / gap_scale;
}

QuantumEvolution evolve_quantum(QuantumBackend backend, int n, const Schedule& schedule,
                                const SpatialGrid& grid, double hbar) {
    if (n < 0) throw DomainError("evolve_quantum: level must be nonnegative");
    if (!(hbar > 0.0)) throw DomainError("evolve_quantum: hbar must be positive");
    validate_schedule(schedule);
    validate_grid(grid);

    const QuantumStateFamily family = family_for(backend, grid, hbar, n);
    const ParamPoint X0 = schedule.circuit.path(0.0);
    const double h = grid.spacing();
    const int N = grid.n_points;
    const double dt = schedule.dt();

    Eigen::VectorXcd psi = family.state(n, X0);
    const Eigen::VectorXcd psi0 = psi;

    // Implicit midpoint (Cayley) stepping with the Hamiltonian frozen at each
    // step midpoint. The scalar part E_n(X_mid) * I commutes with everything,
    // so it is integrated exactly as a global phase and the Cayley step only
    // propagates the remainder H - E_n. That removes the cubic phase bias
    // (E_n dt / hbar)^3 / 12 of the plain scheme for the tracked level, so the
    // step size follows the schedule rather than the energy scale. The
    // factorization is rebuilt only when the parameter point actually moves.
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    Eigen::MatrixXcd forward;
    Eigen::VectorXd factored_at;
    bool have_factors = false;
    const std::complex<double> ic(0.0, 1.0);

    double frame_phase = 0.0;  // (1/hbar) * midpoint-rule integral of E_n
    double dyn = 0.0;          // (1/hbar) * trapezoid-rule integral of E_n
    double e_mid = 0.0;
    double e_prev = family.energy(n, X0);
    for (int k = 0; k < schedule.time_steps; ++k) {
        const ParamPoint Xm = schedule.point_at((k + 0.5) * dt);
        if (!have_factors || factored_at.size() != Xm.coords.size() ||
            (factored_at - Xm.coords).cwiseAbs().maxCoeff() != 0.0) {
            e_mid = family.energy(n, Xm);
            const Eigen::MatrixXcd H =
                grid_hamiltonian(Xm, hbar, grid) -
                e_mid * Eigen::MatrixXcd::Identity(N, N);
            const std::complex<double> c = ic * (0.5 * dt / hbar);
            forward = Eigen::MatrixXcd::Identity(N, N) - c * H;
            lu.compute(Eigen::MatrixXcd::Identity(N, N) + c * H);
            factored_at = Xm.coords;
            have_factors = true;
        }
        psi = lu.solve(forward * psi);
        frame_phase += e_mid * dt / hbar;

        const double e_next = family.energy(n, schedule.point_at((k + 1) * dt));
        dyn += 0.5 * dt * (e_prev + e_next);
        e_prev = e_next;
    }
    dyn /= hbar;
    psi *= std::exp(std::complex<double>(0.0, -frame_phase));

    QuantumEvolution result;
    result.final_state = psi;
    result.dynamical_phase = dyn;
    result.norm_defect = std::abs(std::sqrt(grid_inner(psi, psi, h).real()) - 1.0);

    const Eigen::VectorXcd ref = family.state(n, schedule.circuit.path(1.0));
    result.leakage = 1.0 - std::norm(grid_inner(ref, psi, h));
    result.gamma_extracted =
        std::remainder(std::arg(grid_inner(psi0, psi, h)) + dyn, kTwoPi);
    result.slowness = schedule_slowness(schedule, hbar * min_omega(schedule));

    if (result.leakage > kMaxLeakage) {
        throw NumericalError("evolve_quantum: adiabaticity failure (leakage " +
                             std::to_string(result.leakage) +
                             "); increase total_time");
    }
    return result;
}

FlowField oscillator_flow() {
    return [](double q, double p, const ParamPoint& X, double& dq, double& dp) {
        dq = X[1] * q + X[2] * p;
        dp = -X[0] * q - X[1] * p;
    };
}

ClassicalEvolution evolve_classical(const ActionAngleChart& chart, double I0,
                                    double theta0, const Schedule& schedule,
                                    const FlowField& flow) {
    if (!(I0 > 0.0)) throw DomainError("evolve_classical: action must be positive");
    if (!flow) throw DomainError("evolve_classical: empty flow field");
    if (!chart.to_phase || !chart.from_phase || !chart.frequency) {
        throw DomainError("evolve_classical: incomplete chart");
    }
    validate_schedule(schedule);

    const ParamPoint X0 = schedule.circuit.path(0.0);
    const PhasePoint start = chart.to_phase(I0, theta0, X0);

    using State = std::array<double, 3>;  // q, p, accumulated frequency integral
    State y{start.q, start.p, 0.0};
    const auto rhs = [&](const State& s, State& dydt, double t) {
        const ParamPoint X = schedule.point_at(t);
        flow(s[0], s[1], X, dydt[0], dydt[1]);
        dydt[2] = chart.frequency(I0, X);
    };
    namespace ode = boost::numeric::odeint;
    ode::integrate_adaptive(
        ode::make_controlled(1e-11, 1e-11, ode::runge_kutta_fehlberg78<State>()), rhs, y,
        0.0, schedule.total_time, schedule.total_time / 1024.0);

    const ActionAngle end = chart.from_phase(y[0], y[1], X0);

    ClassicalEvolution result;
    result.final_point = {y[0], y[1]};
    result.dynamical_angle = y[2];
    result.action_drift = std::abs(end.I - I0) / I0;
    result.delta_theta = std::remainder(end.theta - theta0 - y[2], kTwoPi);
    result.slowness = schedule_slowness(schedule, min_omega(schedule));
    if (result.action_drift > kMaxActionDrift) {
        throw NumericalError("evolve_classical: adiabaticity failure (action drift " +
                             std::to_string(result.action_drift) +
                             "); increase total_time");
    }
    return result;
}

ClassicalEnsembleResult evolve_classical_ensemble(const ActionAngleChart& chart,
                                                  double I0, int n_members,
                                                  const Schedule& schedule,
                                                  const FlowField& flow) {
    if (n_members < 1) {
        throw DomainError("evolve_classical_ensemble: at least one member required");
    }
    std::vector<std::future<ClassicalEvolution>> runs;
    runs.reserve(n_members);
    for (int j = 0; j < n_members; ++j) {
        const double theta0 = kTwoPi * j / n_members;
        runs.push_back(std::async(std::launch::async, [&, theta0] {
            return evolve_classical(chart, I0, theta0, schedule, flow);
        }));
    }

    ClassicalEnsembleResult result;
    std::complex<double> acc = 0.0;
    for (auto& run : runs) {
        const ClassicalEvolution member = run.get();
        result.member_shifts.push_back(member.delta_theta);
        result.max_action_drift = std::max(result.max_action_drift, member.action_drift);
        result.dynamical_angle = member.dynamical_angle;
        acc += std::exp(std::complex<double>(0.0, member.delta_theta));
    }
    result.delta_theta = std::arg(acc);
    return result;
}

MixedPhaseNumeric mixed_phase_numeric(const std::vector<double>& weights,
                                      const Schedule& schedule, const SpatialGrid& grid,
                                      double hbar, QuantumBackend backend) {
    if (weights.empty()) {
        throw DomainError("mixed_phase_numeric: at least one weight required");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("mixed_phase_numeric: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        throw DomainError("mixed_phase_numeric: weights must sum to 1 within 1e-10");
    }

    std::vector<std::future<QuantumEvolution>> runs;
    runs.reserve(weights.size());
    for (std::size_t n = 0; n < weights.size(); ++n) {
        runs.push_back(std::async(std::launch::async, [&, n] {
            return evolve_quantum(backend, static_cast<int>(n), schedule, grid, hbar);
        }));
    }

    MixedPhaseNumeric result;
    std::complex<double> total = 0.0;
    std::complex<double> geometric = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const QuantumEvolution ev = runs[n].get();
        result.level_gammas.push_back(ev.gamma_extracted);
        result.max_leakage = std::max(result.max_leakage, ev.leakage);
        geometric += weights[n] * std::exp(std::complex<double>(0.0, ev.gamma_extracted));
        total += weights[n] * std::exp(std::complex<double>(
                                  0.0, ev.gamma_extracted - ev.dynamical_phase));
    }
    result.total = std::arg(total);
    result.geometric = std::arg(geometric);
    return result;
}

std::vector<ConvergencePoint> adiabatic_convergence(
    QuantumBackend backend, int n, const Circuit& circuit, const SpatialGrid& grid,
    double hbar, double gamma_reference, const std::vector<double>& times, double dt,
    Schedule::Profile profile) {
    if (times.empty()) {
        throw DomainError("adiabatic_convergence: at least one total time required");
    }
    if (!(dt > 0.0)) {
        throw DomainError("adiabatic_convergence: step size must be positive");
    }

    std::vector<std::future<QuantumEvolution>> runs;
    runs.reserve(times.size());
    for (double T : times) {
        Schedule schedule;
        schedule.circuit = circuit;
        schedule.total_time = T;
        schedule.time_steps = std::max(1, static_cast<int>(std::lround(T / dt)));
        schedule.profile = profile;
        runs.push_back(std::async(std::launch::async, [backend, n, schedule, &grid, hbar] {
            return evolve_quantum(backend, n, schedule, grid, hbar);
        }));
    }

    std::vector<ConvergencePoint> table;
    table.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const QuantumEvolution ev = runs[k].get();
        table.push_back({times[k], ev.leakage, ev.gamma_extracted,
                         std::abs(ev.gamma_extracted - gamma_reference)});
    }
    return table;
}

}  // namespace geophase
