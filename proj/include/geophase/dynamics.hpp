#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "geophase/classical.hpp"
#include "geophase/geometry.hpp"
#include "geophase/quantum.hpp"

namespace geophase {

// Time parameterization of one traversal of a closed circuit.
struct Schedule {
    enum class Profile { Smooth, Linear };

    Circuit circuit;
    double total_time = 100.0;
    int time_steps = 1000;
    Profile profile = Profile::Smooth;

    double dt() const { return total_time / time_steps; }
    // Arc position s(t) in [0, 1]; the smooth profile has vanishing first and
    // second derivatives at both endpoints (quintic ramp).
    double s_of(double t) const;
    ParamPoint point_at(double t) const { return circuit.path(s_of(t)); }
};

void validate_schedule(const Schedule& schedule);

// Adiabaticity parameter: (max over t of ||dX/dt||) / gap_scale.
double schedule_slowness(const Schedule& schedule, double gap_scale);

struct QuantumEvolution {
    Eigen::VectorXcd final_state;
    double gamma_extracted = 0.0;  // principal value in (-pi, pi]
    double dynamical_phase = 0.0;  // (1/hbar) Int E_n(X(t)) dt
    double leakage = 0.0;          // 1 - |<n; X(T)|psi(T)>|^2
    double norm_defect = 0.0;      // | ||psi(T)|| - 1 |
    double slowness = 0.0;
};

// Norm-preserving implicit-midpoint (Cayley) propagation of the grid
// Hamiltonian along the schedule, starting from eigenstate n at X(0). The
// commuting scalar part E_n(X_mid) I of each frozen-midpoint Hamiltonian is
// integrated exactly as a global phase and the midpoint step propagates the
// remainder, so the step size is set by the schedule, not the energy scale.
// gamma_extracted = arg<psi(0)|psi(T)> + (1/hbar) Int E_n dt, reduced mod 2 pi.
// Leakage above 0.01 raises NumericalError (the schedule is too fast).
QuantumEvolution evolve_quantum(QuantumBackend backend, int n, const Schedule& schedule,
                                const SpatialGrid& grid, double hbar);

// Phase-space velocity field (dq/dt, dp/dt) at parameter point X.
using FlowField =
    std::function<void(double q, double p, const ParamPoint& X, double& dq, double& dp)>;

// Hamilton's equations of the quadratic Hamiltonian (X q^2 + 2 Y q p + Z p^2)/2.
FlowField oscillator_flow();

struct ClassicalEvolution {
    PhasePoint final_point;
    double delta_theta = 0.0;      // theta(T) - theta0 - Int omega dt, mod 2 pi
    double dynamical_angle = 0.0;  // Int omega(I0; X(t)) dt
    double action_drift = 0.0;     // |I(T) - I0| / I0
    double slowness = 0.0;
};

// Adaptive high-order integration of one trajectory launched from
// chart(I0, theta0; X(0)); angle readout through the chart at X(T) = X(0).
// Action drift above 0.05 raises NumericalError.
ClassicalEvolution evolve_classical(const ActionAngleChart& chart, double I0,
                                    double theta0, const Schedule& schedule,
                                    const FlowField& flow = oscillator_flow());

struct ClassicalEnsembleResult {
    double delta_theta = 0.0;  // circular mean over the ensemble
    double max_action_drift = 0.0;
    double dynamical_angle = 0.0;  // shared by all members
    std::vector<double> member_shifts;
};

// Ensemble of launch angles 2 pi j / n_members; the circular mean suppresses
// the O(slowness) oscillatory residue a single trajectory carries.
ClassicalEnsembleResult evolve_classical_ensemble(const ActionAngleChart& chart,
                                                  double I0, int n_members,
                                                  const Schedule& schedule,
                                                  const FlowField& flow = oscillator_flow());

struct MixedPhaseNumeric {
    double total = 0.0;      // arg Tr[U(T) rho]
    double geometric = 0.0;  // same with per-level dynamical factors removed
    std::vector<double> level_gammas;
    double max_leakage = 0.0;
};

// rho diagonal in the t = 0 eigenbasis with the given weights (must sum to 1
// within 1e-10); per-level evolutions run independently and in parallel.
MixedPhaseNumeric mixed_phase_numeric(const std::vector<double>& weights,
                                      const Schedule& schedule, const SpatialGrid& grid,
                                      double hbar,
                                      QuantumBackend backend = QuantumBackend::AnalyticOscillator);

struct ConvergencePoint {
    double total_time = 0.0;
    double leakage = 0.0;
    double gamma = 0.0;
    double error = 0.0;  // |gamma - gamma_reference|
};

// One evolve_quantum run per requested total time at fixed step size dt.
std::vector<ConvergencePoint> adiabatic_convergence(
    QuantumBackend backend, int n, const Circuit& circuit, const SpatialGrid& grid,
    double hbar, double gamma_reference, const std::vector<double>& times, double dt,
    Schedule::Profile profile = Schedule::Profile::Smooth);

}  // namespace geophase
