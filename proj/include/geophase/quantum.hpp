#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "geophase/geometry.hpp"

namespace geophase {

// Uniform periodic grid q_j = q_min + j * spacing, j = 0 .. n_points - 1
// (q_max is the wrap-around point, not a sample).
struct SpatialGrid {
    double q_min = -16.0;
    double q_max = 16.0;
    int n_points = 256;

    double spacing() const { return (q_max - q_min) / n_points; }
    double point(int j) const { return q_min + j * spacing(); }
};

// n_points must be a power of two in [128, 4096]; q_max > q_min.
void validate_grid(const SpatialGrid& grid);

// Grid sized so levels up to n_max of the quadratic family at X are resolved:
// position range covers the classical turning points plus tail room, spacing
// small enough that the momentum support (including the Y/Z chirp) fits under
// the grid Nyquist. for_wigner halves the spacing because the phase-space
// transform only reaches half the grid Nyquist in momentum.
SpatialGrid auto_grid(const ParamPoint& X, double hbar, int n_max, bool for_wigner = false);
SpatialGrid auto_grid(const std::vector<ParamPoint>& span, double hbar, int n_max,
                      bool for_wigner = false);

// h * sum conj(a_j) b_j
std::complex<double> grid_inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                double spacing);

// Closed-form eigenfunction sqrt(alpha) chi_n(alpha q) exp(-i Y q^2 / (2 Z hbar)),
// alpha = sqrt(w / (Z hbar)), sampled on the grid. Throws when the grid clips
// the state (edge amplitude > 1e-12) or undersamples it (norm defect > 1e-10).
Eigen::VectorXcd analytic_oscillator_state(int n, const ParamPoint& X, double hbar,
                                           const SpatialGrid& grid);

// (X q^2 + Y (qp + pq) + Z p^2) / 2 with spectral (discrete-Fourier) momentum;
// hermitian by construction.
Eigen::MatrixXcd grid_hamiltonian(const ParamPoint& X, double hbar, const SpatialGrid& grid);

enum class QuantumBackend { AnalyticOscillator, Grid };

struct EigenstateSet {
    ParamPoint X;
    double hbar = 1.0;
    SpatialGrid grid;
    std::vector<double> energies;           // ascending
    std::vector<Eigen::VectorXcd> states;   // h * sum |psi|^2 = 1
    QuantumBackend backend = QuantumBackend::Grid;
};

EigenstateSet solve_eigenstates(const ParamPoint& X, double hbar, const SpatialGrid& grid,
                                int n_levels);
EigenstateSet analytic_eigenstates(const ParamPoint& X, double hbar, const SpatialGrid& grid,
                                   int n_levels);

// Level family |n; X> on a fixed grid for holonomy and plaquette numerics.
struct QuantumStateFamily {
    std::function<Eigen::VectorXcd(int n, const ParamPoint& X)> state;
    std::function<double(int n, const ParamPoint& X)> energy;
    SpatialGrid grid;
    double hbar = 1.0;
};

QuantumStateFamily analytic_state_family(const SpatialGrid& grid, double hbar);
// Diagonalizes on demand, memoized per parameter point (thread-safe, deterministic).
QuantumStateFamily grid_state_family(const SpatialGrid& grid, double hbar, int n_levels);

// Gauge-invariant curvature component F_ij(X): phase of the counterclockwise
// overlap product around a centered delta x delta plaquette in the (i, j)
// plane, divided by delta^2 (delta is relative to |X|). Errors when the level
// gap is comparable to the step's energy spread or any overlap is < 0.1.
double berry_curvature_plaquette(const QuantumStateFamily& family, int n, const ParamPoint& X,
                                 double delta, int i, int j);

TwoFormField berry_curvature_field(const QuantumStateFamily& family, int n,
                                   double delta = 1e-2, int dim = 3);

// Closed-form curvature (n + 1/2) / (4 w^3) (X dY^dZ + Y dZ^dX + Z dX^dY) of the
// quadratic family; hbar-independent.
Eigen::MatrixXd oscillator_berry_curvature(int n, const ParamPoint& X);
TwoFormField oscillator_berry_curvature_field(int n);

struct BerryPhaseResult {
    double raw = 0.0;        // minus the surface integral of the curvature
    double principal = 0.0;  // raw wrapped into (-pi, pi]
};

BerryPhaseResult berry_phase(const QuantumStateFamily& family, int n, const Surface& sigma,
                             double delta = 1e-2, int surface_order = 12);

// N orthonormal states per X, smooth in X (user-supplied construction).
struct DegenerateFamily {
    std::function<std::vector<Eigen::VectorXcd>(const ParamPoint& X)> frame;
    int size = 1;
    double inner_scale = 1.0;  // grid spacing for sampled frames, 1 for abstract ones
};

// Gram matrix must equal the identity to tol.
void validate_family(const DegenerateFamily& family, const ParamPoint& X, double tol = 1e-9);

// Holonomy of the discrete parallel transport around the circuit: ordered
// product of per-step overlap matrices T_ab = <a; X_next | b; X_curr>,
// unitarized step by step via polar decomposition. For size 1 this returns the
// scalar exp(i * geometric phase). Errors when a step's smallest singular
// value drops below 0.1.
Eigen::MatrixXcd wz_connection_loop(const DegenerateFamily& family, const Circuit& c);

}  // namespace geophase
