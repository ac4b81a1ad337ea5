#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geophase/classical.hpp"
#include "geophase/geometry.hpp"
#include "geophase/quantum.hpp"
#include "geophase/wigner.hpp"

namespace geophase {

// Classical curvature as a function of the action value and parameter point.
using ClassicalTwoFormFamily =
    std::function<Eigen::MatrixXd(double I, const ParamPoint& X)>;

// The chart's central-difference curvature packaged per action value.
ClassicalTwoFormFamily classical_curvature_family(ActionAngleChart chart,
                                                  double delta_X = 1e-4);

// Action-weighted curvature F(X) = -(2 pi / hbar) Int W(I) F^c(I; X) dI.
// The profile must be scalar-valued and normalized; a quadrature trace defect
// above tail_tol means the rule misses part of the profile's mass and raises
// NumericalError.
Eigen::MatrixXd curvature_from_wigner(const RadialWigner& profile,
                                      const ClassicalTwoFormFamily& Fc,
                                      const ParamPoint& X, double hbar,
                                      int order = 64, double tail_tol = 1e-10);

// Same curvature as a field over parameter space, ready for surface pullback.
TwoFormField curvature_field_from_wigner(const RadialWigner& profile,
                                         const ClassicalTwoFormFamily& Fc,
                                         double hbar, int dim = 3, int order = 64,
                                         double tail_tol = 1e-10);

// Phase of the action-weighted route: gamma = - SurfInt_sigma F.
BerryPhaseResult phase_from_wigner(const RadialWigner& profile,
                                   const ClassicalTwoFormFamily& Fc,
                                   const Surface& sigma, double hbar,
                                   int order = 64, int surface_order = 12);

// Declared-product systems: one profile and one mode curvature per degree of
// freedom, sharing the parameter point. Curvatures add once every mode's
// profile is verified to integrate to unit trace (the factorization check).
Eigen::MatrixXd curvature_separable(const std::vector<RadialWigner>& profiles,
                                    const std::vector<ClassicalTwoFormFamily>& modes,
                                    const ParamPoint& X, double hbar, int order = 64);

// Matrix-valued curvature from a hermitian block profile. Blocks for i < j in
// lexicographic pair order, F_ji = -F_ij implied; each block is hermitian.
std::vector<Eigen::MatrixXcd> wz_curvature_from_wigner(const RadialWigner& profile,
                                                       const ClassicalTwoFormFamily& Fc,
                                                       const ParamPoint& X, double hbar,
                                                       int order = 64,
                                                       double tail_tol = 1e-8);

MatrixTwoFormField wz_curvature_field_from_wigner(const RadialWigner& profile,
                                                  const ClassicalTwoFormFamily& Fc,
                                                  double hbar, int dim = 3,
                                                  int order = 64,
                                                  double tail_tol = 1e-8);

// Mixed-state curvature F_rho (same action-weighted integral, applied to a
// statistical profile) and its surface phase phi = + SurfInt_sigma F_rho.
// Note the sign: phi carries the opposite convention to the pure-state gamma,
// so phi == -gamma_n when the profile is a single level.
Eigen::MatrixXd mixed_curvature(const RadialWigner& profile,
                                const ClassicalTwoFormFamily& Fc,
                                const ParamPoint& X, double hbar, int order = 64);
double mixed_phase(const RadialWigner& profile, const ClassicalTwoFormFamily& Fc,
                   const Surface& sigma, double hbar, int order = 64,
                   int surface_order = 12);

// Three estimates of the same angle shift that should agree for level spectra
// linear in the action: the classical anholonomy angle, the forward level
// difference of the geometric phase, and the least-squares action slope.
struct SemiclassicalReport {
    double hannay = 0.0;            // Delta theta from the classical route
    double level_difference = 0.0;  // -(gamma_{n+1} - gamma_n)
    double action_slope = 0.0;      // -hbar * d gamma / d I over a level window
    double spread() const;          // largest pairwise difference
};

// Oscillator-specific correspondence check on a level window around n. The
// action of level n is hbar * (n + maslov); maslov is supplied, not computed.
SemiclassicalReport semiclassical_check(const Surface& sigma, int n, double hbar,
                                        double maslov = 0.5, int surface_order = 16);

// Aggregated multi-route result for one circuit/surface pair.
struct PhaseReport {
    std::string circuit_id;
    std::string surface_id;
    BerryPhaseResult gamma_q{};   // Hilbert-space route
    BerryPhaseResult gamma_ps{};  // action-weighted phase-space route
    double hannay = 0.0;
    std::optional<Eigen::MatrixXcd> wz_holonomy;
    std::optional<double> mixed_phase;
    double dynamical_phase = 0.0;
    struct Diagnostics {
        double quadrature_residual = 0.0;
        std::string gauge_note;
    } diagnostics;
};

// Finiteness of every populated field; throws NumericalError on violation.
void validate_report(const PhaseReport& report);

}  // namespace geophase
