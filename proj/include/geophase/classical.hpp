#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "geophase/geometry.hpp"
#include "geophase/specfun.hpp"

namespace geophase {

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

struct ActionAngle {
    double I = 0.0;
    double theta = 0.0;
};

// Canonical action-angle chart of a bound 1-DOF family over parameter points X.
// theta runs over [0, 2*pi) with period 2*pi; H(to_phase(I, theta; X); X) depends
// on theta only through round-off.
struct ActionAngleChart {
    std::function<PhasePoint(double I, double theta, const ParamPoint& X)> to_phase;
    std::function<ActionAngle(double q, double p, const ParamPoint& X)> from_phase;
    std::function<double(double I, const ParamPoint& X)> frequency;
    std::function<double(double I, const ParamPoint& X)> hamiltonian;
    double I_min = 0.0;
    double I_max = std::numeric_limits<double>::infinity();
};

// Closed-form chart of H = (X q^2 + 2 Y q p + Z p^2) / 2 on the elliptic branch:
//   q = sqrt(2 I Z / w) sin(theta),  p = sqrt(2 I w / Z) cos(theta) - (Y/Z) q,
// with w = sqrt(XZ - Y^2); theta = 0 sits at q = 0 with p + (Y/Z) q maximal.
ActionAngleChart oscillator_chart();

// Generic bound single well H = (p + shear(X) q)^2 / (2 m(X)) + V(q; X); the
// well is located by expanding brackets around q_center (energies must exceed
// V(q_center; X)).
struct NaturalForm {
    std::function<double(const ParamPoint& X)> mass;
    std::function<double(double q, const ParamPoint& X)> potential;
    std::function<double(const ParamPoint& X)> shear;  // optional; 0 when absent
    double q_center = 0.0;
    double bracket_scale = 1.0;
};

// The quadratic Hamiltonian above written in natural form (for cross-checks of
// the numerically constructed chart against the closed-form one).
NaturalForm oscillator_natural_form();

// Action-angle chart built numerically: turning points by bracketed bisection,
// action/period by quadrature desingularized with q = c + w sin(u), angle by
// the time-rescaling integral. Requires I > 0.
ActionAngleChart numerical_chart(NaturalForm form);

// (1/2pi) integral of f(q(I,theta;X), p(I,theta;X)) d theta with a periodic rule.
double torus_average(const std::function<double(double q, double p)>& f,
                     const ActionAngleChart& chart, double I, const ParamPoint& X,
                     const QuadratureRule& rule);

// Angle-averaged parameter-space two-form
//   F_ij = < d_i p d_j q - d_j p d_i q >_theta
// with central differences of the chart in each parameter direction; the step
// is delta_X * |X|.
Eigen::MatrixXd classical_two_form(const ActionAngleChart& chart, double I,
                                   const ParamPoint& X, double delta_X,
                                   const QuadratureRule& rule);
Eigen::MatrixXd classical_two_form(const ActionAngleChart& chart, double I,
                                   const ParamPoint& X, double delta_X = 1e-4);

struct ClassicalTwoFormSamples {
    std::vector<double> I_grid;
    std::vector<Eigen::MatrixXd> forms;
    ParamPoint X;
};

ClassicalTwoFormSamples sample_classical_two_form(const ActionAngleChart& chart,
                                                  const std::vector<double>& I_grid,
                                                  const ParamPoint& X,
                                                  double delta_X = 1e-4);

// The same two-form packaged for surface integration at fixed action.
TwoFormField classical_two_form_field(const ActionAngleChart& chart, double I,
                                      int dim = 3, double delta_X = 1e-4);

// Anholonomy angle: minus the central difference in I of the surface integral
// of the classical two-form.
double hannay_angle(const ActionAngleChart& chart, double I, const Surface& sigma,
                    double delta_I = 1e-4, int surface_order = 16);

}  // namespace geophase
