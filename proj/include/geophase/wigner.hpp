#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "geophase/classical.hpp"
#include "geophase/quantum.hpp"

namespace geophase {

// Phase-space raster for Wigner transforms. The momentum axis is the exact
// bandwidth of the offset-product sum: the transform of an n_points grid is
// periodic in p with period pi*hbar/h, resolved by 2*n_points momenta at
// spacing pi*hbar/(2*n_points*h). That is half the grid's own momentum
// Nyquist, which is why grids destined for phase-space work are built with
// halved spacing (auto_grid's for_wigner flag).
struct PhaseSpaceGrid {
    SpatialGrid spatial;
    double hbar = 1.0;

    int n_p() const { return 2 * spatial.n_points; }
    double p_spacing() const { return M_PI * hbar / (n_p() * spatial.spacing()); }
    double p_min() const { return -0.5 * n_p() * p_spacing(); }
    double p_point(int c) const { return p_min() + c * p_spacing(); }
};

void validate_phase_space_grid(const PhaseSpaceGrid& grid);

// W(q,p) = (1/pi hbar) Int ds conj(psi(q+s)) psi(q-s) e^{2ips/hbar}, evaluated
// by an FFT over the offset at each q with x2 zero padding. Rows follow the
// spatial grid, columns the monotonic p axis. The q-marginal and the total
// normalization are exact by construction.
Eigen::MatrixXd wigner_transform(const Eigen::VectorXcd& psi, const PhaseSpaceGrid& grid);

// Cross transform (1/pi hbar) Int ds conj(psi_a(q+s)) psi_b(q-s) e^{2ips/hbar}.
Eigen::MatrixXcd cross_wigner(const Eigen::VectorXcd& psi_a, const Eigen::VectorXcd& psi_b,
                              const PhaseSpaceGrid& grid);

// Entry (a, b) of the hermitian Wigner matrix of a degenerate frame at X.
Eigen::MatrixXcd wigner_matrix(const DegenerateFamily& family, const ParamPoint& X, int a,
                               int b, const PhaseSpaceGrid& grid);

// Cubic-convolution (Keys) interpolation of a phase-space raster.
double sample_phase_space(const Eigen::MatrixXd& W, const PhaseSpaceGrid& grid, double q,
                          double p);

// Action-radial profile W(I), scalar or hermitian-block valued.
struct RadialWigner {
    enum class Form { ClosedForm, Sampled, DiracDelta, Mixture };

    Form form = Form::ClosedForm;
    int block_dim = 1;
    double hbar = 1.0;

    int level = 0;  // ClosedForm

    std::vector<double> I_grid;            // Sampled
    std::vector<Eigen::MatrixXcd> samples; // Sampled, one block per node

    double I_star = 0.0;                   // DiracDelta
    Eigen::MatrixXcd mass;                 // DiracDelta, integrated weight

    std::vector<double> child_weights;     // Mixture
    std::vector<RadialWigner> children;    // Mixture

    // Pointwise density; throws for the point-mass form.
    Eigen::MatrixXcd value(double I) const;
    double scalar(double I) const;

    // Nodes and matrix weights such that Int W(I) f(I) dI = sum_k w_k f(I_k),
    // exact for the closed forms under the half-line rule of the given order.
    void quadrature(std::vector<double>& nodes, std::vector<Eigen::MatrixXcd>& weights,
                    int order = 64) const;
};

// Eigenstate profile W_n(I) = ((-1)^n / pi hbar) e^{-2I/hbar} L_n(4I/hbar).
RadialWigner oscillator_radial_wigner(int n, double hbar);

// Classical point torus at I0: integrates as f(I0)/(2 pi) (unit trace weight).
RadialWigner dirac_radial_wigner(double I0);

// Convex combination of profiles sharing hbar and block size.
RadialWigner mixed_radial_wigner(const std::vector<double>& weights,
                                 const std::vector<RadialWigner>& profiles);

// Int W(I) f(I) dI via the profile's quadrature.
Eigen::MatrixXcd radial_integrate(const RadialWigner& w, const std::function<double(double)>& f,
                                  int order = 64);
double radial_scalar_integrate(const RadialWigner& w, const std::function<double(double)>& f,
                               int order = 64);
// 2 pi Int tr W(I) dI; equals 1 for normalized profiles.
double radial_trace_norm(const RadialWigner& w, int order = 64);

// Torus average of a phase-space raster per action value, with the residual
// theta-dependence kept as a diagnostic rather than silently dropped.
struct RadialReduction {
    RadialWigner profile;                // Sampled form on the requested I grid
    std::vector<double> theta_residual;  // max_theta |W - mean| per I
};

RadialReduction radial_reduce(const Eigen::MatrixXd& W, const PhaseSpaceGrid& grid,
                              const ActionAngleChart& chart, const ParamPoint& X,
                              const std::vector<double>& I_grid, int theta_order = 64);

}  // namespace geophase
