#pragma once

#include <Eigen/Dense>
#include <functional>
#include <initializer_list>
#include <vector>

#include "geophase/specfun.hpp"

namespace geophase {

struct ParamPoint {
    Eigen::VectorXd coords;

    ParamPoint() = default;
    explicit ParamPoint(Eigen::VectorXd c) : coords(std::move(c)) {}
    ParamPoint(std::initializer_list<double> c) {
        coords.resize(static_cast<Eigen::Index>(c.size()));
        Eigen::Index i = 0;
        for (double v : c) coords(i++) = v;
    }

    int dim() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords(i); }
    double& operator[](int i) { return coords(i); }
};

// Quadratic-Hamiltonian parameter block (X, Y, Z): valid when the phase-space
// contours are elliptic (XZ - Y^2 > 0) on the Z > 0 branch.
bool oscillator_domain_ok(const ParamPoint& X);
// Frequency sqrt(XZ - Y^2); throws DomainError outside the valid domain.
double oscillator_omega(const ParamPoint& X);

struct Circuit {
    std::function<ParamPoint(double)> path;  // s in [0, 1], path(0) == path(1)
    int samples = 256;
};

// Same image traversed backwards: path'(s) = path(1 - s).
Circuit reversed(const Circuit& c);
// Checks closure componentwise; throws DomainError on violation.
void validate_circuit(const Circuit& c, double tol = 1e-12);

struct Surface {
    std::function<ParamPoint(double, double)> map;  // (u, v) in [0, 1]^2
    Circuit boundary;                                // traced by the u = 1 edge
    std::function<bool(const ParamPoint&)> domain;   // optional validity predicate
};

// Orientation flip that keeps the boundary-edge convention: v -> 1 - v.
Surface reversed(const Surface& s);
// Checks boundary closure and that map(1, s) traces boundary.path(s).
void validate_surface(const Surface& s, double tol = 1e-9);

// Antisymmetric-matrix-valued function on parameter space. The component
// callback fills the i < j entries; eval mirrors them so the result is
// antisymmetric exactly by construction.
class TwoFormField {
public:
    using Components = std::function<Eigen::MatrixXd(const ParamPoint&)>;

    TwoFormField(int dim, Components upper);
    int dim() const { return dim_; }
    Eigen::MatrixXd eval(const ParamPoint& P) const;

private:
    int dim_;
    Components upper_;
};

// Matrix-valued variant: one N x N hermitian block per (i, j) pair, i < j,
// returned by the callback in lexicographic pair order.
class MatrixTwoFormField {
public:
    using Components = std::function<std::vector<Eigen::MatrixXcd>(const ParamPoint&)>;

    MatrixTwoFormField(int dim, int block_dim, Components comp);
    int dim() const { return dim_; }
    int block_dim() const { return block_dim_; }
    // Blocks for i < j in lexicographic order; F_ji = -F_ij implied.
    std::vector<Eigen::MatrixXcd> eval(const ParamPoint& P) const;

private:
    int dim_;
    int block_dim_;
    Components comp_;
};

// Constant-frequency circuit X = w0(cosh r + sinh r cos phi),
// Y = w0 sinh r sin phi, Z = w0(cosh r - sinh r cos phi), phi = 2*pi*s;
// XZ - Y^2 = w0^2 identically.
Circuit make_cap_circuit(double omega0, double r, int samples);

// Spanning surface of make_cap_circuit over rho in [0, r] (u -> rho, v -> phi).
Surface make_cap_surface(double omega0, double r);

// Closed loop in the Y = 0 plane: (x0 + radius cos phi, 0, z0 + radius sin phi).
Circuit make_planar_circuit(double x0, double z0, double radius, int samples);
Surface make_planar_surface(double x0, double z0, double radius);

// Integral of F over the surface via pullback with central-difference
// Jacobians and a tensor-product Gauss-Legendre rule of the given order.
double surface_integral(const TwoFormField& F, const Surface& sigma, int order);
Eigen::MatrixXcd surface_integral(const MatrixTwoFormField& F, const Surface& sigma,
                                  int order);

}  // namespace geophase
