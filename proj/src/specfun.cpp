#include "geophase/specfun.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "geophase/errors.hpp"

namespace geophase {

double hermite_function(int n, double xi) {
    if (n < 0) throw DomainError("hermite_function: order must be nonnegative");
    const double chi0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
    if (n == 0) return chi0;
    double prev = chi0;
    double cur = std::sqrt(2.0) * xi * chi0;
    for (int k = 1; k < n; ++k) {
        const double next =
            xi * std::sqrt(2.0 / (k + 1.0)) * cur - std::sqrt(k / (k + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double laguerre(int n, double x) {
    if (n < 0) throw DomainError("laguerre: order must be nonnegative");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 - x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

struct GolubWelsch {
    Eigen::VectorXd nodes;
    Eigen::VectorXd first_row_sq;  // squared first components of the eigenvectors
};

// Nodes/weights from the symmetric Jacobi matrix of the weight's orthonormal
// polynomial recurrence: nodes are eigenvalues, weights mu0 * v_1k^2.
GolubWelsch golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("quadrature: tridiagonal eigen decomposition failed");
    GolubWelsch out;
    out.nodes = solver.eigenvalues();
    out.first_row_sq = solver.eigenvectors().row(0).cwiseAbs2();
    return out;
}

}  // namespace

QuadratureRule gauss_legendre(int order, double a, double b) {
    if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
    if (!(b > a)) throw DomainError("gauss_legendre: interval must satisfy a < b");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(std::max(order - 1, 0));
    for (int k = 1; k < order; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    const GolubWelsch gw = golub_welsch(diag, sub);

    QuadratureRule rule;
    rule.kind = QuadKind::LegendreOnInterval;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int k = 0; k < order; ++k) {
        rule.nodes[k] = mid + half * gw.nodes(k);
        rule.weights[k] = 2.0 * gw.first_row_sq(k) * half;
    }
    return rule;
}

namespace {

// log |L_n(x)| by the three-term recurrence with overflow renormalization.
double log_abs_laguerre(int n, double x) {
    if (n == 0) return 0.0;
    double prev = 1.0;
    double cur = 1.0 - x;
    double shift = 0.0;
    for (int k = 1; k < n; ++k) {
        double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
        const double mag = std::max(std::abs(prev), std::abs(cur));
        if (mag > 1e150) {
            prev /= mag;
            cur /= mag;
            shift += std::log(mag);
        }
    }
    return shift + std::log(std::abs(cur));
}

}  // namespace

QuadratureRule gauss_laguerre(int order, double rate) {
    if (order < 1) throw DomainError("gauss_laguerre: order must be >= 1");
    if (!(rate > 0.0)) throw DomainError("gauss_laguerre: decay rate must be positive");
    Eigen::VectorXd diag(order);
    Eigen::VectorXd sub(std::max(order - 1, 0));
    for (int k = 0; k < order; ++k) diag(k) = 2.0 * k + 1.0;
    for (int k = 1; k < order; ++k) sub(k - 1) = k;
    const GolubWelsch gw = golub_welsch(diag, sub);

    // Weights from the closed form lambda_k = u_k / ((m+1) L_{m+1}(u_k))^2,
    // folded with e^{+u} in log space. (The eigenvector first components lose
    // all relative accuracy once the true weight drops below the eigensolver's
    // absolute noise floor, so they cannot be folded reliably.)
    QuadratureRule rule;
    rule.kind = QuadKind::LaguerreOnHalfline;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        const double u = gw.nodes(k);
        if (!(u > 0.0))
            throw NumericalError("gauss_laguerre: order too large for double precision");
        const double log_folded = std::log(u) + u - 2.0 * log_abs_laguerre(order + 1, u) -
                                  2.0 * std::log(order + 1.0);
        rule.nodes[k] = u / rate;
        rule.weights[k] = std::exp(log_folded) / rate;
    }
    return rule;
}

QuadratureRule trapezoid_periodic(int order) {
    if (order < 1) throw DomainError("trapezoid_periodic: order must be >= 1");
    QuadratureRule rule;
    rule.kind = QuadKind::TrapezoidPeriodic;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double step = 2.0 * M_PI / order;
    for (int k = 0; k < order; ++k) {
        rule.nodes[k] = k * step;
        rule.weights[k] = step;
    }
    return rule;
}

QuadratureRule quadrature(QuadKind kind, int order, double a, double b, double rate) {
    switch (kind) {
        case QuadKind::LegendreOnInterval:
            return gauss_legendre(order, a, b);
        case QuadKind::LaguerreOnHalfline:
            return gauss_laguerre(order, rate);
        case QuadKind::TrapezoidPeriodic:
            return trapezoid_periodic(order);
    }
    throw DomainError("quadrature: unsupported kind");
}

}  // namespace geophase
