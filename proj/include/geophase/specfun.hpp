#pragma once

#include <cstddef>
#include <vector>

namespace geophase {

// Weighted Hermite function chi_n(xi) = N_n e^{-xi^2/2} H_n(xi) with
// N_n = (2^n n! sqrt(pi))^{-1/2}, evaluated by the three-term recurrence on
// the chi_n themselves. Overflow-free for n <= 200, |xi| <= 30.
double hermite_function(int n, double xi);

// Laguerre polynomial L_n(x) by the stable three-term recurrence.
double laguerre(int n, double x);

enum class QuadKind {
    LegendreOnInterval,
    LaguerreOnHalfline,
    TrapezoidPeriodic,
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    QuadKind kind = QuadKind::LegendreOnInterval;

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
        return acc;
    }
};

// Gauss-Legendre rule on [a, b]; exact for polynomials of degree <= 2*order - 1.
QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

// Gauss-Laguerre rule on [0, inf), weight-folded for integrands that decay
// like e^{-rate*I}: exact when f(I) = e^{-rate*I} * polynomial. Folded
// weights are assembled in log space so large orders do not overflow.
QuadratureRule gauss_laguerre(int order, double rate = 2.0);

// Uniform rule on [0, 2*pi): nodes 2*pi*j/order, weights 2*pi/order.
// Spectrally accurate for smooth periodic integrands.
QuadratureRule trapezoid_periodic(int order);

// Dispatcher; [a, b] applies to the legendre kind, rate to the laguerre kind.
QuadratureRule quadrature(QuadKind kind, int order, double a = -1.0, double b = 1.0,
                          double rate = 2.0);

}  // namespace geophase
