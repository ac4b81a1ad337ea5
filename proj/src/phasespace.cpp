#include "geophase/phasespace.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "geophase/errors.hpp"

namespace geophase {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kHermitianDefect = 1e-8;

struct RadialRule {
    std::vector<double> nodes;
    std::vector<Eigen::MatrixXcd> weights;
};

// Quadrature view of the profile, gated on carrying the full trace mass: a
// normalized scalar profile integrates to 1, a hermitian block family to its
// block dimension (one unit per member state).
RadialRule checked_rule(const RadialWigner& profile, int order, double tail_tol,
                        const char* who) {
    RadialRule rule;
    profile.quadrature(rule.nodes, rule.weights, order);
    std::complex<double> trace = 0.0;
    for (const auto& w : rule.weights) trace += w.trace();
    const double defect =
        std::abs(kTwoPi * trace - static_cast<double>(profile.block_dim));
    if (defect > tail_tol) {
        throw NumericalError(std::string(who) +
                             ": quadrature support misses profile mass (trace defect " +
                             std::to_string(defect) + ")");
    }
    return rule;
}

Eigen::MatrixXd form_at(const ClassicalTwoFormFamily& Fc, double I, const ParamPoint& X,
                        const char* who) {
    const Eigen::MatrixXd f = Fc(I, X);
    if (f.rows() != X.dim() || f.cols() != X.dim()) {
        throw DomainError(std::string(who) + ": two-form dimension mismatch");
    }
    return f;
}

void require_positive_hbar(double hbar, const char* who) {
    if (!(hbar > 0.0)) {
        throw DomainError(std::string(who) + ": hbar must be positive");
    }
}

}  // namespace

ClassicalTwoFormFamily classical_curvature_family(ActionAngleChart chart,
                                                  double delta_X) {
    if (!chart.to_phase) {
        throw DomainError("classical_curvature_family: chart has no to_phase map");
    }
    if (!(delta_X > 0.0)) {
        throw DomainError("classical_curvature_family: step must be positive");
    }
    return [chart = std::move(chart), delta_X](double I, const ParamPoint& X) {
        return classical_two_form(chart, I, X, delta_X);
    };
}

Eigen::MatrixXd curvature_from_wigner(const RadialWigner& profile,
                                      const ClassicalTwoFormFamily& Fc,
                                      const ParamPoint& X, double hbar, int order,
                                      double tail_tol) {
    require_positive_hbar(hbar, "curvature_from_wigner");
    if (profile.block_dim != 1) {
        throw DomainError("curvature_from_wigner: scalar profile required");
    }
    if (!Fc) {
        throw DomainError("curvature_from_wigner: empty two-form family");
    }
    const RadialRule rule = checked_rule(profile, order, tail_tol, "curvature_from_wigner");

    const int dim = X.dim();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        acc += rule.weights[k](0, 0).real() *
               form_at(Fc, rule.nodes[k], X, "curvature_from_wigner");
    }
    acc *= -(kTwoPi / hbar);

    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            const double v = 0.5 * (acc(i, j) - acc(j, i));
            F(i, j) = v;
            F(j, i) = -v;
        }
    }
    return F;
}

TwoFormField curvature_field_from_wigner(const RadialWigner& profile,
                                         const ClassicalTwoFormFamily& Fc,
                                         double hbar, int dim, int order,
                                         double tail_tol) {
    require_positive_hbar(hbar, "curvature_field_from_wigner");
    return TwoFormField(dim, [profile, Fc, hbar, order, tail_tol](const ParamPoint& X) {
        return curvature_from_wigner(profile, Fc, X, hbar, order, tail_tol);
    });
}

BerryPhaseResult phase_from_wigner(const RadialWigner& profile,
                                   const ClassicalTwoFormFamily& Fc,
                                   const Surface& sigma, double hbar, int order,
                                   int surface_order) {
    const int dim = sigma.map(0.0, 0.0).dim();
    const TwoFormField F = curvature_field_from_wigner(profile, Fc, hbar, dim, order);
    BerryPhaseResult result;
    result.raw = -surface_integral(F, sigma, surface_order);
    result.principal = std::remainder(result.raw, kTwoPi);
    return result;
}

Eigen::MatrixXd curvature_separable(const std::vector<RadialWigner>& profiles,
                                    const std::vector<ClassicalTwoFormFamily>& modes,
                                    const ParamPoint& X, double hbar, int order) {
    if (profiles.size() != modes.size()) {
        throw DomainError("curvature_separable: mode count mismatch");
    }
    if (profiles.empty()) {
        throw DomainError("curvature_separable: at least one mode required");
    }
    // Each term of the sum is valid only when every other mode's profile
    // integrates to its normalization; the per-mode trace gate asserts exactly
    // that (at the profile-family tolerance), so the factorized sum is earned.
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(X.dim(), X.dim());
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        F += curvature_from_wigner(profiles[k], modes[k], X, hbar, order, 1e-8);
    }
    return F;
}

std::vector<Eigen::MatrixXcd> wz_curvature_from_wigner(const RadialWigner& profile,
                                                       const ClassicalTwoFormFamily& Fc,
                                                       const ParamPoint& X, double hbar,
                                                       int order, double tail_tol) {
    require_positive_hbar(hbar, "wz_curvature_from_wigner");
    if (!Fc) {
        throw DomainError("wz_curvature_from_wigner: empty two-form family");
    }
    const RadialRule rule = checked_rule(profile, order, tail_tol, "wz_curvature_from_wigner");

    double scale = 0.0;
    double defect = 0.0;
    for (const auto& w : rule.weights) {
        scale = std::max(scale, w.cwiseAbs().maxCoeff());
        defect = std::max(defect, (w - w.adjoint()).cwiseAbs().maxCoeff());
    }
    if (defect > kHermitianDefect * std::max(scale, 1e-300)) {
        throw DomainError("wz_curvature_from_wigner: profile is not hermitian");
    }

    const int dim = X.dim();
    const int nb = profile.block_dim;
    std::vector<Eigen::MatrixXd> forms(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        forms[k] = form_at(Fc, rule.nodes[k], X, "wz_curvature_from_wigner");
    }

    std::vector<Eigen::MatrixXcd> comps;
    comps.reserve(static_cast<std::size_t>(dim) * (dim - 1) / 2);
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(nb, nb);
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                const double f = 0.5 * (forms[k](i, j) - forms[k](j, i));
                C += f * rule.weights[k];
            }
            C *= -(kTwoPi / hbar);
            comps.push_back(0.5 * (C + C.adjoint()));
        }
    }
    return comps;
}

MatrixTwoFormField wz_curvature_field_from_wigner(const RadialWigner& profile,
                                                  const ClassicalTwoFormFamily& Fc,
                                                  double hbar, int dim, int order,
                                                  double tail_tol) {
    require_positive_hbar(hbar, "wz_curvature_field_from_wigner");
    return MatrixTwoFormField(
        dim, profile.block_dim,
        [profile, Fc, hbar, order, tail_tol](const ParamPoint& X) {
            return wz_curvature_from_wigner(profile, Fc, X, hbar, order, tail_tol);
        });
}

Eigen::MatrixXd mixed_curvature(const RadialWigner& profile,
                                const ClassicalTwoFormFamily& Fc, const ParamPoint& X,
                                double hbar, int order) {
    // A statistical profile obeys the same action-weighted integral; the
    // distinct name keeps the density-matrix route and its sign convention
    // (see mixed_phase) recognizable at call sites.
    return curvature_from_wigner(profile, Fc, X, hbar, order);
}

double mixed_phase(const RadialWigner& profile, const ClassicalTwoFormFamily& Fc,
                   const Surface& sigma, double hbar, int order, int surface_order) {
    const int dim = sigma.map(0.0, 0.0).dim();
    const TwoFormField F = curvature_field_from_wigner(profile, Fc, hbar, dim, order);
    return surface_integral(F, sigma, surface_order);
}

double SemiclassicalReport::spread() const {
    const double a = std::abs(hannay - level_difference);
    const double b = std::abs(hannay - action_slope);
    const double c = std::abs(level_difference - action_slope);
    return std::max(a, std::max(b, c));
}

SemiclassicalReport semiclassical_check(const Surface& sigma, int n, double hbar,
                                        double maslov, int surface_order) {
    if (n < 0) {
        throw DomainError("semiclassical_check: level must be nonnegative");
    }
    require_positive_hbar(hbar, "semiclassical_check");

    const int lo = std::max(0, n - 2);
    const int hi = n + 2;
    std::vector<double> gammas(static_cast<std::size_t>(hi - lo + 1));
    for (int m = lo; m <= hi; ++m) {
        gammas[static_cast<std::size_t>(m - lo)] =
            -surface_integral(oscillator_berry_curvature_field(m), sigma, surface_order);
    }

    SemiclassicalReport report;
    report.level_difference =
        -(gammas[static_cast<std::size_t>(n + 1 - lo)] -
          gammas[static_cast<std::size_t>(n - lo)]);

    double sm = 0.0;
    double sg = 0.0;
    double smm = 0.0;
    double smg = 0.0;
    const double count = static_cast<double>(gammas.size());
    for (int m = lo; m <= hi; ++m) {
        const double g = gammas[static_cast<std::size_t>(m - lo)];
        sm += m;
        sg += g;
        smm += static_cast<double>(m) * m;
        smg += m * g;
    }
    const double slope = (count * smg - sm * sg) / (count * smm - sm * sm);
    report.action_slope = -slope;

    const double I_n = hbar * (n + maslov);
    report.hannay = hannay_angle(oscillator_chart(), I_n, sigma, 1e-4, surface_order);
    return report;
}

void validate_report(const PhaseReport& report) {
    const auto finite = [](double v) { return std::isfinite(v); };
    bool ok = finite(report.gamma_q.raw) && finite(report.gamma_q.principal) &&
              finite(report.gamma_ps.raw) && finite(report.gamma_ps.principal) &&
              finite(report.hannay) && finite(report.dynamical_phase) &&
              finite(report.diagnostics.quadrature_residual);
    if (report.mixed_phase.has_value()) ok = ok && finite(*report.mixed_phase);
    if (report.wz_holonomy.has_value()) ok = ok && report.wz_holonomy->allFinite();
    if (!ok) {
        throw NumericalError("PhaseReport contains non-finite entries");
    }
}

}  // namespace geophase
