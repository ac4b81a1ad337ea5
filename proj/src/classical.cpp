#include "geophase/classical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "geophase/errors.hpp"

namespace geophase {

namespace {

double wrap_angle(double theta) {
    const double two_pi = 2.0 * M_PI;
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    return t;
}

}  // namespace

ActionAngleChart oscillator_chart() {
    ActionAngleChart chart;
    chart.to_phase = [](double I, double theta, const ParamPoint& X) {
        const double w = oscillator_omega(X);
        if (I < 0.0) throw DomainError("oscillator chart: action must be nonnegative");
        const double Z = X[2];
        const double q = std::sqrt(2.0 * I * Z / w) * std::sin(theta);
        const double p = std::sqrt(2.0 * I * w / Z) * std::cos(theta) - (X[1] / Z) * q;
        return PhasePoint{q, p};
    };
    chart.from_phase = [](double q, double p, const ParamPoint& X) {
        const double w = oscillator_omega(X);
        const double Z = X[2];
        const double pt = p + (X[1] / Z) * q;
        const double E = 0.5 * (Z * pt * pt + (w * w / Z) * q * q);
        if (E == 0.0) return ActionAngle{0.0, 0.0};
        const double theta = std::atan2(q * std::sqrt(w / Z), pt * std::sqrt(Z / w));
        return ActionAngle{E / w, wrap_angle(theta)};
    };
    chart.frequency = [](double, const ParamPoint& X) { return oscillator_omega(X); };
    chart.hamiltonian = [](double I, const ParamPoint& X) { return oscillator_omega(X) * I; };
    return chart;
}

NaturalForm oscillator_natural_form() {
    NaturalForm form;
    form.mass = [](const ParamPoint& X) {
        oscillator_omega(X);
        return 1.0 / X[2];
    };
    form.potential = [](double q, const ParamPoint& X) {
        const double w = oscillator_omega(X);
        return 0.5 * (w * w / X[2]) * q * q;
    };
    form.shear = [](const ParamPoint& X) {
        oscillator_omega(X);
        return X[1] / X[2];
    };
    return form;
}

namespace {

constexpr int kPanels = 24;
constexpr int kPanelOrder = 12;

const QuadratureRule& panel_rule() {
    static const QuadratureRule rule = gauss_legendre(kPanelOrder);
    return rule;
}

template <typename F>
double integrate_panel(F&& f, double a, double b) {
    const QuadratureRule& rule = panel_rule();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return half * acc;
}

// Bound orbit of H = pt^2/(2m) + V(q) at energy E, reparameterized by
// q = center + half_width * sin(u), u in [-pi/2, pi/2].
struct Orbit {
    double E = 0.0;
    double q_minus = 0.0;
    double q_plus = 0.0;
    double center = 0.0;
    double half_width = 0.0;
    double mass = 0.0;
    double shear = 0.0;
    double action = 0.0;
    double period = 0.0;
    double omega = 0.0;
    double tau_star = 0.0;  // time from q_minus to the angle origin (upper branch)
    std::vector<double> panel_edges;
    std::vector<double> tau_edges;  // cumulative time at panel edges
    std::function<double(double)> V;
};

// E - V with a round-off floor next to the turning points; a genuinely negative
// gap away from them means the region is not a single well.
double energy_gap(const Orbit& orb, double u) {
    const double q = orb.center + orb.half_width * std::sin(u);
    const double s = orb.E - orb.V(q);
    if (s > 0.0) return s;
    if (std::abs(std::cos(u)) < 1e-3) return 1e-15 * (std::abs(orb.E) + 1.0);
    throw NumericalError("numerical chart: potential exceeds E inside the orbit (not a single well)");
}

double time_integrand(const Orbit& orb, double u) {
    return std::sqrt(orb.mass / (2.0 * energy_gap(orb, u))) * orb.half_width * std::cos(u);
}

double action_integrand(const Orbit& orb, double u) {
    return std::sqrt(2.0 * orb.mass * energy_gap(orb, u)) * orb.half_width * std::cos(u);
}

double tau_of_u(const Orbit& orb, double u) {
    const auto& edges = orb.panel_edges;
    u = std::clamp(u, edges.front(), edges.back());
    auto it = std::upper_bound(edges.begin(), edges.end(), u);
    std::size_t idx = (it == edges.begin()) ? 0 : std::size_t(it - edges.begin()) - 1;
    idx = std::min(idx, edges.size() - 2);
    return orb.tau_edges[idx] +
           integrate_panel([&orb](double x) { return time_integrand(orb, x); }, edges[idx], u);
}

double solve_u_of_time(const Orbit& orb, double t) {
    const double half = 0.5 * orb.period;
    const double tol = 1e-13 * std::max(1.0, orb.period);
    if (t <= tol) return orb.panel_edges.front();
    if (t >= half - tol) return orb.panel_edges.back();
    const auto& taus = orb.tau_edges;
    auto it = std::upper_bound(taus.begin(), taus.end(), t);
    std::size_t idx = (it == taus.begin()) ? 0 : std::size_t(it - taus.begin()) - 1;
    idx = std::min(idx, taus.size() - 2);
    double lo = orb.panel_edges[idx];
    double hi = orb.panel_edges[idx + 1];
    const double tau_lo = taus[idx];
    const double tau_hi = taus[idx + 1];
    double u = lo + (hi - lo) * (t - tau_lo) / std::max(tau_hi - tau_lo, 1e-300);
    u = std::clamp(u, lo, hi);
    for (int iter = 0; iter < 80; ++iter) {
        const double res = tau_of_u(orb, u) - t;
        if (std::abs(res) <= tol) return u;
        if (res > 0.0)
            hi = u;
        else
            lo = u;
        const double der = time_integrand(orb, u);
        double next = der > 1e-30 ? u - res / der : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-16 * (1.0 + std::abs(u))) return 0.5 * (lo + hi);
        u = next;
    }
    throw NumericalError("numerical chart: angle-to-time inversion did not converge");
}

double find_turning(const std::function<double(double)>& V, double E, double q0,
                    double direction, double scale) {
    double step = std::max(scale, 1e-8);
    double inner = q0;
    for (int it = 0; it < 200; ++it) {
        const double outer = q0 + direction * step;
        if (V(outer) > E) {
            double lo = inner;
            double hi = outer;
            while (std::abs(hi - lo) > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi))) {
                const double mid = 0.5 * (lo + hi);
                if (V(mid) > E)
                    hi = mid;
                else
                    lo = mid;
            }
            double q = 0.5 * (lo + hi);
            // Newton polish: E - V(q) left at ~1e-12 * |V'| by bisection would be
            // amplified to ~1e-6 in sqrt(E - V) near the turning points.
            for (int polish = 0; polish < 3; ++polish) {
                const double hq = 1e-6 * (1.0 + std::abs(q));
                const double der = (V(q + hq) - V(q - hq)) / (2.0 * hq);
                if (!std::isfinite(der) || der == 0.0) break;
                const double corr = (E - V(q)) / der;
                if (!std::isfinite(corr) || std::abs(corr) > 1e3 * (std::abs(hi - lo) + hq))
                    break;
                q += corr;
            }
            return q;
        }
        inner = outer;
        step *= 2.0;
    }
    throw DomainError("numerical chart: no turning point found (region unbound?)");
}

double minimize_potential(const std::function<double(double)>& V, double a, double b) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = a, hi = b;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = V(x1), f2 = V(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-8 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = V(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = V(x2);
        }
    }
    double q = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double h = 1e-5 * (1.0 + std::abs(q));
        const double d1 = (V(q + h) - V(q - h)) / (2.0 * h);
        const double d2 = (V(q + h) - 2.0 * V(q) + V(q - h)) / (h * h);
        if (!(d2 > 0.0)) break;
        const double qn = q - d1 / d2;
        if (!(qn > a && qn < b)) break;
        q = qn;
    }
    return q;
}

Orbit build_orbit(const NaturalForm& form, const ParamPoint& X, double E) {
    Orbit orb;
    orb.mass = form.mass(X);
    if (!(orb.mass > 0.0)) throw DomainError("numerical chart: mass must be positive");
    orb.shear = form.shear ? form.shear(X) : 0.0;
    orb.V = [pot = form.potential, X](double q) { return pot(q, X); };
    orb.E = E;
    if (!(E > orb.V(form.q_center)))
        throw DomainError("numerical chart: energy does not exceed the well at q_center");
    orb.q_plus = find_turning(orb.V, E, form.q_center, +1.0, form.bracket_scale);
    orb.q_minus = find_turning(orb.V, E, form.q_center, -1.0, form.bracket_scale);
    orb.center = 0.5 * (orb.q_plus + orb.q_minus);
    orb.half_width = 0.5 * (orb.q_plus - orb.q_minus);
    if (!(orb.half_width > 0.0))
        throw NumericalError("numerical chart: degenerate orbit (turning points coincide)");

    orb.panel_edges.resize(kPanels + 1);
    orb.tau_edges.resize(kPanels + 1);
    for (int k = 0; k <= kPanels; ++k)
        orb.panel_edges[k] = -0.5 * M_PI + M_PI * double(k) / kPanels;
    orb.tau_edges[0] = 0.0;
    double loop = 0.0;
    for (int k = 0; k < kPanels; ++k) {
        const double a = orb.panel_edges[k];
        const double b = orb.panel_edges[k + 1];
        orb.tau_edges[k + 1] =
            orb.tau_edges[k] +
            integrate_panel([&orb](double x) { return time_integrand(orb, x); }, a, b);
        loop += integrate_panel([&orb](double x) { return action_integrand(orb, x); }, a, b);
    }
    orb.action = loop / M_PI;
    orb.period = 2.0 * orb.tau_edges[kPanels];
    if (!(orb.period > 0.0) || !std::isfinite(orb.period))
        throw NumericalError("numerical chart: invalid period");
    orb.omega = 2.0 * M_PI / orb.period;

    const double q_star = minimize_potential(orb.V, orb.q_minus, orb.q_plus);
    const double u_star =
        std::asin(std::clamp((q_star - orb.center) / orb.half_width, -1.0, 1.0));
    orb.tau_star = tau_of_u(orb, u_star);
    return orb;
}

Orbit solve_orbit_for_action(const NaturalForm& form, const ParamPoint& X, double I_target) {
    if (!(I_target > 0.0)) throw DomainError("numerical chart: action must be positive");
    const double q0 = form.q_center;
    const double V0 = form.potential(q0, X);
    const double m = form.mass(X);
    if (!(m > 0.0)) throw DomainError("numerical chart: mass must be positive");
    const double h = 1e-4 * (1.0 + std::abs(q0));
    const double d2 =
        (form.potential(q0 + h, X) - 2.0 * V0 + form.potential(q0 - h, X)) / (h * h);
    const double omega_h = d2 > 0.0 ? std::sqrt(d2 / m) : 1.0;

    double E_hi = V0 + omega_h * I_target;
    Orbit orb = build_orbit(form, X, E_hi);
    for (int guard = 0; orb.action < I_target; ++guard) {
        if (guard > 60) throw NumericalError("numerical chart: cannot bracket the requested action");
        E_hi = V0 + 2.0 * (E_hi - V0);
        orb = build_orbit(form, X, E_hi);
    }
    double E_lo = V0;  // action -> 0 as E -> well bottom
    const double tol = 1e-12 * std::max(1.0, I_target);
    for (int iter = 0; iter < 100; ++iter) {
        const double gap = orb.action - I_target;
        if (std::abs(gap) <= tol) return orb;
        if (gap > 0.0)
            E_hi = orb.E;
        else
            E_lo = orb.E;
        double next = orb.E - gap * orb.omega;  // dI/dE = 1/omega
        if (!(next > E_lo && next < E_hi)) next = 0.5 * (E_lo + E_hi);
        if (E_hi - E_lo <= 1e-16 * (std::abs(E_hi) + 1.0)) return orb;
        orb = build_orbit(form, X, next);
    }
    throw NumericalError("numerical chart: action-to-energy inversion did not converge");
}

struct ChartCache {
    std::mutex mu;
    std::map<std::vector<double>, std::shared_ptr<const Orbit>> by_action;
    std::map<std::vector<double>, std::shared_ptr<const Orbit>> by_energy;
};

std::vector<double> cache_key(const ParamPoint& X, double v) {
    std::vector<double> key(X.coords.data(), X.coords.data() + X.dim());
    key.push_back(v);
    return key;
}

std::shared_ptr<const Orbit> lookup(ChartCache& cache,
                                    std::map<std::vector<double>, std::shared_ptr<const Orbit>>& m,
                                    const std::vector<double>& key) {
    std::lock_guard<std::mutex> lock(cache.mu);
    auto it = m.find(key);
    return it == m.end() ? nullptr : it->second;
}

void store(ChartCache& cache,
           std::map<std::vector<double>, std::shared_ptr<const Orbit>>& m,
           const std::vector<double>& key, std::shared_ptr<const Orbit> orb) {
    std::lock_guard<std::mutex> lock(cache.mu);
    if (cache.by_action.size() + cache.by_energy.size() > 8192) {
        cache.by_action.clear();
        cache.by_energy.clear();
    }
    m.emplace(key, std::move(orb));
}

std::shared_ptr<const Orbit> orbit_for_action(const std::shared_ptr<ChartCache>& cache,
                                              const NaturalForm& form, const ParamPoint& X,
                                              double I) {
    const auto key = cache_key(X, I);
    if (auto hit = lookup(*cache, cache->by_action, key)) return hit;
    auto orb = std::make_shared<const Orbit>(solve_orbit_for_action(form, X, I));
    store(*cache, cache->by_action, key, orb);
    return orb;
}

std::shared_ptr<const Orbit> orbit_for_energy(const std::shared_ptr<ChartCache>& cache,
                                              const NaturalForm& form, const ParamPoint& X,
                                              double E) {
    const auto key = cache_key(X, E);
    if (auto hit = lookup(*cache, cache->by_energy, key)) return hit;
    auto orb = std::make_shared<const Orbit>(build_orbit(form, X, E));
    store(*cache, cache->by_energy, key, orb);
    return orb;
}

}  // namespace

ActionAngleChart numerical_chart(NaturalForm form) {
    if (!form.mass || !form.potential)
        throw DomainError("numerical chart: mass and potential callbacks are required");
    auto shared_form = std::make_shared<const NaturalForm>(std::move(form));
    auto cache = std::make_shared<ChartCache>();

    ActionAngleChart chart;
    chart.to_phase = [shared_form, cache](double I, double theta, const ParamPoint& X) {
        auto orb = orbit_for_action(cache, *shared_form, X, I);
        double t = theta / orb->omega + orb->tau_star;
        t = std::fmod(t, orb->period);
        if (t < 0.0) t += orb->period;
        const double half = 0.5 * orb->period;
        const bool upper = t <= half;
        const double u = solve_u_of_time(*orb, upper ? t : orb->period - t);
        const double q = orb->center + orb->half_width * std::sin(u);
        const double s = std::max(orb->E - orb->V(q), 0.0);
        const double pt = (upper ? 1.0 : -1.0) * std::sqrt(2.0 * orb->mass * s);
        return PhasePoint{q, pt - orb->shear * q};
    };
    chart.from_phase = [shared_form, cache](double q, double p, const ParamPoint& X) {
        const double m = shared_form->mass(X);
        if (!(m > 0.0)) throw DomainError("numerical chart: mass must be positive");
        const double shear = shared_form->shear ? shared_form->shear(X) : 0.0;
        const double pt = p + shear * q;
        const double E = pt * pt / (2.0 * m) + shared_form->potential(q, X);
        if (!(E > shared_form->potential(shared_form->q_center, X)))
            return ActionAngle{0.0, 0.0};
        auto orb = orbit_for_energy(cache, *shared_form, X, E);
        const double u =
            std::asin(std::clamp((q - orb->center) / orb->half_width, -1.0, 1.0));
        const double tau = tau_of_u(*orb, u);
        const double t = pt >= 0.0 ? tau : orb->period - tau;
        return ActionAngle{orb->action, wrap_angle(orb->omega * (t - orb->tau_star))};
    };
    chart.frequency = [shared_form, cache](double I, const ParamPoint& X) {
        return orbit_for_action(cache, *shared_form, X, I)->omega;
    };
    chart.hamiltonian = [shared_form, cache](double I, const ParamPoint& X) {
        return orbit_for_action(cache, *shared_form, X, I)->E;
    };
    return chart;
}

double torus_average(const std::function<double(double q, double p)>& f,
                     const ActionAngleChart& chart, double I, const ParamPoint& X,
                     const QuadratureRule& rule) {
    if (rule.kind != QuadKind::TrapezoidPeriodic)
        throw DomainError("torus_average: a periodic angle rule is required");
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const PhasePoint z = chart.to_phase(I, rule.nodes[k], X);
        acc += rule.weights[k] * f(z.q, z.p);
    }
    const double avg = acc / (2.0 * M_PI);
    if (!std::isfinite(avg)) throw NumericalError("torus_average: non-finite result");
    return avg;
}

namespace {

const QuadratureRule& default_torus_rule() {
    static const QuadratureRule rule = trapezoid_periodic(128);
    return rule;
}

}  // namespace

Eigen::MatrixXd classical_two_form(const ActionAngleChart& chart, double I,
                                   const ParamPoint& X, double delta_X,
                                   const QuadratureRule& rule) {
    if (rule.kind != QuadKind::TrapezoidPeriodic)
        throw DomainError("classical_two_form: a periodic angle rule is required");
    if (!(delta_X > 0.0)) throw DomainError("classical_two_form: step must be positive");
    const int d = X.dim();
    const double h = delta_X * X.coords.norm();
    if (!(h > 0.0)) throw DomainError("classical_two_form: parameter point has zero norm");
    const int N = static_cast<int>(rule.nodes.size());

    Eigen::MatrixXd dq(d, N), dp(d, N);
    for (int i = 0; i < d; ++i) {
        ParamPoint Xp = X, Xm = X;
        Xp[i] += h;
        Xm[i] -= h;
        for (int k = 0; k < N; ++k) {
            const PhasePoint zp = chart.to_phase(I, rule.nodes[k], Xp);
            const PhasePoint zm = chart.to_phase(I, rule.nodes[k], Xm);
            dq(i, k) = (zp.q - zm.q) / (2.0 * h);
            dp(i, k) = (zp.p - zm.p) / (2.0 * h);
        }
    }

    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < N; ++k)
                acc += rule.weights[k] * (dp(i, k) * dq(j, k) - dp(j, k) * dq(i, k));
            F(i, j) = acc / (2.0 * M_PI);
            F(j, i) = -F(i, j);
        }
    }
    if (!F.allFinite()) throw NumericalError("classical_two_form: non-finite result");
    return F;
}

Eigen::MatrixXd classical_two_form(const ActionAngleChart& chart, double I,
                                   const ParamPoint& X, double delta_X) {
    return classical_two_form(chart, I, X, delta_X, default_torus_rule());
}

ClassicalTwoFormSamples sample_classical_two_form(const ActionAngleChart& chart,
                                                  const std::vector<double>& I_grid,
                                                  const ParamPoint& X, double delta_X) {
    ClassicalTwoFormSamples out;
    out.I_grid = I_grid;
    out.X = X;
    out.forms.reserve(I_grid.size());
    for (double I : I_grid) out.forms.push_back(classical_two_form(chart, I, X, delta_X));
    return out;
}

TwoFormField classical_two_form_field(const ActionAngleChart& chart, double I, int dim,
                                      double delta_X) {
    return TwoFormField(dim, [chart, I, delta_X](const ParamPoint& P) {
        return classical_two_form(chart, I, P, delta_X);
    });
}

double hannay_angle(const ActionAngleChart& chart, double I, const Surface& sigma,
                    double delta_I, int surface_order) {
    if (!(delta_I > 0.0)) throw DomainError("hannay_angle: delta_I must be positive");
    if (!sigma.map) throw DomainError("hannay_angle: surface has no map");
    const int dim = sigma.map(0.5, 0.5).dim();
    auto integral_at = [&](double Ival) {
        return surface_integral(classical_two_form_field(chart, Ival, dim), sigma,
                                surface_order);
    };
    return -(integral_at(I + delta_I) - integral_at(I - delta_I)) / (2.0 * delta_I);
}

}  // namespace geophase
