#include "geophase/geometry.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "geophase/errors.hpp"

namespace geophase {

namespace {

constexpr double kPullbackStep = 1e-5;  // central-difference step in (u, v)

std::string describe(const ParamPoint& P) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < P.dim(); ++i) os << (i ? ", " : "") << P[i];
    os << ")";
    return os.str();
}

double wrap_unit(double s) { return s - std::floor(s); }

}  // namespace

bool oscillator_domain_ok(const ParamPoint& X) {
    if (X.dim() != 3) return false;
    return X[2] > 0.0 && X[0] * X[2] - X[1] * X[1] > 0.0;
}

double oscillator_omega(const ParamPoint& X) {
    if (!oscillator_domain_ok(X))
        throw DomainError("parameter point outside the elliptic domain (need XZ - Y^2 > 0, Z > 0): " +
                          describe(X));
    return std::sqrt(X[0] * X[2] - X[1] * X[1]);
}

Circuit reversed(const Circuit& c) {
    auto path = c.path;
    return Circuit{[path](double s) { return path(1.0 - s); }, c.samples};
}

void validate_circuit(const Circuit& c, double tol) {
    if (!c.path) throw DomainError("circuit has no path");
    if (c.samples < 1) throw DomainError("circuit needs at least one sample");
    const ParamPoint a = c.path(0.0);
    const ParamPoint b = c.path(1.0);
    if (a.dim() != b.dim() || (a.coords - b.coords).cwiseAbs().maxCoeff() > tol)
        throw DomainError("circuit is not closed: path(0) != path(1)");
}

Surface reversed(const Surface& s) {
    auto map = s.map;
    return Surface{[map](double u, double v) { return map(u, 1.0 - v); },
                   reversed(s.boundary), s.domain};
}

void validate_surface(const Surface& s, double tol) {
    if (!s.map) throw DomainError("surface has no map");
    validate_circuit(s.boundary);
    for (int k = 0; k <= 16; ++k) {
        const double t = k / 16.0;
        const ParamPoint edge = s.map(1.0, t);
        const ParamPoint want = s.boundary.path(t);
        if ((edge.coords - want.coords).cwiseAbs().maxCoeff() > tol)
            throw DomainError("surface boundary mismatch: u = 1 edge does not trace the circuit");
    }
}

TwoFormField::TwoFormField(int dim, Components upper) : dim_(dim), upper_(std::move(upper)) {
    if (dim_ < 2) throw DomainError("TwoFormField: dimension must be >= 2");
    if (!upper_) throw DomainError("TwoFormField: missing component callback");
}

Eigen::MatrixXd TwoFormField::eval(const ParamPoint& P) const {
    const Eigen::MatrixXd raw = upper_(P);
    if (raw.rows() != dim_ || raw.cols() != dim_)
        throw DomainError("TwoFormField: component callback returned wrong dimensions");
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = i + 1; j < dim_; ++j) {
            F(i, j) = raw(i, j);
            F(j, i) = -raw(i, j);
        }
    }
    return F;
}

MatrixTwoFormField::MatrixTwoFormField(int dim, int block_dim, Components comp)
    : dim_(dim), block_dim_(block_dim), comp_(std::move(comp)) {
    if (dim_ < 2) throw DomainError("MatrixTwoFormField: dimension must be >= 2");
    if (block_dim_ < 1) throw DomainError("MatrixTwoFormField: block dimension must be >= 1");
    if (!comp_) throw DomainError("MatrixTwoFormField: missing component callback");
}

std::vector<Eigen::MatrixXcd> MatrixTwoFormField::eval(const ParamPoint& P) const {
    std::vector<Eigen::MatrixXcd> blocks = comp_(P);
    const std::size_t want = static_cast<std::size_t>(dim_) * (dim_ - 1) / 2;
    if (blocks.size() != want)
        throw DomainError("MatrixTwoFormField: component callback returned wrong block count");
    for (const auto& b : blocks)
        if (b.rows() != block_dim_ || b.cols() != block_dim_)
            throw DomainError("MatrixTwoFormField: block has wrong dimensions");
    return blocks;
}

Circuit make_cap_circuit(double omega0, double r, int samples) {
    if (!(omega0 > 0.0)) throw DomainError("make_cap_circuit: omega0 must be positive");
    if (r < 0.0) throw DomainError("make_cap_circuit: r must be nonnegative");
    const double ch = std::cosh(r);
    const double sh = std::sinh(r);
    auto path = [omega0, ch, sh](double s) {
        const double phi = 2.0 * M_PI * wrap_unit(s);
        return ParamPoint{omega0 * (ch + sh * std::cos(phi)), omega0 * sh * std::sin(phi),
                          omega0 * (ch - sh * std::cos(phi))};
    };
    return Circuit{path, samples};
}

Surface make_cap_surface(double omega0, double r) {
    if (!(omega0 > 0.0)) throw DomainError("make_cap_surface: omega0 must be positive");
    if (r < 0.0) throw DomainError("make_cap_surface: r must be nonnegative");
    auto map = [omega0, r](double u, double v) {
        const double rho = r * u;
        const double phi = 2.0 * M_PI * wrap_unit(v);
        const double ch = std::cosh(rho);
        const double sh = std::sinh(rho);
        return ParamPoint{omega0 * (ch + sh * std::cos(phi)), omega0 * sh * std::sin(phi),
                          omega0 * (ch - sh * std::cos(phi))};
    };
    return Surface{map, make_cap_circuit(omega0, r, 256), oscillator_domain_ok};
}

Circuit make_planar_circuit(double x0, double z0, double radius, int samples) {
    if (radius < 0.0) throw DomainError("make_planar_circuit: radius must be nonnegative");
    auto path = [x0, z0, radius](double s) {
        const double phi = 2.0 * M_PI * wrap_unit(s);
        return ParamPoint{x0 + radius * std::cos(phi), 0.0, z0 + radius * std::sin(phi)};
    };
    return Circuit{path, samples};
}

Surface make_planar_surface(double x0, double z0, double radius) {
    if (radius < 0.0) throw DomainError("make_planar_surface: radius must be nonnegative");
    auto map = [x0, z0, radius](double u, double v) {
        const double phi = 2.0 * M_PI * wrap_unit(v);
        return ParamPoint{x0 + radius * u * std::cos(phi), 0.0,
                          z0 + radius * u * std::sin(phi)};
    };
    return Surface{map, make_planar_circuit(x0, z0, radius, 256), oscillator_domain_ok};
}

namespace {

struct PullbackNode {
    ParamPoint point;
    Eigen::VectorXd tu;
    Eigen::VectorXd tv;
    double weight;
};

template <typename Visit>
void for_each_pullback_node(const Surface& sigma, int order, Visit&& visit) {
    if (order < 1) throw DomainError("surface_integral: quadrature order must be >= 1");
    if (!sigma.map) throw DomainError("surface_integral: surface has no map");
    const QuadratureRule rule = gauss_legendre(order, 0.0, 1.0);
    const double h = kPullbackStep;
    for (int a = 0; a < order; ++a) {
        const double u = rule.nodes[a];
        for (int b = 0; b < order; ++b) {
            const double v = rule.nodes[b];
            PullbackNode node;
            node.point = sigma.map(u, v);
            if (sigma.domain && !sigma.domain(node.point))
                throw DomainError("surface leaves the valid parameter domain at " +
                                  describe(node.point));
            node.tu = (sigma.map(u + h, v).coords - sigma.map(u - h, v).coords) / (2.0 * h);
            node.tv = (sigma.map(u, v + h).coords - sigma.map(u, v - h).coords) / (2.0 * h);
            node.weight = rule.weights[a] * rule.weights[b];
            visit(node);
        }
    }
}

}  // namespace

double surface_integral(const TwoFormField& F, const Surface& sigma, int order) {
    double acc = 0.0;
    const int d = F.dim();
    for_each_pullback_node(sigma, order, [&](const PullbackNode& node) {
        const Eigen::MatrixXd Fm = F.eval(node.point);
        double pull = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                pull += Fm(i, j) * (node.tu(i) * node.tv(j) - node.tu(j) * node.tv(i));
        acc += node.weight * pull;
    });
    return acc;
}

Eigen::MatrixXcd surface_integral(const MatrixTwoFormField& F, const Surface& sigma,
                                  int order) {
    const int d = F.dim();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(F.block_dim(), F.block_dim());
    for_each_pullback_node(sigma, order, [&](const PullbackNode& node) {
        const std::vector<Eigen::MatrixXcd> blocks = F.eval(node.point);
        std::size_t idx = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                const double jac = node.tu(i) * node.tv(j) - node.tu(j) * node.tv(i);
                acc += node.weight * jac * blocks[idx];
                ++idx;
            }
        }
    });
    return acc;
}

}  // namespace geophase
