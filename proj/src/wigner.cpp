#include "geophase/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geophase/errors.hpp"
#include "geophase/specfun.hpp"
#include "fft_utils.hpp"

namespace geophase {

namespace {

constexpr double kNormTol = 1e-8;
constexpr double kEdgeTol = 1e-10;
constexpr double kBandTailTol = 1e-10;
constexpr double kImagTol = 1e-12;

void check_state(const Eigen::VectorXcd& psi, const PhaseSpaceGrid& grid, const char* who) {
    if (psi.size() != grid.spatial.n_points)
        throw DomainError(std::string(who) + ": state length does not match the grid");
    const double norm = grid.spatial.spacing() * psi.squaredNorm();
    if (std::abs(norm - 1.0) > kNormTol) {
        std::ostringstream os;
        os << who << ": state not normalized (defect " << std::abs(norm - 1.0) << ")";
        throw DomainError(os.str());
    }
    const double edge = std::max(std::abs(psi(0)), std::abs(psi(psi.size() - 1)));
    if (edge > kEdgeTol) {
        std::ostringstream os;
        os << who << ": state has not decayed at the grid edges (amplitude " << edge << ")";
        throw DomainError(os.str());
    }
    // The momentum axis reaches only half the grid Nyquist; spectral weight
    // beyond 90% of that range means the transform would alias.
    const int N = grid.spatial.n_points;
    std::vector<std::complex<double>> in(psi.data(), psi.data() + N);
    const std::vector<std::complex<double>> hat = detail::dft(in, FFTW_FORWARD);
    double total = 0.0;
    double tail = 0.0;
    for (int k = 0; k < N; ++k) {
        const int kt = k <= N / 2 ? k : k - N;
        const double w = std::norm(hat[k]);
        total += w;
        if (std::abs(kt) > 0.225 * N) tail += w;
    }
    if (tail > kBandTailTol * total) {
        std::ostringstream os;
        os << who << ": state bandwidth exceeds the momentum axis (relative tail "
           << tail / total << "); rebuild the grid with halved spacing";
        throw NumericalError(os.str());
    }
}

// Complex cross transform rows; shared by the scalar and matrix entry points.
Eigen::MatrixXcd cross_rows(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                            const PhaseSpaceGrid& grid) {
    const int N = grid.spatial.n_points;
    const int M = 2 * N;
    const double scale = grid.spatial.spacing() / (M_PI * grid.hbar);
    Eigen::MatrixXcd W(N, M);
    std::vector<std::complex<double>> g(M);
    for (int j = 0; j < N; ++j) {
        std::fill(g.begin(), g.end(), std::complex<double>(0.0, 0.0));
        const int reach = std::min(j, N - 1 - j);
        for (int m = -reach; m <= reach; ++m)
            g[(m + M) % M] = std::conj(a(j + m)) * b(j - m);
        const std::vector<std::complex<double>> row = detail::dft(g, FFTW_BACKWARD);
        for (int c = 0; c < M; ++c) {
            const int k = ((c - N) + M) % M;  // monotonic p ordering
            W(j, c) = scale * row[k];
        }
    }
    return W;
}

double closed_form_density(int n, double hbar, double I) {
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    return sign / (M_PI * hbar) * std::exp(-2.0 * I / hbar) * laguerre(n, 4.0 * I / hbar);
}

}  // namespace

void validate_phase_space_grid(const PhaseSpaceGrid& grid) {
    validate_grid(grid.spatial);
    if (!(grid.hbar > 0.0)) throw DomainError("phase-space grid: hbar must be positive");
}

Eigen::MatrixXd wigner_transform(const Eigen::VectorXcd& psi, const PhaseSpaceGrid& grid) {
    validate_phase_space_grid(grid);
    check_state(psi, grid, "wigner_transform");
    const Eigen::MatrixXcd W = cross_rows(psi, psi, grid);
    const double imag_residue = W.imag().cwiseAbs().maxCoeff();
    if (imag_residue > kImagTol) {
        std::ostringstream os;
        os << "wigner_transform: imaginary residue " << imag_residue
           << " exceeds the round-off budget";
        throw NumericalError(os.str());
    }
    return W.real();
}

Eigen::MatrixXcd cross_wigner(const Eigen::VectorXcd& psi_a, const Eigen::VectorXcd& psi_b,
                              const PhaseSpaceGrid& grid) {
    validate_phase_space_grid(grid);
    check_state(psi_a, grid, "cross_wigner");
    check_state(psi_b, grid, "cross_wigner");
    return cross_rows(psi_a, psi_b, grid);
}

Eigen::MatrixXcd wigner_matrix(const DegenerateFamily& family, const ParamPoint& X, int a,
                               int b, const PhaseSpaceGrid& grid) {
    if (!family.frame) throw DomainError("wigner_matrix: missing frame callback");
    if (a < 0 || b < 0 || a >= family.size || b >= family.size)
        throw DomainError("wigner_matrix: frame index out of range");
    const std::vector<Eigen::VectorXcd> frame = family.frame(X);
    if (static_cast<int>(frame.size()) != family.size)
        throw DomainError("wigner_matrix: frame size does not match the declared size");
    return cross_wigner(frame[a], frame[b], grid);
}

double sample_phase_space(const Eigen::MatrixXd& W, const PhaseSpaceGrid& grid, double q,
                          double p) {
    const double hq = grid.spatial.spacing();
    const double hp = grid.p_spacing();
    const double uq = (q - grid.spatial.q_min) / hq;
    const double up = (p - grid.p_min()) / hp;
    const int jq = static_cast<int>(std::floor(uq));
    const int jp = static_cast<int>(std::floor(up));
    if (jq < 1 || jq + 2 >= W.rows() || jp < 1 || jp + 2 >= W.cols()) {
        std::ostringstream os;
        os << "sample_phase_space: point (q, p) = (" << q << ", " << p
           << ") outside the interpolable raster";
        throw DomainError(os.str());
    }
    // Keys cubic-convolution weights (a = -1/2) for the four-point stencil.
    auto weights = [](double t, double w[4]) {
        w[0] = 0.5 * (-t * t * t + 2.0 * t * t - t);
        w[1] = 0.5 * (3.0 * t * t * t - 5.0 * t * t + 2.0);
        w[2] = 0.5 * (-3.0 * t * t * t + 4.0 * t * t + t);
        w[3] = 0.5 * (t * t * t - t * t);
    };
    double wq[4], wp[4];
    weights(uq - jq, wq);
    weights(up - jp, wp);
    double acc = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) acc += wq[r] * wp[c] * W(jq - 1 + r, jp - 1 + c);
    return acc;
}

Eigen::MatrixXcd RadialWigner::value(double I) const {
    switch (form) {
        case Form::ClosedForm: {
            Eigen::MatrixXcd v(1, 1);
            v(0, 0) = closed_form_density(level, hbar, I);
            return v;
        }
        case Form::Sampled: {
            if (I_grid.empty()) throw DomainError("radial profile: no samples");
            if (I < I_grid.front() || I > I_grid.back())
                throw DomainError("radial profile: action outside the sampled range");
            const auto hi = std::lower_bound(I_grid.begin(), I_grid.end(), I);
            if (hi == I_grid.begin()) return samples.front();
            const std::size_t k = static_cast<std::size_t>(hi - I_grid.begin());
            const double t = (I - I_grid[k - 1]) / (I_grid[k] - I_grid[k - 1]);
            return (1.0 - t) * samples[k - 1] + t * samples[k];
        }
        case Form::DiracDelta:
            throw DomainError("radial profile: a point mass has no pointwise density");
        case Form::Mixture: {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(block_dim, block_dim);
            for (std::size_t k = 0; k < children.size(); ++k)
                acc += child_weights[k] * children[k].value(I);
            return acc;
        }
    }
    throw DomainError("radial profile: unknown form");
}

double RadialWigner::scalar(double I) const {
    if (block_dim != 1) throw DomainError("radial profile: scalar() needs block_dim 1");
    return value(I)(0, 0).real();
}

void RadialWigner::quadrature(std::vector<double>& nodes,
                              std::vector<Eigen::MatrixXcd>& weights, int order) const {
    nodes.clear();
    weights.clear();
    switch (form) {
        case Form::ClosedForm: {
            const QuadratureRule rule = gauss_laguerre(order, 2.0 / hbar);
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                nodes.push_back(rule.nodes[k]);
                Eigen::MatrixXcd w(1, 1);
                w(0, 0) = rule.weights[k] * closed_form_density(level, hbar, rule.nodes[k]);
                weights.push_back(w);
            }
            return;
        }
        case Form::Sampled: {
            if (I_grid.size() < 2) throw DomainError("radial profile: need >= 2 samples");
            for (std::size_t k = 0; k < I_grid.size(); ++k) {
                const double left = k == 0 ? I_grid[0] : I_grid[k - 1];
                const double right = k + 1 == I_grid.size() ? I_grid[k] : I_grid[k + 1];
                nodes.push_back(I_grid[k]);
                weights.push_back(0.5 * (right - left) * samples[k]);
            }
            return;
        }
        case Form::DiracDelta:
            nodes.push_back(I_star);
            weights.push_back(mass);
            return;
        case Form::Mixture: {
            for (std::size_t c = 0; c < children.size(); ++c) {
                std::vector<double> child_nodes;
                std::vector<Eigen::MatrixXcd> child_w;
                children[c].quadrature(child_nodes, child_w, order);
                for (std::size_t k = 0; k < child_nodes.size(); ++k) {
                    nodes.push_back(child_nodes[k]);
                    weights.push_back(child_weights[c] * child_w[k]);
                }
            }
            return;
        }
    }
    throw DomainError("radial profile: unknown form");
}

RadialWigner oscillator_radial_wigner(int n, double hbar) {
    if (n < 0) throw DomainError("oscillator_radial_wigner: level must be nonnegative");
    if (!(hbar > 0.0)) throw DomainError("oscillator_radial_wigner: hbar must be positive");
    RadialWigner w;
    w.form = RadialWigner::Form::ClosedForm;
    w.block_dim = 1;
    w.hbar = hbar;
    w.level = n;
    return w;
}

RadialWigner dirac_radial_wigner(double I0) {
    if (!(I0 >= 0.0)) throw DomainError("dirac_radial_wigner: action must be nonnegative");
    RadialWigner w;
    w.form = RadialWigner::Form::DiracDelta;
    w.block_dim = 1;
    w.I_star = I0;
    w.mass = Eigen::MatrixXcd::Constant(1, 1, 1.0 / (2.0 * M_PI));
    return w;
}

RadialWigner mixed_radial_wigner(const std::vector<double>& weights,
                                 const std::vector<RadialWigner>& profiles) {
    if (weights.size() != profiles.size() || profiles.empty())
        throw DomainError("mixed_radial_wigner: need matching, nonempty weights/profiles");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("mixed_radial_wigner: weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "mixed_radial_wigner: weights sum to " << sum << ", expected 1";
        throw DomainError(os.str());
    }
    for (std::size_t k = 1; k < profiles.size(); ++k) {
        if (profiles[k].hbar != profiles[0].hbar)
            throw DomainError("mixed_radial_wigner: profiles must share hbar");
        if (profiles[k].block_dim != profiles[0].block_dim)
            throw DomainError("mixed_radial_wigner: profiles must share the block size");
    }
    RadialWigner w;
    w.form = RadialWigner::Form::Mixture;
    w.block_dim = profiles[0].block_dim;
    w.hbar = profiles[0].hbar;
    w.child_weights = weights;
    w.children = profiles;
    return w;
}

Eigen::MatrixXcd radial_integrate(const RadialWigner& w, const std::function<double(double)>& f,
                                  int order) {
    std::vector<double> nodes;
    std::vector<Eigen::MatrixXcd> weights;
    w.quadrature(nodes, weights, order);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(w.block_dim, w.block_dim);
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
    return acc;
}

double radial_scalar_integrate(const RadialWigner& w, const std::function<double(double)>& f,
                               int order) {
    return radial_integrate(w, f, order)(0, 0).real();
}

double radial_trace_norm(const RadialWigner& w, int order) {
    return 2.0 * M_PI *
           radial_integrate(w, [](double) { return 1.0; }, order).trace().real();
}

RadialReduction radial_reduce(const Eigen::MatrixXd& W, const PhaseSpaceGrid& grid,
                              const ActionAngleChart& chart, const ParamPoint& X,
                              const std::vector<double>& I_grid, int theta_order) {
    validate_phase_space_grid(grid);
    if (!chart.to_phase) throw DomainError("radial_reduce: chart has no to_phase map");
    if (I_grid.size() < 2) throw DomainError("radial_reduce: need at least two action values");
    if (!std::is_sorted(I_grid.begin(), I_grid.end()))
        throw DomainError("radial_reduce: action grid must be ascending");
    if (theta_order < 4) throw DomainError("radial_reduce: theta_order too small");

    const QuadratureRule rule = trapezoid_periodic(theta_order);
    RadialReduction out;
    out.profile.form = RadialWigner::Form::Sampled;
    out.profile.block_dim = 1;
    out.profile.hbar = grid.hbar;
    out.profile.I_grid = I_grid;
    out.theta_residual.reserve(I_grid.size());
    for (double I : I_grid) {
        std::vector<double> ring(rule.nodes.size());
        double mean = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const PhasePoint z = chart.to_phase(I, rule.nodes[k], X);
            ring[k] = sample_phase_space(W, grid, z.q, z.p);
            mean += ring[k];
        }
        mean /= static_cast<double>(ring.size());
        double residual = 0.0;
        for (double v : ring) residual = std::max(residual, std::abs(v - mean));
        out.profile.samples.push_back(Eigen::MatrixXcd::Constant(1, 1, mean));
        out.theta_residual.push_back(residual);
    }
    return out;
}

}  // namespace geophase
