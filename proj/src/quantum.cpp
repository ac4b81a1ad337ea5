#include "geophase/quantum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "geophase/errors.hpp"
#include "geophase/specfun.hpp"
#include "fft_utils.hpp"

namespace geophase {

namespace {

constexpr double kEdgeAmplitude = 1e-12;
constexpr double kNormDefect = 1e-10;
constexpr double kMinOverlap = 0.1;
constexpr double kMinStepSigma = 0.1;
constexpr int kMinPoints = 128;
constexpr int kMaxPoints = 4096;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(double x) {
    int n = 1;
    while (n < x && n < (1 << 30)) n *= 2;
    return n;
}

std::string describe(const ParamPoint& X) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < X.dim(); ++i) os << (i ? ", " : "") << X[i];
    os << ")";
    return os.str();
}

// Position and momentum reach of level n_max at X, with tail room so the
// amplitude drops below the edge threshold well inside the box.
struct GridNeed {
    double q_edge = 0.0;
    double p_need = 0.0;
};

GridNeed grid_need(const ParamPoint& X, double hbar, int n_max) {
    const double w = oscillator_omega(X);
    const double Z = X[2];
    const double alpha = std::sqrt(w / (Z * hbar));
    const double xi_edge = std::sqrt(2.0 * n_max + 1.0) + 9.0;
    GridNeed need;
    need.q_edge = xi_edge / alpha;
    const double p_tilde = xi_edge * std::sqrt(hbar * w / Z);
    need.p_need = 1.15 * (p_tilde + std::abs(X[1]) / Z * need.q_edge);
    return need;
}

SpatialGrid grid_from_need(const GridNeed& need, double hbar, bool for_wigner) {
    double h_max = M_PI * hbar / need.p_need;
    if (for_wigner) h_max *= 0.5;
    const double length = 2.0 * need.q_edge;
    int n = next_power_of_two(length / h_max);
    n = std::clamp(n, kMinPoints, kMaxPoints);
    return SpatialGrid{-need.q_edge, need.q_edge, n};
}

}  // namespace

void validate_grid(const SpatialGrid& grid) {
    if (!(grid.q_max > grid.q_min))
        throw DomainError("spatial grid: q_max must exceed q_min");
    if (!is_power_of_two(grid.n_points) || grid.n_points < kMinPoints ||
        grid.n_points > kMaxPoints) {
        std::ostringstream os;
        os << "spatial grid: n_points must be a power of two in [" << kMinPoints << ", "
           << kMaxPoints << "], got " << grid.n_points;
        throw DomainError(os.str());
    }
}

SpatialGrid auto_grid(const ParamPoint& X, double hbar, int n_max, bool for_wigner) {
    return auto_grid(std::vector<ParamPoint>{X}, hbar, n_max, for_wigner);
}

SpatialGrid auto_grid(const std::vector<ParamPoint>& span, double hbar, int n_max,
                      bool for_wigner) {
    if (span.empty()) throw DomainError("auto_grid: empty parameter span");
    if (!(hbar > 0.0)) throw DomainError("auto_grid: hbar must be positive");
    if (n_max < 0) throw DomainError("auto_grid: n_max must be nonnegative");
    GridNeed need;
    for (const ParamPoint& X : span) {
        const GridNeed local = grid_need(X, hbar, n_max);
        need.q_edge = std::max(need.q_edge, local.q_edge);
        need.p_need = std::max(need.p_need, local.p_need);
    }
    return grid_from_need(need, hbar, for_wigner);
}

std::complex<double> grid_inner(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                double spacing) {
    if (a.size() != b.size()) throw DomainError("grid_inner: size mismatch");
    return spacing * (a.adjoint() * b)(0, 0);
}

Eigen::VectorXcd analytic_oscillator_state(int n, const ParamPoint& X, double hbar,
                                           const SpatialGrid& grid) {
    validate_grid(grid);
    if (n < 0) throw DomainError("analytic_oscillator_state: level must be nonnegative");
    if (!(hbar > 0.0)) throw DomainError("analytic_oscillator_state: hbar must be positive");
    const double w = oscillator_omega(X);
    const double Z = X[2];
    const double alpha = std::sqrt(w / (Z * hbar));
    const double chirp = -X[1] / (2.0 * Z * hbar);

    const int N = grid.n_points;
    Eigen::VectorXcd psi(N);
    for (int j = 0; j < N; ++j) {
        const double q = grid.point(j);
        const double amp = std::sqrt(alpha) * hermite_function(n, alpha * q);
        psi(j) = amp * std::exp(std::complex<double>(0.0, chirp * q * q));
    }

    const double edge = std::max(std::abs(psi(0)), std::abs(psi(N - 1)));
    if (edge > kEdgeAmplitude) {
        std::ostringstream os;
        os << "analytic_oscillator_state: grid too narrow for level " << n << " at X = "
           << describe(X) << " (edge amplitude " << edge << ")";
        throw DomainError(os.str());
    }
    const double norm = grid.spacing() * psi.squaredNorm();
    if (std::abs(norm - 1.0) > kNormDefect) {
        std::ostringstream os;
        os << "analytic_oscillator_state: grid undersamples level " << n << " at X = "
           << describe(X) << " (norm defect " << std::abs(norm - 1.0) << ")";
        throw NumericalError(os.str());
    }
    return psi;
}

Eigen::MatrixXcd grid_hamiltonian(const ParamPoint& X, double hbar, const SpatialGrid& grid) {
    validate_grid(grid);
    oscillator_omega(X);  // domain check
    if (!(hbar > 0.0)) throw DomainError("grid_hamiltonian: hbar must be positive");

    const int N = grid.n_points;
    const double h = grid.spacing();
    const double dk = 2.0 * M_PI / (N * h);

    // Spectral momentum multipliers; the odd operator zeroes the Nyquist mode
    // so its circulant stays hermitian, the even one keeps it.
    std::vector<std::complex<double>> mult_p(N), mult_p2(N);
    for (int k = 0; k < N; ++k) {
        const int k_signed = k <= N / 2 ? k : k - N;
        const double p = hbar * dk * k_signed;
        mult_p2[k] = p * p;
        mult_p[k] = (2 * k == N) ? 0.0 : p;
    }
    // First circulant row: c_m = (1/N) sum_k mult_k e^{+2 pi i k m / N}.
    std::vector<std::complex<double>> row_p = detail::dft(mult_p, FFTW_BACKWARD);
    std::vector<std::complex<double>> row_p2 = detail::dft(mult_p2, FFTW_BACKWARD);
    for (int m = 0; m < N; ++m) {
        row_p[m] /= N;
        row_p2[m] /= N;
    }

    Eigen::MatrixXcd H(N, N);
    for (int j = 0; j < N; ++j) {
        const double qj = grid.point(j);
        for (int l = 0; l < N; ++l) {
            const double ql = grid.point(l);
            const int m = ((j - l) % N + N) % N;
            std::complex<double> val =
                0.5 * X[1] * (qj + ql) * row_p[m] + 0.5 * X[2] * row_p2[m];
            if (j == l) val += 0.5 * X[0] * qj * qj;
            H(j, l) = val;
        }
    }
    H = (0.5 * (H + H.adjoint())).eval();
    return H;
}

EigenstateSet solve_eigenstates(const ParamPoint& X, double hbar, const SpatialGrid& grid,
                                int n_levels) {
    if (n_levels < 1 || n_levels > grid.n_points)
        throw DomainError("solve_eigenstates: n_levels out of range");
    const Eigen::MatrixXcd H = grid_hamiltonian(X, hbar, grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
    if (solver.info() != Eigen::Success)
        throw NumericalError("solve_eigenstates: eigensolver failed to converge");

    const double h = grid.spacing();
    const double root_h = std::sqrt(h);
    EigenstateSet set;
    set.X = X;
    set.hbar = hbar;
    set.grid = grid;
    set.backend = QuantumBackend::Grid;
    set.energies.resize(n_levels);
    set.states.resize(n_levels);
    for (int n = 0; n < n_levels; ++n) {
        set.energies[n] = solver.eigenvalues()(n);
        Eigen::VectorXcd psi = solver.eigenvectors().col(n) / root_h;
        // Fix the phase: largest-magnitude component real and positive.
        int j_max = 0;
        psi.cwiseAbs().maxCoeff(&j_max);
        const std::complex<double> z = psi(j_max);
        psi *= std::conj(z) / std::abs(z);
        const double edge = std::max(std::abs(psi(0)), std::abs(psi(grid.n_points - 1)));
        if (edge > kEdgeAmplitude) {
            std::ostringstream os;
            os << "solve_eigenstates: grid too narrow for level " << n << " at X = "
               << describe(X) << " (edge amplitude " << edge << ")";
            throw DomainError(os.str());
        }
        set.states[n] = std::move(psi);
    }
    return set;
}

EigenstateSet analytic_eigenstates(const ParamPoint& X, double hbar, const SpatialGrid& grid,
                                   int n_levels) {
    if (n_levels < 1) throw DomainError("analytic_eigenstates: n_levels out of range");
    const double w = oscillator_omega(X);
    EigenstateSet set;
    set.X = X;
    set.hbar = hbar;
    set.grid = grid;
    set.backend = QuantumBackend::AnalyticOscillator;
    set.energies.resize(n_levels);
    set.states.resize(n_levels);
    for (int n = 0; n < n_levels; ++n) {
        set.energies[n] = hbar * w * (n + 0.5);
        set.states[n] = analytic_oscillator_state(n, X, hbar, grid);
    }
    return set;
}

QuantumStateFamily analytic_state_family(const SpatialGrid& grid, double hbar) {
    validate_grid(grid);
    if (!(hbar > 0.0)) throw DomainError("analytic_state_family: hbar must be positive");
    QuantumStateFamily family;
    family.grid = grid;
    family.hbar = hbar;
    family.state = [grid, hbar](int n, const ParamPoint& X) {
        return analytic_oscillator_state(n, X, hbar, grid);
    };
    family.energy = [hbar](int n, const ParamPoint& X) {
        if (n < 0) throw DomainError("energy: level must be nonnegative");
        return hbar * oscillator_omega(X) * (n + 0.5);
    };
    return family;
}

namespace {

struct SolveCache {
    std::mutex mutex;
    std::map<std::vector<double>, std::shared_ptr<const EigenstateSet>> sets;
};

std::shared_ptr<const EigenstateSet> cached_solve(const std::shared_ptr<SolveCache>& cache,
                                                  const ParamPoint& X, double hbar,
                                                  const SpatialGrid& grid, int n_levels) {
    std::vector<double> key(X.coords.data(), X.coords.data() + X.dim());
    {
        std::lock_guard<std::mutex> lock(cache->mutex);
        auto it = cache->sets.find(key);
        if (it != cache->sets.end()) return it->second;
    }
    auto set = std::make_shared<const EigenstateSet>(
        solve_eigenstates(X, hbar, grid, n_levels));
    std::lock_guard<std::mutex> lock(cache->mutex);
    auto [it, inserted] = cache->sets.emplace(std::move(key), std::move(set));
    if (cache->sets.size() > 8192) cache->sets.clear();
    return it->second;
}

}  // namespace

QuantumStateFamily grid_state_family(const SpatialGrid& grid, double hbar, int n_levels) {
    validate_grid(grid);
    if (!(hbar > 0.0)) throw DomainError("grid_state_family: hbar must be positive");
    if (n_levels < 1 || n_levels > grid.n_points)
        throw DomainError("grid_state_family: n_levels out of range");
    auto cache = std::make_shared<SolveCache>();
    auto level_check = [n_levels](int n) {
        if (n < 0 || n >= n_levels)
            throw DomainError("grid_state_family: level outside the solved range");
    };
    QuantumStateFamily family;
    family.grid = grid;
    family.hbar = hbar;
    family.state = [cache, grid, hbar, n_levels, level_check](int n, const ParamPoint& X) {
        level_check(n);
        return cached_solve(cache, X, hbar, grid, n_levels)->states[n];
    };
    family.energy = [cache, grid, hbar, n_levels, level_check](int n, const ParamPoint& X) {
        level_check(n);
        return cached_solve(cache, X, hbar, grid, n_levels)->energies[n];
    };
    return family;
}

double berry_curvature_plaquette(const QuantumStateFamily& family, int n, const ParamPoint& X,
                                 double delta, int i, int j) {
    if (!family.state || !family.energy)
        throw DomainError("berry_curvature_plaquette: family has no state/energy callbacks");
    if (n < 0) throw DomainError("berry_curvature_plaquette: level must be nonnegative");
    if (!(delta > 0.0)) throw DomainError("berry_curvature_plaquette: delta must be positive");
    const int dim = X.dim();
    if (i < 0 || j < 0 || i >= dim || j >= dim || i == j)
        throw DomainError("berry_curvature_plaquette: invalid plane indices");

    const double d = delta * X.coords.norm();
    if (!(d > 0.0)) throw DomainError("berry_curvature_plaquette: degenerate step size");

    // Counterclockwise corners of the centered plaquette in the (i, j) plane.
    std::array<ParamPoint, 4> corner = {X, X, X, X};
    corner[0][i] -= 0.5 * d; corner[0][j] -= 0.5 * d;
    corner[1][i] += 0.5 * d; corner[1][j] -= 0.5 * d;
    corner[2][i] += 0.5 * d; corner[2][j] += 0.5 * d;
    corner[3][i] -= 0.5 * d; corner[3][j] += 0.5 * d;

    // Gap guard: the spread of E_n across the step must stay well under the
    // distance to the neighboring levels, or the level tracking is unreliable.
    const double E_center = family.energy(n, X);
    double slope = 0.0;
    for (const ParamPoint& c : corner)
        slope = std::max(slope, std::abs(family.energy(n, c) - E_center) / (d / std::sqrt(2.0)));
    double gap = std::numeric_limits<double>::infinity();
    gap = std::min(gap, family.energy(n + 1, X) - E_center);
    if (n > 0) gap = std::min(gap, E_center - family.energy(n - 1, X));
    if (gap < 10.0 * d * slope) {
        std::ostringstream os;
        os << "berry_curvature_plaquette: level gap " << gap << " at X = " << describe(X)
           << " is too small for step " << d << " (energy spread " << 10.0 * d * slope
           << "); reduce delta or avoid the near-degeneracy";
        throw NumericalError(os.str());
    }

    const double h = family.grid.spacing();
    std::array<Eigen::VectorXcd, 4> psi;
    for (int k = 0; k < 4; ++k) psi[k] = family.state(n, corner[k]);

    std::complex<double> loop = 1.0;
    for (int k = 0; k < 4; ++k) {
        const std::complex<double> overlap = grid_inner(psi[k], psi[(k + 1) % 4], h);
        if (std::abs(overlap) < kMinOverlap) {
            std::ostringstream os;
            os << "berry_curvature_plaquette: overlap magnitude " << std::abs(overlap)
               << " below " << kMinOverlap << " at X = " << describe(X)
               << "; reduce delta";
            throw NumericalError(os.str());
        }
        loop *= overlap;
    }
    return std::arg(loop) / (d * d);
}

TwoFormField berry_curvature_field(const QuantumStateFamily& family, int n, double delta,
                                   int dim) {
    return TwoFormField(dim, [family, n, delta, dim](const ParamPoint& P) {
        Eigen::MatrixXd F = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j)
                F(i, j) = berry_curvature_plaquette(family, n, P, delta, i, j);
        return F;
    });
}

Eigen::MatrixXd oscillator_berry_curvature(int n, const ParamPoint& X) {
    if (n < 0) throw DomainError("oscillator_berry_curvature: level must be nonnegative");
    if (X.dim() != 3) throw DomainError("oscillator_berry_curvature: expects 3 parameters");
    const double w = oscillator_omega(X);
    const double c = (n + 0.5) / (4.0 * w * w * w);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 3);
    F(0, 1) = c * X[2];   // dX^dY component
    F(0, 2) = -c * X[1];  // dX^dZ component
    F(1, 2) = c * X[0];   // dY^dZ component
    F(1, 0) = -F(0, 1);
    F(2, 0) = -F(0, 2);
    F(2, 1) = -F(1, 2);
    return F;
}

TwoFormField oscillator_berry_curvature_field(int n) {
    return TwoFormField(3, [n](const ParamPoint& P) { return oscillator_berry_curvature(n, P); });
}

BerryPhaseResult berry_phase(const QuantumStateFamily& family, int n, const Surface& sigma,
                             double delta, int surface_order) {
    const TwoFormField F = berry_curvature_field(family, n, delta);
    BerryPhaseResult result;
    result.raw = -surface_integral(F, sigma, surface_order);
    result.principal = std::remainder(result.raw, 2.0 * M_PI);
    return result;
}

void validate_family(const DegenerateFamily& family, const ParamPoint& X, double tol) {
    if (!family.frame) throw DomainError("degenerate family: missing frame callback");
    if (family.size < 1) throw DomainError("degenerate family: size must be positive");
    if (!(family.inner_scale > 0.0))
        throw DomainError("degenerate family: inner_scale must be positive");
    const std::vector<Eigen::VectorXcd> frame = family.frame(X);
    if (static_cast<int>(frame.size()) != family.size)
        throw DomainError("degenerate family: frame size does not match the declared size");
    for (int a = 0; a < family.size; ++a) {
        for (int b = 0; b < family.size; ++b) {
            const std::complex<double> g =
                grid_inner(frame[a], frame[b], family.inner_scale);
            const double expect = a == b ? 1.0 : 0.0;
            if (std::abs(g - expect) > tol) {
                std::ostringstream os;
                os << "degenerate family: frame is not orthonormal at X = " << describe(X)
                   << " (|<" << a << "|" << b << ">| defect " << std::abs(g - expect) << ")";
                throw DomainError(os.str());
            }
        }
    }
}

Eigen::MatrixXcd wz_connection_loop(const DegenerateFamily& family, const Circuit& c) {
    if (!family.frame) throw DomainError("wz_connection_loop: missing frame callback");
    if (family.size < 1) throw DomainError("wz_connection_loop: family size must be positive");
    if (c.samples < 3) throw DomainError("wz_connection_loop: need at least 3 samples");
    validate_circuit(c);

    const int N = family.size;
    auto frame_at = [&](double s) {
        std::vector<Eigen::VectorXcd> f = family.frame(c.path(s));
        if (static_cast<int>(f.size()) != N)
            throw DomainError("wz_connection_loop: frame size changed along the circuit");
        return f;
    };

    const std::vector<Eigen::VectorXcd> first = frame_at(0.0);
    std::vector<Eigen::VectorXcd> prev = first;
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(N, N);
    for (int k = 1; k <= c.samples; ++k) {
        // Reuse the s = 0 frame for the closing step so the loop is exact.
        const std::vector<Eigen::VectorXcd> cur =
            (k == c.samples) ? first : frame_at(static_cast<double>(k) / c.samples);
        Eigen::MatrixXcd T(N, N);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                T(a, b) = grid_inner(cur[a], prev[b], family.inner_scale);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(T, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double sigma_min = svd.singularValues().minCoeff();
        if (sigma_min < kMinStepSigma) {
            std::ostringstream os;
            os << "wz_connection_loop: step " << k << " overlap nearly singular (sigma_min "
               << sigma_min << "); refine the circuit sampling";
            throw NumericalError(os.str());
        }
        W = (svd.matrixU() * svd.matrixV().adjoint() * W).eval();
        prev = std::move(cur);
    }
    return W;
}

}  // namespace geophase
