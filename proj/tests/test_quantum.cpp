#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <thread>
#include <vector>

#include "geophase/errors.hpp"
#include "geophase/geometry.hpp"
#include "geophase/quantum.hpp"
#include "oracles.hpp"

using namespace geophase;

namespace {

const ParamPoint kIsotropic{1.0, 0.0, 1.0};

// Parameter span of a constant-frequency circuit, for sizing a shared grid.
std::vector<ParamPoint> circuit_span(const Circuit& c, int probes = 8) {
    std::vector<ParamPoint> span;
    for (int k = 0; k < probes; ++k) span.push_back(c.path(static_cast<double>(k) / probes));
    return span;
}

double expected_curvature(int n, const ParamPoint& X, int i, int j) {
    return oscillator_berry_curvature(n, X)(i, j);
}

}  // namespace

TEST_CASE("grid validation accepts powers of two and rejects the rest") {
    CHECK_NOTHROW(validate_grid(SpatialGrid{-10.0, 10.0, 128}));
    CHECK_NOTHROW(validate_grid(SpatialGrid{-10.0, 10.0, 4096}));
    CHECK_THROWS_AS(validate_grid(SpatialGrid{-10.0, 10.0, 100}), DomainError);
    CHECK_THROWS_AS(validate_grid(SpatialGrid{-10.0, 10.0, 64}), DomainError);
    CHECK_THROWS_AS(validate_grid(SpatialGrid{-10.0, 10.0, 8192}), DomainError);
    CHECK_THROWS_AS(validate_grid(SpatialGrid{10.0, -10.0, 256}), DomainError);

    const SpatialGrid g = auto_grid(kIsotropic, 1.0, 10);
    CHECK_NOTHROW(validate_grid(g));
    CHECK(g.q_min == -g.q_max);
    CHECK(g.q_max > std::sqrt(21.0));  // beyond the outermost turning point

    // The phase-space variant must at least halve the spacing.
    const SpatialGrid gw = auto_grid(kIsotropic, 1.0, 10, true);
    CHECK(gw.spacing() <= 0.5001 * g.spacing());
}

TEST_CASE("closed-form eigenfunctions: values, nodes, moments, norm") {
    const SpatialGrid grid = auto_grid(kIsotropic, 1.0, 6);
    const int N = grid.n_points;

    // Isotropic ground state is the real Gaussian pi^{-1/4} e^{-q^2/2}.
    const Eigen::VectorXcd psi0 = analytic_oscillator_state(0, kIsotropic, 1.0, grid);
    for (int j = 0; j < N; j += 7) {
        const double q = grid.point(j);
        const double ref = oracles::kPiQuarterInv * std::exp(-0.5 * q * q);
        CHECK(std::abs(psi0(j).real() - ref) <= 1e-12);
        CHECK(std::abs(psi0(j).imag()) <= 1e-15);
    }

    // First excited state vanishes at q = 0 (a grid node on symmetric grids).
    const Eigen::VectorXcd psi1 = analytic_oscillator_state(1, kIsotropic, 1.0, grid);
    CHECK(grid.point(N / 2) == 0.0);
    CHECK(std::abs(psi1(N / 2)) <= 1e-14);

    // Sheared point: unit norm, <q^2> = (n + 1/2) hbar Z / w = 1, chirped phase.
    const ParamPoint sheared{1.0, 1.0, 2.0};
    const SpatialGrid grid_s = auto_grid(sheared, 1.0, 4);
    const Eigen::VectorXcd chi = analytic_oscillator_state(0, sheared, 1.0, grid_s);
    CHECK(std::abs(grid_s.spacing() * chi.squaredNorm() - 1.0) <= 1e-10);
    double q2 = 0.0;
    for (int j = 0; j < grid_s.n_points; ++j) {
        const double q = grid_s.point(j);
        q2 += grid_s.spacing() * q * q * std::norm(chi(j));
    }
    CHECK(q2 == doctest::Approx(1.0).epsilon(1e-8));
    // arg psi = -Y q^2 / (2 Z hbar) = -q^2 / 4 where the amplitude is visible.
    for (int j = 0; j < grid_s.n_points; ++j) {
        const double q = grid_s.point(j);
        if (std::abs(q) > 1.5 || std::abs(q) < 0.5) continue;
        const std::complex<double> unwound =
            chi(j) * std::exp(std::complex<double>(0.0, q * q / 4.0));
        CHECK(std::abs(std::arg(unwound)) <= 1e-12);
    }

    // A clipped state is rejected.
    CHECK_THROWS_AS(analytic_oscillator_state(20, kIsotropic, 1.0, SpatialGrid{-4.0, 4.0, 128}),
                    DomainError);
}

TEST_CASE("closed-form eigenfunctions are orthonormal in the grid inner product") {
    const ParamPoint X{1.0, 0.5, 2.0};
    const double hbar = 0.5;
    const SpatialGrid grid = auto_grid(X, hbar, 8);
    std::vector<Eigen::VectorXcd> psi;
    for (int n = 0; n <= 6; ++n) psi.push_back(analytic_oscillator_state(n, X, hbar, grid));
    for (int m = 0; m <= 6; ++m) {
        for (int n = 0; n <= 6; ++n) {
            const std::complex<double> g = grid_inner(psi[m], psi[n], grid.spacing());
            const double expect = m == n ? 1.0 : 0.0;
            CHECK(std::abs(g - expect) <= 1e-9);
        }
    }
}

TEST_CASE("discretized Hamiltonian is hermitian with the oscillator spectrum") {
    const SpatialGrid grid = auto_grid(kIsotropic, 1.0, 12);
    const Eigen::MatrixXcd H = grid_hamiltonian(kIsotropic, 1.0, grid);
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
    for (int n = 0; n < 10; ++n) {
        const double expect = n + 0.5;
        CHECK(std::abs(solver.eigenvalues()(n) - expect) / expect <= 1e-6);
    }

    // Shear leaves the spectrum at hbar w (n + 1/2) with w = sqrt(XZ - Y^2) = 1.
    const ParamPoint sheared{2.0, 1.0, 1.0};
    const SpatialGrid grid_s = auto_grid(sheared, 1.0, 12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_s(
        grid_hamiltonian(sheared, 1.0, grid_s));
    for (int n = 0; n < 10; ++n) {
        const double expect = n + 0.5;
        CHECK(std::abs(solver_s.eigenvalues()(n) - expect) / expect <= 1e-6);
    }

    // hbar scales the level ladder.
    const SpatialGrid grid_h = auto_grid(kIsotropic, 0.5, 12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_h(
        grid_hamiltonian(kIsotropic, 0.5, grid_h));
    for (int n = 0; n < 6; ++n) {
        const double expect = 0.5 * (n + 0.5);
        CHECK(std::abs(solver_h.eigenvalues()(n) - expect) / expect <= 1e-6);
    }
}

TEST_CASE("grid eigenstates: orthonormal, ascending, match the closed form") {
    const ParamPoint X{1.0, 0.5, 2.0};
    const SpatialGrid grid = auto_grid(X, 1.0, 10);
    const EigenstateSet set = solve_eigenstates(X, 1.0, grid, 6);

    REQUIRE(set.energies.size() == 6);
    REQUIRE(set.states.size() == 6);
    CHECK(set.backend == QuantumBackend::Grid);
    for (int n = 0; n + 1 < 6; ++n) CHECK(set.energies[n] < set.energies[n + 1]);
    for (int m = 0; m < 6; ++m) {
        for (int n = 0; n < 6; ++n) {
            const std::complex<double> g =
                grid_inner(set.states[m], set.states[n], grid.spacing());
            CHECK(std::abs(g - (m == n ? 1.0 : 0.0)) <= 1e-9);
        }
    }
    // Phase convention: the largest-magnitude component is real positive.
    for (int n = 0; n < 6; ++n) {
        int j_max = 0;
        set.states[n].cwiseAbs().maxCoeff(&j_max);
        CHECK(std::abs(std::arg(set.states[n](j_max))) <= 1e-12);
    }
    // Same states as the closed form, up to phase.
    const double w = std::sqrt(X[0] * X[2] - X[1] * X[1]);
    for (int n = 0; n < 6; ++n) {
        const Eigen::VectorXcd ref = analytic_oscillator_state(n, X, 1.0, grid);
        CHECK(std::abs(std::abs(grid_inner(ref, set.states[n], grid.spacing())) - 1.0) <= 1e-6);
        CHECK(std::abs(set.energies[n] - w * (n + 0.5)) <= 1e-6);
    }

    const EigenstateSet closed = analytic_eigenstates(X, 1.0, grid, 4);
    CHECK(closed.backend == QuantumBackend::AnalyticOscillator);
    CHECK(closed.energies[2] == doctest::Approx(2.5 * w).epsilon(1e-12));
}

TEST_CASE("plaquette curvature hits the closed-form values") {
    const SpatialGrid grid = auto_grid(kIsotropic, 1.0, 8);
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);

    // Ground level at the isotropic point: F_XY = 1/8, F_ZX = 0.
    CHECK(berry_curvature_plaquette(family, 0, kIsotropic, 1e-2, 0, 1) ==
          doctest::Approx(0.125).epsilon(1e-3));
    CHECK(std::abs(berry_curvature_plaquette(family, 0, kIsotropic, 1e-2, 2, 0)) <= 1e-3);

    // Third level: F_YZ = (n + 1/2) X / (4 w^3) = 0.875.
    CHECK(berry_curvature_plaquette(family, 3, kIsotropic, 1e-2, 1, 2) ==
          doctest::Approx(0.875).epsilon(1e-3));

    // Antisymmetry of the estimator itself.
    const double f_xy = berry_curvature_plaquette(family, 1, kIsotropic, 1e-2, 0, 1);
    const double f_yx = berry_curvature_plaquette(family, 1, kIsotropic, 1e-2, 1, 0);
    CHECK(f_xy == doctest::Approx(-f_yx).epsilon(1e-12));

    // Full component check at a generic point.
    const ParamPoint X{1.0, 0.5, 2.0};
    const SpatialGrid grid_g = auto_grid(X, 1.0, 8);
    const QuantumStateFamily family_g = analytic_state_family(grid_g, 1.0);
    const Eigen::MatrixXd F = berry_curvature_field(family_g, 2).eval(X);
    const Eigen::MatrixXd ref = oscillator_berry_curvature(2, X);
    CHECK((F - ref).cwiseAbs().maxCoeff() <= 5e-4);

    CHECK_THROWS_AS(berry_curvature_plaquette(family, 0, kIsotropic, 1e-2, 1, 1), DomainError);
    CHECK_THROWS_AS(berry_curvature_plaquette(family, 0, kIsotropic, -1e-2, 0, 1), DomainError);
    CHECK_THROWS_AS(berry_curvature_plaquette(family, -1, kIsotropic, 1e-2, 0, 1), DomainError);
}

TEST_CASE("plaquette curvature from diagonalized states matches the closed form") {
    const SpatialGrid grid = auto_grid(kIsotropic, 1.0, 6);
    const QuantumStateFamily family = grid_state_family(grid, 1.0, 3);
    const double f = berry_curvature_plaquette(family, 0, kIsotropic, 1e-2, 0, 1);
    CHECK(f == doctest::Approx(0.125).epsilon(1e-3));

    // Same estimator through the closed-form states, same step.
    const QuantumStateFamily closed = analytic_state_family(grid, 1.0);
    const double f_closed = berry_curvature_plaquette(closed, 0, kIsotropic, 1e-2, 0, 1);
    CHECK(std::abs(f - f_closed) <= 1e-6);

    // Levels beyond the solved window are rejected.
    CHECK_THROWS_AS(berry_curvature_plaquette(family, 2, kIsotropic, 1e-2, 0, 1), DomainError);
}

TEST_CASE("plaquette error falls fourfold when the step halves") {
    const ParamPoint X{1.2, 0.4, 0.8};
    const SpatialGrid grid = auto_grid(X, 1.0, 6);
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);
    const double exact = expected_curvature(1, X, 0, 1);
    const double err_full =
        std::abs(berry_curvature_plaquette(family, 1, X, 2e-2, 0, 1) - exact);
    const double err_half =
        std::abs(berry_curvature_plaquette(family, 1, X, 1e-2, 0, 1) - exact);
    CHECK(err_full > 1e-8);  // above the rounding floor, so the ratio is meaningful
    CHECK(err_half <= err_full / 2.8);
    CHECK(err_half >= err_full / 6.0);
}

TEST_CASE("plaquette curvature is gauge invariant") {
    const SpatialGrid grid = auto_grid(kIsotropic, 1.0, 8);
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);

    QuantumStateFamily gauged = family;
    gauged.state = [base = family.state](int n, const ParamPoint& X) {
        const double phase =
            0.7 * X[0] - 1.9 * X[1] + 0.4 * X[2] + 1.1 * X[0] * X[2] + 0.6 * X[1] * X[1];
        Eigen::VectorXcd psi = base(n, X);
        psi *= std::exp(std::complex<double>(0.0, phase));
        return psi;
    };

    // A wide step keeps the pure-rounding difference well under the bound
    // (the discretization error cancels exactly between the two gauges).
    const double delta = 0.15;
    for (const auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
        const double plain = berry_curvature_plaquette(family, 0, kIsotropic, delta, i, j);
        const double twisted = berry_curvature_plaquette(gauged, 0, kIsotropic, delta, i, j);
        CHECK(std::abs(plain - twisted) <= 1e-12);
    }
}

TEST_CASE("plaquette curvature does not depend on hbar") {
    std::vector<double> values;
    for (const double hbar : {0.5, 1.0, 2.0}) {
        const SpatialGrid grid = auto_grid(kIsotropic, hbar, 8);
        const QuantumStateFamily family = analytic_state_family(grid, hbar);
        values.push_back(berry_curvature_plaquette(family, 0, kIsotropic, 1e-2, 0, 1));
    }
    for (std::size_t a = 0; a < values.size(); ++a)
        for (std::size_t b = a + 1; b < values.size(); ++b)
            CHECK(std::abs(values[a] - values[b]) <= 1e-3);
    // All agree with the hbar-free closed form.
    for (const double v : values) CHECK(v == doctest::Approx(0.125).epsilon(1e-3));
}

TEST_CASE("plaquette guards: gap collapse and overlap loss raise errors") {
    // Small frequency and a high level: the step's energy spread
    // (n + 1/2) |grad w| d dwarfs the level gap hbar w.
    const ParamPoint tight{1.0, 0.9, 1.0};
    const SpatialGrid grid{-40.0, 40.0, 512};
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);
    CHECK_THROWS_AS(berry_curvature_plaquette(family, 12, tight, 1e-2, 0, 1), NumericalError);

    // A frame that jumps between orthogonal subspaces kills the overlaps.
    QuantumStateFamily jumpy;
    jumpy.grid = SpatialGrid{0.0, 128.0, 128};
    jumpy.hbar = 1.0;
    jumpy.state = [](int, const ParamPoint& X) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(128);
        e(X[0] < 1.0 ? 0 : 1) = 1.0;
        return e;
    };
    jumpy.energy = [](int n, const ParamPoint&) { return n + 0.5; };
    CHECK_THROWS_AS(berry_curvature_plaquette(jumpy, 0, kIsotropic, 1e-2, 0, 1),
                    NumericalError);
}

TEST_CASE("loop phase equals minus the enclosed plaquette curvature") {
    const double r = 0.15;
    const Circuit probe = make_cap_circuit(1.0, r, 8);
    const SpatialGrid grid = auto_grid(circuit_span(probe), 1.0, 5);
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);

    DegenerateFamily level0;
    level0.size = 1;
    level0.inner_scale = grid.spacing();
    level0.frame = [&family](const ParamPoint& X) {
        return std::vector<Eigen::VectorXcd>{family.state(0, X)};
    };

    auto loop_phase = [&](int samples) {
        const Eigen::MatrixXcd W = wz_connection_loop(level0, make_cap_circuit(1.0, r, samples));
        return std::arg(W(0, 0));
    };
    const double gamma_richardson = (4.0 * loop_phase(256) - loop_phase(128)) / 3.0;

    const Surface sigma = make_cap_surface(1.0, r);
    const double surf_full = berry_phase(family, 0, sigma, 2e-2, 8).raw;
    const double surf_half = berry_phase(family, 0, sigma, 1e-2, 8).raw;
    const double surf_richardson = (4.0 * surf_half - surf_full) / 3.0;

    CHECK(std::abs(gamma_richardson - surf_richardson) <= 1e-4);
    // Both sit on the closed-form value -(1/2) pi (cosh r - 1).
    const double exact = -0.5 * M_PI * (std::cosh(r) - 1.0);
    CHECK(gamma_richardson == doctest::Approx(exact).epsilon(1e-3));
}

TEST_CASE("geometric phase over constant-frequency caps and flat patches") {
    const Circuit rim = make_cap_circuit(1.0, 1.0, 8);
    const SpatialGrid grid = auto_grid(circuit_span(rim), 1.0, 6);
    const Surface cap = make_cap_surface(1.0, 1.0);

    // Ground level: -(1/2) pi (cosh 1 - 1).
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);
    const BerryPhaseResult g0 = berry_phase(family, 0, cap);
    CHECK(g0.raw == doctest::Approx(-0.5 * oracles::kCapAngleR1).epsilon(1e-3));
    CHECK(g0.raw == doctest::Approx(-0.85307).epsilon(1e-3));
    CHECK(g0.principal == doctest::Approx(g0.raw).epsilon(1e-12));  // within (-pi, pi]

    // First excited level: three times the ground-level phase.
    const BerryPhaseResult g1 = berry_phase(family, 1, cap);
    CHECK(g1.raw == doctest::Approx(-1.5 * oracles::kCapAngleR1).epsilon(3e-3));
    CHECK(g1.raw == doctest::Approx(-2.55921).epsilon(3e-3));
    CHECK(std::remainder(g1.principal - g1.raw, 2.0 * M_PI) ==
          doctest::Approx(0.0).scale(1.0));
    CHECK(std::abs(g1.principal) <= M_PI);

    // Shear-free patches carry no phase at all.
    const Surface flat = make_planar_surface(3.0, 3.0, 1.0);
    const SpatialGrid grid_f = auto_grid(ParamPoint{2.0, 0.0, 2.0}, 1.0, 6);
    const BerryPhaseResult flat0 = berry_phase(analytic_state_family(grid_f, 1.0), 0, flat);
    CHECK(flat0.raw == 0.0);
}

TEST_CASE("holonomy: scalar reduction, constant frames, conjugation, jumps") {
    // Scalar family reduces to exp(i * geometric phase).
    const Circuit rim = make_cap_circuit(1.0, 1.0, 256);
    const SpatialGrid grid = auto_grid(circuit_span(rim), 1.0, 5);
    const QuantumStateFamily family = analytic_state_family(grid, 1.0);
    DegenerateFamily level0;
    level0.size = 1;
    level0.inner_scale = grid.spacing();
    level0.frame = [&family](const ParamPoint& X) {
        return std::vector<Eigen::VectorXcd>{family.state(0, X)};
    };
    validate_family(level0, kIsotropic);
    const Eigen::MatrixXcd W = wz_connection_loop(level0, rim);
    CHECK(std::abs(std::abs(W(0, 0)) - 1.0) <= 1e-12);
    const double gamma = berry_phase(family, 0, make_cap_surface(1.0, 1.0)).principal;
    CHECK(std::arg(W(0, 0)) == doctest::Approx(gamma).epsilon(1e-3));

    // Constant frame: identity holonomy.
    Eigen::VectorXcd c1(4), c2(4);
    c1 << 0.5, std::complex<double>(0.0, 0.5), 0.5, 0.5;
    c2 << 0.5, std::complex<double>(0.0, -0.5), -0.5, 0.5;
    DegenerateFamily constant;
    constant.size = 2;
    constant.inner_scale = 1.0;
    constant.frame = [c1, c2](const ParamPoint&) {
        return std::vector<Eigen::VectorXcd>{c1, c2};
    };
    validate_family(constant, kIsotropic);
    const Eigen::MatrixXcd Wc = wz_connection_loop(constant, rim);
    CHECK((Wc - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);

    // Smooth two-state frame; conjugating by a fixed unitary conjugates the
    // holonomy.
    auto smooth_frame = [](const ParamPoint& X) {
        const double a = 0.7 * X[0] + 0.3 * X[2];
        const double b = 1.1 * X[1] - 0.2 * X[0];
        Eigen::VectorXcd w1(4), w2(4);
        w1 << std::cos(a), std::sin(a) * std::exp(std::complex<double>(0.0, 0.4)),
            0.3 + 0.1 * b, std::complex<double>(0.0, 0.2);
        w2 << 0.1, std::exp(std::complex<double>(0.0, b)), -0.4, 0.8 + 0.05 * a;
        const Eigen::VectorXcd u1 = w1.normalized();
        const Eigen::VectorXcd v2 = w2 - (u1.adjoint() * w2)(0, 0) * u1;
        return std::vector<Eigen::VectorXcd>{u1, v2.normalized()};
    };
    DegenerateFamily pair;
    pair.size = 2;
    pair.inner_scale = 1.0;
    pair.frame = smooth_frame;
    validate_family(pair, kIsotropic);

    Eigen::Matrix2cd U;
    const double mu = 0.6;
    U << std::cos(mu), -std::sin(mu), std::sin(mu), std::cos(mu);
    U.col(0) *= std::exp(std::complex<double>(0.0, 0.3));
    U.col(1) *= std::exp(std::complex<double>(0.0, -0.7));

    DegenerateFamily rotated = pair;
    rotated.frame = [smooth_frame, U](const ParamPoint& X) {
        const std::vector<Eigen::VectorXcd> f = smooth_frame(X);
        std::vector<Eigen::VectorXcd> g(2);
        for (int a = 0; a < 2; ++a) g[a] = f[0] * U(0, a) + f[1] * U(1, a);
        return g;
    };
    validate_family(rotated, kIsotropic);

    const Circuit loop = make_cap_circuit(1.0, 0.8, 64);
    const Eigen::MatrixXcd Wp = wz_connection_loop(pair, loop);
    const Eigen::MatrixXcd Wr = wz_connection_loop(rotated, loop);
    CHECK((Wp * Wp.adjoint() - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK((Wr - U.adjoint() * Wp * U).cwiseAbs().maxCoeff() <= 1e-12);

    // A frame that swaps subspaces mid-circuit cannot be transported.
    DegenerateFamily jumpy;
    jumpy.size = 1;
    jumpy.inner_scale = 1.0;
    jumpy.frame = [](const ParamPoint& X) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(4);
        e(X[1] >= 0.0 ? 0 : 1) = 1.0;
        return std::vector<Eigen::VectorXcd>{e};
    };
    CHECK_THROWS_AS(wz_connection_loop(jumpy, loop), NumericalError);

    // Orthonormality violations are caught up front.
    DegenerateFamily skewed = constant;
    skewed.frame = [c1, c2](const ParamPoint&) {
        return std::vector<Eigen::VectorXcd>{c1, (c1 + c2).eval()};
    };
    CHECK_THROWS_AS(validate_family(skewed, kIsotropic), DomainError);
}

TEST_CASE("memoized eigensolves are deterministic under concurrency") {
    const SpatialGrid grid = auto_grid(kIsotropic, 1.0, 6);
    const QuantumStateFamily family = grid_state_family(grid, 1.0, 3);

    std::vector<Eigen::VectorXcd> results(4);
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t)
        workers.emplace_back(
            [&results, &family, t] { results[t] = family.state(1, kIsotropic); });
    for (std::thread& w : workers) w.join();
    for (int t = 1; t < 4; ++t)
        CHECK((results[t] - results[0]).cwiseAbs().maxCoeff() == 0.0);

    // Repeated sequential calls reuse the cache bit for bit.
    const Eigen::VectorXcd again = family.state(1, kIsotropic);
    CHECK((again - results[0]).cwiseAbs().maxCoeff() == 0.0);
}
