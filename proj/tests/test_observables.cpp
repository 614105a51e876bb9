#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "lke/basis.hpp"
#include "lke/ed.hpp"
#include "lke/kinetics.hpp"
#include "lke/model.hpp"
#include "lke/observables.hpp"
#include "lke/states.hpp"

using namespace lke;

namespace {

Eigen::VectorXcd fock_state(const Model& m, int n, Flavor fl) {
    return fl == Flavor::Down ? ed::psi_state_fock(m, n) : ed::chi_state_fock(m, n);
}

// Site-averaged <S^z_l> of a Fock vector: occupation minus one half.
double fock_sz(int N, const Eigen::VectorXcd& v) {
    double acc = 0.0;
    for (int b = 0; b < (1 << N); ++b)
        acc += std::norm(v[b]) * (__builtin_popcount(static_cast<unsigned>(b)) - 0.5 * N);
    return acc / N;
}

// Site-averaged connected <S^z_l S^z_{l+m}> of a Fock vector.
double fock_czz(int N, const Eigen::VectorXcd& v, int m) {
    double acc = 0.0;
    for (int b = 0; b < (1 << N); ++b) {
        double w = std::norm(v[b]);
        for (int l = 0; l < N; ++l) {
            double zl = (b >> l & 1) ? 0.5 : -0.5;
            int l2 = (l + m % N + N) % N;
            double zm = (b >> l2 & 1) ? 0.5 : -0.5;
            acc += w * zl * zm;
        }
    }
    double sz = fock_sz(N, v);
    return acc / N - sz * sz;
}

}  // namespace

TEST_CASE("quadratic index table finds the right operators") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
    Truncation tr = build_truncation("T2", N);
    QuadraticIndices qi = quadratic_indices(tr);
    REQUIRE(qi.number.size() == static_cast<std::size_t>(N));
    REQUIRE(qi.ann.size() == static_cast<std::size_t>(N / 2));
    REQUIRE(qi.cre.size() == static_cast<std::size_t>(N / 2));

    for (int q = 0; q < N; ++q) {
        const MonoKey& k = tr.ops[static_cast<std::size_t>(qi.number[static_cast<std::size_t>(q)])].key;
        REQUIRE(k.nc == 1);
        REQUIRE(k.na == 1);
        REQUIRE(k.idx[0] == q);
        REQUIRE(k.idx[1] == q);
    }
    for (int q = N / 2; q < N; ++q) {
        const MonoKey& a = tr.ops[static_cast<std::size_t>(qi.ann[static_cast<std::size_t>(q - N / 2)])].key;
        REQUIRE(a.nc == 0);
        REQUIRE(a.na == 2);
        const MonoKey& c = tr.ops[static_cast<std::size_t>(qi.cre[static_cast<std::size_t>(q - N / 2)])].key;
        REQUIRE(c.nc == 2);
        REQUIRE(c.na == 0);
    }

    // pair_ann / pair_cre against the Fock oracle on both half zones,
    // including the antisymmetric continuation to negative representatives.
    for (int n : {1, 2}) {
        PolarizedState st = make_polarized_state(m, n, Flavor::Down);
        Eigen::VectorXcd X = initial_vector(st, tr, m);
        Eigen::VectorXcd v = ed::psi_state_fock(m, n);
        for (int q = 0; q < N; ++q) {
            cd ann = v.dot(ed::apply_eta(m, m.bog.neg(q), false, ed::apply_eta(m, q, false, v)));
            cd cre = v.dot(ed::apply_eta(m, q, true, ed::apply_eta(m, m.bog.neg(q), true, v)));
            REQUIRE(std::abs(qi.pair_ann(X, q, N) - ann) < 1e-11);
            REQUIRE(std::abs(qi.pair_cre(X, q, N) - cre) < 1e-11);
        }
    }

    Truncation bare = build_truncation("T0", N);
    REQUIRE_THROWS_AS(quadratic_indices(bare), std::invalid_argument);
}

TEST_CASE("magnetization map agrees with the Fock oracle and closed forms") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
    Truncation tr = build_truncation("T2", N);

    for (Flavor fl : {Flavor::Down, Flavor::Up}) {
        for (int n : {0, 1, 2, N / 2}) {
            PolarizedState st = make_polarized_state(m, n, fl);
            Eigen::VectorXcd X = initial_vector(st, tr, m);
            double residue = -1.0;
            double sz = spin_z(X, tr, m, &residue);
            REQUIRE(std::abs(sz - fock_sz(N, fock_state(m, n, fl))) < 1e-11);
            REQUIRE(std::abs(residue) < 1e-12);
        }
    }

    // The vacuum magnetization is the Gamma constant; the fully paired state
    // is all spins down.
    PolarizedState vac = make_polarized_state(m, 0, Flavor::Down);
    REQUIRE(std::abs(spin_z(initial_vector(vac, tr, m), tr, m) - m.coeffs.Gamma) < 1e-13);
    PolarizedState top = make_polarized_state(m, N / 2, Flavor::Down);
    REQUIRE(std::abs(spin_z(initial_vector(top, tr, m), tr, m) + 0.5) < 1e-12);

    // Closed form for the one-pair state, also at a size far beyond the
    // dense oracle.
    for (int Nc : {8, 120}) {
        Model mc = build_model({Nc, -0.51, -1.0, -0.3, 3.0});
        Truncation trc = build_truncation("T2", Nc);
        PolarizedState st = make_polarized_state(mc, 1, Flavor::Down);
        double via_vector = spin_z(initial_vector(st, trc, mc), trc, mc);
        REQUIRE(std::abs(spin_z_psi1_closed_form(mc) - via_vector) < 1e-12);
    }

    // A poisoned vector shows up in the imaginary residue.
    PolarizedState st = make_polarized_state(m, 1, Flavor::Down);
    Eigen::VectorXcd X = initial_vector(st, tr, m);
    QuadraticIndices qi = quadratic_indices(tr);
    X[qi.number[0]] += cd{0.0, 0.3};
    double residue = 0.0;
    spin_z(X, tr, m, &residue);
    REQUIRE(residue > 1e-3);
}

TEST_CASE("zz correlator matches the Fock oracle at time zero") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
    Truncation tr = build_truncation("T4", N);

    for (Flavor fl : {Flavor::Down, Flavor::Up}) {
        for (int n : {0, 1, N / 2}) {
            PolarizedState st = make_polarized_state(m, n, fl);
            Eigen::VectorXcd X = initial_vector(st, tr, m);
            Eigen::VectorXcd v = fock_state(m, n, fl);
            double sz = spin_z(X, tr, m);
            for (int mm = 0; mm <= N / 2; ++mm) {
                double lhs = corr_zz(X, tr, m, mm);
                REQUIRE(std::abs(lhs - fock_czz(N, v, mm)) < 1e-10);
                REQUIRE(corr_zz(X, tr, m, -mm) == lhs);
                if (mm == 0) REQUIRE(std::abs(lhs - (0.25 - sz * sz)) < 1e-12);
            }
        }
    }

    PolarizedState st = make_polarized_state(m, 1, Flavor::Down);
    Eigen::VectorXcd X = initial_vector(st, tr, m);
    REQUIRE_THROWS_AS(corr_zz(X, tr, m, N / 2 + 1), std::invalid_argument);
    Truncation t2 = build_truncation("T2", N);
    Eigen::VectorXcd X2 = initial_vector(st, t2, m);
    REQUIRE_THROWS_AS(corr_zz(X2, t2, m, 1), std::invalid_argument);

    // Correlator coefficient tables: the pair coefficient and its conjugate
    // partner are tied together.
    CorrelatorCoeffs cc = correlator_coeffs(m, 2);
    for (int q = 0; q < N; ++q) REQUIRE(cc.R_III(q) == -cc.R_I[static_cast<std::size_t>(q)]);
}

TEST_CASE("xx correlator matches the exact-evolution column at time zero") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
    Truncation tr = build_truncation("T4", N);
    std::vector<double> t0{0.0};
    ed::EdObservables obs;
    obs.spin_z = true;
    obs.cx1 = true;
    obs.czm = {1, 2};

    for (Flavor fl : {Flavor::Down, Flavor::Up}) {
        for (int n : {0, 1, 2, N / 2}) {
            PolarizedState st = make_polarized_state(m, n, fl);
            Eigen::VectorXcd X = initial_vector(st, tr, m);
            TimeSeries ref = ed::ed_evolve(m, fock_state(m, n, fl), t0, obs);
            double residue = -1.0;
            REQUIRE(std::abs(corr_xx_nn(X, tr, m, &residue) - ref.column("Cx1")[0]) < 1e-10);
            REQUIRE(std::abs(residue) < 1e-12);
            REQUIRE(std::abs(spin_z(X, tr, m) - ref.column("Sz")[0]) < 1e-11);
            REQUIRE(std::abs(corr_zz(X, tr, m, 1) - ref.column("Czm_1")[0]) < 1e-10);
            REQUIRE(std::abs(corr_zz(X, tr, m, 2) - ref.column("Czm_2")[0]) < 1e-10);
        }
    }
}

TEST_CASE("projected Hamiltonian reproduces energies exactly on T4") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
    Truncation tr = build_truncation("T4", N);

    long long dropped = -1;
    Eigen::VectorXcd w = hamiltonian_projection(m, tr, false, &dropped);
    // Quartic terms whose momenta do not pair up fall outside the basis; they
    // have zero expectation in pair-sector states, so energies below stay exact.
    REQUIRE(dropped > 0);
    Eigen::MatrixXcd H = ed::fermion_hamiltonian_full(m);

    for (Flavor fl : {Flavor::Down, Flavor::Up}) {
        for (int n : {0, 1, 2, N / 2}) {
            PolarizedState st = make_polarized_state(m, n, fl);
            Eigen::VectorXcd X = initial_vector(st, tr, m);
            Eigen::VectorXcd v = fock_state(m, n, fl);
            double exact = v.dot(H * v).real();
            REQUIRE(std::abs(w.cwiseProduct(X).sum().real() - exact) < 1e-10);
            if (n == 0 || n == 1 || n == N / 2)
                REQUIRE(std::abs(w.cwiseProduct(X).sum().real() -
                                 N * energy_density(m, st)) < 1e-10);
        }
    }

    // Quadratic-only projection against the quadratic matrix.
    Eigen::VectorXcd wq = hamiltonian_projection(m, tr, true, &dropped);
    REQUIRE(dropped == 0);
    Eigen::MatrixXcd Hq = ed::polynomial_matrix(m, hamiltonian_polynomial(m, true));
    PolarizedState st1 = make_polarized_state(m, 1, Flavor::Down);
    Eigen::VectorXcd X1 = initial_vector(st1, tr, m);
    Eigen::VectorXcd v1 = ed::psi_state_fock(m, 1);
    REQUIRE(std::abs(wq.cwiseProduct(X1).sum().real() - v1.dot(Hq * v1).real()) < 1e-10);

    // T2 cannot hold the quartic terms.
    Truncation t2 = build_truncation("T2", N);
    hamiltonian_projection(m, t2, false, &dropped);
    REQUIRE(dropped > 0);
    hamiltonian_projection(m, t2, true, &dropped);
    REQUIRE(dropped == 0);
}

TEST_CASE("high-temperature expansion carries the right coefficients") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.4, 3.0});
    ThermalExpansion ex = thermal_expansion(m);

    REQUIRE(ex.K1 > 0.0);
    REQUIRE(ex.h == m.params.h);
    REQUIRE(std::abs(ex.Jz_zeta - m.params.Jz * zeta_sum(N, m.params.alpha)) < 1e-13);
    for (double beta : {-0.2, 0.1, 0.3}) {
        REQUIRE(std::abs(ex.energy_density(beta) - (-ex.K1 * beta - ex.K2 * beta * beta)) <
                1e-15);
        REQUIRE(std::abs(ex.spin_z(beta) -
                         (-ex.h / 4.0 * beta + ex.h * ex.Jz_zeta / 16.0 * beta * beta)) < 1e-15);
    }

    // Against the exact thermal state the residual is third order in beta:
    // shrinking beta by 2 shrinks the energy residual by about 8.
    ed::ThermalEd th = ed::thermal_build(m, true);
    double r1 = ed::thermal_energy_density(th, 0.1) - ex.energy_density(0.1);
    double r2 = ed::thermal_energy_density(th, 0.2) - ex.energy_density(0.2);
    REQUIRE(std::abs(r1) > 0.0);
    double ratio = r2 / r1;
    REQUIRE(ratio > 5.0);
    REQUIRE(ratio < 11.0);

    // Same for the magnetization expansion.
    double s1 = ed::thermal_spin_z(th, 0.1) - ex.spin_z(0.1);
    double s2 = ed::thermal_spin_z(th, 0.2) - ex.spin_z(0.2);
    double sratio = s2 / s1;
    REQUIRE(sratio > 5.0);
    REQUIRE(sratio < 11.0);
}

TEST_CASE("timescale estimates follow their definitions") {
    int N = 10;
    Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
    Timescales ts = timescales(m);
    double esum = 0.0;
    for (double e : m.bog.eps) esum += std::abs(e);
    REQUIRE(std::abs(ts.tau - N / esum) < 1e-13);
    REQUIRE(std::abs(ts.tau_trav - N / std::abs(m.params.Jx)) < 1e-13);

    Model frozen = build_model({N, -0.51, 0.0, -0.3, 3.0});
    REQUIRE(std::isinf(timescales(frozen).tau_trav));
}
