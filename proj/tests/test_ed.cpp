#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lke/ed.hpp"
#include "lke/model.hpp"
#include "lke/observables.hpp"

using namespace lke;

namespace {

Eigen::VectorXcd random_even_state(std::mt19937& rng, int N) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << N);
    for (int b = 0; b < (1 << N); ++b)
        if (__builtin_parity(static_cast<unsigned>(b)) == 0) v[b] = cd(g(rng), g(rng));
    v.normalize();
    return v;
}

Eigen::VectorXd sorted_eigs(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(m, Eigen::EigenvaluesOnly);
    return s.eigenvalues();
}

}  // namespace

TEST_CASE("spin chain and fermion chain share the even-parity spectrum") {
    for (int N : {4, 6, 8}) {
        Model m = build_model({N, -0.51, -1.0, -0.3, 3.0});
        auto states = ed::parity_block_states(N, 0);
        Eigen::MatrixXd spin = ed::spin_hamiltonian_block(m, states);
        Eigen::MatrixXcd ferm = ed::fermion_hamiltonian_full(m);

        // Restrict the fermion matrix to even occupation-parity rows/cols.
        std::vector<int> even;
        for (int b = 0; b < (1 << N); ++b)
            if (__builtin_parity(static_cast<unsigned>(b)) == 0) even.push_back(b);
        Eigen::MatrixXcd fblock(even.size(), even.size());
        for (std::size_t i = 0; i < even.size(); ++i)
            for (std::size_t j = 0; j < even.size(); ++j)
                fblock(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    ferm(even[i], even[j]);
        REQUIRE(fblock.imag().cwiseAbs().maxCoeff() < 1e-12);

        Eigen::VectorXd es = sorted_eigs(spin);
        Eigen::VectorXd ef = sorted_eigs(fblock.real());
        REQUIRE(es.size() == ef.size());
        for (Eigen::Index i = 0; i < es.size(); ++i)
            REQUIRE(std::abs(es[i] - ef[i]) < 1e-10);
    }
}

TEST_CASE("eta operators satisfy canonical anticommutation relations") {
    int N = 6;
    Model m = build_model({N, -0.7, -0.9, -0.2, 2.0});
    std::mt19937 rng(3);
    Eigen::VectorXcd v = random_even_state(rng, N);
    // Even-parity states leave the even sector under an even number of
    // applications, so test the anticommutators on pairs.
    for (int i = 0; i < N; ++i) {
        for (int j = i; j < N; ++j) {
            Eigen::VectorXcd ac = ed::apply_eta(m, i, false, ed::apply_eta(m, j, true, v)) +
                                  ed::apply_eta(m, j, true, ed::apply_eta(m, i, false, v));
            if (i == j)
                REQUIRE((ac - v).norm() < 1e-12);
            else
                REQUIRE(ac.norm() < 1e-12);
            Eigen::VectorXcd aa = ed::apply_eta(m, i, false, ed::apply_eta(m, j, false, v)) +
                                  ed::apply_eta(m, j, false, ed::apply_eta(m, i, false, v));
            REQUIRE(aa.norm() < 1e-12);
        }
    }
}

TEST_CASE("bogoliubov vacuum is annihilated by every quasiparticle mode") {
    for (int N : {6, 8}) {
        Model m = build_model({N, -0.51, -1.0, -0.25, 3.0});
        Eigen::VectorXcd vac = ed::bogoliubov_vacuum(m);
        REQUIRE(std::abs(vac.norm() - 1.0) < 1e-12);
        for (int q = 0; q < N; ++q)
            REQUIRE(ed::apply_eta(m, q, false, vac).norm() < 1e-11);
        // Free-chain energy of the vacuum: -1/2 sum eps.
        Model free = build_model({N, m.params.h, m.params.Jx, 0.0, 3.0});
        Eigen::VectorXcd fvac = ed::bogoliubov_vacuum(free);
        Eigen::MatrixXcd H = ed::fermion_hamiltonian_full(free);
        double esum = 0.0;
        for (int q = 0; q < N; ++q) esum += free.bog.eps[q];
        cd e = fvac.dot(H * fvac);
        REQUIRE(std::abs(e - cd(-0.5 * esum, 0.0)) < 1e-10);
    }
}

TEST_CASE("truncated polarized states keep at most n quasiparticle pairs") {
    int N = 8;
    int hb = N / 2;
    Model m = build_model({N, -0.51, -1.0, -0.25, 3.0});

    // Pair-sector weights of the polarized state: each half-zone mode i
    // contributes amplitude -i v/u when its (k, -k) pair is excited, so a
    // subset `mask` of excited pairs carries weight prod (v/u)^2.
    auto mask_weight = [&](int mask) {
        double w = 1.0;
        for (int i = 0; i < hb; ++i)
            if (mask >> i & 1) {
                int q = m.bog.half_begin() + i;
                double r = m.bog.v[static_cast<std::size_t>(q)] /
                           m.bog.u[static_cast<std::size_t>(q)];
                w *= r * r;
            }
        return w;
    };

    std::vector<Eigen::VectorXcd> psi;
    for (int n = 0; n <= hb; ++n) psi.push_back(ed::psi_state_fock(m, n));

    for (int n = 0; n <= hb; ++n) {
        REQUIRE(std::abs(psi[n].norm() - 1.0) < 1e-12);

        // Total quasiparticle number against the weight combinatorics.
        double total = 0.0;
        for (int q = 0; q < N; ++q) {
            double nk = ed::apply_eta(m, q, false, psi[n]).squaredNorm();
            double nnegk = ed::apply_eta(m, m.bog.neg(q), false, psi[n]).squaredNorm();
            REQUIRE(std::abs(nk - nnegk) < 1e-12);
            total += nk;
        }
        double num = 0.0, den = 0.0;
        for (int mask = 0; mask < (1 << hb); ++mask) {
            if (__builtin_popcount(static_cast<unsigned>(mask)) > n) continue;
            num += 2.0 * __builtin_popcount(static_cast<unsigned>(mask)) * mask_weight(mask);
            den += mask_weight(mask);
        }
        REQUIRE(std::abs(total - num / den) < 1e-10);

        // Annihilating any n+1 distinct pairs gives zero: no sector beyond n
        // pairs survives the truncation.
        if (n < hb) {
            for (int mask = 0; mask < (1 << hb); ++mask) {
                if (__builtin_popcount(static_cast<unsigned>(mask)) != n + 1) continue;
                Eigen::VectorXcd w = psi[n];
                for (int i = 0; i < hb; ++i)
                    if (mask >> i & 1) {
                        int q = m.bog.half_begin() + i;
                        w = ed::apply_eta(m, q, false, w);
                        w = ed::apply_eta(m, m.bog.neg(q), false, w);
                    }
                REQUIRE(w.norm() < 1e-11);
            }
        }
    }

    // Overlaps between truncation levels telescope: <psi^a|psi^b> for a <= b
    // is the norm ratio of the partial sums, so the chain product collapses.
    for (int a = 0; a <= hb; ++a)
        for (int b = a; b <= hb; ++b) {
            cd ov = psi[a].dot(psi[b]);
            REQUIRE(std::abs(ov.imag()) < 1e-12);
            REQUIRE(ov.real() > 0.0);
            REQUIRE(ov.real() < 1.0 + 1e-12);
            if (b > a) {
                cd chain = psi[a].dot(psi[a + 1]);
                for (int c = a + 1; c < b; ++c) chain *= psi[c].dot(psi[c + 1]);
                REQUIRE(std::abs(ov - chain) < 1e-12);
            }
        }

    // n = 0 is the Bogoliubov vacuum; n = N/2 is the all-spins-down product
    // state (no lattice fermions at all, occupied means spin up).
    REQUIRE(std::abs(std::abs(psi[0].dot(ed::bogoliubov_vacuum(m))) - 1.0) < 1e-12);
    REQUIRE(std::abs(std::abs(psi[hb][0]) - 1.0) < 1e-12);
}

TEST_CASE("mirror states flip the magnetization") {
    int N = 8;
    Model m = build_model({N, -0.51, -1.0, -0.25, 3.0});
    for (int n : {0, 1, 2, 4}) {
        Eigen::VectorXcd psi = ed::psi_state_fock(m, n);
        Eigen::VectorXcd chi = ed::chi_state_fock(m, n);
        REQUIRE(std::abs(chi.norm() - 1.0) < 1e-12);
        // chi is the particle-hole image of psi up to a global phase.
        Eigen::VectorXcd u_psi = ed::particle_hole_apply(psi);
        REQUIRE(std::abs(std::abs(chi.dot(u_psi)) - 1.0) < 1e-11);

        auto sz_of = [&](const Eigen::VectorXcd& v) {
            double acc = 0.0;
            for (int b = 0; b < (1 << N); ++b)
                acc += std::norm(v[b]) *
                       (__builtin_popcount(static_cast<unsigned>(b)) - 0.5 * N);
            return acc / N;
        };
        REQUIRE(std::abs(sz_of(psi) + sz_of(chi)) < 1e-12);
    }
}

TEST_CASE("particle-hole transform conjugates the chain onto its mirror") {
    int N = 6;
    Model m = build_model({N, -0.51, -1.0, -0.25, 3.0});
    Model mm = build_model(mirror_params(m.params));
    int dim = 1 << N;
    Eigen::MatrixXcd U(dim, dim);
    for (int b = 0; b < dim; ++b) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
        e[b] = 1.0;
        U.col(b) = ed::particle_hole_apply(e);
    }
    // U is an involution up to a global sign and maps H to the mirror H.
    Eigen::MatrixXcd U2 = U * U;
    cd phase = U2(0, 0);
    REQUIRE(std::abs(std::abs(phase) - 1.0) < 1e-12);
    REQUIRE((U2 - phase * Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXcd Hs = ed::spin_hamiltonian_full(m).cast<cd>();
    Eigen::MatrixXcd Hm = ed::spin_hamiltonian_full(mm).cast<cd>();
    REQUIRE((U * Hs * U.adjoint() - Hm).cwiseAbs().maxCoeff() < 1e-10);

    // And it flips the site-averaged magnetization.
    std::mt19937 rng(9);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXcd v = random_even_state(rng, N);
        auto sz_of = [&](const Eigen::VectorXcd& w) {
            double acc = 0.0;
            for (int b = 0; b < dim; ++b)
                acc += std::norm(w[b]) *
                       (__builtin_popcount(static_cast<unsigned>(b)) - 0.5 * N);
            return acc / N;
        };
        REQUIRE(std::abs(sz_of(ed::particle_hole_apply(v)) + sz_of(v)) < 1e-12);
    }
}

TEST_CASE("exact evolution conserves energy and matches the free oracle") {
    int N = 8;
    ModelParams free{N, -0.51, -1.0, 0.0, 3.0};
    Model m = build_model(free);
    std::vector<double> times{0.0, 0.7, 1.9, 4.0};
    for (int n : {1, 2}) {
        Eigen::VectorXcd init = ed::psi_state_fock(m, n);
        ed::EdObservables obs;
        obs.spin_z = true;
        obs.energy = true;
        TimeSeries full = ed::ed_evolve(m, init, times, obs);
        TimeSeries oracle = ed::quadratic_pair_oracle(m, n, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            REQUIRE(std::abs(full.column("Sz")[i] - oracle.column("Sz")[i]) < 1e-10);
            REQUIRE(std::abs(full.column("energy")[i] - full.column("energy")[0]) < 1e-12);
        }
    }
    // Odd-parity input is rejected.
    Eigen::VectorXcd odd = Eigen::VectorXcd::Zero(1 << N);
    odd[1] = 1.0;
    REQUIRE_THROWS_AS(ed::ed_evolve(m, odd, times, {}), std::invalid_argument);
}

TEST_CASE("thermal traces match the dense spectrum") {
    for (int N : {6, 8}) {
        Model m = build_model({N, -0.51, -1.0, -0.4, 3.0});
        ed::ThermalEd th = ed::thermal_build(m, true);
        REQUIRE(th.evals.size() == 1 << N);

        double tr1 = 0.0, tr2 = 0.0, tr3 = 0.0;
        for (Eigen::Index i = 0; i < th.evals.size(); ++i) {
            tr1 += th.evals[i];
            tr2 += th.evals[i] * th.evals[i];
            tr3 += th.evals[i] * th.evals[i] * th.evals[i];
        }
        double dim = std::pow(2.0, N);
        REQUIRE(std::abs(tr1) / dim < 1e-10);  // H is traceless

        ThermalExpansion ex = thermal_expansion(m);
        REQUIRE(std::abs(ex.K1 - tr2 / dim / N) < 1e-10);
        // K2 is the exact quadratic Taylor coefficient of the energy density:
        // <H>_beta / N = -(Tr H^2 / 2^N / N) beta + (Tr H^3 / 2^N / (2N)) beta^2
        // + O(beta^3), so K2 = -Tr H^3 / (2^N * 2N).
        REQUIRE(std::abs(ex.K2 + tr3 / dim / (2.0 * N)) < 1e-10);

        // Energy density at beta = 0 vanishes with the trace.
        REQUIRE(std::abs(ed::thermal_energy_density(th, 0.0)) < 1e-12);
        // match_beta inverts the exact energy density.
        for (double beta : {-0.4, 0.15, 0.8}) {
            double e = ed::thermal_energy_density(th, beta);
            REQUIRE(std::abs(ed::match_beta(th, e) - beta) < 1e-6);
        }
        // Spin density from the same build.
        REQUIRE(std::abs(ed::thermal_spin_z(th, 0.0)) < 1e-12);

        // The analytic spin expansion carries the exact Taylor coefficients
        // <Sz>_beta = -(Tr Sz H / 2^N) beta + (Tr Sz H^2 / 2^N / 2) beta^2
        // + O(beta^3) with Sz site-averaged and Tr Sz = 0.
        double tr_szh = 0.0, tr_szh2 = 0.0;
        for (Eigen::Index i = 0; i < th.evals.size(); ++i) {
            tr_szh += th.sz_eigenbasis[i] * th.evals[i];
            tr_szh2 += th.sz_eigenbasis[i] * th.evals[i] * th.evals[i];
        }
        REQUIRE(std::abs(-tr_szh / dim - (-m.params.h / 4.0)) < 1e-10);
        REQUIRE(std::abs(tr_szh2 / dim / 2.0 -
                         m.params.h * ex.Jz_zeta / 16.0) < 1e-10);
    }
}

TEST_CASE("beta extrapolation is exact on linear-in-1/N data") {
    std::vector<std::pair<int, double>> samples;
    for (int N : {8, 10, 12, 14}) samples.push_back({N, -5.0 + 3.2 / N});
    REQUIRE(std::abs(ed::extrapolate_beta(samples) - (-5.0)) < 1e-12);
    REQUIRE_THROWS_AS(ed::extrapolate_beta({{8, 1.0}}), std::invalid_argument);
}

TEST_CASE("accuracy metric integrates the scaled deviation") {
    std::vector<double> t{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> a(t.size(), 0.3), b(t.size(), 0.25);
    auto delta = ed::accuracy_metric(t, a, a);
    for (double d : delta) REQUIRE(d == 0.0);
    delta = ed::accuracy_metric(t, a, b);
    REQUIRE(delta.size() == t.size());
    REQUIRE(delta.front() == 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double expect = std::sqrt(0.05 * 0.05 * t[i] / (1.0 + 0.25 * 0.25 * t[i]));
        REQUIRE(std::abs(delta[i] - expect) < 1e-12);
    }
    REQUIRE_THROWS_AS(ed::accuracy_metric(t, a, std::vector<double>(3, 0.0)),
                      std::invalid_argument);
}
