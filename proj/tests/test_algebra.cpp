#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "lke/algebra.hpp"
#include "lke/ed.hpp"
#include "lke/model.hpp"

using namespace lke;

namespace {

MonoKey make_key(std::vector<int> creators, std::vector<int> annihilators) {
    MonoKey k;
    k.nc = static_cast<std::uint8_t>(creators.size());
    k.na = static_cast<std::uint8_t>(annihilators.size());
    std::size_t i = 0;
    for (int q : creators) k.idx[i++] = static_cast<std::uint16_t>(q);
    for (int q : annihilators) k.idx[i++] = static_cast<std::uint16_t>(q);
    return k;
}

MonoKey random_key(std::mt19937& rng, int N, int max_block) {
    std::uniform_int_distribution<int> cnt(0, max_block);
    std::vector<int> mom(static_cast<std::size_t>(N));
    std::iota(mom.begin(), mom.end(), 0);
    auto pick = [&](int n) {
        std::shuffle(mom.begin(), mom.end(), rng);
        std::vector<int> out(mom.begin(), mom.begin() + n);
        std::sort(out.begin(), out.end());
        return out;
    };
    return make_key(pick(cnt(rng)), pick(cnt(rng)));
}

double matrix_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("canonicalize sorts factor blocks with fermionic parity") {
    // Swapping two creators costs a sign.
    Monomial m = canonicalize({{true, 3}, {true, 1}}, cd(1.0, 0.0));
    REQUIRE(m.key == make_key({1, 3}, {}));
    REQUIRE(m.coeff == cd(-1.0, 0.0));

    // An annihilator moves left past a creator of a different momentum.
    m = canonicalize({{false, 2}, {true, 5}}, cd(1.0, 0.0));
    REQUIRE(m.key == make_key({5}, {2}));
    REQUIRE(m.coeff == cd(-1.0, 0.0));

    // Repeated momentum within a block vanishes.
    m = canonicalize({{true, 1}, {true, 1}}, cd(1.0, 0.0));
    REQUIRE(m.coeff == cd(0.0, 0.0));
    m = canonicalize({{false, 4}, {true, 2}, {false, 4}}, cd(1.0, 0.0));
    REQUIRE(m.coeff == cd(0.0, 0.0));

    // An annihilator directly left of the same-momentum creator is not a
    // monomial: reordering it would generate a contraction.
    REQUIRE_THROWS_AS(canonicalize({{false, 1}, {true, 1}}, cd(1.0, 0.0)),
                      std::invalid_argument);

    m = canonicalize({}, cd(2.5, 0.0));
    REQUIRE(m.key.is_identity());
    REQUIRE(m.coeff == cd(2.5, 0.0));

    // Already-canonical input keeps its coefficient.
    m = canonicalize({{true, 0}, {true, 4}, {false, 1}, {false, 3}}, cd(0.0, 1.0));
    REQUIRE(m.key == make_key({0, 4}, {1, 3}));
    REQUIRE(m.coeff == cd(0.0, 1.0));
}

TEST_CASE("conjugate transpose is an involution matching the matrix adjoint") {
    Model model = build_model({6, -0.51, -1.0, -0.3, 3.0});
    std::mt19937 rng(5);
    for (int rep = 0; rep < 40; ++rep) {
        MonoKey key = random_key(rng, 6, 2);
        auto [kc, sc] = conj_transpose(key);
        auto [kcc, scc] = conj_transpose(kc);
        REQUIRE(kcc == key);
        REQUIRE(sc * scc == 1);
        Eigen::MatrixXcd direct = ed::monomial_matrix(model, key);
        Eigen::MatrixXcd conj = ed::monomial_matrix(model, kc);
        REQUIRE(matrix_gap(direct.adjoint(), double(sc) * conj) < 1e-12);
    }
}

TEST_CASE("normal-ordered products match the matrix algebra") {
    for (int N : {4, 6}) {
        Model model = build_model({N, -0.7, -1.1, -0.2, 2.0});
        std::mt19937 rng(17 + N);
        for (int rep = 0; rep < 40; ++rep) {
            MonoKey a = random_key(rng, N, 2);
            MonoKey b = random_key(rng, N, 2);
            Polynomial prod = normal_order_product(Monomial{a, cd(1.0, 0.0)},
                                                   Monomial{b, cd(1.0, 0.0)});
            int mc = (momentum_class(a, N) + momentum_class(b, N)) % (2 * N);
            for (const auto& [key, coeff] : prod) {
                REQUIRE(key.degree() <= a.degree() + b.degree());
                if (std::abs(coeff) > 1e-14) REQUIRE(momentum_class(key, N) == mc);
            }
            Eigen::MatrixXcd lhs =
                ed::monomial_matrix(model, a) * ed::monomial_matrix(model, b);
            REQUIRE(matrix_gap(lhs, ed::polynomial_matrix(model, prod)) < 1e-12);
        }
    }
}

TEST_CASE("commutators match the matrix algebra and lower the degree") {
    for (int N : {4, 6}) {
        Model model = build_model({N, -0.4, -0.9, -0.15, 3.0});
        std::mt19937 rng(29 + N);
        for (int rep = 0; rep < 30; ++rep) {
            MonoKey a = random_key(rng, N, 2);
            MonoKey b = random_key(rng, N, 2);
            Polynomial ab;
            commutator(a, cd(1.0, 0.0), b, cd(1.0, 0.0), ab);
            Polynomial ba;
            commutator(b, cd(1.0, 0.0), a, cd(1.0, 0.0), ba);
            ba *= cd(-1.0, 0.0);
            ab.prune();
            ba.prune();
            // The top degree cancels unless both operands have odd degree,
            // where the zero-contraction parts reorder with a minus sign.
            int bound = (a.degree() % 2 == 1 && b.degree() % 2 == 1)
                            ? a.degree() + b.degree()
                            : a.degree() + b.degree() - 2;
            for (const auto& [key, coeff] : ab) {
                REQUIRE(std::abs(coeff - ba.coeff_of(key)) < 1e-13);
                REQUIRE(key.degree() <= bound);
            }
            Eigen::MatrixXcd ma = ed::monomial_matrix(model, a);
            Eigen::MatrixXcd mb = ed::monomial_matrix(model, b);
            REQUIRE(matrix_gap(ma * mb - mb * ma, ed::polynomial_matrix(model, ab)) < 1e-12);
        }
    }
}

TEST_CASE("degree-capped products agree with the filtered exact product") {
    std::mt19937 rng(41);
    int N = 6;
    for (int rep = 0; rep < 30; ++rep) {
        MonoKey a = random_key(rng, N, 2);
        MonoKey b = random_key(rng, N, 2);
        Polynomial full;
        normal_order_product(a, b, cd(1.0, 0.0), full);
        for (int cap : {0, 2, 4}) {
            Polynomial capped;
            normal_order_product(a, b, cd(1.0, 0.0), capped, cap);
            for (const auto& [key, coeff] : capped) {
                REQUIRE(key.degree() <= cap);
                REQUIRE(std::abs(coeff - full.coeff_of(key)) < 1e-15);
            }
            std::size_t expect = 0;
            for (const auto& [key, coeff] : full)
                if (key.degree() <= cap) ++expect;
            REQUIRE(capped.size() == expect);
        }
    }
}

TEST_CASE("canonical anticommutation spot checks") {
    // eta_k eta+_k = 1 - eta+_k eta_k
    Polynomial p = normal_order_product(Monomial{make_key({}, {2}), cd(1.0, 0.0)},
                                        Monomial{make_key({2}, {}), cd(1.0, 0.0)});
    REQUIRE(p.coeff_of(MonoKey{}) == cd(1.0, 0.0));
    REQUIRE(p.coeff_of(make_key({2}, {2})) == cd(-1.0, 0.0));
    REQUIRE(p.size() == 2);

    // eta_k eta_k = 0
    p = normal_order_product(Monomial{make_key({}, {3}), cd(1.0, 0.0)},
                             Monomial{make_key({}, {3}), cd(1.0, 0.0)});
    p.prune();
    REQUIRE(p.empty());

    // eta_j eta+_k anticommute at different momenta
    p = normal_order_product(Monomial{make_key({}, {1}), cd(1.0, 0.0)},
                             Monomial{make_key({4}, {}), cd(1.0, 0.0)});
    REQUIRE(p.coeff_of(make_key({4}, {1})) == cd(-1.0, 0.0));
    REQUIRE(p.size() == 1);

    // number operator is idempotent: (eta+_k eta_k)^2 = eta+_k eta_k
    MonoKey n2 = make_key({2}, {2});
    p = normal_order_product(Monomial{n2, cd(1.0, 0.0)}, Monomial{n2, cd(1.0, 0.0)});
    p.prune();
    REQUIRE(p.coeff_of(n2) == cd(1.0, 0.0));
    REQUIRE(p.size() == 1);
}

TEST_CASE("momentum class tracks the grid total") {
    int N = 8;
    REQUIRE(momentum_class(MonoKey{}, N) == 0);
    // Pair eta+_{-k} eta+_{k}: momenta cancel.
    MonoKey pair = make_key({2, 5}, {});
    REQUIRE(momentum_class(pair, N) == 0);
    MonoKey num = make_key({3}, {3});
    REQUIRE(momentum_class(num, N) == 0);
    // Single creator at grid q: class (2q + 1 - N) mod 2N.
    for (int q = 0; q < N; ++q) {
        int expect = ((2 * q + 1 - N) % (2 * N) + 2 * N) % (2 * N);
        REQUIRE(momentum_class(make_key({q}, {}), N) == expect);
    }
}
