#include "lke/kinetics.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace lke {

namespace {

using detail::kSlotCreation;
using detail::kSlotNeg;

// The three quadratic Hamiltonian monomials at grid position q.
std::array<Monomial, 3> quadratic_terms(const Model& model, int q) {
    const auto& co = model.coeffs;
    const int ng = model.bog.neg(q);
    auto uq = static_cast<std::uint16_t>(q);
    auto un = static_cast<std::uint16_t>(ng);
    return {
        canonicalize({{false, un}, {false, uq}}, co.A_I[static_cast<std::size_t>(q)]),
        canonicalize({{true, uq}, {false, uq}}, cd{co.A_II[static_cast<std::size_t>(q)], 0.0}),
        canonicalize({{true, uq}, {true, un}}, co.A_III[static_cast<std::size_t>(q)]),
    };
}

// Builds the monomial of one quartic term from its slot grids and adds its
// commutator with K to row.
struct QuarticEmitter {
    const Model& model;
    const MonoKey& K;
    int maxdeg;
    Polynomial& row;

    void operator()(int type, const std::array<int, 4>& g) const {
        const int N = model.params.N;
        int q[4];
        for (int s = 0; s < 4; ++s)
            q[s] = kSlotNeg[type][s] ? N - 1 - g[static_cast<std::size_t>(s)]
                                     : g[static_cast<std::size_t>(s)];
        cd b = model.b_coeff(static_cast<QuarticType>(type), q[0], q[1], q[2], q[3]);
        if (b == cd{0.0, 0.0}) return;
        std::vector<Factor> f(4);
        for (int s = 0; s < 4; ++s)
            f[static_cast<std::size_t>(s)] = {kSlotCreation[type][s],
                                              static_cast<std::uint16_t>(g[static_cast<std::size_t>(s)])};
        Monomial m = canonicalize(f, b);
        if (m.coeff == cd{0.0, 0.0}) return;
        commutator(K, cd{1.0, 0.0}, m.key, m.coeff, row, maxdeg);
    }
};

// Solves the conservation rule q1 + q3 = q2 + q4 (mod N) for the tuple entry
// at position u, the others being known.
int solve_tuple(const int q[4], int u, int N) {
    int val;
    if (u == 0)
        val = q[1] + q[3] - q[2];
    else if (u == 1)
        val = q[0] + q[2] - q[3];
    else if (u == 2)
        val = q[1] + q[3] - q[0];
    else
        val = q[0] + q[2] - q[1];
    val %= N;
    return val < 0 ? val + N : val;
}

// Slot grid at position u implied by conservation, the other three slots of g
// being filled in.
int solve_slot(int type, const std::array<int, 4>& g, int u, int N) {
    int q[4];
    for (int s = 0; s < 4; ++s) {
        if (s == u) continue;
        q[s] = kSlotNeg[type][s] ? N - 1 - g[static_cast<std::size_t>(s)]
                                 : g[static_cast<std::size_t>(s)];
    }
    int qu = solve_tuple(q, u, N);
    return kSlotNeg[type][u] ? N - 1 - qu : qu;
}

// All quartic terms sharing at least min_bound slot momenta with V, each
// enumerated exactly once: the designated bound slots are the first one or
// two positions whose grid lies in V.
void quartic_row(const Model& model, const MonoKey& K, int maxdeg, bool need_single,
                 const std::vector<int>& V, const std::vector<char>& in_v, Polynomial& row) {
    const int N = model.params.N;
    QuarticEmitter emit{model, K, maxdeg, row};
    std::array<int, 4> g{};

    for (int type = 0; type < 5; ++type) {
        // Two or more bound slots: (s1, s2) are the first two.
        for (int s1 = 0; s1 < 4; ++s1)
            for (int s2 = s1 + 1; s2 < 4; ++s2) {
                int f1 = -1, f2 = -1;
                for (int p = 0; p < 4; ++p)
                    if (p != s1 && p != s2) (f1 < 0 ? f1 : f2) = p;
                for (int v1 : V)
                    for (int v2 : V) {
                        g[static_cast<std::size_t>(s1)] = v1;
                        g[static_cast<std::size_t>(s2)] = v2;
                        for (int gf = 0; gf < N; ++gf) {
                            g[static_cast<std::size_t>(f1)] = gf;
                            g[static_cast<std::size_t>(f2)] = solve_slot(type, g, f2, N);
                            bool first_two = true;
                            for (int p = 0; p < s2 && first_two; ++p)
                                if (p != s1 && in_v[static_cast<std::size_t>(g[static_cast<std::size_t>(p)])])
                                    first_two = false;
                            if (first_two) emit(type, g);
                        }
                    }
            }
        if (!need_single) continue;
        // Exactly one bound slot.
        for (int s1 = 0; s1 < 4; ++s1) {
            int p[3];
            int np = 0;
            for (int q = 0; q < 4; ++q)
                if (q != s1) p[np++] = q;
            for (int v1 : V) {
                g[static_cast<std::size_t>(s1)] = v1;
                for (int g1 = 0; g1 < N; ++g1)
                    for (int g2 = 0; g2 < N; ++g2) {
                        g[static_cast<std::size_t>(p[0])] = g1;
                        g[static_cast<std::size_t>(p[1])] = g2;
                        g[static_cast<std::size_t>(p[2])] = solve_slot(type, g, p[2], N);
                        if (in_v[static_cast<std::size_t>(g1)] ||
                            in_v[static_cast<std::size_t>(g2)] ||
                            in_v[static_cast<std::size_t>(g[static_cast<std::size_t>(p[2])])])
                            continue;
                        emit(type, g);
                    }
            }
        }
    }
}

void rk4_step(const Eigen::SparseMatrix<cd, Eigen::RowMajor>& D, Eigen::VectorXcd& X, double dt,
              Eigen::VectorXcd& k1, Eigen::VectorXcd& k2, Eigen::VectorXcd& k3,
              Eigen::VectorXcd& k4, Eigen::VectorXcd& tmp) {
    k1.noalias() = D * X;
    tmp = X + (dt / 2.0) * k1;
    k2.noalias() = D * tmp;
    tmp = X + (dt / 2.0) * k2;
    k3.noalias() = D * tmp;
    tmp = X + dt * k3;
    k4.noalias() = D * tmp;
    X += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Polynomial hamiltonian_polynomial(const Model& model, bool quadratic_only) {
    const int N = model.params.N;
    Polynomial H;
    H.add(MonoKey{}, cd{model.coeffs.H0, 0.0});
    for (int q = 0; q < N; ++q)
        for (const Monomial& m : quadratic_terms(model, q))
            if (m.coeff != cd{0.0, 0.0}) H.add(m);
    if (!quadratic_only) {
        for (int q1 = 0; q1 < N; ++q1)
            for (int q2 = 0; q2 < N; ++q2)
                for (int q3 = 0; q3 < N; ++q3) {
                    int q4 = (q1 + q3 - q2 + N) % N;
                    for (int type = 0; type < 5; ++type) {
                        cd b = model.b_coeff(static_cast<QuarticType>(type), q1, q2, q3, q4);
                        if (b == cd{0.0, 0.0}) continue;
                        int qs[4] = {q1, q2, q3, q4};
                        std::vector<Factor> f(4);
                        for (int s = 0; s < 4; ++s) {
                            int gs = kSlotNeg[type][s] ? N - 1 - qs[s] : qs[s];
                            f[static_cast<std::size_t>(s)] = {kSlotCreation[type][s],
                                                              static_cast<std::uint16_t>(gs)};
                        }
                        Monomial m = canonicalize(f, b);
                        if (m.coeff != cd{0.0, 0.0}) H.add(m);
                    }
                }
    }
    H.prune();
    return H;
}

KineticSystem build_generator(const Model& model, const Truncation& trunc, HamiltonianMode mode) {
    const int N = model.params.N;
    if (N != trunc.N)
        throw std::invalid_argument("build_generator: model and truncation sizes differ");
    const int maxdeg = trunc.max_degree;
    const auto size = static_cast<int>(trunc.size());

    // Enumeration-size estimate; refuses builds that cannot finish in memory
    // or sensible time (each unit is roughly one small Wick expansion).
    double estimate = 0.0;
    for (int i = 0; i < size; ++i) {
        const MonoKey& K = trunc.ops[static_cast<std::size_t>(i)].key;
        double v = 0.0;
        {
            std::vector<char> seen(static_cast<std::size_t>(N), 0);
            for (int j = 0; j < K.degree(); ++j) {
                int gq = K.idx[static_cast<std::size_t>(j)];
                if (!seen[static_cast<std::size_t>(gq)]) {
                    seen[static_cast<std::size_t>(gq)] = 1;
                    v += 1.0;
                }
            }
        }
        estimate += 6.0 * v;
        if (mode == HamiltonianMode::Full) {
            estimate += 30.0 * v * v * N;
            if (K.degree() + 2 <= maxdeg) estimate += 20.0 * v * N * static_cast<double>(N);
        }
    }
    if (estimate > 2e9)
        throw std::length_error("build_generator: enumeration estimate exceeds the budget");

    KineticSystem sys;
    sys.trunc = trunc;
    sys.mode = mode;
    sys.degree_skip_active = (mode == HamiltonianMode::Full);

    std::vector<std::array<Monomial, 3>> h2(static_cast<std::size_t>(N));
    for (int q = 0; q < N; ++q) h2[static_cast<std::size_t>(q)] = quadratic_terms(model, q);

    std::vector<Eigen::Triplet<cd>> trips;
    std::vector<char> in_v(static_cast<std::size_t>(N), 0);
    for (int i = 0; i < size; ++i) {
        const MonoKey& K = trunc.ops[static_cast<std::size_t>(i)].key;
        if (K.is_identity()) continue;

        std::vector<int> V;
        for (int j = 0; j < K.degree(); ++j) {
            int gq = K.idx[static_cast<std::size_t>(j)];
            if (!in_v[static_cast<std::size_t>(gq)]) {
                in_v[static_cast<std::size_t>(gq)] = 1;
                V.push_back(gq);
            }
        }

        Polynomial row;
        // Quadratic part: only terms sharing a momentum with K contribute.
        for (int gq : V) {
            for (int q : {gq, N - 1 - gq}) {
                bool primary = (q == gq);
                if (!primary && in_v[static_cast<std::size_t>(q)]) continue;  // visited via V
                for (const Monomial& m : h2[static_cast<std::size_t>(q)])
                    if (m.coeff != cd{0.0, 0.0})
                        commutator(K, cd{1.0, 0.0}, m.key, m.coeff, row, maxdeg);
            }
        }
        if (mode == HamiltonianMode::Full)
            quartic_row(model, K, maxdeg, K.degree() + 2 <= maxdeg, V, in_v, row);

        row.prune();
        for (const auto& [key, coeff] : row) {
            int j = trunc.find(key);
            if (j < 0) {
                ++sys.dropped_terms;
                continue;
            }
            trips.emplace_back(i, j, cd{0.0, -1.0} * coeff);
        }
        for (int gq : V) in_v[static_cast<std::size_t>(gq)] = 0;
    }

    sys.D.resize(size, size);
    sys.D.setFromTriplets(trips.begin(), trips.end());
    sys.D.makeCompressed();
    return sys;
}

std::vector<double> sample_times(const TrajectoryConfig& cfg) {
    if (cfg.dt <= 0.0 || cfg.t_max < 0.0 || cfg.sample_every <= 0)
        throw std::invalid_argument("sample_times: need dt > 0, t_max >= 0, sample_every > 0");
    const auto nsteps = static_cast<long long>(std::llround(cfg.t_max / cfg.dt));
    std::vector<double> out{0.0};
    for (long long step = 1; step <= nsteps; ++step)
        if (step % cfg.sample_every == 0 || step == nsteps)
            out.push_back(static_cast<double>(step) * cfg.dt);
    return out;
}

EvolveStats evolve(const KineticSystem& sys, const Eigen::VectorXcd& X0,
                   const TrajectoryConfig& cfg,
                   const std::function<void(double, const Eigen::VectorXcd&)>& on_sample) {
    if (cfg.dt <= 0.0 || cfg.t_max < 0.0 || cfg.sample_every <= 0)
        throw std::invalid_argument("evolve: need dt > 0, t_max >= 0, sample_every > 0");
    if (X0.size() != static_cast<Eigen::Index>(sys.trunc.size()))
        throw std::invalid_argument("evolve: state size does not match the basis");
    if (std::abs(X0[0] - cd{1.0, 0.0}) > 1e-9)
        throw std::invalid_argument("evolve: identity expectation must be 1");

    const auto nsteps = static_cast<long long>(std::llround(cfg.t_max / cfg.dt));
    const double norm0 = X0.norm();

    Eigen::VectorXcd X = X0, Xh;
    Eigen::VectorXcd k1(X.size()), k2(X.size()), k3(X.size()), k4(X.size()), tmp(X.size());
    if (cfg.halving_check) Xh = X0;

    EvolveStats stats;
    on_sample(0.0, X);
    for (long long step = 1; step <= nsteps; ++step) {
        rk4_step(sys.D, X, cfg.dt, k1, k2, k3, k4, tmp);
        if (cfg.halving_check) {
            rk4_step(sys.D, Xh, cfg.dt / 2.0, k1, k2, k3, k4, tmp);
            rk4_step(sys.D, Xh, cfg.dt / 2.0, k1, k2, k3, k4, tmp);
        }
        const double t = static_cast<double>(step) * cfg.dt;
        if (X.norm() > 10.0 * norm0) {
            stats.aborted = true;
            stats.message = "norm blow-up at t = " + std::to_string(t) +
                            "; the step size is unstable for this generator";
            stats.final_time = t;
            return stats;
        }
        if (step % cfg.sample_every == 0 || step == nsteps) {
            on_sample(t, X);
            if (cfg.halving_check) {
                double r = (X - Xh).cwiseAbs().maxCoeff();
                if (r > stats.halving_residual) stats.halving_residual = r;
            }
        }
        stats.final_time = t;
    }
    if (cfg.halving_check && stats.halving_residual >= 1e-8) {
        stats.halving_warning = true;
        stats.message = "step-halving residual " + std::to_string(stats.halving_residual) +
                        " reached 1e-8; decrease dt";
    }
    return stats;
}

double paired_momentum_residual(const Truncation& trunc, const Eigen::VectorXcd& X) {
    const int N = trunc.N;
    double worst = 0.0;
    for (int q = N / 2; q < N; ++q) {
        MonoKey nk;
        nk.nc = 1;
        nk.na = 1;
        nk.idx[0] = static_cast<std::uint16_t>(q);
        nk.idx[1] = static_cast<std::uint16_t>(q);
        MonoKey nmk = nk;
        nmk.idx[0] = static_cast<std::uint16_t>(N - 1 - q);
        nmk.idx[1] = nmk.idx[0];
        int i = trunc.find(nk);
        int j = trunc.find(nmk);
        if (i < 0 || j < 0)
            throw std::invalid_argument("paired_momentum_residual: basis lacks number operators");
        double r = std::abs(X[i] - X[j]);
        if (r > worst) worst = r;
    }
    return worst;
}

}  // namespace lke
