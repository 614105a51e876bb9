#include "lke/states.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace lke {

namespace {

// (v/u)^2 per half-zone mode, indexed by q - N/2.
std::vector<double> pair_ratios(const Model& model) {
    const auto& bog = model.bog;
    const int hb = bog.N / 2;
    std::vector<double> r(static_cast<std::size_t>(hb));
    for (int i = 0; i < hb; ++i) {
        int q = bog.half_begin() + i;
        double t = bog.v[static_cast<std::size_t>(q)] / bog.u[static_cast<std::size_t>(q)];
        r[static_cast<std::size_t>(i)] = t * t;
    }
    return r;
}

// One pair mode's worth of factors, in the order they appear in the monomial.
struct ModeBlock {
    int pm = 0;  // half-zone grid index of the mode
    std::vector<Factor> ops;
};

// Matrix elements amps[in][out] of the block between the two pair states
// |0> (occ = 0) and |P> = eta+_{-k} eta+_k |0> (occ = 1), computed in the
// four-state space of the modes (k, -k): bit 0 = k occupied, bit 1 = -k.
std::array<std::array<double, 2>, 2> block_amps(const ModeBlock& blk) {
    std::array<std::array<double, 2>, 2> amps{};
    for (int in = 0; in < 2; ++in) {
        std::array<double, 4> vec{};
        if (in == 0)
            vec[0] = 1.0;
        else
            vec[3] = -1.0;  // eta+_{-k} eta+_k |0> = -|11>
        for (auto it = blk.ops.rbegin(); it != blk.ops.rend(); ++it) {
            std::array<double, 4> next{};
            const int site = (it->q == blk.pm) ? 0 : 1;
            const int bit = 1 << site;
            for (int b = 0; b < 4; ++b) {
                if (vec[static_cast<std::size_t>(b)] == 0.0) continue;
                const bool occ = b & bit;
                if (it->creation == occ) continue;  // killed by Pauli / emptiness
                double s = (site == 1 && (b & 1)) ? -1.0 : 1.0;
                next[static_cast<std::size_t>(b ^ bit)] += s * vec[static_cast<std::size_t>(b)];
            }
            vec = next;
        }
        amps[static_cast<std::size_t>(in)][0] = vec[0];
        amps[static_cast<std::size_t>(in)][1] = -vec[3];
    }
    return amps;
}

cd down_expectation(const Model& model, const PolarizedState& st, const MonoKey& key) {
    if (key.is_identity()) return cd{1.0, 0.0};
    const int N = model.params.N;
    const int hb = N / 2;
    const auto& bog = model.bog;

    const int deg = key.degree();
    std::vector<Factor> ops(static_cast<std::size_t>(deg));
    for (int i = 0; i < key.nc; ++i)
        ops[static_cast<std::size_t>(i)] = {true, key.creator(i)};
    for (int i = 0; i < key.na; ++i)
        ops[static_cast<std::size_t>(key.nc + i)] = {false, key.annihilator(i)};

    auto pm_of = [&](int g) { return g >= hb ? g : N - 1 - g; };

    // Parity of the stable regrouping of the factors by pair mode.
    int inv = 0;
    for (int i = 0; i < deg; ++i)
        for (int j = i + 1; j < deg; ++j)
            if (pm_of(ops[static_cast<std::size_t>(i)].q) > pm_of(ops[static_cast<std::size_t>(j)].q))
                ++inv;

    std::vector<ModeBlock> blocks;
    for (const Factor& f : ops) {
        int pm = pm_of(f.q);
        auto it = std::find_if(blocks.begin(), blocks.end(),
                               [pm](const ModeBlock& b) { return b.pm == pm; });
        if (it == blocks.end())
            blocks.push_back({pm, {f}});
        else
            it->ops.push_back(f);
    }
    // An odd count at some mode flips that mode's pair parity: expectation 0.
    for (const ModeBlock& b : blocks)
        if (b.ops.size() % 2 != 0) return cd{0.0, 0.0};

    struct Branch {
        cd weight;
        int in = 0;
        int out = 0;
    };
    std::vector<Branch> branches{{cd{inv % 2 ? -1.0 : 1.0, 0.0}, 0, 0}};
    for (const ModeBlock& b : blocks) {
        const double t = bog.v[static_cast<std::size_t>(b.pm)] / bog.u[static_cast<std::size_t>(b.pm)];
        const auto amps = block_amps(b);
        std::vector<Branch> next;
        for (const Branch& br : branches)
            for (int in = 0; in < 2; ++in)
                for (int out = 0; out < 2; ++out) {
                    double a = amps[static_cast<std::size_t>(in)][static_cast<std::size_t>(out)];
                    if (a == 0.0) continue;
                    cd w = br.weight * a;
                    if (in) w *= cd{0.0, -t};   // ket coefficient -i v/u
                    if (out) w *= cd{0.0, t};   // bra coefficient +i v/u
                    next.push_back({w, br.in + in, br.out + out});
                }
        branches = std::move(next);
        if (branches.empty()) return cd{0.0, 0.0};
    }

    // Prefix sums of the elementary symmetric polynomials over the untouched
    // modes; E[c] bounds the shared pair count of bra and ket by c.
    std::vector<double> r = pair_ratios(model);
    std::vector<char> touched(static_cast<std::size_t>(hb), 0);
    for (const ModeBlock& b : blocks) touched[static_cast<std::size_t>(b.pm - hb)] = 1;
    const int m_max = std::min(st.n, hb - static_cast<int>(blocks.size()));
    std::vector<double> e(static_cast<std::size_t>(m_max) + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < hb; ++i) {
        if (touched[static_cast<std::size_t>(i)]) continue;
        for (int s = m_max; s >= 1; --s)
            e[static_cast<std::size_t>(s)] += r[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(s) - 1];
    }
    std::vector<double> pref(static_cast<std::size_t>(m_max) + 1, 0.0);
    double run = 0.0;
    for (int s = 0; s <= m_max; ++s) {
        run += e[static_cast<std::size_t>(s)];
        pref[static_cast<std::size_t>(s)] = run;
    }

    cd acc{0.0, 0.0};
    for (const Branch& br : branches) {
        int cap = st.n - std::max(br.in, br.out);
        if (cap < 0) continue;
        acc += br.weight * pref[static_cast<std::size_t>(std::min(cap, m_max))];
    }
    return acc / (st.W * st.W);
}

// <chi| O |chi> = <psi| f(O) |psi> with the particle-hole substitution
// f(eta+_g) = eta_{-g}, f(eta_g) = eta+_{-g}, expanded to normal order.
cd up_expectation(const Model& model, const PolarizedState& st, const MonoKey& key) {
    const int N = model.params.N;
    Polynomial p;
    p.add(MonoKey{}, cd{1.0, 0.0});
    auto multiply = [&p](bool creation, int g) {
        MonoKey f;
        if (creation) {
            f.nc = 1;
        } else {
            f.na = 1;
        }
        f.idx[0] = static_cast<std::uint16_t>(g);
        Polynomial next;
        for (const auto& [k, c] : p) normal_order_product(k, f, c, next);
        next.prune();
        p = std::move(next);
    };
    for (int i = 0; i < key.nc; ++i) multiply(false, N - 1 - key.creator(i));
    for (int i = 0; i < key.na; ++i) multiply(true, N - 1 - key.annihilator(i));
    cd acc{0.0, 0.0};
    for (const auto& [k, c] : p) acc += c * down_expectation(model, st, k);
    return acc;
}

void check_superposition(const SuperpositionSpec& spec) {
    double norm = std::norm(spec.y1) + std::norm(spec.y2);
    if (std::abs(norm - 1.0) > 1e-12)
        throw std::invalid_argument("superposition weights must satisfy |y1|^2 + |y2|^2 = 1");
}

// Per-column index of the trajectory a superposition acts on.
int pick_column(const TimeSeries& s) {
    int i = s.col("Sz");
    if (i >= 0) return i;
    if (s.cols.size() == 1) return 0;
    throw std::invalid_argument("decoupled_superposition: no Sz column to combine");
}

double nu1(const Model& model) {
    const int N = model.params.N;
    const auto& bog = model.bog;
    const auto& co = model.coeffs;
    const int hb = N / 2;

    double w2 = 1.0;
    for (int i = hb; i < N; ++i) {
        double t = bog.v[static_cast<std::size_t>(i)] / bog.u[static_cast<std::size_t>(i)];
        w2 += t * t;
    }
    double acc = 0.0;
    for (int j = hb; j < N; ++j) {
        double tj = bog.v[static_cast<std::size_t>(j)] / bog.u[static_cast<std::size_t>(j)];
        acc += 2.0 * (cd{0.0, 1.0} * co.A_I[static_cast<std::size_t>(j)]).real() * tj;
        acc += tj * tj * co.A_II[static_cast<std::size_t>(j)];
        for (int l = hb; l < N; ++l) {
            double tl = bog.v[static_cast<std::size_t>(l)] / bog.u[static_cast<std::size_t>(l)];
            cd diff = model.b_coeff(QuarticType::III, l, l, j, j) -
                      model.b_coeff(QuarticType::III, bog.neg(l), bog.neg(l), j, j);
            acc += tj * tl * diff.real();
        }
    }
    return co.H0 / N + 2.0 * acc / (N * w2);
}

}  // namespace

PolarizedState make_polarized_state(const Model& model, int n, Flavor flavor) {
    const int hb = model.params.N / 2;
    if (n < 0 || n > hb)
        throw std::invalid_argument("make_polarized_state: level must lie in [0, N/2]");
    PolarizedState st;
    st.N = model.params.N;
    st.n = n;
    st.flavor = flavor;
    std::vector<double> e(static_cast<std::size_t>(n) + 1, 0.0);
    e[0] = 1.0;
    for (double ri : pair_ratios(model))
        for (int s = n; s >= 1; --s)
            e[static_cast<std::size_t>(s)] += ri * e[static_cast<std::size_t>(s) - 1];
    st.L.assign(e.begin() + 1, e.end());
    double w2 = 1.0;
    for (double ls : st.L) w2 += ls;
    st.W = std::sqrt(w2);
    return st;
}

cd state_expectation(const Model& model, const PolarizedState& state, const MonoKey& key) {
    if (state.N != model.params.N)
        throw std::invalid_argument("state_expectation: state and model sizes differ");
    return state.flavor == Flavor::Down ? down_expectation(model, state, key)
                                        : up_expectation(model, state, key);
}

Eigen::VectorXcd initial_vector(const PolarizedState& state, const Truncation& trunc,
                                const Model& model) {
    if (state.N != trunc.N || state.N != model.params.N)
        throw std::invalid_argument("initial_vector: state, truncation and model sizes differ");
    Eigen::VectorXcd X0(static_cast<Eigen::Index>(trunc.size()));
    for (std::size_t i = 0; i < trunc.size(); ++i)
        X0[static_cast<Eigen::Index>(i)] = state_expectation(model, state, trunc.ops[i].key);
    return X0;
}

double fermion_density(const PolarizedState& state) {
    double num = 0.0;
    double w2 = 1.0;
    for (std::size_t s = 0; s < state.L.size(); ++s) {
        num += 2.0 * static_cast<double>(s + 1) * state.L[s];
        w2 += state.L[s];
    }
    double d = num / (state.N * w2);
    return state.flavor == Flavor::Down ? d : 1.0 - d;
}

int polarized_level(const Model& model, double tol) {
    const int hb = model.params.N / 2;
    double prev = fermion_density(make_polarized_state(model, 0, Flavor::Down));
    for (int n = 1; n <= hb; ++n) {
        double cur = fermion_density(make_polarized_state(model, n, Flavor::Down));
        if (std::abs(cur - prev) < tol) return n;
        prev = cur;
    }
    return hb;
}

ModelParams particle_hole(const ModelParams& p) {
    if (!(2.0 * std::abs(p.h) > std::abs(p.Jx)))
        std::fprintf(stderr,
                     "warning: particle-hole flow used outside its validated regime "
                     "2|h| > |Jx| (h = %g, Jx = %g)\n",
                     p.h, p.Jx);
    return mirror_params(p);
}

TimeSeries decoupled_superposition(const SuperpositionSpec& spec, const TimeSeries& series_down,
                                   const TimeSeries& series_mirror, double initial_value) {
    check_superposition(spec);
    if (series_down.t.size() != series_mirror.t.size())
        throw std::invalid_argument("decoupled_superposition: time grids differ");
    for (std::size_t i = 0; i < series_down.t.size(); ++i)
        if (std::abs(series_down.t[i] - series_mirror.t[i]) > 1e-12)
            throw std::invalid_argument("decoupled_superposition: time grids differ");
    if (series_down.t.empty())
        throw std::invalid_argument("decoupled_superposition: empty time grid");

    const auto& a = series_down.cols[static_cast<std::size_t>(pick_column(series_down))];
    const auto& b = series_mirror.cols[static_cast<std::size_t>(pick_column(series_mirror))];
    const double w1 = std::norm(spec.y1);
    const double w2 = std::norm(spec.y2);

    TimeSeries out;
    out.t = series_down.t;
    out.names = {"Sz"};
    out.cols.emplace_back(series_down.t.size());
    for (std::size_t i = 0; i < series_down.t.size(); ++i)
        out.cols[0][i] = initial_value + w1 * (a[i] - a[0]) - w2 * (b[i] - b[0]);
    return out;
}

double energy_density(const Model& model, const PolarizedState& state) {
    const int N = model.params.N;
    const int hb = N / 2;
    if (state.flavor == Flavor::Up) {
        Model mirror = build_model(mirror_params(model.params));
        return energy_density(mirror, make_polarized_state(mirror, state.n, Flavor::Down));
    }
    if (state.n == 0) return model.coeffs.H0 / N;
    if (state.n == 1) return nu1(model);
    if (state.n == hb) return -model.params.h / 2.0 + model.params.Jz * model.kernel.zeta / 8.0;
    throw std::invalid_argument("energy_density: closed forms exist only for n in {0, 1, N/2}");
}

double energy_density(const Model& model, const SuperpositionSpec& spec) {
    check_superposition(spec);
    const int N = model.params.N;
    const double w1 = std::norm(spec.y1);
    const double w2 = std::norm(spec.y2);
    if (spec.n == N / 2)
        return model.params.h * (w2 - w1) / 2.0 + model.params.Jz * model.kernel.zeta / 8.0;
    if (spec.n == 1) {
        if (N <= 8)
            throw std::invalid_argument(
                "energy_density: the n = 1 superposition form needs N > 8 (nonzero cross term)");
        Model mirror = build_model(mirror_params(model.params));
        return w1 * nu1(model) + w2 * nu1(mirror);
    }
    throw std::invalid_argument("energy_density: superposition levels limited to 1 and N/2");
}

}  // namespace lke
