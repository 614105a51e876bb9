#include "lke/basis.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace lke {

namespace {

int neg_grid(int N, int q) { return N - 1 - q; }

// Visits every size-r subset of pool, ascending.
void for_each_combination(const std::vector<int>& pool, int r,
                          const std::function<void(const std::vector<int>&)>& visit) {
    if (r == 0) {
        static const std::vector<int> empty;
        visit(empty);
        return;
    }
    if (r > static_cast<int>(pool.size())) return;
    std::vector<int> pick(static_cast<std::size_t>(r));
    std::vector<int> stack(static_cast<std::size_t>(r), 0);
    int depth = 0;
    stack[0] = 0;
    while (depth >= 0) {
        int& i = stack[static_cast<std::size_t>(depth)];
        if (i > static_cast<int>(pool.size()) - (r - depth)) {
            --depth;
            if (depth >= 0) ++stack[static_cast<std::size_t>(depth)];
            continue;
        }
        pick[static_cast<std::size_t>(depth)] = pool[static_cast<std::size_t>(i)];
        if (depth + 1 == r) {
            visit(pick);
            ++i;
        } else {
            stack[static_cast<std::size_t>(depth + 1)] = i + 1;
            ++depth;
        }
    }
}

void append_class(std::vector<BasisElement>& out, int N, int deg, int p);

}  // namespace

BasisElement make_element(int N, std::vector<PairFactor> factors) {
    std::sort(factors.begin(), factors.end(), [](const PairFactor& a, const PairFactor& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.q < b.q;
    });
    std::vector<Factor> flat;
    flat.reserve(2 * factors.size());
    for (const PairFactor& f : factors) {
        int q = f.q;
        switch (f.kind) {
            case PairKind::AnnihilatePair:
                flat.push_back({false, static_cast<std::uint16_t>(q)});
                flat.push_back({false, static_cast<std::uint16_t>(neg_grid(N, q))});
                break;
            case PairKind::CreatePair:
                flat.push_back({true, static_cast<std::uint16_t>(q)});
                flat.push_back({true, static_cast<std::uint16_t>(neg_grid(N, q))});
                break;
            case PairKind::Number:
                flat.push_back({true, static_cast<std::uint16_t>(q)});
                flat.push_back({false, static_cast<std::uint16_t>(q)});
                break;
        }
    }
    Monomial mono = canonicalize(flat, cd{1.0, 0.0});
    if (mono.coeff == cd{0.0, 0.0})
        throw std::invalid_argument("make_element: factor momenta collide");
    BasisElement el;
    el.factors = std::move(factors);
    el.key = mono.key;
    el.sign = mono.coeff.real() > 0 ? 1 : -1;
    return el;
}

namespace {

void append_class(std::vector<BasisElement>& out, int N, int deg, int p) {
    if (deg == 0) {
        if (p == 0) out.push_back(BasisElement{{}, MonoKey{}, 1});
        return;
    }
    if (deg < 0 || p < 0 || deg % 2 != 0 || p > deg || 2 * p < deg) return;

    std::vector<int> halfzone;
    for (int q = N / 2; q < N; ++q) halfzone.push_back(q);

    std::vector<std::pair<int, int>> splits{{p, deg - p}};
    if (p != deg - p) splits.push_back({deg - p, p});

    for (auto [c, a] : splits) {
        for (int j = c & 1; j <= std::min(c, a); j += 2) {
            int pc = (c - j) / 2, pa = (a - j) / 2;
            for_each_combination(halfzone, pc, [&](const std::vector<int>& Pc) {
                std::vector<int> rest;
                for (int q : halfzone)
                    if (std::find(Pc.begin(), Pc.end(), q) == Pc.end()) rest.push_back(q);
                for_each_combination(rest, pa, [&](const std::vector<int>& Pa) {
                    std::vector<int> pool;
                    for (int g = 0; g < N; ++g) {
                        bool blocked = false;
                        for (int q : Pc)
                            if (g == q || g == neg_grid(N, q)) blocked = true;
                        for (int q : Pa)
                            if (g == q || g == neg_grid(N, q)) blocked = true;
                        if (!blocked) pool.push_back(g);
                    }
                    for_each_combination(pool, j, [&](const std::vector<int>& J) {
                        std::vector<PairFactor> factors;
                        for (int q : Pa)
                            factors.push_back({PairKind::AnnihilatePair, static_cast<std::uint16_t>(q)});
                        for (int q : Pc)
                            factors.push_back({PairKind::CreatePair, static_cast<std::uint16_t>(q)});
                        for (int g : J)
                            factors.push_back({PairKind::Number, static_cast<std::uint16_t>(g)});
                        out.push_back(make_element(N, std::move(factors)));
                    });
                });
            });
        }
    }
}

}  // namespace

std::vector<BasisElement> enumerate_class(int N, int deg, int p) {
    std::vector<BasisElement> out;
    append_class(out, N, deg, p);
    return out;
}

Truncation build_truncation(const std::string& scheme, int N) {
    if (N < 4 || N % 2 != 0) throw std::invalid_argument("build_truncation: N must be even, >= 4");
    int deg = -1, p = -1;
    {
        if (scheme.size() < 2 || scheme[0] != 'T')
            throw std::invalid_argument("build_truncation: unknown scheme " + scheme);
        std::size_t pos = scheme.find('p');
        try {
            if (pos == std::string::npos) {
                deg = std::stoi(scheme.substr(1));
            } else if (pos == 1) {
                p = std::stoi(scheme.substr(2));
            } else {
                deg = std::stoi(scheme.substr(1, pos - 1));
                p = std::stoi(scheme.substr(pos + 1));
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("build_truncation: unknown scheme " + scheme);
        }
    }
    if (deg >= 0 && (deg % 2 != 0 || deg > 8))
        throw std::invalid_argument("build_truncation: degree must be even, <= 8");
    if (p >= 0 && p > 4) throw std::invalid_argument("build_truncation: p must be <= 4");
    if (deg < 0 && p < 0) throw std::invalid_argument("build_truncation: unknown scheme " + scheme);

    Truncation tr;
    tr.scheme = scheme;
    tr.N = N;
    if (deg >= 0 && p < 0) {
        // T_deg: every class of degree <= deg.
        for (int d = 0; d <= deg; d += 2)
            for (int pp = (d + 1) / 2; pp <= d; ++pp) append_class(tr.ops, N, d, pp);
        tr.max_degree = deg;
    } else if (deg < 0) {
        // T^p: classes C^j with degree between j and 2j.
        for (int j = 0; j <= p; ++j)
            for (int d = j; d <= 2 * j; ++d) append_class(tr.ops, N, d, j);
        tr.max_degree = 2 * p;
    } else {
        // T_deg^p: T_{deg-2} plus the single class (deg, p).
        if (p < (deg + 1) / 2 || p > deg)
            throw std::invalid_argument("build_truncation: empty top class for " + scheme);
        for (int d = 0; d <= deg - 2; d += 2)
            for (int pp = (d + 1) / 2; pp <= d; ++pp) append_class(tr.ops, N, d, pp);
        append_class(tr.ops, N, deg, p);
        tr.max_degree = deg;
    }

    tr.index.reserve(tr.ops.size() * 2);
    for (std::size_t i = 0; i < tr.ops.size(); ++i) {
        auto [it, inserted] = tr.index.try_emplace(tr.ops[i].key, static_cast<int>(i));
        if (!inserted) throw std::logic_error("build_truncation: duplicate basis key");
    }
    tr.conj_index.resize(tr.ops.size());
    tr.conj_sign.resize(tr.ops.size());
    for (std::size_t i = 0; i < tr.ops.size(); ++i) {
        auto [ck, s] = conj_transpose(tr.ops[i].key);
        int j = tr.find(ck);
        if (j < 0) throw std::logic_error("build_truncation: basis not conjugation-closed");
        tr.conj_index[i] = j;
        tr.conj_sign[i] = s;
    }
    return tr;
}

std::pair<int, double> signed_index(const Truncation& trunc, const std::vector<Factor>& factors) {
    Monomial mono = canonicalize(factors, cd{1.0, 0.0});
    if (mono.coeff == cd{0.0, 0.0}) return {-1, 0.0};
    int idx = trunc.find(mono.key);
    return {idx, mono.coeff.real()};
}

}  // namespace lke
