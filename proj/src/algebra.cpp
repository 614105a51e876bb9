#include "lke/algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace lke {

namespace {

// Merges two strictly ascending runs into out, returning false if they share
// an element (the monomial vanishes).  parity accumulates the sign of the
// merge permutation: taking an element of B past the remaining elements of A
// costs one transposition each.
bool merge_sorted(const std::uint16_t* A, int la, const std::uint16_t* B, int lb,
                  std::uint16_t* out, int& parity) {
    int i = 0, j = 0, n = 0;
    while (i < la && j < lb) {
        if (A[i] == B[j]) return false;
        if (A[i] < B[j]) {
            out[n++] = A[i++];
        } else {
            parity ^= (la - i) & 1;
            out[n++] = B[j++];
        }
    }
    while (i < la) out[n++] = A[i++];
    while (j < lb) out[n++] = B[j++];
    return true;
}

// Insertion sort counting transpositions; returns false on a repeated value.
bool sort_block(std::uint16_t* v, int n, int& parity) {
    for (int i = 1; i < n; ++i) {
        std::uint16_t x = v[i];
        int j = i - 1;
        while (j >= 0 && v[j] > x) {
            v[j + 1] = v[j];
            parity ^= 1;
            --j;
        }
        v[j + 1] = x;
        if (j >= 0 && v[j] == x) return false;
    }
    return true;
}

struct WickJob {
    const MonoKey* a;
    const MonoKey* b;
    cd coeff;
    Polynomial* out;
    int min_contractions;
};

// Moves a's annihilator block through b's creator block, rightmost annihilator
// first: each annihilator either contracts against one of the surviving b
// creators (sign (-1)^position) or anticommutes past all of them (sign
// (-1)^count) and joins the surviving annihilators.  Survivors are collected
// back-to-front so their ascending order is preserved.
void wick_rec(const WickJob& job, int m, std::array<std::uint16_t, 8> bc, int q,
              std::array<std::uint16_t, 8>& surv, int nsurv, int contractions, int sign) {
    if (contractions + m < job.min_contractions) return;
    if (m == 0) {
        MonoKey key;
        int parity = 0;
        const MonoKey& a = *job.a;
        const MonoKey& b = *job.b;
        if (!merge_sorted(a.idx.data(), a.nc, bc.data(), q, key.idx.data(), parity)) return;
        key.nc = static_cast<std::uint8_t>(a.nc + q);
        if (!merge_sorted(surv.data() + (8 - nsurv), nsurv, b.idx.data() + b.nc, b.na,
                          key.idx.data() + key.nc, parity))
            return;
        key.na = static_cast<std::uint8_t>(nsurv + b.na);
        cd c = job.coeff * static_cast<double>(sign);
        if (parity) c = -c;
        job.out->add(key, c);
        return;
    }
    std::uint16_t ann = job.a->annihilator(m - 1);
    for (int j = 0; j < q; ++j) {
        if (bc[static_cast<std::size_t>(j)] != ann) continue;
        std::array<std::uint16_t, 8> bc2 = bc;
        for (int t = j; t + 1 < q; ++t) bc2[static_cast<std::size_t>(t)] = bc2[static_cast<std::size_t>(t + 1)];
        wick_rec(job, m - 1, bc2, q - 1, surv, nsurv, contractions + 1, (j & 1) ? -sign : sign);
        break;  // creator momenta are distinct; at most one match
    }
    surv[static_cast<std::size_t>(8 - nsurv - 1)] = ann;
    wick_rec(job, m - 1, bc, q, surv, nsurv + 1, contractions, (q & 1) ? -sign : sign);
}

}  // namespace

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    for (const auto& [k, c] : o) add(k, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    for (const auto& [k, c] : o) add(k, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(cd s) {
    for (auto& [k, c] : terms_) c *= s;
    return *this;
}

void Polynomial::prune(double eps) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) < eps)
            it = terms_.erase(it);
        else
            ++it;
    }
}

Monomial canonicalize(const std::vector<Factor>& factors, cd coeff) {
    if (factors.size() > MonoKey::kMaxFactors)
        throw std::invalid_argument("canonicalize: too many factors");
    MonoKey key;
    int parity = 0;
    int seen_ann = 0;
    std::array<std::uint16_t, MonoKey::kMaxFactors> cre{}, ann{};
    int nc = 0, na = 0;
    for (const Factor& f : factors) {
        if (f.creation) {
            for (int i = 0; i < na; ++i)
                if (ann[static_cast<std::size_t>(i)] == f.q)
                    throw std::invalid_argument(
                        "canonicalize: annihilator precedes creator of the same momentum; "
                        "the product is not a monomial");
            parity ^= seen_ann & 1;
            cre[static_cast<std::size_t>(nc++)] = f.q;
        } else {
            ++seen_ann;
            ann[static_cast<std::size_t>(na++)] = f.q;
        }
    }
    if (!sort_block(cre.data(), nc, parity) || !sort_block(ann.data(), na, parity))
        return Monomial{};
    key.nc = static_cast<std::uint8_t>(nc);
    key.na = static_cast<std::uint8_t>(na);
    for (int i = 0; i < nc; ++i) key.idx[static_cast<std::size_t>(i)] = cre[static_cast<std::size_t>(i)];
    for (int i = 0; i < na; ++i) key.idx[static_cast<std::size_t>(nc + i)] = ann[static_cast<std::size_t>(i)];
    return Monomial{key, parity ? -coeff : coeff};
}

void normal_order_product(const MonoKey& a, const MonoKey& b, cd coeff, Polynomial& out,
                          int max_out_degree) {
    WickJob job{&a, &b, coeff, &out, 0};
    if (max_out_degree >= 0) {
        int excess = a.degree() + b.degree() - max_out_degree;
        if (excess > 0) job.min_contractions = (excess + 1) / 2;
    }
    if (a.degree() + b.degree() - 2 * job.min_contractions > MonoKey::kMaxFactors)
        throw std::invalid_argument("normal_order_product: degree overflow");
    std::array<std::uint16_t, 8> bc{};
    for (int i = 0; i < b.nc; ++i) bc[static_cast<std::size_t>(i)] = b.creator(i);
    std::array<std::uint16_t, 8> surv{};
    wick_rec(job, a.na, bc, b.nc, surv, 0, 0, 1);
}

Polynomial normal_order_product(const Monomial& a, const Monomial& b) {
    Polynomial out;
    normal_order_product(a.key, b.key, a.coeff * b.coeff, out);
    out.prune();
    return out;
}

Polynomial normal_order_product(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b) normal_order_product(ka, kb, ca * cb, out);
    out.prune();
    return out;
}

void commutator(const MonoKey& a, cd ca, const MonoKey& b, cd cb, Polynomial& out,
                int max_out_degree) {
    cd c = ca * cb;
    normal_order_product(a, b, c, out, max_out_degree);
    normal_order_product(b, a, -c, out, max_out_degree);
}

Polynomial commutator(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b) commutator(ka, ca, kb, cb, out);
    out.prune();
    return out;
}

std::pair<MonoKey, int> conj_transpose(const MonoKey& key) {
    MonoKey out;
    out.nc = key.na;
    out.na = key.nc;
    for (int i = 0; i < key.na; ++i)
        out.idx[static_cast<std::size_t>(i)] = key.annihilator(i);
    for (int i = 0; i < key.nc; ++i)
        out.idx[static_cast<std::size_t>(key.na + i)] = key.creator(i);
    int swaps = key.na * (key.na - 1) / 2 + key.nc * (key.nc - 1) / 2;
    return {out, (swaps & 1) ? -1 : 1};
}

Polynomial conj_transpose(const Polynomial& p) {
    Polynomial out;
    for (const auto& [k, c] : p) {
        auto [kk, s] = conj_transpose(k);
        out.add(kk, std::conj(c) * static_cast<double>(s));
    }
    return out;
}

int momentum_class(const MonoKey& key, int N) {
    long sum = 0;
    for (int i = 0; i < key.nc; ++i) sum += 2 * key.creator(i) + 1 - N;
    for (int i = 0; i < key.na; ++i) sum -= 2 * key.annihilator(i) + 1 - N;
    long mod = 2 * N;
    return static_cast<int>(((sum % mod) + mod) % mod);
}

}  // namespace lke
