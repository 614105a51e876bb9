#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lke/util.hpp"

namespace lke {

// One fermionic factor: eta^dag (creation) or eta (annihilation) with a
// Brillouin-grid momentum index q in [0, N).
struct Factor {
    bool creation = false;
    std::uint16_t q = 0;
};

// Canonical normal-ordered monomial key: the first nc entries of idx are the
// creation momenta (strictly ascending), the next na entries the annihilation
// momenta (strictly ascending).  Unused slots stay zero so keys can be
// compared and hashed bytewise.
struct MonoKey {
    static constexpr int kMaxFactors = 16;

    std::uint8_t nc = 0;
    std::uint8_t na = 0;
    std::array<std::uint16_t, kMaxFactors> idx{};

    int degree() const { return nc + na; }
    int particle_number() const { return nc > na ? nc : na; }
    bool is_identity() const { return nc == 0 && na == 0; }

    std::uint16_t creator(int i) const { return idx[static_cast<std::size_t>(i)]; }
    std::uint16_t annihilator(int i) const { return idx[static_cast<std::size_t>(nc + i)]; }

    friend bool operator==(const MonoKey& a, const MonoKey& b) {
        return a.nc == b.nc && a.na == b.na && a.idx == b.idx;
    }
};

struct MonoKeyHash {
    std::size_t operator()(const MonoKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(k.nc);
        mix(k.na);
        for (int i = 0; i < k.degree(); ++i) mix(k.idx[static_cast<std::size_t>(i)] + 1u);
        return static_cast<std::size_t>(h);
    }
};

struct Monomial {
    MonoKey key;
    cd coeff{0.0, 0.0};
};

// Sparse operator polynomial: canonical keys mapped to complex coefficients.
// Terms are merged eagerly; prune() drops coefficients below threshold.
class Polynomial {
  public:
    using Map = std::unordered_map<MonoKey, cd, MonoKeyHash>;

    void add(const MonoKey& key, cd c) {
        auto [it, inserted] = terms_.try_emplace(key, c);
        if (!inserted) it->second += c;
    }
    void add(const Monomial& m) { add(m.key, m.coeff); }

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(cd s);

    void prune(double eps = 1e-15);

    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    void clear() { terms_.clear(); }
    cd coeff_of(const MonoKey& key) const {
        auto it = terms_.find(key);
        return it == terms_.end() ? cd{0.0, 0.0} : it->second;
    }

    Map::const_iterator begin() const { return terms_.begin(); }
    Map::const_iterator end() const { return terms_.end(); }

  private:
    Map terms_;
};

// Reorders an arbitrary factor list into canonical form, multiplying the
// coefficient by the fermionic permutation parity.  Returns a zero-coefficient
// monomial if a block repeats a momentum (Pauli exclusion).  Throws
// std::invalid_argument if an annihilator precedes a creator with the same
// momentum: that product is not a monomial (anticommuting them produces a
// contraction term) and indicates a caller bug.
Monomial canonicalize(const std::vector<Factor>& factors, cd coeff);

// Wick expansion of the product a*b into canonical normal-ordered terms,
// accumulated into out with the given overall coefficient.  If max_out_degree
// is nonnegative, terms of higher degree are not generated (branches with too
// few contractions are pruned early); pass -1 for the exact product.
void normal_order_product(const MonoKey& a, const MonoKey& b, cd coeff, Polynomial& out,
                          int max_out_degree = -1);

Polynomial normal_order_product(const Monomial& a, const Monomial& b);
Polynomial normal_order_product(const Polynomial& a, const Polynomial& b);

// [a, b] = ab - ba, normal ordered.  When at least one operand has even
// degree the zero-contraction terms of ab and ba cancel, so every output
// term has degree at most deg(a) + deg(b) - 2; two odd-degree operands
// reorder with a minus sign and keep the top degree.
void commutator(const MonoKey& a, cd ca, const MonoKey& b, cd cb, Polynomial& out,
                int max_out_degree = -1);
Polynomial commutator(const Polynomial& a, const Polynomial& b);

// Hermitian conjugate of a canonical key: swaps the creator and annihilator
// blocks (each reversed); the returned sign is the parity of re-sorting.
// The caller conjugates the coefficient.
std::pair<MonoKey, int> conj_transpose(const MonoKey& key);
Polynomial conj_transpose(const Polynomial& p);

// Total momentum of the monomial in units of pi/N, reduced to [0, 2N).
// With grid momenta k(q) = 2*pi*(q + 1/2)/N - pi, each creator contributes
// 2q + 1 - N and each annihilator -(2q + 1 - N).  A value of 0 means the
// monomial conserves momentum mod 2*pi.
int momentum_class(const MonoKey& key, int N);

}  // namespace lke
