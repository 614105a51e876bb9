#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lke/algebra.hpp"

namespace lke {

// Building block of the symmetry-reduced operator classes: a (k, -k) pair
// annihilator/creator, or a number operator.  For the pair kinds q is the
// positive-momentum representative (grid q >= N/2); Number allows any grid.
enum class PairKind : std::uint8_t { AnnihilatePair = 0, CreatePair = 1, Number = 2 };

struct PairFactor {
    PairKind kind;
    std::uint16_t q;
};

// One basis operator: the canonical monomial key plus its pair-factor
// decomposition.  The operator equals sign times the product of the factors
// taken in their sorted (kind, q) order; equivalently, the factor product
// canonicalizes to (key, sign).
struct BasisElement {
    std::vector<PairFactor> factors;
    MonoKey key;
    int sign = 1;
};

struct Truncation {
    std::string scheme;
    int N = 0;
    int max_degree = 0;
    std::vector<BasisElement> ops;  // ops[0] is the identity
    std::unordered_map<MonoKey, int, MonoKeyHash> index;
    std::vector<int> conj_index;  // position of the conjugate representative
    std::vector<int> conj_sign;   // O_i^dag = conj_sign[i] * O_{conj_index[i]}

    int find(const MonoKey& key) const {
        auto it = index.find(key);
        return it == index.end() ? -1 : it->second;
    }
    std::size_t size() const { return ops.size(); }
};

// Builds the element for a pair-factor list (sorted internally); momenta of
// distinct factors must not collide, which the class enumeration guarantees.
BasisElement make_element(int N, std::vector<PairFactor> factors);

// All canonical pair-factor products with the given degree and p-number.
// Empty when no normal-ordered pair product realizes (deg, p): odd degree, or
// p outside [deg/2, deg].
std::vector<BasisElement> enumerate_class(int N, int deg, int p);

// Scheme strings: "T<deg>" takes every class up to deg; "Tp<p>" takes classes
// by p-number (degree between p and 2p for each p'); "T<deg>p<p>" extends
// T_{deg-2} by the single class (deg, p).  deg <= 8, p <= 4.
Truncation build_truncation(const std::string& scheme, int N);

// Index and sign of the canonical representative of an explicit factor list:
// product(factors) = sign * O_idx.  idx is -1 when the truncation lacks the
// operator or the product canonicalizes to zero.
std::pair<int, double> signed_index(const Truncation& trunc, const std::vector<Factor>& factors);

}  // namespace lke
