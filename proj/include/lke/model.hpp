#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "lke/util.hpp"

namespace lke {

/// Chain parameters. The unperturbed part is a transverse-field Ising chain
///   H_int = Jx * sum_l S^x_l S^x_{l+1} + h * sum_l S^z_l
/// on a ring of N sites, and the perturbation couples S^z pairs at chord
/// distance d(m) = min(m, N-m) with strength (Jz/2) * d(m)^(-alpha) for
/// separations m in [2, N-2] (nearest neighbours excluded).
struct ModelParams {
  int N = 0;
  double h = 0.0;
  double Jx = 0.0;
  double Jz = 0.0;
  double alpha = 1.0;

  bool operator==(const ModelParams&) const = default;
};

/// Even-sector momentum grid and Bogoliubov data, indexed by the grid
/// position q in [0, N): k(q) = 2*pi*(q + 1/2)/N - pi. The grid is symmetric
/// around zero, never contains 0 or pi, and neg(q) = N-1-q maps k -> -k.
struct BogoliubovTable {
  int N = 0;
  std::vector<double> k;    ///< momenta, ascending
  std::vector<double> a;    ///< h + (Jx/2) cos k
  std::vector<double> b;    ///< (Jx/2) sin k
  std::vector<double> x;    ///< rotation angle, |x| <= pi/4
  std::vector<double> u;    ///< cos x
  std::vector<double> v;    ///< sin x
  std::vector<double> eps;  ///< sgn(a) * sqrt(a^2 + b^2)

  int neg(int q) const { return N - 1 - q; }
  /// Grid positions of the positive-momentum half zone.
  int half_begin() const { return N / 2; }
};

/// Momentum-space couplings of the perturbation. All entries are indexed by
/// integer grid differences so that lookups stay exact on the grid:
/// c(k_i, k_j) depends only on d = (q_i - q_j) mod N.
struct CouplingKernel {
  int N = 0;
  double alpha = 1.0;
  double zeta = 0.0;             ///< zeta_N(alpha) = sum_m d(m)^(-alpha)
  std::vector<double> c_diff;    ///< c as a function of the grid difference
  std::vector<double> cos_table; ///< cos(2*pi*j/N)

  double c(int qi, int qj) const {
    int d = qi - qj;
    d %= N;
    if (d < 0) d += N;
    return c_diff[d];
  }
  /// gamma_ij(m) = cos[m (k_i - k_j)], exact in grid arithmetic.
  double gamma(int qi, int qj, int m) const {
    long long idx = (static_cast<long long>(m) * (qi - qj)) % N;
    if (idx < 0) idx += N;
    return cos_table[static_cast<std::size_t>(idx)];
  }
};

/// Quartic term shapes of the normal-ordered Hamiltonian. The monomial each
/// coefficient multiplies, in the order (k1,k2,k3,k4):
///   I  : eta_{-k1} eta_{k2} eta_{-k3} eta_{k4}
///   II : eta+_{k1} eta_{k2} eta_{-k3} eta_{k4}
///   III: eta+_{k1} eta+_{-k2} eta_{-k3} eta_{k4}
///   IV : eta+_{k1} eta+_{-k2} eta+_{k3} eta_{k4}
///   V  : eta+_{k1} eta+_{-k2} eta+_{k3} eta+_{-k4}
enum class QuarticType { I = 0, II, III, IV, V };

inline constexpr QuarticType kQuarticTypes[5] = {
    QuarticType::I, QuarticType::II, QuarticType::III, QuarticType::IV,
    QuarticType::V};

/// Coefficients of the normal-ordered fermionic Hamiltonian
///   H = H0 + sum_k [A_I(k) eta_{-k} eta_k + A_II(k) eta+_k eta_k
///              + A_III(k) eta+_k eta+_{-k}]
///     + sum_{k-conserving tuples} sum_lambda B_lambda(k1..k4) * (shape above).
struct HamiltonianCoeffs {
  double H0 = 0.0;
  double Gamma = 0.0;         ///< -1/2 + (1/N) sum_k v_k^2
  std::vector<cd> A_I;        ///< purely imaginary, odd in k
  std::vector<double> A_II;   ///< real, even in k
  std::vector<cd> A_III;      ///< = -A_I
};

struct Model {
  ModelParams params;
  BogoliubovTable bog;
  CouplingKernel kernel;
  HamiltonianCoeffs coeffs;

  /// B_lambda on grid indices (q1,q2,q3,q4). Requires a momentum-conserving
  /// tuple; returns the coefficient of the corresponding quartic shape.
  cd b_coeff(QuarticType t, int q1, int q2, int q3, int q4) const;

  /// True when k1 - k2 + k3 - k4 = 0 mod 2*pi on the grid.
  bool conserves(int q1, int q2, int q3, int q4) const {
    int lhs = (q1 + q3) % params.N;
    int rhs = (q2 + q4) % params.N;
    return lhs == rhs;
  }
};

/// zeta_N(alpha) = sum_{m=2}^{N-2} d(m)^(-alpha), pairwise-summed.
double zeta_sum(int N, double alpha);

/// eps_k for arbitrary real k (not restricted to the grid).
double dispersion(const ModelParams& p, double k);

/// Validates parameters, builds the grid, the Bogoliubov rotation, the
/// coupling kernel and every Hamiltonian coefficient. Throws
/// std::invalid_argument on a bad parameter set.
Model build_model(const ModelParams& p);

/// Same chain with (h, Jx) -> (-h, -Jx). The rotation angles are unchanged
/// and the dispersion flips sign; used by the particle-hole flow.
ModelParams mirror_params(const ModelParams& p);

namespace detail {
/// Shared by b_coeff and the real-space correlator: the quartic shape
/// coefficients with a caller-chosen kernel lookup and overall prefactor.
struct QuarticKernel {
  const BogoliubovTable* bog;
  double prefactor;  ///< Jz/(2N) for H, 1/N^2 for the zz correlator
  /// kern(qi, qj_negated_flag...) lookups are supplied as c12 and c1m3:
  /// c12 = kernel(k1 - k2), c1m3 = kernel(k1 + k3).
  cd eval(QuarticType t, int q1, int q2, int q3, int q4, double c12,
          double c1m3) const;
};

/// Slot layout of the five quartic shapes, in the written operator order.
/// kSlotCreation: creator (true) or annihilator. kSlotNeg: the slot's grid
/// momentum is the negative of the tuple momentum at that position.
inline constexpr bool kSlotCreation[5][4] = {
    {false, false, false, false},  // eta_{-k1} eta_{k2} eta_{-k3} eta_{k4}
    {true, false, false, false},   // eta+_{k1} eta_{k2} eta_{-k3} eta_{k4}
    {true, true, false, false},    // eta+_{k1} eta+_{-k2} eta_{-k3} eta_{k4}
    {true, true, true, false},     // eta+_{k1} eta+_{-k2} eta+_{k3} eta_{k4}
    {true, true, true, true},      // eta+_{k1} eta+_{-k2} eta+_{k3} eta+_{-k4}
};
inline constexpr bool kSlotNeg[5][4] = {
    {true, false, true, false},
    {false, false, true, false},
    {false, true, true, false},
    {false, true, false, false},
    {false, true, false, true},
};

/// Assembles the quadratic coefficients (constant term, pair terms, number
/// terms) for a caller-chosen kernel lookup. The Hamiltonian uses
/// kern = c, zeta = zeta_N(alpha), coupling = Jz and keeps the dispersion;
/// the zz-correlator substitutes kern = gamma(m), zeta = 1, coupling = 2/N
/// (the correlator prefactor 2/(Jz*N) cancels the Jz in front of every
/// kernel-dependent piece) and drops the dispersion.
struct CoeffBuilder {
  const BogoliubovTable* bog = nullptr;
  double coupling = 0.0;  ///< multiplies every kernel-dependent piece
  double zeta = 0.0;      ///< uniform part of the kernel
  double Gamma = 0.0;     ///< -1/2 + (1/N) sum_k v_k^2
  std::function<double(int, int)> kern;

  /// Constant term; the free-fermion part -1/2 sum_k eps_k only when asked.
  double h0(bool with_dispersion) const;
  /// Coefficient of eta_{-k} eta_k (purely imaginary).
  cd a1(int q) const;
  /// Coefficient of eta+_k eta_k; eps_q added only when asked.
  double a2(int q, bool with_dispersion) const;
};
}  // namespace detail

}  // namespace lke
