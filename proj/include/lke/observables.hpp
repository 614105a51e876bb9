#pragma once

#include <Eigen/Dense>

#include <vector>

#include "lke/basis.hpp"
#include "lke/model.hpp"

namespace lke {

/// Basis positions of the quadratic operators every observable reads:
/// number operators at all grid positions and the annihilate/create pair
/// operators at each positive-momentum representative. Construction throws
/// std::invalid_argument when the truncation lacks any of them.
struct QuadraticIndices {
  std::vector<int> number;  ///< size N, indexed by grid position
  std::vector<int> ann;     ///< size N/2, indexed by q - N/2
  std::vector<int> cre;     ///< size N/2, indexed by q - N/2

  /// <eta_{-k(q)} eta_{k(q)}> at any grid position q.
  cd pair_ann(const Eigen::VectorXcd& X, int q, int N) const;
  /// <eta+_{k(q)} eta+_{-k(q)}> at any grid position q.
  cd pair_cre(const Eigen::VectorXcd& X, int q, int N) const;
};

QuadraticIndices quadratic_indices(const Truncation& trunc);

/// Coefficient tables of <S^z_l S^z_{l+m}>: the quadratic Hamiltonian
/// coefficient formulas with the coupling kernel c replaced by the cosine
/// kernel gamma(m) and the coupling rescaled to 2/N, which cancels Jz. Also
/// carries the contraction vectors of the nearest-neighbour xx correlator.
struct CorrelatorCoeffs {
  const Model* model = nullptr;
  int m = 0;
  double C0 = 0.0;
  std::vector<cd> R_I;       ///< multiplies <eta_{-k} eta_k>
  std::vector<double> R_II;  ///< multiplies <eta+_k eta_k>

  /// Multiplies <eta+_k eta+_{-k}>; equals -R_I.
  cd R_III(int q) const { return -R_I[static_cast<std::size_t>(q)]; }
  /// Quartic shape coefficient: b_coeff with c -> gamma(m), prefactor 1/N^2.
  cd S(QuarticType t, int q1, int q2, int q3, int q4) const;

  /// xx-contraction vectors at grid position q.
  Eigen::Vector2d p(int q) const;     ///< (cos k, sin k)
  Eigen::Vector2d q0(int q) const;    ///< (v^2, -Y_kk)
  Eigen::Vector2d q_I(int q) const;   ///< (Y_kk, -X_kk/2)
  Eigen::Vector2d q_II(int q) const;  ///< (X_kk, 2 Y_kk)
};

CorrelatorCoeffs correlator_coeffs(const Model& model, int m);

/// <S^z_l> from a kinetic-state vector. The imaginary residue of the
/// momentum sum, a consistency diagnostic that stays small along valid
/// trajectories, is written to *imag_residue when given.
double spin_z(const Eigen::VectorXcd& X, const Truncation& trunc,
              const Model& model, double* imag_residue = nullptr);

/// Closed form of <S^z_l> in the one-pair initial state.
double spin_z_psi1_closed_form(const Model& model);

/// Connected correlator <S^z_l S^z_{l+m}> - <S^z_l>^2. Requires every
/// degree-4 paired operator (a truncation containing T4); m must lie in
/// [-N/2, N/2] and the result is symmetric under m -> -m.
double corr_zz(const Eigen::VectorXcd& X, const Truncation& trunc,
               const Model& model, int m);

/// Nearest-neighbour correlator <S^x_l S^x_{l+1}>.
double corr_xx_nn(const Eigen::VectorXcd& X, const Truncation& trunc,
                  const Model& model, double* imag_residue = nullptr);

/// Coefficient vector w of the projected Hamiltonian: <H> = Re(w . X).
/// Monomials outside the basis are dropped and counted in *dropped when given.
/// On a basis containing T4 the drops are quartic terms whose momenta do not
/// pair up; those have zero expectation in pair-sector states, so <H> stays
/// exact for every state this library prepares.
Eigen::VectorXcd hamiltonian_projection(const Model& model,
                                        const Truncation& trunc,
                                        bool quadratic_only = false,
                                        long long* dropped = nullptr);

/// Second-order high-temperature expansion of the energy density and <S^z>.
struct ThermalExpansion {
  double K1 = 0.0;  ///< quadratic trace moment, positive
  double K2 = 0.0;  ///< cubic trace moment contribution
  double h = 0.0;
  double Jz_zeta = 0.0;  ///< Jz * zeta_N(alpha)

  double energy_density(double beta) const {
    return -K1 * beta - K2 * beta * beta;
  }
  double spin_z(double beta) const {
    return -h / 4.0 * beta + h * Jz_zeta / 16.0 * beta * beta;
  }
};

ThermalExpansion thermal_expansion(const Model& model);

struct Timescales {
  double tau = 0.0;       ///< relaxation estimate N / sum_k |eps_k|
  double tau_trav = 0.0;  ///< traversal estimate N / |Jx| (inf when Jx = 0)
};

Timescales timescales(const Model& model);

}  // namespace lke
