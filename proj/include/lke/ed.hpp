#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lke/algebra.hpp"
#include "lke/model.hpp"
#include "lke/series.hpp"

// Exact reference calculations in the 2^N spin/fermion Fock space.  Basis
// states are bitstrings b in [0, 2^N): bit (l-1) set means site l carries an
// up spin, equivalently an occupied Jordan-Wigner fermion mode.  All fermion
// operators act through the string convention S+_l = exp(-i pi sum_{j<l} n_j)
// mu+_l, so mu_l picks up (-1)^(number of occupied sites below l).
namespace lke::ed {

// Bitstrings of the requested fermion parity (popcount mod 2), ascending.
std::vector<int> parity_block_states(int N, int parity);

// Dense spin Hamiltonian restricted to the given basis states (real symmetric;
// spin-flip terms preserve parity, so parity blocks are exact).
Eigen::MatrixXd spin_hamiltonian_block(const Model& model, const std::vector<int>& states);
Eigen::MatrixXd spin_hamiltonian_full(const Model& model);

// Fermionic Hamiltonian built from Jordan-Wigner operators with the
// antiperiodic boundary mu_{N+1} = -mu_1 of the even-parity sector; equals the
// spin Hamiltonian on that sector only.
Eigen::MatrixXcd fermion_hamiltonian_full(const Model& model);

// Applies mu_l / mu+_l (site l in [1, N]) or the Fourier mode
// mutilde_{k(q)} = N^{-1/2} sum_l exp(-i k l) mu_l, or the Bogoliubov mode
// eta_{k(q)} = u mutilde_k + i v mutilde+_{-k}, to a full Fock vector.
Eigen::VectorXcd apply_mu(int N, int l, bool dagger, const Eigen::VectorXcd& in);
Eigen::VectorXcd apply_mu_tilde(const Model& model, int q, bool dagger, const Eigen::VectorXcd& in);
Eigen::VectorXcd apply_eta(const Model& model, int q, bool dagger, const Eigen::VectorXcd& in);

// Canonical monomial applied right-to-left; expectation of a polynomial.
Eigen::VectorXcd apply_monomial(const Model& model, const MonoKey& key, const Eigen::VectorXcd& in);
cd expectation(const Model& model, const Polynomial& op, const Eigen::VectorXcd& state);

// Dense operator matrices for small N (guarded at N <= 10); the oracle side of
// the symbolic-vs-matrix algebra checks.
Eigen::MatrixXcd eta_matrix(const Model& model, int q, bool dagger);
Eigen::MatrixXcd monomial_matrix(const Model& model, const MonoKey& key);
Eigen::MatrixXcd polynomial_matrix(const Model& model, const Polynomial& op);

// Bogoliubov vacuum of the even sector, prod_{k>0}(u_k - i v_k
// mutilde+_k mutilde+_{-k})|no fermions>, and the truncated polarized states
// built on top of it.  chi^n is the particle-hole image U |psi^n> of the
// field-reversed model's psi^n.
Eigen::VectorXcd bogoliubov_vacuum(const Model& model);
Eigen::VectorXcd psi_state_fock(const Model& model, int n);
Eigen::VectorXcd chi_state_fock(const Model& model, int n);

// Particle-hole unitary: U|b> = (-1)^(sum of set bit positions) |~b>,
// which realizes U mu_l U^dag = mu+_l.
Eigen::VectorXcd particle_hole_apply(const Eigen::VectorXcd& in);

// Exact unitary evolution of an even-parity initial state by full spectral
// decomposition of the even block.  Columns: "Sz" (site-averaged <S^z_l>),
// "Czm_<m>" for each requested distance (connected zz correlator, site
// averaged), "Cx1" (site-averaged <S^x_l S^x_{l+1}>), "energy".
struct EdObservables {
    bool spin_z = true;
    std::vector<int> czm;
    bool cx1 = false;
    bool energy = false;
};
TimeSeries ed_evolve(const Model& model, const Eigen::VectorXcd& init,
                     const std::vector<double>& times, const EdObservables& obs = {});

// Exact evolution under the quadratic part of the transformed Hamiltonian,
// performed on the pair-occupation basis (subsets of the positive half-zone;
// that subspace is invariant because the quadratic Hamiltonian only counts or
// creates/destroys (k, -k) pairs).  Initial state psi^n.  Column "Sz".
TimeSeries quadratic_pair_oracle(const Model& model, int n, const std::vector<double>& times);

// Thermal traces.  Eigenvalues are enough for the energy density; the spin
// expectation additionally needs eigenvectors (restricted to N <= 10).
struct ThermalEd {
    Eigen::VectorXd evals;          // full spectrum, both parity blocks
    Eigen::VectorXd sz_eigenbasis;  // diagonal of site-averaged S^z, empty if not built
    int N = 0;
};
ThermalEd thermal_build(const Model& model, bool with_spin_z);
double thermal_energy_density(const ThermalEd& th, double beta);
double thermal_spin_z(const ThermalEd& th, double beta);

// Bisection for the inverse temperature whose thermal energy density matches
// the target (the map is strictly decreasing); |mismatch| < 1e-8.
double match_beta(const ThermalEd& th, double target_energy_density);

// Linear fit of beta(N) in 1/N over the given (N, beta) samples, evaluated at
// 1/N -> 0.
double extrapolate_beta(const std::vector<std::pair<int, double>>& samples);

// Time-integrated relative deviation between two sampled trajectories on a
// common grid: Delta(t) = sqrt(int_0^t |a-b|^2 du / (1 + int_0^t b^2 du)),
// trapezoid quadrature.
std::vector<double> accuracy_metric(const std::vector<double>& t, const std::vector<double>& lke,
                                    const std::vector<double>& ed);

}  // namespace lke::ed
