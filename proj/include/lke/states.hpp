#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lke/algebra.hpp"
#include "lke/basis.hpp"
#include "lke/model.hpp"
#include "lke/series.hpp"
#include "lke/util.hpp"

namespace lke {

enum class Flavor { Down, Up };

/// Truncated polarized state with at most n Bogoliubov pair excitations:
///   |psi^n> = W_n^-1 sum_{|S| <= n} prod_{k in S} (-i v_k/u_k) eta+_{-k} eta+_k |0>
/// over subsets S of the positive-momentum half zone (flavor Down).  Flavor Up
/// is its particle-hole image |chi^n>.  W and L capture the model dependence:
/// L[s-1] is the degree-s elementary symmetric polynomial of (v_k/u_k)^2 and
/// W^2 = 1 + sum_s L[s-1].
struct PolarizedState {
    int N = 0;
    int n = 0;
    Flavor flavor = Flavor::Down;
    double W = 1.0;
    std::vector<double> L;
};

/// Two-branch superposition y1 |psi^n> + y2 |chi^n> with |y1|^2 + |y2|^2 = 1.
struct SuperpositionSpec {
    cd y1{1.0, 0.0};
    cd y2{0.0, 0.0};
    int n = 1;
};

/// Throws std::invalid_argument unless n is in [0, N/2].  n = 0 is the
/// Bogoliubov vacuum (Down) or the fully occupied state (Up).
PolarizedState make_polarized_state(const Model& model, int n, Flavor flavor);

/// <state| O |state> for a canonical monomial O, evaluated mode by mode in
/// the pair representation; costs O(N * n) per call, no Fock vectors.
cd state_expectation(const Model& model, const PolarizedState& state, const MonoKey& key);

/// X0[i] = <state| O_i |state> over the whole truncation basis.
Eigen::VectorXcd initial_vector(const PolarizedState& state, const Truncation& trunc,
                                const Model& model);

/// Quasiparticle density <D> = (1/N) sum_k <eta+_k eta_k>; the Up flavor is
/// the hole image, 1 minus the Down value.
double fermion_density(const PolarizedState& state);

/// Smallest level n whose density has converged: first n >= 1 with
/// |<D>_n - <D>_{n-1}| < tol, or N/2 if none has.
int polarized_level(const Model& model, double tol = 1e-3);

/// Field-reversed chain (h, Jx) -> (-h, -Jx), the frame in which the Up
/// flavor evolves as a Down state; S^z maps to -S^z.  Warns on stderr when
/// used outside the validated regime 2|h| > |Jx|.
ModelParams particle_hole(const ModelParams& p);

/// Superposition trajectory assembled from the two decoupled branches:
///   out(t) = initial_value + |y1|^2 (down(t) - down(0))
///                          - |y2|^2 (mirror(t) - mirror(0)),
/// where series_mirror is the Down trajectory under the field-reversed chain.
/// Operates on the "Sz" column (or the sole column) of both inputs; throws on
/// mismatched time grids.
TimeSeries decoupled_superposition(const SuperpositionSpec& spec, const TimeSeries& series_down,
                                   const TimeSeries& series_mirror, double initial_value);

/// Energy density <H>/N in closed form.  Supported levels: n = 0, n = 1
/// (either flavor) and n = N/2; throws for anything else.
double energy_density(const Model& model, const PolarizedState& state);

/// Superposition energy density.  Branches at n = 1 need N > 8 (the cross
/// term <chi^1|H|psi^1> vanishes only there); n = N/2 works for every N.
double energy_density(const Model& model, const SuperpositionSpec& spec);

}  // namespace lke
