#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "lke/algebra.hpp"
#include "lke/basis.hpp"
#include "lke/model.hpp"

namespace lke {

enum class HamiltonianMode { Full, QuadraticOnly };

/// Linear differential system X' = D X over a truncation basis.  Row i of D
/// is the projection onto the basis of -i [O_i, H], normal ordered; terms
/// whose canonical key falls outside the basis are dropped and counted.
struct KineticSystem {
    Truncation trunc;
    Eigen::SparseMatrix<cd, Eigen::RowMajor> D;
    HamiltonianMode mode = HamiltonianMode::Full;
    long long dropped_terms = 0;     ///< enumerated commutator terms projected away
    bool degree_skip_active = false; ///< over-degree terms were skipped before enumeration
};

struct TrajectoryConfig {
    double t_max = 30.0;
    double dt = 0.01;
    int sample_every = 10;      ///< steps between samples (t = 0 and t_max always sampled)
    bool halving_check = false; ///< co-integrate at dt/2 and compare at sample times

    bool operator==(const TrajectoryConfig&) const = default;
};

/// The sample instants evolve() visits for this configuration, so reference
/// trajectories can be computed on the identical grid.
std::vector<double> sample_times(const TrajectoryConfig& cfg);

struct EvolveStats {
    bool aborted = false;            ///< norm blow-up stopped the integration
    std::string message;
    double final_time = 0.0;
    double halving_residual = 0.0;   ///< max over samples of |X_dt - X_dt/2|_inf
    bool halving_warning = false;    ///< residual reached 1e-8
};

/// The Hamiltonian as an explicit normal-ordered polynomial: the constant,
/// the three quadratic coefficients per momentum, and (unless quadratic_only)
/// every momentum-conserving quartic term.  Quartic assembly enumerates N^3
/// tuples per shape; meant for small N in tests and cross-checks.
Polynomial hamiltonian_polynomial(const Model& model, bool quadratic_only = false);

/// Builds the generator row by row.  In QuadraticOnly mode the quartic terms
/// of H are omitted, which makes the projection exact for degree-closed bases.
/// Rows are independent of each other; the build is deterministic.  Throws
/// std::length_error when the enumeration-size estimate exceeds the budget.
KineticSystem build_generator(const Model& model, const Truncation& trunc, HamiltonianMode mode);

/// Classical fixed-step 4th-order Runge-Kutta integration of X' = D X.
/// on_sample(t, X) is called at t = 0, every sample_every-th step, and the
/// final step.  Integration aborts (stats.aborted) when |X|_2 exceeds ten
/// times its initial value.  Requires X0[identity] = 1.
EvolveStats evolve(const KineticSystem& sys, const Eigen::VectorXcd& X0,
                   const TrajectoryConfig& cfg,
                   const std::function<void(double, const Eigen::VectorXcd&)>& on_sample);

/// max over the half zone of |<n_k> - <n_-k>|, which vanishes for pair-sector
/// trajectories.  Throws if the basis lacks the number operators.
double paired_momentum_residual(const Truncation& trunc, const Eigen::VectorXcd& X);

}  // namespace lke
