#pragma once

#include <string>
#include <vector>

#include "lke/kinetics.hpp"
#include "lke/model.hpp"

namespace lke {

/// Everything one invocation needs. Modes: "evolve" (kinetic trajectory),
/// "ed" (exact reference trajectory), "benchmark" (kinetic vs exact accuracy
/// table over several truncations), "thermal" (high-temperature baselines),
/// "correlate" (kinetic trajectory plus the zz-correlator separation scan).
struct RunConfig {
  std::string mode = "evolve";
  ModelParams model{8, -1.0, -1.0, -0.1, 3.0};
  std::string truncation = "T4";
  /// "psi:<n>", "chi:<n>", "vacuum", or
  /// "superposition:<re1>,<im1>,<re2>,<im2>:<n>".
  std::string state = "psi:1";
  /// Evolve the field-reversed chain and map the observables back; the
  /// accurate way to propagate an up-polarized (chi) state.
  bool particle_hole = false;
  TrajectoryConfig traj;
  bool quadratic_only = false;  ///< drop the quartic Hamiltonian terms
  std::vector<std::string> observables{"sz"};  ///< sz | cx1 | czz | energy
  std::vector<int> czz_m;  ///< separations for czz; empty means 0..N/2
  std::vector<double> beta_grid;  ///< thermal mode; empty means -2..2 step 0.05
  std::vector<std::string> benchmark_truncations;  ///< empty means the six-scheme set
  std::string output = "run.csv";
  std::string metadata;  ///< sidecar path; empty means output + ".meta.json"
  int workers = 1;  ///< reserved; results must not depend on it

  bool operator==(const RunConfig&) const = default;
};

/// Parses a flat JSON object into a RunConfig; unknown keys and wrong types
/// throw std::invalid_argument. parse_config(serialize_config(c)) == c.
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFeasibility = 3;
inline constexpr int kExitNumerical = 4;

/// Executes the configured run, writing the CSV and the metadata sidecar.
/// Returns kExitOk or the matching nonzero code; failure details go to
/// stderr (and to the sidecar when the run got far enough to produce one).
int run(const RunConfig& config);

}  // namespace lke
