#ifndef MHD_EXPERIMENTS_HPP
#define MHD_EXPERIMENTS_HPP

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "mhd/config.hpp"

namespace mhd {

// One CSV row.  For sweeps, `refinement` is the mesh division count (h-sweep)
// or the per-level step count T/k (k-sweep) and each row is one solve level;
// for the energy and gauss drivers each row is one time step and `refinement`
// is the step index.  Quantities that do not apply to a row are NaN.
struct LevelRow {
  int refinement = 0;
  double h = 0.0;
  double k = 0.0;
  double err_u = std::numeric_limits<double>::quiet_NaN();
  double err_B = std::numeric_limits<double>::quiet_NaN();
  double err_E = std::numeric_limits<double>::quiet_NaN();
  double err_p = std::numeric_limits<double>::quiet_NaN();
  double rate_u = std::numeric_limits<double>::quiet_NaN();
  double rate_B = std::numeric_limits<double>::quiet_NaN();
  double rate_E = std::numeric_limits<double>::quiet_NaN();
  double rate_p = std::numeric_limits<double>::quiet_NaN();
  double divB_max = std::numeric_limits<double>::quiet_NaN();
  double energy_margin = std::numeric_limits<double>::quiet_NaN();
  int picard_iters_max = 0;
  double solve_residual_max = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  std::vector<LevelRow> rows;
  bool pass = true;    // property verdict (energy/gauss) or run completion (sweeps)
  std::string note;    // one-paragraph human-readable summary
  RunReport::FailureKind failure_kind = RunReport::FailureKind::None;
};

// Manufactured-solution forced run on the configured mesh; one row with the
// starred errors against the exact fields.
ExperimentResult run_single(const RunConfig& cfg);

// Manufactured-solution runs on a doubling mesh family ending at
// cfg.divisions, fixed k; per-level starred errors and pairwise rates.
ExperimentResult run_sweep_h(const RunConfig& cfg);

// Manufactured-solution runs on the fixed mesh with k halving from cfg.k.
// vs_exact = true measures against the exact fields; false measures against
// a trajectory computed at one quarter of the finest swept step, sampled at
// matching times, which isolates the time error once the spatial error floor
// dominates.
ExperimentResult run_sweep_k(const RunConfig& cfg, bool vs_exact);

// Source-free decay from smooth built-in initial data; one row per step with
// the per-step energy margin.  Passes when the discrete energy never
// increases and every accumulated margin is >= -1e-9 times the initial
// energy.
ExperimentResult run_energy(const RunConfig& cfg);

// Source-free induction from a divergence-free interpolated initial field;
// one row per step with the max cell-wise |div B|.  Passes when the column
// stays at its initial value to 1e-11 and never exceeds 1e-11.
ExperimentResult run_gauss(const RunConfig& cfg);

// Assembly-vs-dense-oracle equivalence on small meshes, algebraic structure
// (skew transport, coupling adjointness), discrete curl inclusion, and
// quadrature exactness.  Logs one line per check; returns overall verdict.
bool run_selftest(std::ostream& log);

// CSV serialization in the fixed column schema.  The first line is a
// timestamp comment; everything below it is byte-deterministic for a fixed
// config in single-threaded mode.
std::string csv_text(const ExperimentResult& result, bool with_timestamp = true);
void write_csv(const ExperimentResult& result, const std::string& path);

}  // namespace mhd

#endif
