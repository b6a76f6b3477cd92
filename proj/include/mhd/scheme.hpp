#ifndef MHD_SCHEME_HPP
#define MHD_SCHEME_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mhd/analysis.hpp"
#include "mhd/assembly.hpp"
#include "mhd/problem.hpp"
#include "mhd/solver.hpp"

namespace mhd {

// Linearized: one solve per step, convection advector and every magnetic
// coupling lagged to the previous time level.  Picard: inner fixed-point
// loop per step, lagging the previous inner iterate instead.
enum class SchemeKind { Linearized, Picard };

struct StepperOptions {
  SchemeKind scheme = SchemeKind::Picard;
  SolveMethod method = SolveMethod::SparseLU;
  double solver_tol = 1e-10;
  double picard_tol = 1e-10;
  int picard_max_iter = 30;
  bool parallel = true;
  // Post-step structure assertions; violations throw StructureError.
  bool check_structure = true;
  double faraday_tol = 1e-10;   // max-abs coefficient defect of the B update
  double div_row_tol = 1e-9;    // max-abs residual of divergence + mean rows
  // Re-assemble the converged Picard system and verify its residual.
  bool check_picard_residual = true;
};

struct StepReport {
  double t = 0.0;
  int picard_iters = 1;             // linear solves taken (1 for linearized)
  std::vector<double> increments;   // Picard increment norms, one per solve
  double nonlinear_residual = 0.0;  // Picard: relative residual of the converged system
  SolveStats solve;                 // stats of the last linear solve
  double faraday_error = 0.0;       // max-abs of B^n - B^{n-1} + k curl E^n - k P g
  double div_row_residual = 0.0;    // max-abs residual of divergence and mean rows
  double p_mean = 0.0;              // integral of the new pressure
  double divB_l2 = 0.0;
  double divB_max = 0.0;
  double energy = 0.0;              // |u|^2 + alpha |B|^2
};

// Inner iteration ran out of budget (or the converged state failed the
// nonlinear residual check); carries the increment history.
struct PicardFailure : std::runtime_error {
  std::vector<double> increments;
  PicardFailure(const std::string& msg, std::vector<double> inc)
      : std::runtime_error(msg), increments(std::move(inc)) {}
};

// A post-step structure assertion (Faraday update identity, divergence row,
// pressure mean) exceeded its tolerance.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunReport {
  enum class FailureKind { None, Solver, Picard, Structure };
  std::vector<StepReport> steps;   // one per completed step
  std::vector<State> trajectory;   // initial + each state, when requested
  State final_state;               // last completed state
  bool completed = true;
  FailureKind failure_kind = FailureKind::None;
  std::string failure;             // empty when completed
};

// Drives either scheme on one discretization.  Each step solves the coupled
// monolithic system; afterwards the update B^n = B^{n-1} - k curl E^n + k P g
// (P = face-space L2 projection, curl = signed incidence applied to edge
// coefficients) is asserted coefficient-wise, which is what keeps the
// cellwise divergence of B invariant when g is divergence free.
class Stepper {
 public:
  Stepper(const Discretization& disc, ProblemParams pp, StepperOptions opt = {});

  // Canonical interpolants of the data at time t0; p = 0, B_ohm = B.
  State initial_state(const TimeVecFn& u0, const TimeVecFn& B0, const TimeVecFn& E0,
                      double t0 = 0.0) const;

  // One time step of the configured scheme.  Throws SolverError,
  // PicardFailure, or StructureError; on success optionally fills *report.
  State step(const State& prev, double k, const SourceSet& src, const BoundaryConditions& bc,
             StepReport* report = nullptr);

  // N = T/k sequential steps.  Failures stop the run and are recorded in the
  // (partial) report instead of propagating.
  RunReport run(const State& initial, const TimeConfig& tc, const SourceSet& src,
                const BoundaryConditions& bc, bool keep_trajectory = false);

  const StepperOptions& options() const { return opt_; }
  Analyzer& analyzer() { return analyzer_; }

 private:
  State unpack(const SystemLayout& layout, const Eigen::VectorXd& x, double t) const;
  void structure_report(const State& prev, State& cur, double k, const SourceSet& src,
                        const BlockSystem& sys, const Eigen::VectorXd& x, StepReport& rep);

  const Discretization* disc_;
  ProblemParams pp_;
  StepperOptions opt_;
  Assembler asm_;
  Analyzer analyzer_;
  LinearSolver solver_;
  LinearSolver mass_solver_;
  CsrMatrix curl_inc_;
  CsrMatrix mass_B_;
  Eigen::VectorXd mean_vec_;
};

}  // namespace mhd

#endif
