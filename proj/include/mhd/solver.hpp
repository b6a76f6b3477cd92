#ifndef MHD_SOLVER_HPP
#define MHD_SOLVER_HPP

#include <memory>
#include <stdexcept>
#include <string>

#include "mhd/csr.hpp"

namespace mhd {

enum class SolveMethod { SparseLU, Gmres };

struct SolveStats {
  SolveMethod method = SolveMethod::SparseLU;
  int iterations = 0;          // GMRES iterations or refinement steps
  double rel_residual = 0.0;   // recomputed independently via CSR spmv
  double rhs_norm = 0.0;
};

struct SolverError : std::runtime_error {
  SolveStats stats;
  SolverError(const std::string& msg, SolveStats s) : std::runtime_error(msg), stats(s) {}
};

// Direct or iterative solve with an independent residual check: the reported
// residual is recomputed with our own spmv, never taken from the backend.
// Solves with recomputed relative residual above tol throw SolverError.
class LinearSolver {
 public:
  explicit LinearSolver(SolveMethod method = SolveMethod::SparseLU, double tol = 1e-10);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  // The sparsity pattern is analyzed on first use and reused while the
  // pattern stays fixed; values may change between calls.
  Eigen::VectorXd solve(const CsrMatrix& A, const Eigen::VectorXd& b, SolveStats* stats = nullptr);

  double tol() const { return tol_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SolveMethod method_;
  double tol_;
};

// One-shot convenience wrapper.
Eigen::VectorXd solve(const CsrMatrix& A, const Eigen::VectorXd& b,
                      SolveMethod method = SolveMethod::SparseLU, double tol = 1e-10,
                      SolveStats* stats = nullptr);

}  // namespace mhd

#endif
