#ifndef MHD_ASSEMBLY_HPP
#define MHD_ASSEMBLY_HPP

#include <map>
#include <memory>

#include "mhd/csr.hpp"
#include "mhd/problem.hpp"
#include "mhd/quadrature.hpp"

namespace mhd {

// Unsigned coupling patterns; the step system applies the scheme's signs and
// coefficients.  B_given (the frozen magnetic field of the current
// linearization) enters ExB_v, UxBxB_v and UxB_F pointwise per cell.
enum class Coupling {
  ExB_v,     // ((E x B_given), v)        rows velocity, cols electric
  UxBxB_v,   // (((u x B_given) x B_given), v)  rows velocity, cols velocity
  UxB_F,     // ((u x B_given), F)        rows electric, cols velocity
  E_F,       // (E, F)                    electric mass
  CurlE_C,   // (curl E, C)               rows magnetic, cols electric
  B_CurlF,   // (B, curl F)               rows electric, cols magnetic
};

// Monolithic unknown layout [u | B | E | p | lambda]; lambda is the scalar
// multiplier enforcing the zero pressure mean.
struct SystemLayout {
  int n_u = 0, n_B = 0, n_E = 0, n_p = 0;
  int off_u = 0, off_B = 0, off_E = 0, off_p = 0, off_lambda = 0;
  int size = 0;
};

struct BlockSystem {
  SystemLayout layout;
  CsrMatrix A;
  Eigen::VectorXd rhs;
  std::vector<char> constrained;  // size entries, 1 where Dirichlet
  Eigen::VectorXd bc_values;      // value for constrained dofs, 0 elsewhere
};

// Symmetric row/column elimination with right-hand-side lifting; constrained
// rows become identity rows carrying the boundary value.
void apply_constraints(CsrMatrix& A, Eigen::VectorXd& rhs,
                       const std::vector<char>& constrained,
                       const Eigen::VectorXd& values);

// Signed face-edge incidence matrix: the coefficients of the curl of an edge
// field as a face field (the discrete curl).  Row f has entries +1, -1, +1 on
// the edges (i,j), (i,k), (j,k) of the ascending face (i,j,k).
CsrMatrix curl_incidence(const Mesh& mesh);

// Cell-loop assembly over the discretization.  The parallel flag selects the
// OpenMP cell loop; the serial loop is the bit-deterministic reference (fixed
// cell order, fixed accumulation order).
class Assembler {
 public:
  explicit Assembler(const Discretization& disc, bool parallel = true);
  ~Assembler();

  const Discretization& disc() const { return *disc_; }
  SystemLayout layout() const;

  bool parallel() const { return parallel_; }
  void set_parallel(bool p) { parallel_ = p; }

  CsrMatrix mass(const FeSpace& space, double weight = 1.0) const;
  CsrMatrix stiffness(double weight = 1.0) const;       // velocity grad:grad
  CsrMatrix convection(const Field& advector) const;    // skew transport form
  CsrMatrix divergence() const;                         // rows pressure: (div u, q)
  CsrMatrix cross_coupling(Coupling which, const Field* B_given = nullptr) const;

  Eigen::VectorXd load_velocity(const TimeVecFn& f, double t) const;
  Eigen::VectorXd load_magnetic(const TimeVecFn& g, double t) const;
  // s*(j_ex, F) - alpha*(B_ex, curl F)
  Eigen::VectorXd load_ohm(const TimeVecFn& j_ex, const TimeVecFn& B_ex,
                           double s, double alpha, double t) const;
  Eigen::VectorXd pressure_mean_vector() const;

  // One backward-Euler step system about the linearization point
  // (advector, B_lag); time-derivative terms use prev.  Rows:
  //   momentum:   (1/k)(u,v) + c(adv,u,v) + (1/Re)(grad u,grad v)
  //               - s((E + u x B_lag) x B_lag, v) - (p, div v) = (f,v) + (1/k)(u_prev,v)
  //   induction:  aF*[(1/k)(B,C) + (curl E,C)] = aF*[(1/k)(B_prev,C) + (g,C)]
  //   Ohm:        aO*[(E,F) + (u x B_lag,F) - (1/Rm)(B,curl F)] = aO*l3(F)/s
  //   divergence: -(div u, q) + lambda*(1,q) = 0
  //   zero mean:  (p, 1) = 0
  // with aF = alpha, aO = s when s > 0; both rows unit-scaled when s = 0.
  // Essential constraints cover the velocity trace and the tangential
  // electric trace only; the magnetic unknown stays free so the induction row
  // determines it exactly (coefficient-level elimination identity).
  BlockSystem step_system(const State& prev, const Field& advector, const Field& B_lag,
                          const ProblemParams& pp, double k, const SourceSet& src,
                          double t_new, const BoundaryConditions& bc) const;

  struct Cache;  // internal tables and sparsity skeletons, one per assembler

 private:
  const Discretization* disc_;
  bool parallel_;
  std::unique_ptr<Cache> cache_;
};

}  // namespace mhd

#endif
