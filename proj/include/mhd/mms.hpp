#ifndef MHD_MMS_HPP
#define MHD_MMS_HPP

#include <Eigen/Dense>

#include "mhd/problem.hpp"

namespace mhd {

// Closed-form smooth benchmark solution on the unit cube used by the
// convergence, energy, and acceptance drivers:
//
//   u = (e^t cos y, 0, 0)        E = (0, cos x, 0)
//   B = (0, 0, e^t cos x)        p = -x cos y
//
// u and B are divergence free, u vanishes nowhere (so the boundary data are
// inhomogeneous), and j = E + u x B differs from curl B / Rm, which is why
// the Ohm row needs its own right-hand side.  All derivatives below are
// exact closed forms, not finite differences.
struct ExactSolution {
  TimeVecFn u;
  TimeVecFn B;
  TimeVecFn E;
  TimeVecFn j;    // E + u x B
  TimeVecFn u_t;  // time derivative of u
  TimeVecFn B_t;  // time derivative of B
  TimeScalarFn p;
  // Velocity Jacobian, (grad u)(r, c) = d u_r / d x_c.
  TimeMatFn grad_u;
  TimeVecFn curl_E;
};

ExactSolution exact_solution();

// Right-hand sides that make the exact solution solve the coupled system for
// the given coefficients:
//   momentum  f = u_t + (u.grad)u - (1/Re) lap u - s j x B + grad p
//   induction g = B_t + curl E
//   Ohm       (ohm_j, ohm_B) = (j, B), driving s*(j,F) - alpha*(B, curl F)
SourceSet manufactured_sources(const ProblemParams& pp);

// Essential boundary data of the exact solution (velocity trace, tangential
// electric trace; the magnetic trace is provided for completeness but the
// stepper never imposes it).
BoundaryConditions manufactured_bcs();

}  // namespace mhd

#endif
