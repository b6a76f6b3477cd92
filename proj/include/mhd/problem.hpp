#ifndef MHD_PROBLEM_HPP
#define MHD_PROBLEM_HPP

#include <functional>
#include <stdexcept>

#include "mhd/mesh.hpp"
#include "mhd/space.hpp"

namespace mhd {

// Coefficients of the incompressible visco-resistive model: fluid Reynolds
// number Re, magnetic Reynolds number Rm, coupling number s.  The magnetic
// blocks carry alpha = s/Rm.  s = 0 is allowed and decouples the Lorentz
// force (the induction/Ohm rows are then assembled in unit-scaled form).
struct ProblemParams {
  double Re = 1.0;
  double Rm = 1.0;
  double s = 1.0;

  double alpha() const { return s / Rm; }
  void validate() const {
    if (!(Re > 0.0) || !(Rm > 0.0) || !(s >= 0.0))
      throw std::invalid_argument("ProblemParams: need Re > 0, Rm > 0, s >= 0");
  }
};

struct TimeConfig {
  double k = 0.0;  // step size
  double T = 0.0;  // final time; T = 0 runs zero steps
  int steps() const {
    if (!(k > 0.0) || !(T >= 0.0))
      throw std::invalid_argument("TimeConfig: need k > 0 and T >= 0");
    const int n = static_cast<int>(std::round(T / k));
    if (std::abs(n * k - T) > 1.0e-9 * std::max(T, k))
      throw std::invalid_argument("TimeConfig: T must be an integer multiple of k");
    return n;
  }
};

// Lambdas bound to these aliases must produce a plain Eigen::Vector3d (spell
// the return type out or .eval()); a deduced Eigen expression-template return
// would reference temporaries that die before std::function converts it.
using TimeVecFn = std::function<Eigen::Vector3d(double, const Eigen::Vector3d&)>;
using TimeScalarFn = std::function<double(double, const Eigen::Vector3d&)>;
using TimeMatFn = std::function<Eigen::Matrix3d(double, const Eigen::Vector3d&)>;

// Manufactured right-hand sides; null members mean zero.  The Ohm row takes
// the functional s*(ohm_j, F) - alpha*(ohm_B, curl F).
struct SourceSet {
  TimeVecFn momentum;
  TimeVecFn induction;
  TimeVecFn ohm_j;
  TimeVecFn ohm_B;
};

// Essential data: velocity on boundary nodes, tangential electric trace on
// boundary edges, normal magnetic flux on boundary faces.  Null = zero.
struct BoundaryConditions {
  TimeVecFn velocity;
  TimeVecFn magnetic;
  TimeVecFn electric;
};

// Mesh plus the four spaces of the scheme.  Non-movable: spaces point at mesh.
struct Discretization {
  Mesh mesh;
  FeSpace velocity;
  FeSpace pressure;
  FeSpace magnetic;
  FeSpace electric;

  explicit Discretization(Mesh m)
      : mesh(std::move(m)),
        velocity(build_space(mesh, SpaceKind::VelocityP2)),
        pressure(build_space(mesh, SpaceKind::PressureP1)),
        magnetic(build_space(mesh, SpaceKind::MagneticRT0)),
        electric(build_space(mesh, SpaceKind::ElectricN0)) {}
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;
};

// Discrete state at one time level.  B_ohm is the magnetic field that was
// paired with E in the Ohm law of the final linear solve producing this state
// (the previous level for the linearized scheme, the last inner iterate for
// the nonlinear scheme); j = E + u x B_ohm is the current the energy law
// accounts for exactly.
struct State {
  double t = 0.0;
  Field u, B, E, p;
  Field B_ohm;
};

}  // namespace mhd

#endif
