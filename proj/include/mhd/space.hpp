#ifndef MHD_SPACE_HPP
#define MHD_SPACE_HPP

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "mhd/basis.hpp"
#include "mhd/mesh.hpp"

namespace mhd {

// The four discrete spaces of the scheme.  Velocity is the vector P2 space
// (three interleaved scalar layers, dof = 3*scalar + component); the other
// kinds have one dof per entity of their family.
enum class SpaceKind { VelocityP2, PressureP1, ElectricN0, MagneticRT0 };

// Callables bound here must produce a plain Eigen::Vector3d (explicit return
// type or .eval()), never a deduced Eigen expression template whose operands
// die before the conversion runs.
using VecFn = std::function<Eigen::Vector3d(const Eigen::Vector3d&)>;
using ScalarFn = std::function<double(const Eigen::Vector3d&)>;

struct FeSpace {
  const Mesh* mesh = nullptr;
  SpaceKind kind = SpaceKind::PressureP1;
  Family family = Family::P1;
  int components = 1;
  int n_scalar_dofs = 0;
  int n_dofs = 0;
  int dofs_per_cell = 0;
  std::vector<int> cell_dofs;           // [cell*dofs_per_cell + local]
  std::vector<signed char> cell_signs;  // matching orientation signs
  std::vector<char> dof_on_boundary;
  std::vector<int> boundary_dofs;

  const int* dofs(int cell) const { return &cell_dofs[cell * dofs_per_cell]; }
  const signed char* signs(int cell) const { return &cell_signs[cell * dofs_per_cell]; }
};

FeSpace build_space(const Mesh& mesh, SpaceKind kind);

struct Field {
  const FeSpace* space = nullptr;
  Eigen::VectorXd coeffs;
};

// Canonical interpolation: nodal evaluation for Lagrange spaces, tangential
// edge integrals for N0, normal face fluxes for RT0.  The vector overload
// requires a vector-valued space and vice versa.
Field interpolate(const FeSpace& space, const VecFn& f);
Field interpolate(const FeSpace& space, const ScalarFn& f);

// Dirichlet data on the boundary dofs: same dof functionals restricted to
// boundary entities.  Pressure has none (zero mean is a constraint, not a
// boundary condition).  Results are sorted by dof index.
std::vector<std::pair<int, double>> boundary_values(const FeSpace& space, const VecFn& f);
std::vector<std::pair<int, double>> boundary_values(
    const FeSpace& space, const std::function<Eigen::Vector3d(double, const Eigen::Vector3d&)>& f,
    double t);

// Pointwise evaluation of a field inside one cell (reference coordinates).
Eigen::Vector3d eval_vector_field(const Field& f, int cell, const Eigen::Vector3d& ref);
double eval_scalar_field(const Field& f, int cell, const Eigen::Vector3d& ref);

}  // namespace mhd

#endif
