#ifndef MHD_BASIS_HPP
#define MHD_BASIS_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "mhd/mesh.hpp"
#include "mhd/quadrature.hpp"

namespace mhd {

// Reference element families on the unit tetrahedron.  Local dof order:
//   P1  - 4 vertices
//   P2  - 4 vertices then 6 edge midpoints (local_edges order)
//   N0  - 6 edges (local_edges order), dof = tangential edge integral
//   RT0 - 4 faces (local_faces order), dof = normal face flux
enum class Family { P1, P2, N0, RT0 };

int family_dof_count(Family f);
bool family_is_vector(Family f);

namespace refbasis {
void p1_values(const Eigen::Vector3d& x, double* out);
void p1_gradients(Eigen::Vector3d* out);
void p2_values(const Eigen::Vector3d& x, double* out);
void p2_gradients(const Eigen::Vector3d& x, Eigen::Vector3d* out);
void n0_values(const Eigen::Vector3d& x, Eigen::Vector3d* out);
void n0_curls(Eigen::Vector3d* out);  // constant per function
void rt0_values(const Eigen::Vector3d& x, Eigen::Vector3d* out);
void rt0_divergences(double* out);  // constant per function

// Reference coordinates of the 10 P2 nodes (vertices then edge midpoints).
const std::array<Eigen::Vector3d, 10>& p2_nodes();
}  // namespace refbasis

// Affine map x = origin + J*xhat of a cell; throws on degenerate geometry.
struct CellGeometry {
  Eigen::Matrix3d J;
  Eigen::Matrix3d Jinv;
  Eigen::Matrix3d JinvT;
  double detJ = 0.0;
  Eigen::Vector3d origin;

  Eigen::Vector3d map(const Eigen::Vector3d& ref) const { return origin + J * ref; }
};
CellGeometry cell_geometry(const Mesh& mesh, int cell);

// Piola push-forwards.  Lagrange values are invariant; gradients map
// covariantly, H(curl) values covariantly with curls by J/detJ, H(div)
// values contravariantly with divergences by 1/detJ.
inline Eigen::Vector3d push_gradient(const CellGeometry& g, const Eigen::Vector3d& v) {
  return g.JinvT * v;
}
inline Eigen::Vector3d push_hcurl_value(const CellGeometry& g, const Eigen::Vector3d& v) {
  return g.JinvT * v;
}
inline Eigen::Vector3d push_hcurl_curl(const CellGeometry& g, const Eigen::Vector3d& c) {
  return (g.J * c) / g.detJ;
}
inline Eigen::Vector3d push_hdiv_value(const CellGeometry& g, const Eigen::Vector3d& v) {
  return (g.J * v) / g.detJ;
}
inline double push_hdiv_div(const CellGeometry& g, double d) { return d / g.detJ; }

// Reference evaluations of one family at all points of a rule, cached once
// per (family, rule) by the assembler.  Scalar families fill values/grads,
// vector families fill vvalues plus the constant curls/divs.
struct BasisTable {
  Family family = Family::P1;
  int n_dofs = 0;
  int n_pts = 0;
  std::vector<double> values;            // [pt*n_dofs + dof]
  std::vector<Eigen::Vector3d> grads;    // [pt*n_dofs + dof]
  std::vector<Eigen::Vector3d> vvalues;  // [pt*n_dofs + dof]
  std::vector<Eigen::Vector3d> curls;    // [dof]
  std::vector<double> divs;              // [dof]
};
BasisTable tabulate(Family family, const QuadratureRule& rule);

}  // namespace mhd

#endif
