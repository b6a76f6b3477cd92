#ifndef MHD_ORACLE_HPP
#define MHD_ORACLE_HPP

#include <Eigen/Dense>

#include "mhd/assembly.hpp"
#include "mhd/space.hpp"

namespace mhd::oracle {

// Independent dense assembly used to cross-check the sparse kernels.  Every
// integrand is expanded as a polynomial in the four barycentric coordinates
// (built from per-cell 4x4 vertex-matrix inverses) and integrated exactly with
// the factorial formula  int_T l0^a l1^b l2^c l3^d = 6V a!b!c!d!/(a+b+c+d+3)!.
// No quadrature rule, no reference-element mapping, no tabulated basis data is
// shared with the production path.  Intended for small meshes only.

Eigen::MatrixXd mass(const FeSpace& space, double weight = 1.0);
Eigen::MatrixXd stiffness(const FeSpace& velocity, double weight = 1.0);
Eigen::MatrixXd convection(const FeSpace& velocity, const Field& advector);
Eigen::MatrixXd divergence(const FeSpace& pressure, const FeSpace& velocity);
Eigen::MatrixXd cross_coupling(const Discretization& disc, Coupling which,
                               const Field* B_given = nullptr);

}  // namespace mhd::oracle

#endif
