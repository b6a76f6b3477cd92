#ifndef MHD_QUADRATURE_HPP
#define MHD_QUADRATURE_HPP

#include <Eigen/Dense>
#include <vector>

namespace mhd {

// Quadrature on the reference tetrahedron (0,0,0)-(1,0,0)-(0,1,0)-(0,0,1).
// Weights include the reference volume, i.e. they sum to 1/6.
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int degree = 0;  // total polynomial degree integrated exactly
};

// Gated public factory; degrees outside 1..8 throw std::invalid_argument.
QuadratureRule quadrature_rule(int degree);

// Conical-product rule with n points per axis, exact to total degree 2n-1.
// All weights positive.  Backs quadrature_rule and the high-degree checks.
QuadratureRule make_conical_rule(int points_per_axis);

// Quadrature on the reference triangle (0,0)-(1,0)-(0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int degree = 0;
};
TriangleRule triangle_rule(int degree);

// Gauss-Legendre points/weights on [0,1].
struct SegmentRule {
  std::vector<double> points;
  std::vector<double> weights;
};
SegmentRule segment_rule(int n_points);

}  // namespace mhd

#endif
