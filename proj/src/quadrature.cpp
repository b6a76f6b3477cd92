#include "mhd/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace mhd {

namespace {

// Gauss-Jacobi rule on [0,1] with weight (1-t)^alpha, computed by
// Golub-Welsch from the Jacobi (alpha,0) three-term recurrence.
void gauss_jacobi(int n, int alpha, std::vector<double>& pts,
                  std::vector<double>& wts) {
  const double a = alpha, b = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double denom = (2 * k + a + b) * (2 * k + a + b + 2);
    J(k, k) = (denom == 0.0) ? 0.0 : (b * b - a * a) / denom;
    if (k > 0) {
      double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
      double den = (2 * k + a + b) * (2 * k + a + b) * (2 * k + a + b + 1) *
                   (2 * k + a + b - 1);
      double off = std::sqrt(num / den);
      J(k, k - 1) = J(k - 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, a + b + 1) / (a + b + 1);  // integral of weight, b=0
  pts.resize(n);
  wts.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);            // node on [-1,1]
    double w = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    pts[i] = 0.5 * (1.0 + x);                  // map to [0,1]
    wts[i] = w * std::pow(2.0, -a - 1.0);      // absorb weight scaling
  }
}

}  // namespace

QuadratureRule make_conical_rule(int n) {
  if (n < 1) throw std::invalid_argument("make_conical_rule: need n >= 1");
  std::vector<double> p1, w1, p2, w2, p3, w3;
  gauss_jacobi(n, 2, p1, w1);
  gauss_jacobi(n, 1, p2, w2);
  gauss_jacobi(n, 0, p3, w3);

  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  rule.points.reserve(n * n * n);
  rule.weights.reserve(n * n * n);
  // Collapsed coordinates x = t1, y = t2(1-t1), z = t3(1-t1)(1-t2); the
  // Jacobian (1-t1)^2 (1-t2) is carried by the Jacobi weights.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double x = p1[i];
        double y = p2[j] * (1.0 - p1[i]);
        double z = p3[k] * (1.0 - p1[i]) * (1.0 - p2[j]);
        rule.points.emplace_back(x, y, z);
        rule.weights.push_back(w1[i] * w2[j] * w3[k]);
      }
  return rule;
}

QuadratureRule quadrature_rule(int degree) {
  if (degree < 1 || degree > 8)
    throw std::invalid_argument("quadrature_rule: degree must be in 1..8");
  QuadratureRule rule = make_conical_rule((degree + 2) / 2);
  rule.degree = degree;
  return rule;
}

TriangleRule triangle_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("triangle_rule: degree must be >= 1");
  int n = (degree + 2) / 2;
  std::vector<double> p1, w1, p2, w2;
  gauss_jacobi(n, 1, p1, w1);
  gauss_jacobi(n, 0, p2, w2);
  TriangleRule rule;
  rule.degree = 2 * n - 1;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      rule.points.emplace_back(p1[i], p2[j] * (1.0 - p1[i]));
      rule.weights.push_back(w1[i] * w2[j]);
    }
  return rule;
}

SegmentRule segment_rule(int n) {
  if (n < 1) throw std::invalid_argument("segment_rule: need n >= 1");
  SegmentRule rule;
  gauss_jacobi(n, 0, rule.points, rule.weights);
  return rule;
}

}  // namespace mhd
