#include "mhd/mms.hpp"

#include <cmath>

namespace mhd {

namespace {

Eigen::Vector3d exact_u(double t, const Eigen::Vector3d& x) {
  return {std::exp(t) * std::cos(x.y()), 0.0, 0.0};
}

Eigen::Vector3d exact_B(double t, const Eigen::Vector3d& x) {
  return {0.0, 0.0, std::exp(t) * std::cos(x.x())};
}

Eigen::Vector3d exact_E(double /*t*/, const Eigen::Vector3d& x) {
  return {0.0, std::cos(x.x()), 0.0};
}

Eigen::Vector3d exact_j(double t, const Eigen::Vector3d& x) {
  // j = E + u x B = (0, cos x (1 - e^{2t} cos y), 0).
  return {0.0, std::cos(x.x()) * (1.0 - std::exp(2.0 * t) * std::cos(x.y())), 0.0};
}

}  // namespace

ExactSolution exact_solution() {
  ExactSolution ex;
  ex.u = exact_u;
  ex.B = exact_B;
  ex.E = exact_E;
  ex.j = exact_j;
  ex.u_t = exact_u;  // u is e^t times a function of space
  ex.B_t = exact_B;  // likewise B
  ex.p = [](double /*t*/, const Eigen::Vector3d& x) { return -x.x() * std::cos(x.y()); };
  ex.grad_u = [](double t, const Eigen::Vector3d& x) {
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    g(0, 1) = -std::exp(t) * std::sin(x.y());
    return g;
  };
  ex.curl_E = [](double /*t*/, const Eigen::Vector3d& x) {
    return Eigen::Vector3d{0.0, 0.0, -std::sin(x.x())};
  };
  return ex;
}

SourceSet manufactured_sources(const ProblemParams& pp) {
  pp.validate();
  SourceSet src;
  const double Re = pp.Re;
  const double s = pp.s;
  // f = u_t + (u.grad)u - (1/Re) lap u - s j x B + grad p.  The convection
  // term vanishes (u depends only on y and points along x), lap u = -u, and
  // j x B = (e^t cos^2 x (1 - e^{2t} cos y), 0, 0).
  src.momentum = [Re, s](double t, const Eigen::Vector3d& x) {
    const double et = std::exp(t);
    const double cy = std::cos(x.y());
    const double cx = std::cos(x.x());
    return Eigen::Vector3d{
        (1.0 + 1.0 / Re) * et * cy - s * et * cx * cx * (1.0 - std::exp(2.0 * t) * cy) - cy,
        x.x() * std::sin(x.y()), 0.0};
  };
  // g = B_t + curl E.
  src.induction = [](double t, const Eigen::Vector3d& x) {
    return Eigen::Vector3d{0.0, 0.0, std::exp(t) * std::cos(x.x()) - std::sin(x.x())};
  };
  // Ohm-row data: the assembled functional is s*(ohm_j, F) - alpha*(ohm_B, curl F),
  // which vanishes when j = curl B / Rm but not for this solution.
  src.ohm_j = exact_j;
  src.ohm_B = exact_B;
  return src;
}

BoundaryConditions manufactured_bcs() {
  BoundaryConditions bc;
  bc.velocity = exact_u;
  bc.electric = exact_E;
  bc.magnetic = exact_B;
  return bc;
}

}  // namespace mhd
