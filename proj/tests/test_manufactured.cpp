#include <cmath>
#include <random>

#include "doctest.h"
#include "mhd/assembly.hpp"
#include "mhd/mms.hpp"

using namespace mhd;

namespace {

Eigen::Vector3d fd_time_derivative(const TimeVecFn& f, double t, const Eigen::Vector3d& x,
                                   double h = 1e-6) {
  return (f(t + h, x) - f(t - h, x)) / (2.0 * h);
}

Eigen::Matrix3d fd_jacobian(const TimeVecFn& f, double t, const Eigen::Vector3d& x,
                            double h = 1e-6) {
  Eigen::Matrix3d J;
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    J.col(c) = (f(t, xp) - f(t, xm)) / (2.0 * h);
  }
  return J;
}

Eigen::Vector3d fd_curl(const TimeVecFn& f, double t, const Eigen::Vector3d& x) {
  const Eigen::Matrix3d J = fd_jacobian(f, t, x);
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

double fd_divergence(const TimeVecFn& f, double t, const Eigen::Vector3d& x) {
  return fd_jacobian(f, t, x).trace();
}

Eigen::Vector3d fd_gradient(const TimeScalarFn& f, double t, const Eigen::Vector3d& x,
                            double h = 1e-6) {
  Eigen::Vector3d g;
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    g[c] = (f(t, xp) - f(t, xm)) / (2.0 * h);
  }
  return g;
}

Eigen::Vector3d fd_laplacian(const TimeVecFn& f, double t, const Eigen::Vector3d& x,
                             double h = 1e-4) {
  Eigen::Vector3d lap = Eigen::Vector3d::Zero();
  const Eigen::Vector3d f0 = f(t, x);
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    lap += (f(t, xp) - 2.0 * f0 + f(t, xm)) / (h * h);
  }
  return lap;
}

}  // namespace

TEST_CASE("benchmark solution takes its frozen spot values") {
  const ExactSolution ex = exact_solution();
  const Eigen::Vector3d o = Eigen::Vector3d::Zero();
  CHECK((ex.u(0.0, o) - Eigen::Vector3d(1, 0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK((ex.B(0.0, o) - Eigen::Vector3d(0, 0, 1)).norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK((ex.E(0.7, o) - Eigen::Vector3d(0, 1, 0)).norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ex.p(0.3, {0.5, 0.0, 0.9}) == doctest::Approx(-0.5).epsilon(1e-14));
  // j = E + u x B = (0, cos x (1 - e^{2t} cos y), 0)
  const Eigen::Vector3d j = ex.j(0.3, o);
  CHECK(j.x() == 0.0);
  CHECK(j.y() == doctest::Approx(1.0 - std::exp(0.6)).epsilon(1e-14));
  CHECK(j.z() == 0.0);
  CHECK(ex.grad_u(0.0, {0.0, M_PI / 2, 0.0})(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  const Eigen::Vector3d cE = ex.curl_E(0.2, {M_PI / 2, 0.3, 0.8});
  CHECK((cE - Eigen::Vector3d(0, 0, -1)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("momentum source takes its frozen values and has zero third component") {
  ProblemParams pp;
  pp.Re = 1.0;
  pp.s = 0.0;
  const SourceSet src = manufactured_sources(pp);
  const Eigen::Vector3d f0 = src.momentum(0.0, Eigen::Vector3d::Zero());
  CHECK((f0 - Eigen::Vector3d(1, 0, 0)).norm() == doctest::Approx(0.0).epsilon(1e-14));

  ProblemParams pg;
  pg.Re = 3.0;
  pg.Rm = 2.0;
  pg.s = 1.5;
  const SourceSet sg = manufactured_sources(pg);
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d x(uni(rng), uni(rng), uni(rng));
    const double t = uni(rng);
    const Eigen::Vector3d f = sg.momentum(t, x);
    CHECK(f.z() == 0.0);
    CHECK(f.y() == doctest::Approx(x.x() * std::sin(x.y())).epsilon(1e-14));
  }
}

TEST_CASE("induction source takes its frozen values") {
  const SourceSet src = manufactured_sources(ProblemParams{});
  const Eigen::Vector3d g0 = src.induction(0.0, Eigen::Vector3d::Zero());
  CHECK((g0 - Eigen::Vector3d(0, 0, 1)).norm() == doctest::Approx(0.0).epsilon(1e-14));
  const Eigen::Vector3d g1 = src.induction(0.4, {M_PI / 2, 0.2, 0.9});
  CHECK(g1.z() == doctest::Approx(std::exp(0.4) * std::cos(M_PI / 2) - 1.0).epsilon(1e-14));
  CHECK(g1.x() == 0.0);
  CHECK(g1.y() == 0.0);
}

TEST_CASE("closed-form derivatives match finite differences of the fields") {
  const ExactSolution ex = exact_solution();
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> uni(0.1, 0.9);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d x(uni(rng), uni(rng), uni(rng));
    const double t = uni(rng);
    CHECK((ex.u_t(t, x) - fd_time_derivative(ex.u, t, x)).norm() < 1e-8);
    CHECK((ex.B_t(t, x) - fd_time_derivative(ex.B, t, x)).norm() < 1e-8);
    CHECK((ex.grad_u(t, x) - fd_jacobian(ex.u, t, x)).norm() < 1e-8);
    CHECK((ex.curl_E(t, x) - fd_curl(ex.E, t, x)).norm() < 1e-8);
  }
}

TEST_CASE("sources close the PDE system at random points") {
  const ExactSolution ex = exact_solution();
  ProblemParams pp;
  pp.Re = 2.0;
  pp.Rm = 4.0;
  pp.s = 1.5;
  const SourceSet src = manufactured_sources(pp);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uni(0.1, 0.9);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d x(uni(rng), uni(rng), uni(rng));
    const double t = uni(rng);

    // Momentum: u_t + (u.grad)u - (1/Re) lap u - s j x B + grad p = f.
    const Eigen::Vector3d u = ex.u(t, x);
    const Eigen::Vector3d conv = fd_jacobian(ex.u, t, x) * u;
    const Eigen::Vector3d mom = fd_time_derivative(ex.u, t, x) + conv -
                                fd_laplacian(ex.u, t, x) / pp.Re -
                                pp.s * ex.j(t, x).cross(ex.B(t, x)) + fd_gradient(ex.p, t, x);
    CHECK((mom - src.momentum(t, x)).norm() < 1e-6);

    // Faraday: B_t + curl E = g.
    const Eigen::Vector3d far = fd_time_derivative(ex.B, t, x) + fd_curl(ex.E, t, x);
    CHECK((far - src.induction(t, x)).norm() < 1e-7);

    // Ohm closed forms are algebraically consistent.
    CHECK((ex.j(t, x) - (ex.E(t, x) + u.cross(ex.B(t, x)))).norm() < 1e-14);

    // Solenoidality of u, B, and the induction source.
    CHECK(std::abs(fd_divergence(ex.u, t, x)) < 1e-8);
    CHECK(std::abs(fd_divergence(ex.B, t, x)) < 1e-8);
    CHECK(std::abs(fd_divergence(src.induction, t, x)) < 1e-8);
  }
}

TEST_CASE("ohm load vanishes on interior edges when j is the scaled curl of B") {
  // With j = curl B / Rm the functional s(j, F) - (s/Rm)(B, curl F) reduces
  // to a pure boundary term, so every interior-edge entry must vanish.
  Discretization disc(build_box_mesh(2, 2, 2));
  Assembler assembler(disc);
  const double Rm = 3.0, s = 1.7;
  const TimeVecFn B_poly = [](double, const Eigen::Vector3d& x) {
    return Eigen::Vector3d(x.y(), x.z(), x.x());
  };
  const TimeVecFn j_poly = [Rm](double, const Eigen::Vector3d&) {
    return Eigen::Vector3d(-1.0 / Rm, -1.0 / Rm, -1.0 / Rm);
  };
  const Eigen::VectorXd load = assembler.load_ohm(j_poly, B_poly, s, s / Rm, 0.0);
  double worst_interior = 0.0, worst_boundary = 0.0;
  for (int d = 0; d < disc.electric.n_dofs; ++d) {
    if (disc.electric.dof_on_boundary[d])
      worst_boundary = std::max(worst_boundary, std::abs(load[d]));
    else
      worst_interior = std::max(worst_interior, std::abs(load[d]));
  }
  CHECK(worst_interior < 1e-13);
  CHECK(worst_boundary > 1e-3);  // the boundary term is genuinely nonzero
}

TEST_CASE("boundary data agree with the exact traces") {
  const ExactSolution ex = exact_solution();
  const BoundaryConditions bc = manufactured_bcs();
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d x(uni(rng), uni(rng), uni(rng));
    const double t = uni(rng);
    CHECK((bc.velocity(t, x) - ex.u(t, x)).norm() == 0.0);
    CHECK((bc.electric(t, x) - ex.E(t, x)).norm() == 0.0);
    CHECK((bc.magnetic(t, x) - ex.B(t, x)).norm() == 0.0);
  }
}
