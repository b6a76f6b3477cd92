#include <cmath>

#include "doctest.h"
#include "mhd/basis.hpp"
#include "mhd/quadrature.hpp"

using namespace mhd;

namespace {
const std::array<Eigen::Vector3d, 4> ref_verts = {
    Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
    Eigen::Vector3d(0, 0, 1)};
}

TEST_CASE("P1 and P2 values form a partition of unity with vanishing gradient sum") {
  QuadratureRule r = quadrature_rule(3);
  for (const auto& p : r.points) {
    double v1[4], v2[10];
    refbasis::p1_values(p, v1);
    refbasis::p2_values(p, v2);
    double s1 = 0, s2 = 0;
    for (double v : v1) s1 += v;
    for (double v : v2) s2 += v;
    CHECK(s1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-14));
    Eigen::Vector3d g2[10];
    refbasis::p2_gradients(p, g2);
    Eigen::Vector3d gs = Eigen::Vector3d::Zero();
    for (const auto& g : g2) gs += g;
    CHECK(gs.norm() < 1e-13);
  }
}

TEST_CASE("P2 values are Kronecker at the ten nodes") {
  const auto& nodes = refbasis::p2_nodes();
  for (int n = 0; n < 10; ++n) {
    double v[10];
    refbasis::p2_values(nodes[n], v);
    for (int a = 0; a < 10; ++a)
      CHECK(v[a] == doctest::Approx(a == n ? 1.0 : 0.0).epsilon(1e-14));
  }
  // node layout: four vertices then the six edge midpoints
  for (int i = 0; i < 4; ++i) CHECK((nodes[i] - ref_verts[i]).norm() < 1e-15);
  for (int e = 0; e < 6; ++e) {
    Eigen::Vector3d mid =
        0.5 * (ref_verts[local_edges[e][0]] + ref_verts[local_edges[e][1]]);
    CHECK((nodes[4 + e] - mid).norm() < 1e-15);
  }
}

TEST_CASE("edge-element tangential edge integrals are Kronecker") {
  SegmentRule seg = segment_rule(4);
  for (int e = 0; e < 6; ++e) {
    const Eigen::Vector3d a = ref_verts[local_edges[e][0]];
    const Eigen::Vector3d d = ref_verts[local_edges[e][1]] - a;
    for (int f = 0; f < 6; ++f) {
      double integral = 0.0;
      for (std::size_t q = 0; q < seg.points.size(); ++q) {
        Eigen::Vector3d w[6];
        refbasis::n0_values(a + seg.points[q] * d, w);
        integral += seg.weights[q] * w[f].dot(d);
      }
      CHECK(integral == doctest::Approx(e == f ? 1.0 : 0.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("face-element normal fluxes are Kronecker") {
  TriangleRule tri = triangle_rule(4);
  for (int p = 0; p < 4; ++p) {
    const Eigen::Vector3d vi = ref_verts[local_faces[p][0]];
    const Eigen::Vector3d dj = ref_verts[local_faces[p][1]] - vi;
    const Eigen::Vector3d dk = ref_verts[local_faces[p][2]] - vi;
    const Eigen::Vector3d n2 = dj.cross(dk);  // area-scaled triple normal
    for (int f = 0; f < 4; ++f) {
      // dA = |n2| ds dt on the (s,t) parameter triangle, so the flux is the
      // parameter-domain integral of w . n2
      double flux = 0.0;
      for (std::size_t q = 0; q < tri.points.size(); ++q) {
        Eigen::Vector3d w[4];
        refbasis::rt0_values(vi + tri.points[q].x() * dj + tri.points[q].y() * dk, w);
        flux += tri.weights[q] * w[f].dot(n2);
      }
      CHECK(flux == doctest::Approx(p == f ? 1.0 : 0.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("stored curls and divergences match finite differences of the values") {
  const double h = 1e-5;
  const Eigen::Vector3d x0(0.22, 0.31, 0.17);
  Eigen::Vector3d curls[6];
  refbasis::n0_curls(curls);
  double divs[4];
  refbasis::rt0_divergences(divs);

  auto n0_at = [](const Eigen::Vector3d& x, int e) {
    Eigen::Vector3d w[6];
    refbasis::n0_values(x, w);
    return w[e];
  };
  auto rt0_at = [](const Eigen::Vector3d& x, int f) {
    Eigen::Vector3d w[4];
    refbasis::rt0_values(x, w);
    return w[f];
  };

  for (int e = 0; e < 6; ++e) {
    Eigen::Matrix3d Jm;  // Jm(i,j) = d w_i / d x_j
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[j] = h;
      Jm.col(j) = (n0_at(x0 + dp, e) - n0_at(x0 - dp, e)) / (2 * h);
    }
    Eigen::Vector3d fd_curl(Jm(2, 1) - Jm(1, 2), Jm(0, 2) - Jm(2, 0), Jm(1, 0) - Jm(0, 1));
    CHECK((fd_curl - curls[e]).norm() < 1e-8);
  }
  for (int f = 0; f < 4; ++f) {
    double fd_div = 0.0;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[j] = h;
      fd_div += (rt0_at(x0 + dp, f)[j] - rt0_at(x0 - dp, f)[j]) / (2 * h);
    }
    CHECK(fd_div == doctest::Approx(divs[f]).epsilon(1e-7));
  }
}

TEST_CASE("Piola transforms commute with the physical differential operators") {
  // Skewed physical tetrahedron.
  Mesh m;
  m.vertices = {Eigen::Vector3d(0.1, 0.0, 0.0), Eigen::Vector3d(1.2, 0.1, -0.2),
                Eigen::Vector3d(0.3, 0.9, 0.1), Eigen::Vector3d(-0.1, 0.2, 1.1)};
  m.cells = {{0, 1, 2, 3}};
  m.cell_volumes = {0.0};
  CellGeometry geo = cell_geometry(m, 0);
  REQUIRE(geo.detJ > 0.0);

  const double h = 1e-5;
  const Eigen::Vector3d ref0(0.2, 0.25, 0.3);
  auto to_ref = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d {
    return geo.Jinv * (x - geo.origin);
  };
  const Eigen::Vector3d x0 = geo.map(ref0);

  // physical H(curl) function: x -> JinvT * what(ref(x))
  auto hcurl_phys = [&](const Eigen::Vector3d& x, int e) {
    Eigen::Vector3d w[6];
    refbasis::n0_values(to_ref(x), w);
    return push_hcurl_value(geo, w[e]);
  };
  Eigen::Vector3d ref_curls[6];
  refbasis::n0_curls(ref_curls);
  for (int e = 0; e < 6; ++e) {
    Eigen::Matrix3d Jm;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[j] = h;
      Jm.col(j) = (hcurl_phys(x0 + dp, e) - hcurl_phys(x0 - dp, e)) / (2 * h);
    }
    Eigen::Vector3d fd_curl(Jm(2, 1) - Jm(1, 2), Jm(0, 2) - Jm(2, 0), Jm(1, 0) - Jm(0, 1));
    CHECK((fd_curl - push_hcurl_curl(geo, ref_curls[e])).norm() < 1e-7);
  }

  // physical H(div) function: x -> J * what(ref(x)) / detJ
  auto hdiv_phys = [&](const Eigen::Vector3d& x, int f) {
    Eigen::Vector3d w[4];
    refbasis::rt0_values(to_ref(x), w);
    return push_hdiv_value(geo, w[f]);
  };
  double ref_divs[4];
  refbasis::rt0_divergences(ref_divs);
  for (int f = 0; f < 4; ++f) {
    double fd_div = 0.0;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[j] = h;
      fd_div += (hdiv_phys(x0 + dp, f)[j] - hdiv_phys(x0 - dp, f)[j]) / (2 * h);
    }
    CHECK(fd_div == doctest::Approx(push_hdiv_div(geo, ref_divs[f])).epsilon(1e-6));
  }

  // physical gradient of a Lagrange function
  auto p2_phys = [&](const Eigen::Vector3d& x, int a) {
    double v[10];
    refbasis::p2_values(to_ref(x), v);
    return v[a];
  };
  for (int a : {0, 5, 9}) {
    Eigen::Vector3d fd_grad;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d dp = Eigen::Vector3d::Zero();
      dp[j] = h;
      fd_grad[j] = (p2_phys(x0 + dp, a) - p2_phys(x0 - dp, a)) / (2 * h);
    }
    Eigen::Vector3d g[10];
    refbasis::p2_gradients(ref0, g);
    CHECK((fd_grad - push_gradient(geo, g[a])).norm() < 1e-7);
  }
}

TEST_CASE("degenerate cells are rejected") {
  Mesh m;
  m.vertices = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0.5, 0.5, 0.0)};
  m.cells = {{0, 1, 2, 3}};
  m.h = 1.0;
  CHECK_THROWS_AS(cell_geometry(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(cell_geometry(m, 5), std::out_of_range);
}

TEST_CASE("tabulation matches direct evaluation at the rule points") {
  QuadratureRule r = quadrature_rule(4);
  BasisTable tp2 = tabulate(Family::P2, r);
  BasisTable tn0 = tabulate(Family::N0, r);
  BasisTable trt = tabulate(Family::RT0, r);
  REQUIRE(tp2.n_pts == static_cast<int>(r.points.size()));
  for (int q = 0; q < tp2.n_pts; ++q) {
    double v[10];
    refbasis::p2_values(r.points[q], v);
    for (int a = 0; a < 10; ++a)
      CHECK(tp2.values[q * 10 + a] == doctest::Approx(v[a]).epsilon(1e-15));
    Eigen::Vector3d w[6];
    refbasis::n0_values(r.points[q], w);
    for (int e = 0; e < 6; ++e) CHECK((tn0.vvalues[q * 6 + e] - w[e]).norm() < 1e-15);
  }
  REQUIRE(tn0.curls.size() == 6);
  REQUIRE(trt.divs.size() == 4);
}
