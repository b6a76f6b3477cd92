#include <cmath>

#include "doctest.h"
#include "mhd/quadrature.hpp"

using namespace mhd;

namespace {
// Exact monomial integrals over the reference tetrahedron:
//   int x^a y^b z^c dV = a! b! c! / (a+b+c+3)!
double tet_monomial(int a, int b, int c) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
}

double tri_monomial(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}
}  // namespace

TEST_CASE("degree-1 rule is the centroid rule") {
  QuadratureRule r = quadrature_rule(1);
  REQUIRE(r.points.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(r.points[0].x() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.points[0].y() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.points[0].z() == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("tetrahedron rules: positive weights summing to the reference volume") {
  for (int deg = 1; deg <= 8; ++deg) {
    QuadratureRule r = quadrature_rule(deg);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    for (const auto& p : r.points) {
      CHECK(p.x() >= 0.0);
      CHECK(p.y() >= 0.0);
      CHECK(p.z() >= 0.0);
      CHECK(p.x() + p.y() + p.z() <= 1.0 + 1e-14);
    }
  }
}

TEST_CASE("tetrahedron rules integrate all monomials up to their degree exactly") {
  for (int deg = 1; deg <= 8; ++deg) {
    QuadratureRule r = quadrature_rule(deg);
    REQUIRE(r.degree >= deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        for (int c = 0; a + b + c <= deg; ++c) {
          double q = 0.0;
          for (std::size_t i = 0; i < r.points.size(); ++i)
            q += r.weights[i] * std::pow(r.points[i].x(), a) *
                 std::pow(r.points[i].y(), b) * std::pow(r.points[i].z(), c);
          CHECK(q == doctest::Approx(tet_monomial(a, b, c)).epsilon(1e-12));
        }
  }
}

TEST_CASE("conical rules extend beyond the gated range") {
  // 6 points per axis -> exact to total degree 11
  QuadratureRule r = make_conical_rule(6);
  REQUIRE(r.degree == 11);
  for (int a : {11, 5}) {
    int b = 11 - a > 3 ? 3 : 11 - a;
    int c = 11 - a - b;
    double q = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i)
      q += r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b) *
           std::pow(r.points[i].z(), c);
    CHECK(q == doctest::Approx(tet_monomial(a, b, c)).epsilon(1e-12));
  }
}

TEST_CASE("requesting an unsupported tetrahedron degree throws") {
  CHECK_THROWS_AS(quadrature_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_rule(9), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_rule(-3), std::invalid_argument);
}

TEST_CASE("triangle rules integrate monomials exactly") {
  for (int deg : {1, 2, 5, 15}) {
    TriangleRule r = triangle_rule(deg);
    double sum = 0.0;
    for (double w : r.weights) sum += w;
    CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double q = 0.0;
        for (std::size_t i = 0; i < r.points.size(); ++i)
          q += r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b);
        CHECK(q == doctest::Approx(tri_monomial(a, b)).epsilon(1e-12));
      }
  }
}

TEST_CASE("segment rules are Gauss rules on [0,1]") {
  for (int n : {1, 2, 4, 8}) {
    SegmentRule r = segment_rule(n);
    REQUIRE(static_cast<int>(r.points.size()) == n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += r.weights[i] * std::pow(r.points[i], k);
      CHECK(q == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}
