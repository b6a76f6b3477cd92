#include "mhd/oracle.hpp"

#include <array>
#include <map>
#include <stdexcept>

namespace mhd::oracle {

namespace {

// Polynomial in the four barycentric coordinates, sparse over exponents.
class BaryPoly {
 public:
  BaryPoly() = default;

  static BaryPoly constant(double c) {
    BaryPoly p;
    if (c != 0.0) p.terms_[{0, 0, 0, 0}] = c;
    return p;
  }
  static BaryPoly lambda(int i) {
    BaryPoly p;
    std::array<int, 4> e{0, 0, 0, 0};
    e[i] = 1;
    p.terms_[e] = 1.0;
    return p;
  }

  BaryPoly& operator+=(const BaryPoly& o) {
    for (const auto& [e, c] : o.terms_) terms_[e] += c;
    return *this;
  }
  BaryPoly operator+(const BaryPoly& o) const {
    BaryPoly r = *this;
    r += o;
    return r;
  }
  BaryPoly operator-(const BaryPoly& o) const { return *this + o * -1.0; }
  BaryPoly operator*(double c) const {
    BaryPoly r;
    if (c != 0.0)
      for (const auto& [e, v] : terms_) r.terms_[e] = v * c;
    return r;
  }
  BaryPoly operator*(const BaryPoly& o) const {
    BaryPoly r;
    for (const auto& [ea, ca] : terms_)
      for (const auto& [eb, cb] : o.terms_)
        r.terms_[{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]}] += ca * cb;
    return r;
  }

  // Exact integral over a tetrahedron with 6*volume = vol6.
  double integral(double vol6) const {
    static const std::array<double, 13> fact = [] {
      std::array<double, 13> f{};
      f[0] = 1.0;
      for (int i = 1; i < 13; ++i) f[i] = f[i - 1] * i;
      return f;
    }();
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      const int deg = e[0] + e[1] + e[2] + e[3];
      if (deg + 3 >= static_cast<int>(fact.size()))
        throw std::logic_error("oracle: polynomial degree out of range");
      sum += c * fact[e[0]] * fact[e[1]] * fact[e[2]] * fact[e[3]] / fact[deg + 3];
    }
    return sum * vol6;
  }

 private:
  std::map<std::array<int, 4>, double> terms_;
};

struct VecPoly {
  BaryPoly x, y, z;

  VecPoly() = default;
  VecPoly(BaryPoly a, BaryPoly b, BaryPoly c)
      : x(std::move(a)), y(std::move(b)), z(std::move(c)) {}
  static VecPoly constant(const Eigen::Vector3d& v) {
    return {BaryPoly::constant(v[0]), BaryPoly::constant(v[1]), BaryPoly::constant(v[2])};
  }
  static VecPoly scaled(const BaryPoly& s, const Eigen::Vector3d& v) {
    return {s * v[0], s * v[1], s * v[2]};
  }
  VecPoly operator+(const VecPoly& o) const { return {x + o.x, y + o.y, z + o.z}; }
  VecPoly operator-(const VecPoly& o) const { return {x - o.x, y - o.y, z - o.z}; }
  VecPoly operator*(double c) const { return {x * c, y * c, z * c}; }
  BaryPoly dot(const VecPoly& o) const { return x * o.x + y * o.y + z * o.z; }
  VecPoly cross(const VecPoly& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  BaryPoly comp(int d) const { return d == 0 ? x : (d == 1 ? y : z); }
};

// Per-cell barycentric data from a direct 4x4 solve against the vertex matrix.
struct CellBary {
  Eigen::Vector3d grad[4];  // gradient of lambda_i (constant)
  double vol6 = 0.0;        // |6 * volume|
};

CellBary cell_bary(const Mesh& mesh, int cell) {
  Eigen::Matrix4d A;
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector3d& v = mesh.vertices[mesh.cells[cell][j]];
    A(0, j) = v[0];
    A(1, j) = v[1];
    A(2, j) = v[2];
    A(3, j) = 1.0;
  }
  // Row i of A^{-1} holds the affine coefficients of lambda_i.
  Eigen::Matrix4d Ainv = A.inverse();
  CellBary cb;
  for (int i = 0; i < 4; ++i) cb.grad[i] = Ainv.row(i).head<3>().transpose();
  cb.vol6 = std::abs(A.determinant());
  return cb;
}

// P2 scalar shape functions (vertices then edges in local_edges order).
BaryPoly p2_shape(int a) {
  if (a < 4) {
    BaryPoly l = BaryPoly::lambda(a);
    return l * l * 2.0 - l;
  }
  const auto& e = local_edges[a - 4];
  return BaryPoly::lambda(e[0]) * BaryPoly::lambda(e[1]) * 4.0;
}

VecPoly p2_grad(int a, const CellBary& cb) {
  if (a < 4) {
    BaryPoly l = BaryPoly::lambda(a);
    return VecPoly::scaled(l * 4.0 - BaryPoly::constant(1.0), cb.grad[a]);
  }
  const auto& e = local_edges[a - 4];
  return VecPoly::scaled(BaryPoly::lambda(e[1]) * 4.0, cb.grad[e[0]]) +
         VecPoly::scaled(BaryPoly::lambda(e[0]) * 4.0, cb.grad[e[1]]);
}

VecPoly n0_shape(int e, const CellBary& cb, double sign) {
  const auto& le = local_edges[e];
  return (VecPoly::scaled(BaryPoly::lambda(le[0]), cb.grad[le[1]]) -
          VecPoly::scaled(BaryPoly::lambda(le[1]), cb.grad[le[0]])) *
         sign;
}

Eigen::Vector3d n0_curl(int e, const CellBary& cb, double sign) {
  const auto& le = local_edges[e];
  return 2.0 * sign * cb.grad[le[0]].cross(cb.grad[le[1]]);
}

VecPoly rt0_shape(int f, const CellBary& cb, double sign) {
  const auto& lf = local_faces[f];
  const Eigen::Vector3d& gi = cb.grad[lf[0]];
  const Eigen::Vector3d& gj = cb.grad[lf[1]];
  const Eigen::Vector3d& gk = cb.grad[lf[2]];
  VecPoly p = VecPoly::scaled(BaryPoly::lambda(lf[0]), gj.cross(gk)) +
              VecPoly::scaled(BaryPoly::lambda(lf[1]), gk.cross(gi)) +
              VecPoly::scaled(BaryPoly::lambda(lf[2]), gi.cross(gj));
  return p * (2.0 * sign);
}

// A coefficient field expanded symbolically on one cell.
VecPoly field_poly(const Field& f, int cell, const CellBary& cb) {
  const FeSpace& sp = *f.space;
  const int* dofs = sp.dofs(cell);
  VecPoly out;
  switch (sp.family) {
    case Family::P2:
      for (int a = 0; a < 10; ++a) {
        BaryPoly ph = p2_shape(a);
        out = out + VecPoly(ph * f.coeffs[dofs[3 * a + 0]], ph * f.coeffs[dofs[3 * a + 1]],
                            ph * f.coeffs[dofs[3 * a + 2]]);
      }
      return out;
    case Family::RT0: {
      const signed char* sg = sp.signs(cell);
      for (int a = 0; a < 4; ++a)
        out = out + rt0_shape(a, cb, sg[a]) * f.coeffs[dofs[a]];
      return out;
    }
    case Family::N0: {
      const signed char* sg = sp.signs(cell);
      for (int a = 0; a < 6; ++a)
        out = out + n0_shape(a, cb, sg[a]) * f.coeffs[dofs[a]];
      return out;
    }
    default:
      throw std::invalid_argument("oracle: unsupported field family");
  }
}

}  // namespace

Eigen::MatrixXd mass(const FeSpace& space, double weight) {
  const Mesh& mesh = *space.mesh;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(space.n_dofs, space.n_dofs);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBary cb = cell_bary(mesh, c);
    const int* dofs = space.dofs(c);
    switch (space.kind) {
      case SpaceKind::PressureP1:
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            M(dofs[a], dofs[b]) +=
                weight * (BaryPoly::lambda(a) * BaryPoly::lambda(b)).integral(cb.vol6);
        break;
      case SpaceKind::VelocityP2:
        for (int a = 0; a < 10; ++a)
          for (int b = 0; b < 10; ++b) {
            const double v = weight * (p2_shape(a) * p2_shape(b)).integral(cb.vol6);
            for (int d = 0; d < 3; ++d) M(dofs[3 * a + d], dofs[3 * b + d]) += v;
          }
        break;
      case SpaceKind::ElectricN0: {
        const signed char* sg = space.signs(c);
        for (int a = 0; a < 6; ++a)
          for (int b = 0; b < 6; ++b)
            M(dofs[a], dofs[b]) +=
                weight *
                n0_shape(a, cb, sg[a]).dot(n0_shape(b, cb, sg[b])).integral(cb.vol6);
        break;
      }
      case SpaceKind::MagneticRT0: {
        const signed char* sg = space.signs(c);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            M(dofs[a], dofs[b]) +=
                weight *
                rt0_shape(a, cb, sg[a]).dot(rt0_shape(b, cb, sg[b])).integral(cb.vol6);
        break;
      }
    }
  }
  return M;
}

Eigen::MatrixXd stiffness(const FeSpace& velocity, double weight) {
  const Mesh& mesh = *velocity.mesh;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(velocity.n_dofs, velocity.n_dofs);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBary cb = cell_bary(mesh, c);
    const int* dofs = velocity.dofs(c);
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) {
        const double v = weight * p2_grad(a, cb).dot(p2_grad(b, cb)).integral(cb.vol6);
        for (int d = 0; d < 3; ++d) M(dofs[3 * a + d], dofs[3 * b + d]) += v;
      }
  }
  return M;
}

Eigen::MatrixXd convection(const FeSpace& velocity, const Field& advector) {
  const Mesh& mesh = *velocity.mesh;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(velocity.n_dofs, velocity.n_dofs);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBary cb = cell_bary(mesh, c);
    const VecPoly adv = field_poly(advector, c, cb);
    const int* dofs = velocity.dofs(c);
    BaryPoly adg[10];
    BaryPoly ph[10];
    for (int a = 0; a < 10; ++a) {
      adg[a] = adv.dot(p2_grad(a, cb));
      ph[a] = p2_shape(a);
    }
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) {
        const double v = 0.5 * (adg[b] * ph[a] - adg[a] * ph[b]).integral(cb.vol6);
        for (int d = 0; d < 3; ++d) M(dofs[3 * a + d], dofs[3 * b + d]) += v;
      }
  }
  return M;
}

Eigen::MatrixXd divergence(const FeSpace& pressure, const FeSpace& velocity) {
  const Mesh& mesh = *velocity.mesh;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(pressure.n_dofs, velocity.n_dofs);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBary cb = cell_bary(mesh, c);
    const int* pd = pressure.dofs(c);
    const int* vd = velocity.dofs(c);
    for (int b = 0; b < 10; ++b) {
      const VecPoly g = p2_grad(b, cb);
      for (int d = 0; d < 3; ++d)
        for (int a = 0; a < 4; ++a)
          M(pd[a], vd[3 * b + d]) += (BaryPoly::lambda(a) * g.comp(d)).integral(cb.vol6);
    }
  }
  return M;
}

Eigen::MatrixXd cross_coupling(const Discretization& disc, Coupling which,
                               const Field* B_given) {
  const Mesh& mesh = disc.mesh;
  const FeSpace& vel = disc.velocity;
  const FeSpace& mag = disc.magnetic;
  const FeSpace& elec = disc.electric;

  auto need_B = [&]() -> const Field& {
    if (!B_given) throw std::invalid_argument("oracle: B_given required");
    return *B_given;
  };

  switch (which) {
    case Coupling::E_F:
      return mass(elec);
    case Coupling::CurlE_C: {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(mag.n_dofs, elec.n_dofs);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellBary cb = cell_bary(mesh, c);
        const int* bd = mag.dofs(c);
        const int* ed = elec.dofs(c);
        const signed char* sgB = mag.signs(c);
        const signed char* sgE = elec.signs(c);
        for (int f = 0; f < 4; ++f) {
          const VecPoly W = rt0_shape(f, cb, sgB[f]);
          for (int e = 0; e < 6; ++e)
            M(bd[f], ed[e]) +=
                W.dot(VecPoly::constant(n0_curl(e, cb, sgE[e]))).integral(cb.vol6);
        }
      }
      return M;
    }
    case Coupling::B_CurlF:
      return cross_coupling(disc, Coupling::CurlE_C, nullptr).transpose();
    case Coupling::ExB_v: {
      const Field& B = need_B();
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(vel.n_dofs, elec.n_dofs);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellBary cb = cell_bary(mesh, c);
        const VecPoly Bp = field_poly(B, c, cb);
        const int* vd = vel.dofs(c);
        const int* ed = elec.dofs(c);
        const signed char* sgE = elec.signs(c);
        for (int e = 0; e < 6; ++e) {
          const VecPoly cr = n0_shape(e, cb, sgE[e]).cross(Bp);
          for (int a = 0; a < 10; ++a) {
            const BaryPoly ph = p2_shape(a);
            for (int d = 0; d < 3; ++d)
              M(vd[3 * a + d], ed[e]) += (ph * cr.comp(d)).integral(cb.vol6);
          }
        }
      }
      return M;
    }
    case Coupling::UxB_F: {
      const Field& B = need_B();
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(elec.n_dofs, vel.n_dofs);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellBary cb = cell_bary(mesh, c);
        const VecPoly Bp = field_poly(B, c, cb);
        const int* vd = vel.dofs(c);
        const int* ed = elec.dofs(c);
        const signed char* sgE = elec.signs(c);
        for (int e = 0; e < 6; ++e) {
          // (e_d x B) . w = e_d . (B x w)
          const VecPoly bxw = Bp.cross(n0_shape(e, cb, sgE[e]));
          for (int b = 0; b < 10; ++b) {
            const BaryPoly ph = p2_shape(b);
            for (int d = 0; d < 3; ++d)
              M(ed[e], vd[3 * b + d]) += (ph * bxw.comp(d)).integral(cb.vol6);
          }
        }
      }
      return M;
    }
    case Coupling::UxBxB_v: {
      const Field& B = need_B();
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(vel.n_dofs, vel.n_dofs);
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellBary cb = cell_bary(mesh, c);
        const VecPoly Bp = field_poly(B, c, cb);
        const int* vd = vel.dofs(c);
        const BaryPoly Bsq = Bp.dot(Bp);
        for (int a = 0; a < 10; ++a)
          for (int b = 0; b < 10; ++b) {
            const BaryPoly phab = p2_shape(a) * p2_shape(b);
            for (int cc = 0; cc < 3; ++cc)
              for (int dd = 0; dd < 3; ++dd) {
                // G_cd = B_c B_d - |B|^2 delta_cd
                BaryPoly g = Bp.comp(cc) * Bp.comp(dd);
                if (cc == dd) g = g - Bsq;
                M(vd[3 * a + cc], vd[3 * b + dd]) += (phab * g).integral(cb.vol6);
              }
          }
      }
      return M;
    }
  }
  throw std::invalid_argument("oracle: unknown coupling");
}

}  // namespace mhd::oracle
