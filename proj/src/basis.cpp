#include "mhd/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace mhd {

int family_dof_count(Family f) {
  switch (f) {
    case Family::P1: return 4;
    case Family::P2: return 10;
    case Family::N0: return 6;
    case Family::RT0: return 4;
  }
  return 0;
}

bool family_is_vector(Family f) { return f == Family::N0 || f == Family::RT0; }

namespace refbasis {

namespace {
inline void barycentric(const Eigen::Vector3d& x, double l[4]) {
  l[0] = 1.0 - x.x() - x.y() - x.z();
  l[1] = x.x();
  l[2] = x.y();
  l[3] = x.z();
}
const Eigen::Vector3d grad_l[4] = {{-1, -1, -1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
}  // namespace

void p1_values(const Eigen::Vector3d& x, double* out) { barycentric(x, out); }

void p1_gradients(Eigen::Vector3d* out) {
  for (int i = 0; i < 4; ++i) out[i] = grad_l[i];
}

void p2_values(const Eigen::Vector3d& x, double* out) {
  double l[4];
  barycentric(x, l);
  for (int i = 0; i < 4; ++i) out[i] = l[i] * (2.0 * l[i] - 1.0);
  for (int e = 0; e < 6; ++e)
    out[4 + e] = 4.0 * l[local_edges[e][0]] * l[local_edges[e][1]];
}

void p2_gradients(const Eigen::Vector3d& x, Eigen::Vector3d* out) {
  double l[4];
  barycentric(x, l);
  for (int i = 0; i < 4; ++i) out[i] = (4.0 * l[i] - 1.0) * grad_l[i];
  for (int e = 0; e < 6; ++e) {
    int a = local_edges[e][0], b = local_edges[e][1];
    out[4 + e] = 4.0 * (l[a] * grad_l[b] + l[b] * grad_l[a]);
  }
}

void n0_values(const Eigen::Vector3d& x, Eigen::Vector3d* out) {
  double l[4];
  barycentric(x, l);
  for (int e = 0; e < 6; ++e) {
    int a = local_edges[e][0], b = local_edges[e][1];
    out[e] = l[a] * grad_l[b] - l[b] * grad_l[a];
  }
}

void n0_curls(Eigen::Vector3d* out) {
  for (int e = 0; e < 6; ++e) {
    int a = local_edges[e][0], b = local_edges[e][1];
    out[e] = 2.0 * grad_l[a].cross(grad_l[b]);
  }
}

void rt0_values(const Eigen::Vector3d& x, Eigen::Vector3d* out) {
  double l[4];
  barycentric(x, l);
  for (int f = 0; f < 4; ++f) {
    int i = local_faces[f][0], j = local_faces[f][1], k = local_faces[f][2];
    out[f] = 2.0 * (l[i] * grad_l[j].cross(grad_l[k]) +
                    l[j] * grad_l[k].cross(grad_l[i]) +
                    l[k] * grad_l[i].cross(grad_l[j]));
  }
}

void rt0_divergences(double* out) {
  for (int f = 0; f < 4; ++f) {
    int i = local_faces[f][0], j = local_faces[f][1], k = local_faces[f][2];
    out[f] = 6.0 * grad_l[i].dot(grad_l[j].cross(grad_l[k]));
  }
}

const std::array<Eigen::Vector3d, 10>& p2_nodes() {
  static const std::array<Eigen::Vector3d, 10> nodes = [] {
    std::array<Eigen::Vector3d, 10> n;
    const Eigen::Vector3d v[4] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 4; ++i) n[i] = v[i];
    for (int e = 0; e < 6; ++e)
      n[4 + e] = 0.5 * (v[local_edges[e][0]] + v[local_edges[e][1]]);
    return n;
  }();
  return nodes;
}

}  // namespace refbasis

CellGeometry cell_geometry(const Mesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.n_cells())
    throw std::out_of_range("cell_geometry: cell index out of range");
  const auto& c = mesh.cells[cell];
  CellGeometry g;
  g.origin = mesh.vertices[c[0]];
  for (int i = 0; i < 3; ++i) g.J.col(i) = mesh.vertices[c[i + 1]] - g.origin;
  g.detJ = g.J.determinant();
  if (!(std::abs(g.detJ) > 1e-14 * std::pow(mesh.h, 3)))
    throw std::invalid_argument("cell_geometry: degenerate cell");
  g.Jinv = g.J.inverse();
  g.JinvT = g.Jinv.transpose();
  return g;
}

BasisTable tabulate(Family family, const QuadratureRule& rule) {
  BasisTable t;
  t.family = family;
  t.n_dofs = family_dof_count(family);
  t.n_pts = static_cast<int>(rule.points.size());
  switch (family) {
    case Family::P1:
      t.values.resize(t.n_pts * 4);
      t.grads.resize(t.n_pts * 4);
      for (int q = 0; q < t.n_pts; ++q) {
        refbasis::p1_values(rule.points[q], &t.values[q * 4]);
        refbasis::p1_gradients(&t.grads[q * 4]);
      }
      break;
    case Family::P2:
      t.values.resize(t.n_pts * 10);
      t.grads.resize(t.n_pts * 10);
      for (int q = 0; q < t.n_pts; ++q) {
        refbasis::p2_values(rule.points[q], &t.values[q * 10]);
        refbasis::p2_gradients(rule.points[q], &t.grads[q * 10]);
      }
      break;
    case Family::N0:
      t.vvalues.resize(t.n_pts * 6);
      t.curls.resize(6);
      for (int q = 0; q < t.n_pts; ++q)
        refbasis::n0_values(rule.points[q], &t.vvalues[q * 6]);
      refbasis::n0_curls(t.curls.data());
      break;
    case Family::RT0:
      t.vvalues.resize(t.n_pts * 4);
      t.divs.resize(4);
      for (int q = 0; q < t.n_pts; ++q)
        refbasis::rt0_values(rule.points[q], &t.vvalues[q * 4]);
      refbasis::rt0_divergences(t.divs.data());
      break;
  }
  return t;
}

}  // namespace mhd
