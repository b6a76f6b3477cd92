#include "mhd/space.hpp"

#include <algorithm>
#include <stdexcept>

#include "mhd/quadrature.hpp"

namespace mhd {

namespace {

// Quadrature orders for the dof integrals.  Generous so that interpolating a
// smooth divergence-free field yields cell divergences at roundoff level.
constexpr int kEdgeDofPoints = 8;
constexpr int kFaceDofDegree = 15;

double edge_dof(const Mesh& mesh, int e, const VecFn& f) {
  const Eigen::Vector3d& a = mesh.vertices[mesh.edges[e][0]];
  const Eigen::Vector3d& b = mesh.vertices[mesh.edges[e][1]];
  static const SegmentRule rule = segment_rule(kEdgeDofPoints);
  const Eigen::Vector3d d = b - a;
  double v = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    v += rule.weights[q] * f(a + rule.points[q] * d).dot(d);
  return v;
}

double face_dof(const Mesh& mesh, int fidx, const VecFn& f) {
  const Eigen::Vector3d& a = mesh.vertices[mesh.faces[fidx][0]];
  const Eigen::Vector3d& b = mesh.vertices[mesh.faces[fidx][1]];
  const Eigen::Vector3d& c = mesh.vertices[mesh.faces[fidx][2]];
  static const TriangleRule rule = triangle_rule(kFaceDofDegree);
  const Eigen::Vector3d db = b - a, dc = c - a;
  const Eigen::Vector3d n2 = db.cross(dc);  // magnitude twice the face area
  double v = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    v += rule.weights[q] * f(a + rule.points[q].x() * db + rule.points[q].y() * dc).dot(n2);
  return v;
}

Eigen::Vector3d p2_node_position(const Mesh& mesh, int scalar_dof) {
  if (scalar_dof < mesh.n_vertices()) return mesh.vertices[scalar_dof];
  const auto& e = mesh.edges[scalar_dof - mesh.n_vertices()];
  return 0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]);
}

}  // namespace

FeSpace build_space(const Mesh& mesh, SpaceKind kind) {
  if (mesh.empty()) throw std::invalid_argument("build_space: empty mesh");
  FeSpace s;
  s.mesh = &mesh;
  s.kind = kind;
  const int nc = mesh.n_cells();

  switch (kind) {
    case SpaceKind::VelocityP2: {
      s.family = Family::P2;
      s.components = 3;
      s.n_scalar_dofs = mesh.n_vertices() + mesh.n_edges();
      s.n_dofs = 3 * s.n_scalar_dofs;
      s.dofs_per_cell = 30;
      s.cell_dofs.resize(nc * 30);
      s.cell_signs.assign(nc * 30, 1);
      for (int c = 0; c < nc; ++c)
        for (int a = 0; a < 10; ++a) {
          int g = a < 4 ? mesh.cells[c][a] : mesh.n_vertices() + mesh.cell_edges[c][a - 4];
          for (int comp = 0; comp < 3; ++comp)
            s.cell_dofs[c * 30 + 3 * a + comp] = 3 * g + comp;
        }
      s.dof_on_boundary.assign(s.n_dofs, 0);
      for (int v : mesh.boundary_vertices)
        for (int comp = 0; comp < 3; ++comp) s.dof_on_boundary[3 * v + comp] = 1;
      for (int e : mesh.boundary_edges)
        for (int comp = 0; comp < 3; ++comp)
          s.dof_on_boundary[3 * (mesh.n_vertices() + e) + comp] = 1;
      break;
    }
    case SpaceKind::PressureP1: {
      s.family = Family::P1;
      s.n_scalar_dofs = s.n_dofs = mesh.n_vertices();
      s.dofs_per_cell = 4;
      s.cell_dofs.resize(nc * 4);
      s.cell_signs.assign(nc * 4, 1);
      for (int c = 0; c < nc; ++c)
        for (int a = 0; a < 4; ++a) s.cell_dofs[c * 4 + a] = mesh.cells[c][a];
      s.dof_on_boundary.assign(s.n_dofs, 0);  // no essential pressure values
      break;
    }
    case SpaceKind::ElectricN0: {
      s.family = Family::N0;
      s.n_scalar_dofs = s.n_dofs = mesh.n_edges();
      s.dofs_per_cell = 6;
      s.cell_dofs.resize(nc * 6);
      s.cell_signs.resize(nc * 6);
      for (int c = 0; c < nc; ++c)
        for (int e = 0; e < 6; ++e) {
          s.cell_dofs[c * 6 + e] = mesh.cell_edges[c][e];
          s.cell_signs[c * 6 + e] = mesh.cell_edge_signs[c][e];
        }
      s.dof_on_boundary.assign(s.n_dofs, 0);
      for (int e : mesh.boundary_edges) s.dof_on_boundary[e] = 1;
      break;
    }
    case SpaceKind::MagneticRT0: {
      s.family = Family::RT0;
      s.n_scalar_dofs = s.n_dofs = mesh.n_faces();
      s.dofs_per_cell = 4;
      s.cell_dofs.resize(nc * 4);
      s.cell_signs.resize(nc * 4);
      for (int c = 0; c < nc; ++c)
        for (int f = 0; f < 4; ++f) {
          s.cell_dofs[c * 4 + f] = mesh.cell_faces[c][f];
          s.cell_signs[c * 4 + f] = mesh.cell_face_signs[c][f];
        }
      s.dof_on_boundary.assign(s.n_dofs, 0);
      for (int f : mesh.boundary_faces) s.dof_on_boundary[f] = 1;
      break;
    }
  }

  for (int d = 0; d < s.n_dofs; ++d)
    if (s.dof_on_boundary[d]) s.boundary_dofs.push_back(d);
  return s;
}

Field interpolate(const FeSpace& space, const VecFn& f) {
  const Mesh& mesh = *space.mesh;
  Field out{&space, Eigen::VectorXd::Zero(space.n_dofs)};
  switch (space.kind) {
    case SpaceKind::VelocityP2:
      for (int g = 0; g < space.n_scalar_dofs; ++g) {
        Eigen::Vector3d v = f(p2_node_position(mesh, g));
        for (int comp = 0; comp < 3; ++comp) out.coeffs[3 * g + comp] = v[comp];
      }
      break;
    case SpaceKind::ElectricN0:
      for (int e = 0; e < mesh.n_edges(); ++e) out.coeffs[e] = edge_dof(mesh, e, f);
      break;
    case SpaceKind::MagneticRT0:
      for (int fc = 0; fc < mesh.n_faces(); ++fc) out.coeffs[fc] = face_dof(mesh, fc, f);
      break;
    case SpaceKind::PressureP1:
      throw std::invalid_argument("interpolate: vector function on a scalar space");
  }
  return out;
}

Field interpolate(const FeSpace& space, const ScalarFn& f) {
  if (space.kind != SpaceKind::PressureP1)
    throw std::invalid_argument("interpolate: scalar function on a vector space");
  Field out{&space, Eigen::VectorXd::Zero(space.n_dofs)};
  for (int v = 0; v < space.mesh->n_vertices(); ++v)
    out.coeffs[v] = f(space.mesh->vertices[v]);
  return out;
}

std::vector<std::pair<int, double>> boundary_values(const FeSpace& space, const VecFn& f) {
  const Mesh& mesh = *space.mesh;
  std::vector<std::pair<int, double>> out;
  switch (space.kind) {
    case SpaceKind::VelocityP2: {
      for (int v : mesh.boundary_vertices) {
        Eigen::Vector3d val = f(mesh.vertices[v]);
        for (int comp = 0; comp < 3; ++comp) out.emplace_back(3 * v + comp, val[comp]);
      }
      for (int e : mesh.boundary_edges) {
        Eigen::Vector3d val = f(0.5 * (mesh.vertices[mesh.edges[e][0]] +
                                       mesh.vertices[mesh.edges[e][1]]));
        int g = mesh.n_vertices() + e;
        for (int comp = 0; comp < 3; ++comp) out.emplace_back(3 * g + comp, val[comp]);
      }
      break;
    }
    case SpaceKind::ElectricN0:
      for (int e : mesh.boundary_edges) out.emplace_back(e, edge_dof(mesh, e, f));
      break;
    case SpaceKind::MagneticRT0:
      for (int fc : mesh.boundary_faces) out.emplace_back(fc, face_dof(mesh, fc, f));
      break;
    case SpaceKind::PressureP1:
      break;  // zero mean handled by the multiplier, not by boundary data
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, double>> boundary_values(
    const FeSpace& space,
    const std::function<Eigen::Vector3d(double, const Eigen::Vector3d&)>& f, double t) {
  return boundary_values(space, VecFn([&](const Eigen::Vector3d& x) { return f(t, x); }));
}

Eigen::Vector3d eval_vector_field(const Field& f, int cell, const Eigen::Vector3d& ref) {
  const FeSpace& s = *f.space;
  const CellGeometry geo = cell_geometry(*s.mesh, cell);
  const int* dofs = s.dofs(cell);
  const signed char* sg = s.signs(cell);
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  switch (s.kind) {
    case SpaceKind::VelocityP2: {
      double vals[10];
      refbasis::p2_values(ref, vals);
      for (int a = 0; a < 10; ++a)
        for (int comp = 0; comp < 3; ++comp)
          out[comp] += f.coeffs[dofs[3 * a + comp]] * vals[a];
      break;
    }
    case SpaceKind::ElectricN0: {
      Eigen::Vector3d vals[6];
      refbasis::n0_values(ref, vals);
      for (int e = 0; e < 6; ++e)
        out += f.coeffs[dofs[e]] * sg[e] * push_hcurl_value(geo, vals[e]);
      break;
    }
    case SpaceKind::MagneticRT0: {
      Eigen::Vector3d vals[4];
      refbasis::rt0_values(ref, vals);
      for (int fc = 0; fc < 4; ++fc)
        out += f.coeffs[dofs[fc]] * sg[fc] * push_hdiv_value(geo, vals[fc]);
      break;
    }
    case SpaceKind::PressureP1:
      throw std::invalid_argument("eval_vector_field: scalar space");
  }
  return out;
}

double eval_scalar_field(const Field& f, int cell, const Eigen::Vector3d& ref) {
  const FeSpace& s = *f.space;
  if (s.kind != SpaceKind::PressureP1)
    throw std::invalid_argument("eval_scalar_field: vector space");
  double vals[4];
  refbasis::p1_values(ref, vals);
  const int* dofs = s.dofs(cell);
  double out = 0.0;
  for (int a = 0; a < 4; ++a) out += f.coeffs[dofs[a]] * vals[a];
  return out;
}

}  // namespace mhd
