#include "mhd/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace mhd {

namespace {

// Parity of a 3-permutation relative to ascending order.
int triple_parity(int a, int b, int c) {
  int sign = 1;
  if (a > b) { std::swap(a, b); sign = -sign; }
  if (b > c) { std::swap(b, c); sign = -sign; }
  if (a > b) { std::swap(a, b); sign = -sign; }
  return sign;
}

double tet_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                  const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

}  // namespace

Mesh build_box_mesh(int nx, int ny, int nz, const Eigen::Vector3d& extents) {
  if (nx <= 0 || ny <= 0 || nz <= 0)
    throw std::invalid_argument("build_box_mesh: subdivision counts must be positive");
  if (!(extents.array() > 0.0).all())
    throw std::invalid_argument("build_box_mesh: extents must be positive");

  Mesh m;
  auto vid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };

  m.vertices.reserve((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.vertices.emplace_back(extents.x() * i / nx, extents.y() * j / ny,
                                extents.z() * k / nz);

  // Vertex paths 0 -> e_a -> e_a+e_b -> (1,1,1) for the six axis orders.
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                               {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  m.cells.reserve(6 * nx * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& p : perms) {
          int d[3][3] = {};
          d[0][p[0]] = 1;
          d[1][p[0]] = 1;
          d[1][p[1]] = 1;
          d[2][0] = d[2][1] = d[2][2] = 1;
          std::array<int, 4> cell = {vid(i, j, k),
                                     vid(i + d[0][0], j + d[0][1], k + d[0][2]),
                                     vid(i + d[1][0], j + d[1][1], k + d[1][2]),
                                     vid(i + d[2][0], j + d[2][1], k + d[2][2])};
          if (tet_volume(m.vertices[cell[0]], m.vertices[cell[1]],
                         m.vertices[cell[2]], m.vertices[cell[3]]) < 0)
            std::swap(cell[1], cell[2]);
          m.cells.push_back(cell);
        }

  // Deduplicate edges and faces through ordered maps so that the resulting
  // entity numbering is ascending in the vertex tuples.
  std::map<std::array<int, 2>, int> edge_ids;
  std::map<std::array<int, 3>, int> face_ids;
  for (const auto& cell : m.cells) {
    for (const auto& le : local_edges) {
      std::array<int, 2> e = {cell[le[0]], cell[le[1]]};
      if (e[0] > e[1]) std::swap(e[0], e[1]);
      edge_ids.emplace(e, 0);
    }
    for (const auto& lf : local_faces) {
      std::array<int, 3> f = {cell[lf[0]], cell[lf[1]], cell[lf[2]]};
      std::sort(f.begin(), f.end());
      face_ids.emplace(f, 0);
    }
  }
  m.edges.reserve(edge_ids.size());
  for (auto& [e, id] : edge_ids) {
    id = static_cast<int>(m.edges.size());
    m.edges.push_back(e);
  }
  m.faces.reserve(face_ids.size());
  for (auto& [f, id] : face_ids) {
    id = static_cast<int>(m.faces.size());
    m.faces.push_back(f);
  }

  m.cell_edges.resize(m.cells.size());
  m.cell_edge_signs.resize(m.cells.size());
  m.cell_faces.resize(m.cells.size());
  m.cell_face_signs.resize(m.cells.size());
  m.face_cells.assign(m.faces.size(), {-1, -1});
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto& cell = m.cells[c];
    for (int le = 0; le < 6; ++le) {
      int a = cell[local_edges[le][0]], b = cell[local_edges[le][1]];
      std::array<int, 2> key = {std::min(a, b), std::max(a, b)};
      m.cell_edges[c][le] = edge_ids.at(key);
      m.cell_edge_signs[c][le] = static_cast<signed char>(a < b ? 1 : -1);
    }
    for (int lf = 0; lf < 4; ++lf) {
      int a = cell[local_faces[lf][0]], b = cell[local_faces[lf][1]],
          c3 = cell[local_faces[lf][2]];
      std::array<int, 3> key = {a, b, c3};
      std::sort(key.begin(), key.end());
      int f = face_ids.at(key);
      m.cell_faces[c][lf] = f;
      m.cell_face_signs[c][lf] = static_cast<signed char>(triple_parity(a, b, c3));
      if (m.face_cells[f][0] < 0)
        m.face_cells[f][0] = c;
      else
        m.face_cells[f][1] = c;
    }
  }

  m.face_edges.resize(m.faces.size());
  for (int f = 0; f < m.n_faces(); ++f) {
    const auto& fv = m.faces[f];
    m.face_edges[f] = {edge_ids.at({fv[0], fv[1]}), edge_ids.at({fv[0], fv[2]}),
                       edge_ids.at({fv[1], fv[2]})};
  }

  m.vertex_on_boundary.assign(m.vertices.size(), 0);
  m.edge_on_boundary.assign(m.edges.size(), 0);
  m.face_on_boundary.assign(m.faces.size(), 0);
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.face_cells[f][1] >= 0) continue;
    m.face_on_boundary[f] = 1;
    m.boundary_faces.push_back(f);
    for (int v : m.faces[f]) m.vertex_on_boundary[v] = 1;
    for (int e : m.face_edges[f]) m.edge_on_boundary[e] = 1;
  }
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.vertex_on_boundary[v]) m.boundary_vertices.push_back(v);
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edge_on_boundary[e]) m.boundary_edges.push_back(e);

  m.cell_volumes.resize(m.cells.size());
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto& cell = m.cells[c];
    m.cell_volumes[c] = tet_volume(m.vertices[cell[0]], m.vertices[cell[1]],
                                   m.vertices[cell[2]], m.vertices[cell[3]]);
  }

  for (const auto& e : m.edges)
    m.h = std::max(m.h, (m.vertices[e[1]] - m.vertices[e[0]]).norm());

  return m;
}

double mesh_size(const Mesh& mesh) {
  if (mesh.empty()) throw std::invalid_argument("mesh_size: empty mesh");
  return mesh.h;
}

Connectivity connectivity(const Mesh& mesh, int from_dim, int to_dim) {
  if (from_dim < 0 || from_dim > 3 || to_dim < 0 || to_dim > 3)
    throw std::invalid_argument("connectivity: dimensions must be in 0..3");

  auto counts = [&](int dim) -> int {
    switch (dim) {
      case 0: return mesh.n_vertices();
      case 1: return mesh.n_edges();
      case 2: return mesh.n_faces();
      default: return mesh.n_cells();
    }
  };

  Connectivity out;
  if (from_dim == to_dim) {
    out.items.resize(counts(from_dim));
    for (int i = 0; i < counts(from_dim); ++i) out.items[i] = {i};
    return out;
  }

  auto downward = [&](int fd, int td) {
    Connectivity c;
    c.items.resize(counts(fd));
    if (fd == 3 && td == 0) {
      for (int i = 0; i < mesh.n_cells(); ++i)
        c.items[i].assign(mesh.cells[i].begin(), mesh.cells[i].end());
    } else if (fd == 3 && td == 1) {
      c.signs.resize(counts(fd));
      for (int i = 0; i < mesh.n_cells(); ++i) {
        c.items[i].assign(mesh.cell_edges[i].begin(), mesh.cell_edges[i].end());
        c.signs[i].assign(mesh.cell_edge_signs[i].begin(), mesh.cell_edge_signs[i].end());
      }
    } else if (fd == 3 && td == 2) {
      c.signs.resize(counts(fd));
      for (int i = 0; i < mesh.n_cells(); ++i) {
        c.items[i].assign(mesh.cell_faces[i].begin(), mesh.cell_faces[i].end());
        c.signs[i].assign(mesh.cell_face_signs[i].begin(), mesh.cell_face_signs[i].end());
      }
    } else if (fd == 2 && td == 0) {
      for (int i = 0; i < mesh.n_faces(); ++i)
        c.items[i].assign(mesh.faces[i].begin(), mesh.faces[i].end());
    } else if (fd == 2 && td == 1) {
      c.signs.resize(counts(fd));
      for (int i = 0; i < mesh.n_faces(); ++i) {
        c.items[i].assign(mesh.face_edges[i].begin(), mesh.face_edges[i].end());
        c.signs[i] = {1, -1, 1};
      }
    } else {  // (1,0)
      for (int i = 0; i < mesh.n_edges(); ++i)
        c.items[i].assign(mesh.edges[i].begin(), mesh.edges[i].end());
    }
    return c;
  };

  if (from_dim > to_dim) return downward(from_dim, to_dim);

  Connectivity down = downward(to_dim, from_dim);
  out.items.resize(counts(from_dim));
  for (int i = 0; i < static_cast<int>(down.items.size()); ++i)
    for (int j : down.items[i]) out.items[j].push_back(i);
  return out;
}

void dump_mesh(const Mesh& mesh, std::ostream& out) {
  for (const auto& v : mesh.vertices)
    out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& c : mesh.cells)
    out << "c " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
}

}  // namespace mhd
