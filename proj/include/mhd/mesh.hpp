#ifndef MHD_MESH_HPP
#define MHD_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <vector>

namespace mhd {

// Local edge slots of a tetrahedron, as pairs of local vertex slots.
inline constexpr std::array<std::array<int, 2>, 6> local_edges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// Local face slots; face p lists the three vertex slots other than p, ascending.
inline constexpr std::array<std::array<int, 3>, 4> local_faces = {
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

// For face p of a positively oriented tet, the normal induced by the
// ascending local triple points outward iff p is even.
inline constexpr int local_face_outward_sign(int p) { return (p % 2 == 0) ? 1 : -1; }

// Conforming tetrahedral mesh of a box.  Cells carry positive orientation.
// Edges/faces are global entities keyed by ascending vertex tuples; the
// per-cell sign records whether the cell-local tuple matches the global one.
struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 4>> cells;

  std::vector<std::array<int, 2>> edges;  // ascending vertex pairs
  std::vector<std::array<int, 3>> faces;  // ascending vertex triples

  std::vector<std::array<int, 6>> cell_edges;
  std::vector<std::array<signed char, 6>> cell_edge_signs;
  std::vector<std::array<int, 4>> cell_faces;
  std::vector<std::array<signed char, 4>> cell_face_signs;

  // Edges (i,j),(i,k),(j,k) of the sorted face (i,j,k).  With all entities
  // ascending, the induced boundary signs are the fixed pattern +1,-1,+1.
  std::vector<std::array<int, 3>> face_edges;

  std::vector<std::array<int, 2>> face_cells;  // incident cells, -1 if none

  std::vector<char> vertex_on_boundary;
  std::vector<char> edge_on_boundary;
  std::vector<char> face_on_boundary;
  std::vector<int> boundary_vertices;
  std::vector<int> boundary_edges;
  std::vector<int> boundary_faces;

  std::vector<double> cell_volumes;
  double h = 0.0;  // longest edge

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  bool empty() const { return cells.empty(); }
};

// Kuhn subdivision of a box: each of nx*ny*nz grid cells is split into the
// six tetrahedra sharing its main diagonal, so adjacent cubes agree on the
// face diagonal (lowest corner to highest corner).
Mesh build_box_mesh(int nx, int ny, int nz,
                    const Eigen::Vector3d& extents = Eigen::Vector3d(1, 1, 1));

// Longest edge over the mesh; throws std::invalid_argument on an empty mesh.
double mesh_size(const Mesh& mesh);

// Incidence query between entity dimensions.  signs is non-empty only for
// the oriented pairs (3,1), (3,2) and (2,1).
struct Connectivity {
  std::vector<std::vector<int>> items;
  std::vector<std::vector<int>> signs;
};
Connectivity connectivity(const Mesh& mesh, int from_dim, int to_dim);

// Plain-text dump: one "v x y z" line per vertex, one "c i0 i1 i2 i3" per cell.
void dump_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace mhd

#endif
