#include "mhd/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mhd {

namespace {

// Quadrature degrees per form: exact for the polynomial integrand, plus a
// margin of two on the couplings that sample the piecewise-linear B_given.
constexpr int kDegMassP1 = 2;
constexpr int kDegMassP2 = 4;
constexpr int kDegMassVec = 2;
constexpr int kDegStiff = 2;
constexpr int kDegConv = 5;
constexpr int kDegDiv = 2;
constexpr int kDegCurl = 2;
constexpr int kDegExB = 6;
constexpr int kDegUxBxB = 8;
constexpr int kDegUxB = 6;
constexpr int kDegLoad = 6;

int find_entry(const CsrMatrix& A, int r, int c) {
  const int* base = A.col_idx.data();
  const int* it = std::lower_bound(base + A.row_ptr[r], base + A.row_ptr[r + 1], c);
  if (it == base + A.row_ptr[r + 1] || *it != c)
    throw std::logic_error("assembly: entry missing from sparsity pattern");
  return static_cast<int>(it - base);
}

inline void add_value(CsrMatrix& A, int idx, double v, bool atomic) {
  if (atomic) {
#ifdef _OPENMP
#pragma omp atomic
#endif
    A.vals[idx] += v;
  } else {
    A.vals[idx] += v;
  }
}

inline void add_vec(Eigen::VectorXd& b, int idx, double v, bool atomic) {
  if (atomic) {
#ifdef _OPENMP
#pragma omp atomic
#endif
    b[idx] += v;
  } else {
    b[idx] += v;
  }
}

// Per-thread buffers for one cell.
struct Scratch {
  std::vector<Eigen::Vector3d> vecA, vecB, field;
  std::vector<double> scalA, scalB;
  std::vector<double> local;
};

template <class Body>
void for_cells(int n_cells, bool parallel, const Body& body) {
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      Scratch s;
#pragma omp for schedule(static)
      for (int c = 0; c < n_cells; ++c) body(c, s);
    }
    return;
#endif
  }
  Scratch s;
  for (int c = 0; c < n_cells; ++c) body(c, s);
}

// Evaluate a velocity (P2 vector) field at the rule points of one cell.
void eval_p2vec(const Field& f, const FeSpace& vel, int cell, const BasisTable& tab,
                std::vector<Eigen::Vector3d>& out) {
  out.assign(tab.n_pts, Eigen::Vector3d::Zero());
  const int* dofs = vel.dofs(cell);
  for (int q = 0; q < tab.n_pts; ++q) {
    const double* vals = &tab.values[q * 10];
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int a = 0; a < 10; ++a)
      for (int c = 0; c < 3; ++c) v[c] += f.coeffs[dofs[3 * a + c]] * vals[a];
    out[q] = v;
  }
}

// Evaluate a magnetic (RT0) field at the rule points of one cell.
void eval_rt0(const Field& f, const FeSpace& mag, int cell, const BasisTable& tab,
              const CellGeometry& geo, std::vector<Eigen::Vector3d>& out) {
  out.assign(tab.n_pts, Eigen::Vector3d::Zero());
  const int* dofs = mag.dofs(cell);
  const signed char* sg = mag.signs(cell);
  double coef[4];
  for (int i = 0; i < 4; ++i) coef[i] = f.coeffs[dofs[i]] * sg[i];
  for (int q = 0; q < tab.n_pts; ++q) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i < 4; ++i) v += coef[i] * tab.vvalues[q * 4 + i];
    out[q] = push_hdiv_value(geo, v);
  }
}

}  // namespace

CsrMatrix curl_incidence(const Mesh& mesh) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<std::size_t>(mesh.n_faces()) * 3);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    ts.push_back({f, mesh.face_edges[f][0], 1.0});
    ts.push_back({f, mesh.face_edges[f][1], -1.0});
    ts.push_back({f, mesh.face_edges[f][2], 1.0});
  }
  return CsrMatrix::from_triplets(mesh.n_faces(), mesh.n_edges(), std::move(ts));
}

void apply_constraints(CsrMatrix& A, Eigen::VectorXd& rhs,
                       const std::vector<char>& constrained,
                       const Eigen::VectorXd& values) {
  if (static_cast<int>(constrained.size()) != A.rows || values.size() != A.rows)
    throw std::invalid_argument("apply_constraints: size mismatch");
  for (int r = 0; r < A.rows; ++r) {
    if (constrained[r]) {
      for (int i = A.row_ptr[r]; i < A.row_ptr[r + 1]; ++i)
        A.vals[i] = (A.col_idx[i] == r) ? 1.0 : 0.0;
      rhs[r] = values[r];
    } else {
      for (int i = A.row_ptr[r]; i < A.row_ptr[r + 1]; ++i) {
        int c = A.col_idx[i];
        if (constrained[c]) {
          rhs[r] -= A.vals[i] * values[c];
          A.vals[i] = 0.0;
        }
      }
    }
  }
}

struct Assembler::Cache {
  std::map<int, QuadratureRule> rules;
  std::map<std::pair<int, int>, BasisTable> tables;  // (family, degree)
  std::map<std::pair<int, int>, CsrMatrix> skeletons;

  bool mono_built = false;
  CsrMatrix mono_skel;
  bool base_valid = false;
  double base_k = 0, base_Re = 0, base_Rm = 0, base_s = 0;
  std::vector<double> base_vals;

  bool mass_cached = false;
  CsrMatrix mass_u, mass_B;

  const QuadratureRule& rule(int degree) {
    auto it = rules.find(degree);
    if (it == rules.end())
      it = rules.emplace(degree, make_conical_rule((degree + 2) / 2)).first;
    return it->second;
  }
  const BasisTable& table(Family f, int degree) {
    auto key = std::make_pair(static_cast<int>(f), degree);
    auto it = tables.find(key);
    if (it == tables.end()) it = tables.emplace(key, tabulate(f, rule(degree))).first;
    return it->second;
  }
};

Assembler::Assembler(const Discretization& disc, bool parallel)
    : disc_(&disc), parallel_(parallel), cache_(std::make_unique<Cache>()) {}
Assembler::~Assembler() = default;

SystemLayout Assembler::layout() const {
  SystemLayout l;
  l.n_u = disc_->velocity.n_dofs;
  l.n_B = disc_->magnetic.n_dofs;
  l.n_E = disc_->electric.n_dofs;
  l.n_p = disc_->pressure.n_dofs;
  l.off_u = 0;
  l.off_B = l.n_u;
  l.off_E = l.off_B + l.n_B;
  l.off_p = l.off_E + l.n_E;
  l.off_lambda = l.off_p + l.n_p;
  l.size = l.off_lambda + 1;
  return l;
}

namespace {

CsrMatrix make_skeleton(const FeSpace& rows, const FeSpace& cols) {
  std::vector<Triplet> ts;
  ts.reserve(static_cast<std::size_t>(rows.mesh->n_cells()) * rows.dofs_per_cell *
             cols.dofs_per_cell);
  for (int c = 0; c < rows.mesh->n_cells(); ++c) {
    const int* rd = rows.dofs(c);
    const int* cd = cols.dofs(c);
    for (int i = 0; i < rows.dofs_per_cell; ++i)
      for (int j = 0; j < cols.dofs_per_cell; ++j) ts.push_back({rd[i], cd[j], 0.0});
  }
  return CsrMatrix::from_triplets(rows.n_dofs, cols.n_dofs, std::move(ts));
}

}  // namespace

// ---------------------------------------------------------------------------
// Form kernels.  Each assembles into M with the given block offsets so the
// same kernel serves the standalone matrices and the monolithic system.
// ---------------------------------------------------------------------------

namespace {

struct KernelCtx {
  const Discretization* disc;
  Assembler::Cache* cache;
  bool parallel;
};

void assemble_mass_into(const KernelCtx& ctx, const FeSpace& space, double weight,
                        CsrMatrix& M, int off_r, int off_c, double coef) {
  const Mesh& mesh = *space.mesh;
  const bool atomic = ctx.parallel;
  const double w_all = weight * coef;

  if (space.family == Family::P1 || space.family == Family::P2) {
    const int deg = space.family == Family::P2 ? kDegMassP2 : kDegMassP1;
    const QuadratureRule& rule = ctx.cache->rule(deg);
    const BasisTable& tab = ctx.cache->table(space.family, deg);
    const int nb = tab.n_dofs;
    for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
      const CellGeometry geo = cell_geometry(mesh, c);
      s.local.assign(nb * nb, 0.0);
      for (int q = 0; q < tab.n_pts; ++q) {
        const double* v = &tab.values[q * nb];
        const double wq = rule.weights[q] * geo.detJ * w_all;
        for (int a = 0; a < nb; ++a)
          for (int b = 0; b < nb; ++b) s.local[a * nb + b] += wq * v[a] * v[b];
      }
      const int* dofs = space.dofs(c);
      if (space.components == 3) {
        for (int a = 0; a < nb; ++a)
          for (int b = 0; b < nb; ++b) {
            if (s.local[a * nb + b] == 0.0) continue;
            for (int comp = 0; comp < 3; ++comp)
              add_value(M,
                        find_entry(M, off_r + dofs[3 * a + comp], off_c + dofs[3 * b + comp]),
                        s.local[a * nb + b], atomic);
          }
      } else {
        for (int a = 0; a < nb; ++a)
          for (int b = 0; b < nb; ++b)
            add_value(M, find_entry(M, off_r + dofs[a], off_c + dofs[b]),
                      s.local[a * nb + b], atomic);
      }
    });
    return;
  }

  const QuadratureRule& rule = ctx.cache->rule(kDegMassVec);
  const BasisTable& tab = ctx.cache->table(space.family, kDegMassVec);
  const int nb = tab.n_dofs;
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const signed char* sg = space.signs(c);
    s.local.assign(nb * nb, 0.0);
    s.vecA.resize(nb);
    for (int q = 0; q < tab.n_pts; ++q) {
      for (int a = 0; a < nb; ++a) {
        const Eigen::Vector3d& rv = tab.vvalues[q * nb + a];
        s.vecA[a] = (space.family == Family::N0 ? push_hcurl_value(geo, rv)
                                                : push_hdiv_value(geo, rv)) *
                    static_cast<double>(sg[a]);
      }
      const double wq = rule.weights[q] * geo.detJ * w_all;
      for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b) s.local[a * nb + b] += wq * s.vecA[a].dot(s.vecA[b]);
    }
    const int* dofs = space.dofs(c);
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b)
        add_value(M, find_entry(M, off_r + dofs[a], off_c + dofs[b]), s.local[a * nb + b],
                  atomic);
  });
}

void assemble_stiffness_into(const KernelCtx& ctx, CsrMatrix& M, int off_r, int off_c,
                             double coef) {
  const FeSpace& vel = ctx.disc->velocity;
  const Mesh& mesh = *vel.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegStiff);
  const BasisTable& tab = ctx.cache->table(Family::P2, kDegStiff);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    s.local.assign(100, 0.0);
    s.vecA.resize(10);
    for (int q = 0; q < tab.n_pts; ++q) {
      for (int a = 0; a < 10; ++a) s.vecA[a] = push_gradient(geo, tab.grads[q * 10 + a]);
      const double wq = rule.weights[q] * geo.detJ * coef;
      for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) s.local[a * 10 + b] += wq * s.vecA[a].dot(s.vecA[b]);
    }
    const int* dofs = vel.dofs(c);
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b)
        for (int comp = 0; comp < 3; ++comp)
          add_value(M, find_entry(M, off_r + dofs[3 * a + comp], off_c + dofs[3 * b + comp]),
                    s.local[a * 10 + b], atomic);
  });
}

// Skew transport form c(adv, u, v) = 1/2 (adv.grad u, v) - 1/2 (adv.grad v, u);
// component-diagonal in the P2 layers.
void assemble_convection_into(const KernelCtx& ctx, const Field& adv, CsrMatrix& M,
                              int off_r, int off_c, double coef) {
  const FeSpace& vel = ctx.disc->velocity;
  const Mesh& mesh = *vel.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegConv);
  const BasisTable& tab = ctx.cache->table(Family::P2, kDegConv);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    eval_p2vec(adv, vel, c, tab, s.field);
    s.local.assign(100, 0.0);
    s.scalA.resize(10);  // adv . grad(phi_a) per dof
    for (int q = 0; q < tab.n_pts; ++q) {
      const double* v = &tab.values[q * 10];
      for (int a = 0; a < 10; ++a)
        s.scalA[a] = s.field[q].dot(push_gradient(geo, tab.grads[q * 10 + a]));
      const double wq = 0.5 * rule.weights[q] * geo.detJ * coef;
      for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b)
          s.local[a * 10 + b] += wq * (s.scalA[b] * v[a] - s.scalA[a] * v[b]);
    }
    const int* dofs = vel.dofs(c);
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b)
        for (int comp = 0; comp < 3; ++comp)
          add_value(M, find_entry(M, off_r + dofs[3 * a + comp], off_c + dofs[3 * b + comp]),
                    s.local[a * 10 + b], atomic);
  });
}

void assemble_divergence_into(const KernelCtx& ctx, CsrMatrix& M, int off_r, int off_c,
                              double coef, bool transpose) {
  const FeSpace& vel = ctx.disc->velocity;
  const FeSpace& pres = ctx.disc->pressure;
  const Mesh& mesh = *vel.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegDiv);
  const BasisTable& tabv = ctx.cache->table(Family::P2, kDegDiv);
  const BasisTable& tabp = ctx.cache->table(Family::P1, kDegDiv);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    s.local.assign(4 * 30, 0.0);  // [q][3b+d]
    for (int qp = 0; qp < tabv.n_pts; ++qp) {
      const double wq = rule.weights[qp] * geo.detJ * coef;
      const double* pv = &tabp.values[qp * 4];
      for (int b = 0; b < 10; ++b) {
        const Eigen::Vector3d g = push_gradient(geo, tabv.grads[qp * 10 + b]);
        for (int d = 0; d < 3; ++d)
          for (int a = 0; a < 4; ++a) s.local[a * 30 + 3 * b + d] += wq * pv[a] * g[d];
      }
    }
    const int* pd = pres.dofs(c);
    const int* vd = vel.dofs(c);
    for (int a = 0; a < 4; ++a)
      for (int j = 0; j < 30; ++j) {
        double v = s.local[a * 30 + j];
        if (transpose)
          add_value(M, find_entry(M, off_r + vd[j], off_c + pd[a]), v, atomic);
        else
          add_value(M, find_entry(M, off_r + pd[a], off_c + vd[j]), v, atomic);
      }
  });
}

// (curl E, C) with rows RT0, cols N0; transpose gives (B, curl F).
void assemble_curl_into(const KernelCtx& ctx, CsrMatrix& M, int off_r, int off_c,
                        double coef, bool transpose) {
  const FeSpace& mag = ctx.disc->magnetic;
  const FeSpace& elec = ctx.disc->electric;
  const Mesh& mesh = *mag.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegCurl);
  const BasisTable& tabB = ctx.cache->table(Family::RT0, kDegCurl);
  const BasisTable& tabE = ctx.cache->table(Family::N0, kDegCurl);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    const signed char* sgB = mag.signs(c);
    const signed char* sgE = elec.signs(c);
    s.vecB.resize(6);
    for (int e = 0; e < 6; ++e)
      s.vecB[e] = push_hcurl_curl(geo, tabE.curls[e]) * static_cast<double>(sgE[e]);
    s.local.assign(4 * 6, 0.0);
    s.vecA.resize(4);
    for (int q = 0; q < tabB.n_pts; ++q) {
      for (int f = 0; f < 4; ++f)
        s.vecA[f] = push_hdiv_value(geo, tabB.vvalues[q * 4 + f]) *
                    static_cast<double>(sgB[f]);
      const double wq = rule.weights[q] * geo.detJ * coef;
      for (int f = 0; f < 4; ++f)
        for (int e = 0; e < 6; ++e) s.local[f * 6 + e] += wq * s.vecA[f].dot(s.vecB[e]);
    }
    const int* bd = mag.dofs(c);
    const int* ed = elec.dofs(c);
    for (int f = 0; f < 4; ++f)
      for (int e = 0; e < 6; ++e) {
        double v = s.local[f * 6 + e];
        if (transpose)
          add_value(M, find_entry(M, off_r + ed[e], off_c + bd[f]), v, atomic);
        else
          add_value(M, find_entry(M, off_r + bd[f], off_c + ed[e]), v, atomic);
      }
  });
}

// ((E x B_given), v): rows velocity, cols electric.
void assemble_exb_into(const KernelCtx& ctx, const Field& B_given, CsrMatrix& M,
                       int off_r, int off_c, double coef) {
  const FeSpace& vel = ctx.disc->velocity;
  const FeSpace& elec = ctx.disc->electric;
  const FeSpace& mag = ctx.disc->magnetic;
  const Mesh& mesh = *vel.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegExB);
  const BasisTable& tabV = ctx.cache->table(Family::P2, kDegExB);
  const BasisTable& tabE = ctx.cache->table(Family::N0, kDegExB);
  const BasisTable& tabB = ctx.cache->table(Family::RT0, kDegExB);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    eval_rt0(B_given, mag, c, tabB, geo, s.field);
    const signed char* sgE = elec.signs(c);
    s.local.assign(30 * 6, 0.0);
    for (int q = 0; q < tabE.n_pts; ++q) {
      const double wq = rule.weights[q] * geo.detJ * coef;
      const double* pv = &tabV.values[q * 10];
      for (int e = 0; e < 6; ++e) {
        const Eigen::Vector3d we =
            push_hcurl_value(geo, tabE.vvalues[q * 6 + e]) * static_cast<double>(sgE[e]);
        const Eigen::Vector3d cross = we.cross(s.field[q]);
        for (int a = 0; a < 10; ++a) {
          const double wphi = wq * pv[a];
          for (int comp = 0; comp < 3; ++comp)
            s.local[(3 * a + comp) * 6 + e] += wphi * cross[comp];
        }
      }
    }
    const int* vd = vel.dofs(c);
    const int* ed = elec.dofs(c);
    for (int i = 0; i < 30; ++i)
      for (int e = 0; e < 6; ++e)
        add_value(M, find_entry(M, off_r + vd[i], off_c + ed[e]), s.local[i * 6 + e],
                  atomic);
  });
}

// (((u x B_given) x B_given), v): rows and cols velocity.  Pointwise the
// integrand is phi_a phi_b G_cd with G = B B^T - |B|^2 I.
void assemble_uxbxb_into(const KernelCtx& ctx, const Field& B_given, CsrMatrix& M,
                         int off_r, int off_c, double coef) {
  const FeSpace& vel = ctx.disc->velocity;
  const FeSpace& mag = ctx.disc->magnetic;
  const Mesh& mesh = *vel.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegUxBxB);
  const BasisTable& tabV = ctx.cache->table(Family::P2, kDegUxBxB);
  const BasisTable& tabB = ctx.cache->table(Family::RT0, kDegUxBxB);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    eval_rt0(B_given, mag, c, tabB, geo, s.field);
    s.local.assign(900, 0.0);
    for (int q = 0; q < tabV.n_pts; ++q) {
      const Eigen::Vector3d& B = s.field[q];
      Eigen::Matrix3d G = B * B.transpose() - B.squaredNorm() * Eigen::Matrix3d::Identity();
      const double wq = rule.weights[q] * geo.detJ * coef;
      const double* pv = &tabV.values[q * 10];
      for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b) {
          const double f = wq * pv[a] * pv[b];
          for (int cc = 0; cc < 3; ++cc)
            for (int dd = 0; dd < 3; ++dd)
              s.local[(3 * a + cc) * 30 + 3 * b + dd] += f * G(cc, dd);
        }
    }
    const int* vd = vel.dofs(c);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 30; ++j)
        add_value(M, find_entry(M, off_r + vd[i], off_c + vd[j]), s.local[i * 30 + j],
                  atomic);
  });
}

// ((u x B_given), F): rows electric, cols velocity.
void assemble_uxb_into(const KernelCtx& ctx, const Field& B_given, CsrMatrix& M,
                       int off_r, int off_c, double coef) {
  const FeSpace& vel = ctx.disc->velocity;
  const FeSpace& elec = ctx.disc->electric;
  const FeSpace& mag = ctx.disc->magnetic;
  const Mesh& mesh = *vel.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegUxB);
  const BasisTable& tabV = ctx.cache->table(Family::P2, kDegUxB);
  const BasisTable& tabE = ctx.cache->table(Family::N0, kDegUxB);
  const BasisTable& tabB = ctx.cache->table(Family::RT0, kDegUxB);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    eval_rt0(B_given, mag, c, tabB, geo, s.field);
    const signed char* sgE = elec.signs(c);
    s.local.assign(6 * 30, 0.0);
    for (int q = 0; q < tabE.n_pts; ++q) {
      const double wq = rule.weights[q] * geo.detJ * coef;
      const double* pv = &tabV.values[q * 10];
      const Eigen::Vector3d& B = s.field[q];
      for (int e = 0; e < 6; ++e) {
        const Eigen::Vector3d we =
            push_hcurl_value(geo, tabE.vvalues[q * 6 + e]) * static_cast<double>(sgE[e]);
        // (e_d x B) . w = det[e_d, B, w] = e_d . (B x w) for unit direction e_d
        const Eigen::Vector3d bxw = B.cross(we);
        for (int b = 0; b < 10; ++b) {
          const double wphi = wq * pv[b];
          for (int d = 0; d < 3; ++d)
            s.local[e * 30 + 3 * b + d] += wphi * bxw[d];
        }
      }
    }
    const int* vd = vel.dofs(c);
    const int* ed = elec.dofs(c);
    for (int e = 0; e < 6; ++e)
      for (int j = 0; j < 30; ++j)
        add_value(M, find_entry(M, off_r + ed[e], off_c + vd[j]), s.local[e * 30 + j],
                  atomic);
  });
}

void assemble_mean_into(const KernelCtx& ctx, CsrMatrix* M, Eigen::VectorXd* vec,
                        int off_r, int off_c, bool transpose) {
  const FeSpace& pres = ctx.disc->pressure;
  const Mesh& mesh = *pres.mesh;
  const bool atomic = ctx.parallel;
  const QuadratureRule& rule = ctx.cache->rule(kDegMassP1);
  const BasisTable& tab = ctx.cache->table(Family::P1, kDegMassP1);
  for_cells(mesh.n_cells(), ctx.parallel, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(mesh, c);
    s.scalA.assign(4, 0.0);
    for (int q = 0; q < tab.n_pts; ++q) {
      const double wq = rule.weights[q] * geo.detJ;
      for (int a = 0; a < 4; ++a) s.scalA[a] += wq * tab.values[q * 4 + a];
    }
    const int* pd = pres.dofs(c);
    for (int a = 0; a < 4; ++a) {
      if (vec) add_vec(*vec, pd[a], s.scalA[a], atomic);
      if (M) {
        if (transpose)
          add_value(*M, find_entry(*M, off_r, off_c + pd[a]), s.scalA[a], atomic);
        else
          add_value(*M, find_entry(*M, off_r + pd[a], off_c), s.scalA[a], atomic);
      }
    }
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Standalone form matrices.
// ---------------------------------------------------------------------------

namespace {
int space_id(const Discretization& d, const FeSpace& s) {
  if (&s == &d.velocity) return 0;
  if (&s == &d.pressure) return 1;
  if (&s == &d.magnetic) return 2;
  if (&s == &d.electric) return 3;
  throw std::invalid_argument("assembly: space does not belong to the discretization");
}
}  // namespace

CsrMatrix Assembler::mass(const FeSpace& space, double weight) const {
  auto key = std::make_pair(space_id(*disc_, space), space_id(*disc_, space));
  auto it = cache_->skeletons.find(key);
  if (it == cache_->skeletons.end())
    it = cache_->skeletons.emplace(key, make_skeleton(space, space)).first;
  CsrMatrix M = it->second;
  std::fill(M.vals.begin(), M.vals.end(), 0.0);
  KernelCtx ctx{disc_, cache_.get(), parallel_};
  assemble_mass_into(ctx, space, weight, M, 0, 0, 1.0);
  return M;
}

CsrMatrix Assembler::stiffness(double weight) const {
  auto key = std::make_pair(0, 0);
  auto it = cache_->skeletons.find(key);
  if (it == cache_->skeletons.end())
    it = cache_->skeletons.emplace(key, make_skeleton(disc_->velocity, disc_->velocity)).first;
  CsrMatrix M = it->second;
  std::fill(M.vals.begin(), M.vals.end(), 0.0);
  KernelCtx ctx{disc_, cache_.get(), parallel_};
  assemble_stiffness_into(ctx, M, 0, 0, weight);
  return M;
}

CsrMatrix Assembler::convection(const Field& advector) const {
  if (advector.space != &disc_->velocity)
    throw std::invalid_argument("convection: advector must live in the velocity space");
  auto key = std::make_pair(0, 0);
  auto it = cache_->skeletons.find(key);
  if (it == cache_->skeletons.end())
    it = cache_->skeletons.emplace(key, make_skeleton(disc_->velocity, disc_->velocity)).first;
  CsrMatrix M = it->second;
  std::fill(M.vals.begin(), M.vals.end(), 0.0);
  KernelCtx ctx{disc_, cache_.get(), parallel_};
  assemble_convection_into(ctx, advector, M, 0, 0, 1.0);
  return M;
}

CsrMatrix Assembler::divergence() const {
  auto key = std::make_pair(1, 0);
  auto it = cache_->skeletons.find(key);
  if (it == cache_->skeletons.end())
    it = cache_->skeletons.emplace(key, make_skeleton(disc_->pressure, disc_->velocity)).first;
  CsrMatrix M = it->second;
  std::fill(M.vals.begin(), M.vals.end(), 0.0);
  KernelCtx ctx{disc_, cache_.get(), parallel_};
  assemble_divergence_into(ctx, M, 0, 0, 1.0, false);
  return M;
}

CsrMatrix Assembler::cross_coupling(Coupling which, const Field* B_given) const {
  const bool needs_B =
      which == Coupling::ExB_v || which == Coupling::UxBxB_v || which == Coupling::UxB_F;
  if (needs_B) {
    if (!B_given) throw std::invalid_argument("cross_coupling: B_given required");
    if (B_given->space != &disc_->magnetic)
      throw std::invalid_argument("cross_coupling: B_given must live in the magnetic space");
  }

  const FeSpace* rows = nullptr;
  const FeSpace* cols = nullptr;
  switch (which) {
    case Coupling::ExB_v: rows = &disc_->velocity; cols = &disc_->electric; break;
    case Coupling::UxBxB_v: rows = &disc_->velocity; cols = &disc_->velocity; break;
    case Coupling::UxB_F: rows = &disc_->electric; cols = &disc_->velocity; break;
    case Coupling::E_F: rows = &disc_->electric; cols = &disc_->electric; break;
    case Coupling::CurlE_C: rows = &disc_->magnetic; cols = &disc_->electric; break;
    case Coupling::B_CurlF: rows = &disc_->electric; cols = &disc_->magnetic; break;
  }
  auto key = std::make_pair(space_id(*disc_, *rows), space_id(*disc_, *cols));
  auto it = cache_->skeletons.find(key);
  if (it == cache_->skeletons.end())
    it = cache_->skeletons.emplace(key, make_skeleton(*rows, *cols)).first;
  CsrMatrix M = it->second;
  std::fill(M.vals.begin(), M.vals.end(), 0.0);
  KernelCtx ctx{disc_, cache_.get(), parallel_};
  switch (which) {
    case Coupling::ExB_v: assemble_exb_into(ctx, *B_given, M, 0, 0, 1.0); break;
    case Coupling::UxBxB_v: assemble_uxbxb_into(ctx, *B_given, M, 0, 0, 1.0); break;
    case Coupling::UxB_F: assemble_uxb_into(ctx, *B_given, M, 0, 0, 1.0); break;
    case Coupling::E_F: assemble_mass_into(ctx, disc_->electric, 1.0, M, 0, 0, 1.0); break;
    case Coupling::CurlE_C: assemble_curl_into(ctx, M, 0, 0, 1.0, false); break;
    case Coupling::B_CurlF: assemble_curl_into(ctx, M, 0, 0, 1.0, true); break;
  }
  return M;
}

// ---------------------------------------------------------------------------
// Load functionals.
// ---------------------------------------------------------------------------

Eigen::VectorXd Assembler::load_velocity(const TimeVecFn& f, double t) const {
  const FeSpace& vel = disc_->velocity;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(vel.n_dofs);
  if (!f) return out;
  const QuadratureRule& rule = cache_->rule(kDegLoad);
  const BasisTable& tab = cache_->table(Family::P2, kDegLoad);
  const bool atomic = parallel_;
  for_cells(disc_->mesh.n_cells(), parallel_, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    s.scalA.assign(30, 0.0);
    for (int q = 0; q < tab.n_pts; ++q) {
      const Eigen::Vector3d fx = f(t, geo.map(rule.points[q]));
      const double wq = rule.weights[q] * geo.detJ;
      const double* pv = &tab.values[q * 10];
      for (int a = 0; a < 10; ++a)
        for (int comp = 0; comp < 3; ++comp)
          s.scalA[3 * a + comp] += wq * pv[a] * fx[comp];
    }
    const int* vd = vel.dofs(c);
    for (int i = 0; i < 30; ++i) add_vec(out, vd[i], s.scalA[i], atomic);
  });
  return out;
}

Eigen::VectorXd Assembler::load_magnetic(const TimeVecFn& g, double t) const {
  const FeSpace& mag = disc_->magnetic;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mag.n_dofs);
  if (!g) return out;
  const QuadratureRule& rule = cache_->rule(kDegLoad);
  const BasisTable& tab = cache_->table(Family::RT0, kDegLoad);
  const bool atomic = parallel_;
  for_cells(disc_->mesh.n_cells(), parallel_, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    const signed char* sg = mag.signs(c);
    s.scalA.assign(4, 0.0);
    for (int q = 0; q < tab.n_pts; ++q) {
      const Eigen::Vector3d gx = g(t, geo.map(rule.points[q]));
      const double wq = rule.weights[q] * geo.detJ;
      for (int a = 0; a < 4; ++a)
        s.scalA[a] += wq * gx.dot(push_hdiv_value(geo, tab.vvalues[q * 4 + a]) *
                                  static_cast<double>(sg[a]));
    }
    const int* bd = mag.dofs(c);
    for (int a = 0; a < 4; ++a) add_vec(out, bd[a], s.scalA[a], atomic);
  });
  return out;
}

Eigen::VectorXd Assembler::load_ohm(const TimeVecFn& j_ex, const TimeVecFn& B_ex,
                                    double s_coef, double alpha_coef, double t) const {
  const FeSpace& elec = disc_->electric;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(elec.n_dofs);
  if (!j_ex && !B_ex) return out;
  const QuadratureRule& rule = cache_->rule(kDegLoad);
  const BasisTable& tab = cache_->table(Family::N0, kDegLoad);
  const bool atomic = parallel_;
  for_cells(disc_->mesh.n_cells(), parallel_, [&](int c, Scratch& s) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    const signed char* sg = elec.signs(c);
    s.scalA.assign(6, 0.0);
    s.vecA.resize(6);
    for (int e = 0; e < 6; ++e)
      s.vecA[e] = push_hcurl_curl(geo, tab.curls[e]) * static_cast<double>(sg[e]);
    for (int q = 0; q < tab.n_pts; ++q) {
      const Eigen::Vector3d x = geo.map(rule.points[q]);
      const Eigen::Vector3d jx = j_ex ? j_ex(t, x) : Eigen::Vector3d::Zero();
      const Eigen::Vector3d Bx = B_ex ? B_ex(t, x) : Eigen::Vector3d::Zero();
      const double wq = rule.weights[q] * geo.detJ;
      for (int e = 0; e < 6; ++e) {
        const Eigen::Vector3d we =
            push_hcurl_value(geo, tab.vvalues[q * 6 + e]) * static_cast<double>(sg[e]);
        s.scalA[e] += wq * (s_coef * jx.dot(we) - alpha_coef * Bx.dot(s.vecA[e]));
      }
    }
    const int* ed = elec.dofs(c);
    for (int e = 0; e < 6; ++e) add_vec(out, ed[e], s.scalA[e], atomic);
  });
  return out;
}

Eigen::VectorXd Assembler::pressure_mean_vector() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(disc_->pressure.n_dofs);
  KernelCtx ctx{disc_, cache_.get(), parallel_};
  assemble_mean_into(ctx, nullptr, &out, 0, 0, false);
  return out;
}

// ---------------------------------------------------------------------------
// Monolithic step system.
// ---------------------------------------------------------------------------

namespace {

void merge_block(CsrMatrix& mono, const CsrMatrix& block, int off_r, int off_c,
                 double coef, bool transpose = false) {
  for (int r = 0; r < block.rows; ++r)
    for (int i = block.row_ptr[r]; i < block.row_ptr[r + 1]; ++i) {
      int c = block.col_idx[i];
      double v = coef * block.vals[i];
      int rr = transpose ? off_r + c : off_r + r;
      int cc = transpose ? off_c + r : off_c + c;
      mono.vals[find_entry(mono, rr, cc)] += v;
    }
}

}  // namespace

BlockSystem Assembler::step_system(const State& prev, const Field& advector,
                                   const Field& B_lag, const ProblemParams& pp, double k,
                                   const SourceSet& src, double t_new,
                                   const BoundaryConditions& bc) const {
  pp.validate();
  if (!(k > 0.0)) throw std::invalid_argument("step_system: need k > 0");
  const SystemLayout L = layout();
  const double alpha = pp.alpha();
  const double scale_F = pp.s > 0.0 ? alpha : 1.0;  // induction row factor
  const double scale_O = pp.s > 0.0 ? pp.s : 1.0;   // Ohm row factor

  // Skeleton with every block of the five-field saddle system plus the full
  // diagonal (needed by the constraint elimination).
  if (!cache_->mono_built) {
    std::vector<Triplet> ts;
    const Mesh& mesh = disc_->mesh;
    auto add_block = [&](const FeSpace& rows, const FeSpace& cols, int off_r, int off_c) {
      for (int c = 0; c < mesh.n_cells(); ++c) {
        const int* rd = rows.dofs(c);
        const int* cd = cols.dofs(c);
        for (int i = 0; i < rows.dofs_per_cell; ++i)
          for (int j = 0; j < cols.dofs_per_cell; ++j)
            ts.push_back({off_r + rd[i], off_c + cd[j], 0.0});
      }
    };
    add_block(disc_->velocity, disc_->velocity, L.off_u, L.off_u);
    add_block(disc_->velocity, disc_->electric, L.off_u, L.off_E);
    add_block(disc_->velocity, disc_->pressure, L.off_u, L.off_p);
    add_block(disc_->magnetic, disc_->magnetic, L.off_B, L.off_B);
    add_block(disc_->magnetic, disc_->electric, L.off_B, L.off_E);
    add_block(disc_->electric, disc_->electric, L.off_E, L.off_E);
    add_block(disc_->electric, disc_->magnetic, L.off_E, L.off_B);
    add_block(disc_->electric, disc_->velocity, L.off_E, L.off_u);
    add_block(disc_->pressure, disc_->velocity, L.off_p, L.off_u);
    for (int q = 0; q < L.n_p; ++q) {
      ts.push_back({L.off_p + q, L.off_lambda, 0.0});
      ts.push_back({L.off_lambda, L.off_p + q, 0.0});
    }
    for (int i = 0; i < L.size; ++i) ts.push_back({i, i, 0.0});
    cache_->mono_skel = CsrMatrix::from_triplets(L.size, L.size, std::move(ts));
    cache_->mono_built = true;
  }

  // Constant part for fixed (k, params).
  if (!cache_->base_valid || cache_->base_k != k || cache_->base_Re != pp.Re ||
      cache_->base_Rm != pp.Rm || cache_->base_s != pp.s) {
    if (!cache_->mass_cached) {
      cache_->mass_u = mass(disc_->velocity);
      cache_->mass_B = mass(disc_->magnetic);
      cache_->mass_cached = true;
    }
    CsrMatrix base = cache_->mono_skel;
    std::fill(base.vals.begin(), base.vals.end(), 0.0);
    KernelCtx ctx{disc_, cache_.get(), parallel_};
    merge_block(base, cache_->mass_u, L.off_u, L.off_u, 1.0 / k);
    assemble_stiffness_into(ctx, base, L.off_u, L.off_u, 1.0 / pp.Re);
    merge_block(base, cache_->mass_B, L.off_B, L.off_B, scale_F / k);
    assemble_curl_into(ctx, base, L.off_B, L.off_E, scale_F, false);
    assemble_mass_into(ctx, disc_->electric, 1.0, base, L.off_E, L.off_E, scale_O);
    assemble_curl_into(ctx, base, L.off_E, L.off_B, -scale_O / pp.Rm, true);
    assemble_divergence_into(ctx, base, L.off_p, L.off_u, -1.0, false);
    assemble_divergence_into(ctx, base, L.off_u, L.off_p, -1.0, true);
    assemble_mean_into(ctx, &base, nullptr, L.off_p, L.off_lambda, false);
    assemble_mean_into(ctx, &base, nullptr, L.off_lambda, L.off_p, true);
    cache_->base_vals = base.vals;
    cache_->base_valid = true;
    cache_->base_k = k;
    cache_->base_Re = pp.Re;
    cache_->base_Rm = pp.Rm;
    cache_->base_s = pp.s;
  }

  BlockSystem sys;
  sys.layout = L;
  sys.A = cache_->mono_skel;
  sys.A.vals = cache_->base_vals;

  KernelCtx ctx{disc_, cache_.get(), parallel_};
  assemble_convection_into(ctx, advector, sys.A, L.off_u, L.off_u, 1.0);
  if (pp.s > 0.0) {
    assemble_uxbxb_into(ctx, B_lag, sys.A, L.off_u, L.off_u, -pp.s);
    assemble_exb_into(ctx, B_lag, sys.A, L.off_u, L.off_E, -pp.s);
  }
  assemble_uxb_into(ctx, B_lag, sys.A, L.off_E, L.off_u, scale_O);

  // Right-hand side.
  sys.rhs = Eigen::VectorXd::Zero(L.size);
  sys.rhs.segment(L.off_u, L.n_u) =
      (cache_->mass_u * prev.u.coeffs) / k + load_velocity(src.momentum, t_new);
  sys.rhs.segment(L.off_B, L.n_B) =
      scale_F * ((cache_->mass_B * prev.B.coeffs) / k + load_magnetic(src.induction, t_new));
  sys.rhs.segment(L.off_E, L.n_E) =
      load_ohm(src.ohm_j, src.ohm_B, scale_O, scale_O / pp.Rm, t_new);

  // Essential values at the new time level; homogeneous when no function set.
  // Only the velocity trace and the tangential electric trace are imposed.
  // The magnetic unknown is never constrained: its row recovers B from E by
  // elimination, which keeps the coefficient-level induction update exact and
  // preserves the normal boundary flux of compatible initial data.
  sys.constrained.assign(L.size, 0);
  sys.bc_values = Eigen::VectorXd::Zero(L.size);
  auto constrain = [&](const FeSpace& space, const TimeVecFn& fn, int off) {
    for (int d : space.boundary_dofs) sys.constrained[off + d] = 1;
    if (fn)
      for (auto [d, v] : boundary_values(space, fn, t_new)) sys.bc_values[off + d] = v;
  };
  constrain(disc_->velocity, bc.velocity, L.off_u);
  constrain(disc_->electric, bc.electric, L.off_E);

  apply_constraints(sys.A, sys.rhs, sys.constrained, sys.bc_values);
  return sys;
}

}  // namespace mhd
