#include "mhd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mhd/basis.hpp"
#include "mhd/quadrature.hpp"

namespace mhd {

namespace {

QuadratureRule error_rule(int degree) {
  if (degree < 1) throw std::invalid_argument("error quadrature degree must be positive");
  if (degree <= 8) return quadrature_rule(degree);
  return make_conical_rule((degree + 2) / 2);
}

// Values of a vector coefficient field at the rule points of one cell.
void vector_values(const Field& f, int cell, const CellGeometry& geo, const BasisTable& tab,
                   std::vector<Eigen::Vector3d>& out) {
  const FeSpace& sp = *f.space;
  const int* dofs = sp.dofs(cell);
  out.assign(tab.n_pts, Eigen::Vector3d::Zero());
  switch (sp.family) {
    case Family::P2:
      for (int q = 0; q < tab.n_pts; ++q) {
        const double* vals = &tab.values[q * 10];
        for (int a = 0; a < 10; ++a)
          for (int c = 0; c < 3; ++c) out[q][c] += f.coeffs[dofs[3 * a + c]] * vals[a];
      }
      return;
    case Family::N0: {
      const signed char* sg = sp.signs(cell);
      double coef[6];
      for (int i = 0; i < 6; ++i) coef[i] = f.coeffs[dofs[i]] * sg[i];
      for (int q = 0; q < tab.n_pts; ++q) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (int i = 0; i < 6; ++i) v += coef[i] * tab.vvalues[q * 6 + i];
        out[q] = push_hcurl_value(geo, v);
      }
      return;
    }
    case Family::RT0: {
      const signed char* sg = sp.signs(cell);
      double coef[4];
      for (int i = 0; i < 4; ++i) coef[i] = f.coeffs[dofs[i]] * sg[i];
      for (int q = 0; q < tab.n_pts; ++q) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (int i = 0; i < 4; ++i) v += coef[i] * tab.vvalues[q * 4 + i];
        out[q] = push_hdiv_value(geo, v);
      }
      return;
    }
    default:
      throw std::invalid_argument("vector_values: field is not vector valued");
  }
}

// Jacobians of a velocity field at the rule points of one cell.
void velocity_gradients(const Field& f, int cell, const CellGeometry& geo, const BasisTable& tab,
                        std::vector<Eigen::Matrix3d>& out) {
  const FeSpace& sp = *f.space;
  const int* dofs = sp.dofs(cell);
  out.assign(tab.n_pts, Eigen::Matrix3d::Zero());
  for (int q = 0; q < tab.n_pts; ++q) {
    for (int a = 0; a < 10; ++a) {
      const Eigen::Vector3d g = push_gradient(geo, tab.grads[q * 10 + a]);
      for (int r = 0; r < 3; ++r) out[q].row(r) += f.coeffs[dofs[3 * a + r]] * g.transpose();
    }
  }
}

// Constant curl of an edge-element field on one cell.
Eigen::Vector3d n0_cell_curl(const Field& f, int cell, const CellGeometry& geo,
                             const BasisTable& tab) {
  const FeSpace& sp = *f.space;
  const int* dofs = sp.dofs(cell);
  const signed char* sg = sp.signs(cell);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i = 0; i < 6; ++i) c += f.coeffs[dofs[i]] * sg[i] * tab.curls[i];
  return push_hcurl_curl(geo, c);
}

void require_space(const Field& f, const Discretization& disc, SpaceKind kind,
                   const char* what) {
  if (!f.space || f.space->mesh != &disc.mesh || f.space->kind != kind)
    throw std::invalid_argument(std::string(what) + ": field space mismatch");
}

Eigen::VectorXd diff_coeffs(const Field& a, const Field& b, const char* what) {
  if (!a.space || !b.space || a.coeffs.size() != b.coeffs.size() || a.space->kind != b.space->kind)
    throw std::invalid_argument(std::string(what) + ": incompatible fields");
  return a.coeffs - b.coeffs;
}

}  // namespace

double accumulated_norm(const std::vector<double>& step_values, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("accumulated_norm: need k > 0");
  if (step_values.empty())
    throw std::invalid_argument("accumulated_norm: need at least one step value");
  double acc = 0.0;
  for (double v : step_values) acc += v * v;
  return std::sqrt(k * acc);
}

RateSummary convergence_rates(const std::vector<double>& x, const std::vector<double>& err) {
  const std::size_t n = x.size();
  if (n != err.size() || n < 2)
    throw std::invalid_argument("convergence_rates: need matching sizes >= 2");
  for (std::size_t i = 0; i < n; ++i)
    if (!(x[i] > 0.0) || !(err[i] > 0.0))
      throw std::invalid_argument("convergence_rates: entries must be positive");
  RateSummary out;
  out.pairwise.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    out.pairwise[i] = std::log(err[i] / err[i + 1]) / std::log(x[i] / x[i + 1]);
  double mx = 0.0, me = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    me += std::log(err[i]);
  }
  mx /= static_cast<double>(n);
  me /= static_cast<double>(n);
  double sxx = 0.0, sxe = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxe += dx * (std::log(err[i]) - me);
  }
  out.ls_slope = sxe / sxx;
  return out;
}

Analyzer::Analyzer(const Discretization& disc, bool parallel)
    : disc_(&disc), asm_(disc, parallel) {}

const CsrMatrix& Analyzer::mass(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::VelocityP2:
      if (!have_mass_[0]) {
        mass_u_ = asm_.mass(disc_->velocity);
        have_mass_[0] = true;
      }
      return mass_u_;
    case SpaceKind::PressureP1:
      if (!have_mass_[1]) {
        mass_p_ = asm_.mass(disc_->pressure);
        have_mass_[1] = true;
      }
      return mass_p_;
    case SpaceKind::MagneticRT0:
      if (!have_mass_[2]) {
        mass_B_ = asm_.mass(disc_->magnetic);
        have_mass_[2] = true;
      }
      return mass_B_;
    case SpaceKind::ElectricN0:
      if (!have_mass_[3]) {
        mass_E_ = asm_.mass(disc_->electric);
        have_mass_[3] = true;
      }
      return mass_E_;
  }
  throw std::logic_error("Analyzer::mass: unknown space kind");
}

double Analyzer::mass_norm(const Field& f, const CsrMatrix& M) const {
  const Eigen::VectorXd y = M * f.coeffs;
  return std::sqrt(std::max(0.0, f.coeffs.dot(y)));
}

double Analyzer::l2_norm(const Field& f) {
  if (!f.space || f.space->mesh != &disc_->mesh)
    throw std::invalid_argument("l2_norm: field space mismatch");
  return mass_norm(f, mass(f.space->kind));
}

double Analyzer::h1_seminorm(const Field& u) {
  require_space(u, *disc_, SpaceKind::VelocityP2, "h1_seminorm");
  if (!have_stiff_) {
    stiff_u_ = asm_.stiffness();
    have_stiff_ = true;
  }
  return mass_norm(u, stiff_u_);
}

double Analyzer::current_l2(const Field& u, const Field& B, const Field& E, int degree) const {
  require_space(u, *disc_, SpaceKind::VelocityP2, "current_l2");
  require_space(B, *disc_, SpaceKind::MagneticRT0, "current_l2");
  require_space(E, *disc_, SpaceKind::ElectricN0, "current_l2");
  const QuadratureRule rule = error_rule(degree);
  const BasisTable tab_u = tabulate(Family::P2, rule);
  const BasisTable tab_B = tabulate(Family::RT0, rule);
  const BasisTable tab_E = tabulate(Family::N0, rule);
  std::vector<Eigen::Vector3d> vu, vB, vE;
  double acc = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    vector_values(u, c, geo, tab_u, vu);
    vector_values(B, c, geo, tab_B, vB);
    vector_values(E, c, geo, tab_E, vE);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      acc += rule.weights[q] * geo.detJ * (vE[q] + vu[q].cross(vB[q])).squaredNorm();
  }
  return std::sqrt(acc);
}

Analyzer::DivergenceStats Analyzer::divergence(const Field& B) const {
  require_space(B, *disc_, SpaceKind::MagneticRT0, "divergence");
  double refdiv[4];
  refbasis::rt0_divergences(refdiv);
  DivergenceStats out;
  double acc = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    const int* dofs = disc_->magnetic.dofs(c);
    const signed char* sg = disc_->magnetic.signs(c);
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d += B.coeffs[dofs[i]] * sg[i] * refdiv[i];
    d /= geo.detJ;
    acc += (geo.detJ / 6.0) * d * d;
    out.max_abs = std::max(out.max_abs, std::abs(d));
  }
  out.l2 = std::sqrt(acc);
  return out;
}

double Analyzer::l2_error(const Field& fh, const TimeVecFn& f, double t, int degree) const {
  if (!fh.space || fh.space->mesh != &disc_->mesh ||
      !(fh.space->components == 3 || family_is_vector(fh.space->family)))
    throw std::invalid_argument("l2_error: need a vector field on this mesh");
  if (!f) throw std::invalid_argument("l2_error: null exact field");
  const QuadratureRule rule = error_rule(degree);
  const BasisTable tab = tabulate(fh.space->family, rule);
  std::vector<Eigen::Vector3d> vals;
  double acc = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    vector_values(fh, c, geo, tab, vals);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector3d diff = vals[q] - f(t, geo.map(rule.points[q]));
      acc += rule.weights[q] * geo.detJ * diff.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

double Analyzer::h1_error(const Field& uh, const TimeMatFn& grad_u, double t, int degree) const {
  require_space(uh, *disc_, SpaceKind::VelocityP2, "h1_error");
  if (!grad_u) throw std::invalid_argument("h1_error: null exact gradient");
  const QuadratureRule rule = error_rule(degree);
  const BasisTable tab = tabulate(Family::P2, rule);
  std::vector<Eigen::Matrix3d> grads;
  double acc = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    velocity_gradients(uh, c, geo, tab, grads);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Matrix3d diff = grads[q] - grad_u(t, geo.map(rule.points[q]));
      acc += rule.weights[q] * geo.detJ * diff.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

double Analyzer::curl_error(const Field& Eh, const TimeVecFn& curl_E, double t,
                            int degree) const {
  require_space(Eh, *disc_, SpaceKind::ElectricN0, "curl_error");
  if (!curl_E) throw std::invalid_argument("curl_error: null exact curl");
  const QuadratureRule rule = error_rule(degree);
  const BasisTable tab = tabulate(Family::N0, rule);
  double acc = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    const Eigen::Vector3d ch = n0_cell_curl(Eh, c, geo, tab);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector3d diff = ch - curl_E(t, geo.map(rule.points[q]));
      acc += rule.weights[q] * geo.detJ * diff.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

double Analyzer::scalar_mean(const TimeScalarFn& p, double t, int degree) const {
  if (!p) throw std::invalid_argument("scalar_mean: null field");
  const QuadratureRule rule = error_rule(degree);
  double integral = 0.0, volume = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      integral += rule.weights[q] * geo.detJ * p(t, geo.map(rule.points[q]));
      volume += rule.weights[q] * geo.detJ;
    }
  }
  return integral / volume;
}

double Analyzer::pressure_error(const Field& ph, const TimeScalarFn& p, double t,
                                int degree) const {
  require_space(ph, *disc_, SpaceKind::PressureP1, "pressure_error");
  if (!p) throw std::invalid_argument("pressure_error: null exact field");
  const double mean = scalar_mean(p, t, degree);
  const QuadratureRule rule = error_rule(degree);
  const BasisTable tab = tabulate(Family::P1, rule);
  double acc = 0.0;
  for (int c = 0; c < disc_->mesh.n_cells(); ++c) {
    const CellGeometry geo = cell_geometry(disc_->mesh, c);
    const int* dofs = disc_->pressure.dofs(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      double vh = 0.0;
      for (int a = 0; a < 4; ++a) vh += ph.coeffs[dofs[a]] * tab.values[q * 4 + a];
      const double diff = vh - (p(t, geo.map(rule.points[q])) - mean);
      acc += rule.weights[q] * geo.detJ * diff * diff;
    }
  }
  return std::sqrt(acc);
}

StarredErrors Analyzer::starred_errors(const std::vector<State>& traj, const ExactSolution& ex,
                                       double k, int degree) const {
  if (traj.empty()) throw std::invalid_argument("starred_errors: empty trajectory");
  if (!(k > 0.0)) throw std::invalid_argument("starred_errors: need k > 0");
  const State& last = traj.back();
  double grad_acc = 0.0, E_acc = 0.0, curl_acc = 0.0, p_acc = 0.0;
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const State& st = traj[n];
    const double g = h1_error(st.u, ex.grad_u, st.t, degree);
    const double eE = l2_error(st.E, ex.E, st.t, degree);
    const double ec = curl_error(st.E, ex.curl_E, st.t, degree);
    const double ep = pressure_error(st.p, ex.p, st.t, degree);
    grad_acc += g * g;
    E_acc += eE * eE;
    curl_acc += ec * ec;
    p_acc += ep * ep;
  }
  StarredErrors out;
  const double u_fin = l2_error(last.u, ex.u, last.t, degree);
  out.u = std::sqrt(u_fin * u_fin + k * grad_acc);
  out.B = l2_error(last.B, ex.B, last.t, degree);
  out.E = std::sqrt(k * E_acc + k * k * curl_acc);
  out.p = std::sqrt(k * p_acc);
  return out;
}

StarredErrors Analyzer::starred_errors_vs(const std::vector<State>& traj,
                                          const std::vector<State>& ref, double k) {
  if (traj.empty() || traj.size() != ref.size())
    throw std::invalid_argument("starred_errors_vs: trajectories must align");
  if (!(k > 0.0)) throw std::invalid_argument("starred_errors_vs: need k > 0");
  const TimeVecFn zero_vec = [](double, const Eigen::Vector3d&) {
    return Eigen::Vector3d::Zero();
  };
  double grad_acc = 0.0, E_acc = 0.0, curl_acc = 0.0, p_acc = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    if (std::abs(traj[n].t - ref[n].t) > 1e-10 * std::max(1.0, std::abs(ref[n].t)))
      throw std::invalid_argument("starred_errors_vs: time levels do not match");
    if (n == 0) continue;
    Field du{traj[n].u.space, diff_coeffs(traj[n].u, ref[n].u, "starred_errors_vs")};
    Field dE{traj[n].E.space, diff_coeffs(traj[n].E, ref[n].E, "starred_errors_vs")};
    Field dp{traj[n].p.space, diff_coeffs(traj[n].p, ref[n].p, "starred_errors_vs")};
    const double g = h1_seminorm(du);
    const double eE = l2_norm(dE);
    const double ec = curl_error(dE, zero_vec, 0.0);
    const double ep = l2_norm(dp);
    grad_acc += g * g;
    E_acc += eE * eE;
    curl_acc += ec * ec;
    p_acc += ep * ep;
  }
  Field du_fin{traj.back().u.space, diff_coeffs(traj.back().u, ref.back().u, "starred_errors_vs")};
  Field dB_fin{traj.back().B.space, diff_coeffs(traj.back().B, ref.back().B, "starred_errors_vs")};
  StarredErrors out;
  const double u_fin = l2_norm(du_fin);
  out.u = std::sqrt(u_fin * u_fin + k * grad_acc);
  out.B = l2_norm(dB_fin);
  out.E = std::sqrt(k * E_acc + k * k * curl_acc);
  out.p = std::sqrt(k * p_acc);
  return out;
}

EnergyReport Analyzer::energy_report(const std::vector<State>& traj, const ProblemParams& pp,
                                     double k) {
  if (traj.empty()) throw std::invalid_argument("energy_report: empty trajectory");
  if (!(k > 0.0)) throw std::invalid_argument("energy_report: need k > 0");
  pp.validate();
  const double alpha = pp.alpha();
  EnergyReport rep;
  rep.energy.reserve(traj.size());
  for (const State& st : traj) {
    const double nu = l2_norm(st.u);
    const double nB = l2_norm(st.B);
    rep.energy.push_back(nu * nu + alpha * nB * nB);
  }
  rep.E0 = rep.energy.front();
  double cum_exact = 0.0;    // dissipation with the identity's constants + increments
  double cum_bound = 0.0;  // (1/Re) k |grad u|^2 + 2 s k |j|^2
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const State& st = traj[n];
    const double gn = h1_seminorm(st.u);
    const double jn = current_l2(st.u, st.B_ohm, st.E);
    Field du{st.u.space, st.u.coeffs - traj[n - 1].u.coeffs};
    Field dB{st.B.space, st.B.coeffs - traj[n - 1].B.coeffs};
    const double ndu = l2_norm(du);
    const double ndB = l2_norm(dB);
    const double diss = 2.0 * k / pp.Re * gn * gn + 2.0 * k * pp.s * jn * jn;
    const double incr = ndu * ndu + alpha * ndB * ndB;
    rep.dissipation.push_back(diss);
    rep.increments.push_back(incr);
    cum_exact += diss + incr;
    cum_bound += k / pp.Re * gn * gn + 2.0 * k * pp.s * jn * jn;
    rep.identity_residual.push_back(rep.E0 - rep.energy[n] - cum_exact);
    rep.margin.push_back(rep.E0 - rep.energy[n] - cum_bound);
  }
  rep.min_margin = rep.margin.empty() ? 0.0 : *std::min_element(rep.margin.begin(), rep.margin.end());
  for (double r : rep.identity_residual)
    rep.max_abs_identity_residual = std::max(rep.max_abs_identity_residual, std::abs(r));
  return rep;
}

double de_rham_inclusion_error(const Discretization& disc) {
  const Mesh& mesh = disc.mesh;
  const FeSpace& elec = disc.electric;
  const FeSpace& mag = disc.magnetic;
  const CsrMatrix C = curl_incidence(mesh);
  const QuadratureRule rule = quadrature_rule(2);
  const BasisTable tab_E = tabulate(Family::N0, rule);
  const BasisTable tab_B = tabulate(Family::RT0, rule);
  double worst = 0.0;
  Eigen::VectorXd ecoef = Eigen::VectorXd::Zero(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    ecoef.setZero();
    ecoef[e] = 1.0;
    const Eigen::VectorXd fcoef = C * ecoef;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const CellGeometry geo = cell_geometry(mesh, c);
      const int* edofs = elec.dofs(c);
      const signed char* esg = elec.signs(c);
      Eigen::Vector3d cref = Eigen::Vector3d::Zero();
      for (int i = 0; i < 6; ++i)
        if (edofs[i] == e) cref += static_cast<double>(esg[i]) * tab_E.curls[i];
      const Eigen::Vector3d curl_edge = push_hcurl_curl(geo, cref);
      const int* fdofs = mag.dofs(c);
      const signed char* fsg = mag.signs(c);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (int i = 0; i < 4; ++i)
          v += fcoef[fdofs[i]] * fsg[i] * tab_B.vvalues[q * 4 + i];
        worst = std::max(worst, (push_hdiv_value(geo, v) - curl_edge).norm());
      }
    }
  }
  return worst;
}

}  // namespace mhd
