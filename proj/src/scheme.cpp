#include "mhd/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mhd {

Stepper::Stepper(const Discretization& disc, ProblemParams pp, StepperOptions opt)
    : disc_(&disc),
      pp_(pp),
      opt_(opt),
      asm_(disc, opt.parallel),
      analyzer_(disc, opt.parallel),
      solver_(opt.method, opt.solver_tol),
      mass_solver_(SolveMethod::SparseLU, 1e-12),
      curl_inc_(curl_incidence(disc.mesh)),
      mass_B_(asm_.mass(disc.magnetic)),
      mean_vec_(asm_.pressure_mean_vector()) {
  pp_.validate();
  if (!(opt_.picard_tol > 0.0) || opt_.picard_max_iter < 1)
    throw std::invalid_argument("StepperOptions: need picard_tol > 0 and picard_max_iter >= 1");
}

State Stepper::initial_state(const TimeVecFn& u0, const TimeVecFn& B0, const TimeVecFn& E0,
                             double t0) const {
  if (!u0 || !B0 || !E0) throw std::invalid_argument("initial_state: null initial data");
  auto bind = [t0](const TimeVecFn& f) {
    return [&f, t0](const Eigen::Vector3d& x) { return f(t0, x); };
  };
  State st;
  st.t = t0;
  st.u = interpolate(disc_->velocity, bind(u0));
  st.B = interpolate(disc_->magnetic, bind(B0));
  st.E = interpolate(disc_->electric, bind(E0));
  st.p = Field{&disc_->pressure, Eigen::VectorXd::Zero(disc_->pressure.n_dofs)};
  st.B_ohm = st.B;
  return st;
}

State Stepper::unpack(const SystemLayout& L, const Eigen::VectorXd& x, double t) const {
  State st;
  st.t = t;
  st.u = Field{&disc_->velocity, x.segment(L.off_u, L.n_u)};
  st.B = Field{&disc_->magnetic, x.segment(L.off_B, L.n_B)};
  st.E = Field{&disc_->electric, x.segment(L.off_E, L.n_E)};
  st.p = Field{&disc_->pressure, x.segment(L.off_p, L.n_p)};
  return st;
}

void Stepper::structure_report(const State& prev, State& cur, double k, const SourceSet& src,
                               const BlockSystem& sys, const Eigen::VectorXd& x,
                               StepReport& rep) {
  const SystemLayout& L = sys.layout;

  // Divergence and mean rows of the final solved system.
  const Eigen::VectorXd r = sys.A * x - sys.rhs;
  double div_res = std::abs(r[L.off_lambda]);
  for (int i = 0; i < L.n_p; ++i) div_res = std::max(div_res, std::abs(r[L.off_p + i]));
  rep.div_row_residual = div_res;

  // Pressure mean (the multiplier enforces it to solver accuracy).
  rep.p_mean = mean_vec_.dot(cur.p.coeffs);

  // Faraday update identity: B^n - B^{n-1} + k curl E^n - k P g = 0
  // coefficient-wise, with curl the signed incidence matrix and P the
  // face-space L2 projection of the induction source.
  Eigen::VectorXd defect = cur.B.coeffs - prev.B.coeffs + k * (curl_inc_ * cur.E.coeffs);
  if (src.induction) {
    const Eigen::VectorXd load = asm_.load_magnetic(src.induction, cur.t);
    defect -= k * mass_solver_.solve(mass_B_, load);
  }
  rep.faraday_error = defect.size() ? defect.cwiseAbs().maxCoeff() : 0.0;

  const Analyzer::DivergenceStats db = analyzer_.divergence(cur.B);
  rep.divB_l2 = db.l2;
  rep.divB_max = db.max_abs;
  const double nu = analyzer_.l2_norm(cur.u);
  const double nB = analyzer_.l2_norm(cur.B);
  rep.energy = nu * nu + pp_.alpha() * nB * nB;

  if (opt_.check_structure) {
    std::ostringstream msg;
    if (rep.faraday_error > opt_.faraday_tol)
      msg << "Faraday update defect " << rep.faraday_error << " > " << opt_.faraday_tol << "; ";
    if (rep.div_row_residual > opt_.div_row_tol)
      msg << "divergence row residual " << rep.div_row_residual << " > " << opt_.div_row_tol
          << "; ";
    if (std::abs(rep.p_mean) > opt_.div_row_tol)
      msg << "pressure mean " << rep.p_mean << " > " << opt_.div_row_tol << "; ";
    const std::string s = msg.str();
    if (!s.empty())
      throw StructureError("step at t=" + std::to_string(rep.t) + ": " + s);
  }
}

State Stepper::step(const State& prev, double k, const SourceSet& src,
                    const BoundaryConditions& bc, StepReport* report) {
  if (!(k > 0.0)) throw std::invalid_argument("step: need k > 0");
  const double t_new = prev.t + k;
  StepReport rep;
  rep.t = t_new;

  State cur;
  BlockSystem sys;
  Eigen::VectorXd x;

  if (opt_.scheme == SchemeKind::Linearized) {
    sys = asm_.step_system(prev, prev.u, prev.B, pp_, k, src, t_new, bc);
    x = solver_.solve(sys.A, sys.rhs, &rep.solve);
    rep.picard_iters = 1;
    cur = unpack(sys.layout, x, t_new);
    cur.B_ohm = prev.B;
  } else {
    State iter = prev;
    Field lag_B = prev.B;  // magnetic field used in the most recent solve
    bool converged = false;
    for (int m = 1; m <= opt_.picard_max_iter; ++m) {
      sys = asm_.step_system(prev, iter.u, iter.B, pp_, k, src, t_new, bc);
      x = solver_.solve(sys.A, sys.rhs, &rep.solve);
      State next = unpack(sys.layout, x, t_new);
      const Field du{&disc_->velocity, next.u.coeffs - iter.u.coeffs};
      const Field dB{&disc_->magnetic, next.B.coeffs - iter.B.coeffs};
      const Field dE{&disc_->electric, next.E.coeffs - iter.E.coeffs};
      const double inc =
          analyzer_.l2_norm(du) + analyzer_.l2_norm(dB) + analyzer_.l2_norm(dE);
      const double scale = 1.0 + analyzer_.l2_norm(next.u) + analyzer_.l2_norm(next.B) +
                           analyzer_.l2_norm(next.E);
      rep.increments.push_back(inc);
      rep.picard_iters = m;
      lag_B = iter.B;
      iter = std::move(next);
      if (inc <= opt_.picard_tol * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "Picard iteration did not converge in " << opt_.picard_max_iter
          << " solves at t=" << t_new << " (last increment "
          << (rep.increments.empty() ? 0.0 : rep.increments.back()) << ")";
      throw PicardFailure(msg.str(), rep.increments);
    }
    cur = std::move(iter);
    cur.B_ohm = lag_B;
    if (opt_.check_picard_residual) {
      const BlockSystem chk = asm_.step_system(prev, cur.u, cur.B, pp_, k, src, t_new, bc);
      rep.nonlinear_residual = (chk.A * x - chk.rhs).norm() / (1.0 + chk.rhs.norm());
      if (rep.nonlinear_residual > 10.0 * opt_.picard_tol) {
        std::ostringstream msg;
        msg << "converged Picard state fails the nonlinear residual check: "
            << rep.nonlinear_residual << " > " << 10.0 * opt_.picard_tol << " at t=" << t_new;
        throw PicardFailure(msg.str(), rep.increments);
      }
    }
  }

  structure_report(prev, cur, k, src, sys, x, rep);
  if (report) *report = std::move(rep);
  return cur;
}

RunReport Stepper::run(const State& initial, const TimeConfig& tc, const SourceSet& src,
                       const BoundaryConditions& bc, bool keep_trajectory) {
  const int n_steps = tc.steps();
  RunReport out;
  out.final_state = initial;
  if (keep_trajectory) out.trajectory.push_back(initial);
  State cur = initial;
  for (int n = 1; n <= n_steps; ++n) {
    StepReport sr;
    try {
      cur = step(cur, tc.k, src, bc, &sr);
    } catch (const SolverError& e) {
      out.completed = false;
      out.failure_kind = RunReport::FailureKind::Solver;
      out.failure = e.what();
      return out;
    } catch (const PicardFailure& e) {
      out.completed = false;
      out.failure_kind = RunReport::FailureKind::Picard;
      out.failure = e.what();
      return out;
    } catch (const StructureError& e) {
      out.completed = false;
      out.failure_kind = RunReport::FailureKind::Structure;
      out.failure = e.what();
      return out;
    }
    out.steps.push_back(std::move(sr));
    out.final_state = cur;
    if (keep_trajectory) out.trajectory.push_back(cur);
  }
  return out;
}

}  // namespace mhd
