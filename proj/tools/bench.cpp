// Benchmark: serial reference assembly vs the OpenMP cell loops, with a
// coefficient-level agreement check on every timed operator.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mhd/assembly.hpp"

using namespace mhd;

namespace {

double seconds(const std::function<CsrMatrix()>& fn, CsrMatrix& out, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    out = fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

// Max relative coefficient difference; requires identical sparsity patterns.
double agreement(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.row_ptr != b.row_ptr || a.col_idx != b.col_idx) return 1e300;
  double scale = 1e-30, diff = 0.0;
  for (std::size_t i = 0; i < a.vals.size(); ++i) {
    scale = std::max(scale, std::abs(a.vals[i]));
    diff = std::max(diff, std::abs(a.vals[i] - b.vals[i]));
  }
  return diff / scale;
}

Field random_field(const FeSpace& space, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd c(space.n_dofs);
  for (int i = 0; i < space.n_dofs; ++i) c[i] = unif(rng);
  return Field{&space, c};
}

}  // namespace

int main(int argc, char** argv) {
  const int divisions = argc > 1 ? std::atoi(argv[1]) : 8;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  if (divisions < 1 || reps < 1) {
    std::fprintf(stderr, "usage: bench [divisions=8] [reps=3]\n");
    return 2;
  }

  Discretization disc(build_box_mesh(divisions, divisions, divisions));
  Assembler serial(disc, /*parallel=*/false);
  Assembler parallel(disc, /*parallel=*/true);
  const Field adv = random_field(disc.velocity, 3);
  const Field B = random_field(disc.magnetic, 5);

  std::printf("mesh 1/%d: %d cells, OpenMP threads: %d, reps: %d (best-of)\n", divisions,
              disc.mesh.n_cells(), omp_get_max_threads(), reps);
  std::printf("%-28s %12s %12s %9s %11s\n", "operator", "serial [ms]", "openmp [ms]", "speedup",
              "max reldiff");

  struct Case {
    const char* name;
    std::function<CsrMatrix(const Assembler&)> make;
  };
  const std::vector<Case> cases = {
      {"velocity mass", [](const Assembler& a) { return a.mass(a.disc().velocity); }},
      {"velocity stiffness", [](const Assembler& a) { return a.stiffness(); }},
      {"skew transport", [&](const Assembler& a) { return a.convection(adv); }},
      {"pressure divergence", [](const Assembler& a) { return a.divergence(); }},
      {"electric mass", [](const Assembler& a) { return a.cross_coupling(Coupling::E_F); }},
      {"weak curl (induction)",
       [](const Assembler& a) { return a.cross_coupling(Coupling::CurlE_C); }},
      {"Lorentz coupling",
       [&](const Assembler& a) { return a.cross_coupling(Coupling::ExB_v, &B); }},
      {"quadratic magnetic drag",
       [&](const Assembler& a) { return a.cross_coupling(Coupling::UxBxB_v, &B); }},
  };

  bool all_ok = true;
  for (const Case& c : cases) {
    CsrMatrix ms, mp;
    const double ts = seconds([&] { return c.make(serial); }, ms, reps);
    const double tp = seconds([&] { return c.make(parallel); }, mp, reps);
    const double rd = agreement(ms, mp);
    all_ok = all_ok && rd < 1e-12;
    std::printf("%-28s %12.2f %12.2f %8.2fx %11.1e%s\n", c.name, 1e3 * ts, 1e3 * tp, ts / tp, rd,
                rd < 1e-12 ? "" : "  MISMATCH");
  }
  std::printf(all_ok ? "serial and OpenMP assembly agree on all operators\n"
                     : "MISMATCH between serial and OpenMP assembly\n");
  return all_ok ? 0 : 1;
}
