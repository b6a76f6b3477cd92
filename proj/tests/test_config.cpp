#include <fstream>
#include <string>

#include "doctest.h"
#include "mhd/config.hpp"

using namespace mhd;

namespace {

// Expects parse_config(text) to throw and returns the error for inspection.
ConfigError capture(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError(0, "unreachable");
}

}  // namespace

TEST_CASE("empty and minimal configs yield the documented defaults") {
  for (const std::string text : {std::string(""), std::string("# nothing but a comment\n\n")}) {
    const RunConfig cfg = parse_config(text);
    CHECK(cfg.divisions == 8);
    CHECK(cfg.extents == Eigen::Vector3d(1.0, 1.0, 1.0));
    CHECK(cfg.params.Re == 1.0);
    CHECK(cfg.params.Rm == 1.0);
    CHECK(cfg.params.s == 1.0);
    CHECK(cfg.k == doctest::Approx(0.01));
    CHECK(cfg.T == doctest::Approx(0.08));
    CHECK(cfg.scheme == SchemeKind::Picard);
    CHECK(cfg.picard_tol == 1.0e-10);
    CHECK(cfg.picard_max_iter == 30);
    CHECK(cfg.method == SolveMethod::SparseLU);
    CHECK(cfg.solver_tol == 1.0e-10);
    CHECK(cfg.experiment == ExperimentKind::Single);
    CHECK_FALSE(cfg.experiment_explicit);
    CHECK(cfg.levels == 0);
    CHECK(cfg.output == "results.csv");
  }

  // A file that only touches the mesh leaves the physics at unit values.
  const RunConfig cfg = parse_config("[mesh]\ndivisions = 4\n");
  CHECK(cfg.divisions == 4);
  CHECK(cfg.params.Re == 1.0);
  CHECK(cfg.params.Rm == 1.0);
  CHECK(cfg.params.s == 1.0);
}

TEST_CASE("full config round-trips every field") {
  const std::string text =
      "# forced convergence study\n"
      "[mesh]\n"
      "divisions = 4\n"
      "extent_x = 2.0\n"
      "extent_y = 0.5\n"
      "extent_z = 1.5\n"
      "[params]\n"
      "Re = 10\n"
      "Rm = 5\n"
      "s = 0.25\n"
      "[time]\n"
      "k = 0.02   # halved later\n"
      "T = 0.1\n"
      "[scheme]\n"
      "scheme = linearized\n"
      "picard_tol = 1e-8\n"
      "picard_max_iter = 12\n"
      "[solver]\n"
      "method = gmres\n"
      "tol = 1e-9\n"
      "[experiment]\n"
      "kind = h-sweep\n"
      "levels = 2\n"
      "output = out.csv\n";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.divisions == 4);
  CHECK(cfg.extents == Eigen::Vector3d(2.0, 0.5, 1.5));
  CHECK(cfg.params.Re == 10.0);
  CHECK(cfg.params.Rm == 5.0);
  CHECK(cfg.params.s == 0.25);
  CHECK(cfg.k == 0.02);
  CHECK(cfg.T == 0.1);
  CHECK(cfg.scheme == SchemeKind::Linearized);
  CHECK(cfg.picard_tol == 1.0e-8);
  CHECK(cfg.picard_max_iter == 12);
  CHECK(cfg.method == SolveMethod::Gmres);
  CHECK(cfg.solver_tol == 1.0e-9);
  CHECK(cfg.experiment == ExperimentKind::SweepH);
  CHECK(cfg.experiment_explicit);
  CHECK(cfg.levels == 2);
  CHECK(cfg.output == "out.csv");

  const StepperOptions opt = cfg.stepper_options();
  CHECK(opt.scheme == SchemeKind::Linearized);
  CHECK(opt.method == SolveMethod::Gmres);
  CHECK(opt.solver_tol == 1.0e-9);
  CHECK(opt.picard_tol == 1.0e-8);
  CHECK(opt.picard_max_iter == 12);
}

TEST_CASE("every experiment kind parses") {
  CHECK(parse_config("[experiment]\nkind = single\n").experiment == ExperimentKind::Single);
  CHECK(parse_config("[experiment]\nkind = h-sweep\n").experiment == ExperimentKind::SweepH);
  CHECK(parse_config("[experiment]\nkind = k-sweep\n").experiment == ExperimentKind::SweepK);
  CHECK(parse_config("[experiment]\nkind = energy\n").experiment == ExperimentKind::Energy);
  CHECK(parse_config("[experiment]\nkind = gauss\n").experiment == ExperimentKind::Gauss);
}

TEST_CASE("zero or negative time step is rejected with its line number") {
  const ConfigError e = capture("[time]\nk = 0\nT = 1\n");
  CHECK(e.line == 2);
  CHECK(std::string(e.what()).find("config line 2:") != std::string::npos);
  CHECK(std::string(e.what()).find("positive") != std::string::npos);
  CHECK(capture("[time]\nk = -0.5\n").line == 2);
}

TEST_CASE("unknown scheme names the allowed values") {
  const ConfigError e = capture("[scheme]\nscheme = newton\n");
  CHECK(e.line == 2);
  const std::string msg = e.what();
  CHECK(msg.find("linearized") != std::string::npos);
  CHECK(msg.find("picard") != std::string::npos);
  CHECK(msg.find("newton") != std::string::npos);
}

TEST_CASE("unknown sections, unknown keys, and stray lines are hard errors") {
  CHECK(capture("[outputs]\npath = x\n").line == 1);

  const ConfigError unknown_key = capture("[mesh]\nsize = 3\n");
  CHECK(unknown_key.line == 2);
  // The message should steer the user to valid keys of that section.
  CHECK(std::string(unknown_key.what()).find("divisions") != std::string::npos);

  const ConfigError no_section = capture("divisions = 3\n");
  CHECK(no_section.line == 1);

  const ConfigError missing_eq = capture("[mesh]\ndivisions 3\n");
  CHECK(missing_eq.line == 2);

  CHECK(capture("[mesh]\ndivisions =\n").line == 2);   // empty value
  CHECK(capture("[mesh]\n= 3\n").line == 2);           // empty key
}

TEST_CASE("duplicate keys are rejected") {
  const ConfigError e = capture("[time]\nk = 0.01\nk = 0.02\n");
  CHECK(e.line == 3);
  CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
}

TEST_CASE("malformed numbers are rejected") {
  CHECK(capture("[time]\nk = 0.01abc\n").line == 2);
  CHECK(capture("[mesh]\ndivisions = 2.5\n").line == 2);
  CHECK(capture("[params]\nRe = \"1\"\n").line == 2);
}

TEST_CASE("range validation") {
  CHECK(capture("[mesh]\ndivisions = 0\n").line == 2);
  CHECK(capture("[mesh]\nextent_x = 0\n").line == 2);
  CHECK(capture("[params]\nRe = 0\n").line == 2);
  CHECK(capture("[params]\ns = -1\n").line == 2);
  CHECK_NOTHROW(parse_config("[params]\ns = 0\n"));  // decoupled hydro limit is legal
  CHECK(capture("[scheme]\npicard_max_iter = 0\n").line == 2);
  CHECK(capture("[solver]\ntol = 0\n").line == 2);
  CHECK(capture("[experiment]\nlevels = 1\n").line == 2);
  CHECK(capture("[experiment]\nlevels = 9\n").line == 2);
  CHECK_NOTHROW(parse_config("[experiment]\nlevels = 0\n"));
  CHECK_NOTHROW(parse_config("[experiment]\nlevels = 8\n"));
}

TEST_CASE("horizon must be an integer multiple of the step") {
  const ConfigError e = capture("[time]\nk = 0.03\nT = 0.1\n");
  CHECK(e.line == 0);  // cross-field check, not tied to one line
  CHECK(std::string(e.what()).find("config:") != std::string::npos);
  CHECK(std::string(e.what()).find("multiple") != std::string::npos);
  CHECK_NOTHROW(parse_config("[time]\nk = 0.01\nT = 0.08\n"));
}

TEST_CASE("unknown solver method lists the allowed values") {
  const ConfigError e = capture("[solver]\nmethod = cg\n");
  const std::string msg = e.what();
  CHECK(msg.find("lu") != std::string::npos);
  CHECK(msg.find("gmres") != std::string::npos);
}

TEST_CASE("load_config_file reads from disk and reports unreadable paths") {
  const std::string path = "config_roundtrip_test.ini";
  {
    std::ofstream out(path);
    out << "[mesh]\ndivisions = 2\n";
  }
  CHECK(load_config_file(path).divisions == 2);
  std::remove(path.c_str());
  CHECK_THROWS_AS((void)load_config_file("no_such_file.ini"), ConfigError);
}
