#ifndef MHD_CONFIG_HPP
#define MHD_CONFIG_HPP

#include <stdexcept>
#include <string>

#include "mhd/problem.hpp"
#include "mhd/scheme.hpp"
#include "mhd/solver.hpp"

namespace mhd {

// Which driver a configuration is meant for.  The CLI verb selects the
// driver; a config may also pin the kind under [experiment] so that passing
// the file to the wrong verb is caught instead of silently reinterpreted.
enum class ExperimentKind { Single, SweepH, SweepK, Energy, Gauss };

// Fully validated run configuration.  Field defaults define the "minimal
// valid file" semantics: an empty config is legal and describes a single
// forced run on the finest desk-scale mesh (divisions 8) with unit physical
// parameters, k = 0.01, T = 0.08, the nonlinear scheme, and a direct solver.
struct RunConfig {
  // [mesh]
  int divisions = 8;
  Eigen::Vector3d extents{1.0, 1.0, 1.0};

  // [params]
  ProblemParams params{1.0, 1.0, 1.0};

  // [time]
  double k = 0.01;
  double T = 0.08;

  // [scheme]
  SchemeKind scheme = SchemeKind::Picard;
  double picard_tol = 1.0e-10;
  int picard_max_iter = 30;

  // [solver]
  SolveMethod method = SolveMethod::SparseLU;
  double solver_tol = 1.0e-10;

  // [experiment]
  ExperimentKind experiment = ExperimentKind::Single;
  bool experiment_explicit = false;  // kind was written in the file
  // Number of sweep levels; 0 = auto (3 for the h-sweep, 4 for the k-sweep).
  int levels = 0;
  std::string output = "results.csv";

  TimeConfig time_config() const { return TimeConfig{k, T}; }
  StepperOptions stepper_options() const;
};

// Parse/validation failure.  `line` is 1-based; 0 means the error is not tied
// to a specific line (e.g. an unreadable file).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line_no, const std::string& what_arg)
      : std::runtime_error(line_no > 0 ? "config line " + std::to_string(line_no) + ": " + what_arg
                                       : "config: " + what_arg),
        line(line_no) {}
  int line;
};

// Parses `key = value` lines under [mesh] / [params] / [time] / [scheme] /
// [solver] / [experiment] headers.  '#' starts a comment.  Unknown sections,
// unknown keys, duplicate keys, and malformed or out-of-range values are hard
// errors carrying the offending line number.
RunConfig parse_config(const std::string& text);

// Reads the file and forwards to parse_config.
RunConfig load_config_file(const std::string& path);

const char* to_string(ExperimentKind kind);
const char* to_string(SchemeKind kind);
const char* to_string(SolveMethod method);

}  // namespace mhd

#endif
