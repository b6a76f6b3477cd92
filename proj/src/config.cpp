#include "mhd/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace mhd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& v, int line) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(line, "trailing characters after number in '" + v + "'");
  return x;
}

int parse_int(const std::string& v, int line) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(line, "trailing characters after integer in '" + v + "'");
  if (x < -1000000000L || x > 1000000000L) throw ConfigError(line, "integer out of range: '" + v + "'");
  return static_cast<int>(x);
}

}  // namespace

StepperOptions RunConfig::stepper_options() const {
  StepperOptions opt;
  opt.scheme = scheme;
  opt.method = method;
  opt.solver_tol = solver_tol;
  opt.picard_tol = picard_tol;
  opt.picard_max_iter = picard_max_iter;
  return opt;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    if (std::size_t hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "unterminated section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      static const std::set<std::string> known = {"mesh",   "params", "time",
                                                  "scheme", "solver", "experiment"};
      if (!known.count(section))
        throw ConfigError(line, "unknown section [" + section +
                                    "]; expected one of [mesh], [params], [time], [scheme], "
                                    "[solver], [experiment]");
      continue;
    }

    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key before '='");
    if (val.empty()) throw ConfigError(line, "missing value for key '" + key + "'");
    if (section.empty())
      throw ConfigError(line, "key '" + key + "' appears before any [section] header");
    if (!seen.insert(section + "." + key).second)
      throw ConfigError(line, "duplicate key '" + key + "' in [" + section + "]");

    if (section == "mesh") {
      if (key == "divisions") {
        cfg.divisions = parse_int(val, line);
        if (cfg.divisions < 1) throw ConfigError(line, "divisions must be >= 1");
      } else if (key == "extent_x" || key == "extent_y" || key == "extent_z") {
        const double e = parse_double(val, line);
        if (!(e > 0.0)) throw ConfigError(line, key + " must be positive");
        cfg.extents[key == "extent_x" ? 0 : key == "extent_y" ? 1 : 2] = e;
      } else {
        throw ConfigError(line, "unknown key '" + key +
                                    "' in [mesh]; expected divisions, extent_x, extent_y, extent_z");
      }
    } else if (section == "params") {
      if (key == "Re") {
        cfg.params.Re = parse_double(val, line);
        if (!(cfg.params.Re > 0.0)) throw ConfigError(line, "Re must be positive");
      } else if (key == "Rm") {
        cfg.params.Rm = parse_double(val, line);
        if (!(cfg.params.Rm > 0.0)) throw ConfigError(line, "Rm must be positive");
      } else if (key == "s") {
        cfg.params.s = parse_double(val, line);
        if (cfg.params.s < 0.0) throw ConfigError(line, "s must be non-negative");
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [params]; expected Re, Rm, s");
      }
    } else if (section == "time") {
      if (key == "k") {
        cfg.k = parse_double(val, line);
        if (!(cfg.k > 0.0)) throw ConfigError(line, "time step k must be positive");
      } else if (key == "T") {
        cfg.T = parse_double(val, line);
        if (cfg.T < 0.0) throw ConfigError(line, "final time T must be non-negative");
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [time]; expected k, T");
      }
    } else if (section == "scheme") {
      if (key == "scheme") {
        if (val == "linearized") {
          cfg.scheme = SchemeKind::Linearized;
        } else if (val == "picard") {
          cfg.scheme = SchemeKind::Picard;
        } else {
          throw ConfigError(line, "scheme must be one of 'linearized', 'picard' (got '" + val + "')");
        }
      } else if (key == "picard_tol") {
        cfg.picard_tol = parse_double(val, line);
        if (!(cfg.picard_tol > 0.0)) throw ConfigError(line, "picard_tol must be positive");
      } else if (key == "picard_max_iter") {
        cfg.picard_max_iter = parse_int(val, line);
        if (cfg.picard_max_iter < 1) throw ConfigError(line, "picard_max_iter must be >= 1");
      } else {
        throw ConfigError(line, "unknown key '" + key +
                                    "' in [scheme]; expected scheme, picard_tol, picard_max_iter");
      }
    } else if (section == "solver") {
      if (key == "method") {
        if (val == "lu") {
          cfg.method = SolveMethod::SparseLU;
        } else if (val == "gmres") {
          cfg.method = SolveMethod::Gmres;
        } else {
          throw ConfigError(line, "method must be one of 'lu', 'gmres' (got '" + val + "')");
        }
      } else if (key == "tol") {
        cfg.solver_tol = parse_double(val, line);
        if (!(cfg.solver_tol > 0.0)) throw ConfigError(line, "tol must be positive");
      } else {
        throw ConfigError(line, "unknown key '" + key + "' in [solver]; expected method, tol");
      }
    } else if (section == "experiment") {
      if (key == "kind") {
        if (val == "single") {
          cfg.experiment = ExperimentKind::Single;
        } else if (val == "h-sweep") {
          cfg.experiment = ExperimentKind::SweepH;
        } else if (val == "k-sweep") {
          cfg.experiment = ExperimentKind::SweepK;
        } else if (val == "energy") {
          cfg.experiment = ExperimentKind::Energy;
        } else if (val == "gauss") {
          cfg.experiment = ExperimentKind::Gauss;
        } else {
          throw ConfigError(line, "kind must be one of 'single', 'h-sweep', 'k-sweep', 'energy', "
                                  "'gauss' (got '" + val + "')");
        }
        cfg.experiment_explicit = true;
      } else if (key == "levels") {
        cfg.levels = parse_int(val, line);
        if (cfg.levels != 0 && (cfg.levels < 2 || cfg.levels > 8))
          throw ConfigError(line, "levels must be 0 (auto) or between 2 and 8");
      } else if (key == "output") {
        cfg.output = val;
      } else {
        throw ConfigError(line, "unknown key '" + key +
                                    "' in [experiment]; expected kind, levels, output");
      }
    }
  }

  try {
    cfg.params.validate();
    cfg.time_config().steps();  // k > 0, T >= 0, and N*k == T to roundoff
  } catch (const std::exception& e) {
    throw ConfigError(0, e.what());
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Single: return "single";
    case ExperimentKind::SweepH: return "h-sweep";
    case ExperimentKind::SweepK: return "k-sweep";
    case ExperimentKind::Energy: return "energy";
    case ExperimentKind::Gauss: return "gauss";
  }
  return "?";
}

const char* to_string(SchemeKind kind) {
  return kind == SchemeKind::Linearized ? "linearized" : "picard";
}

const char* to_string(SolveMethod method) {
  return method == SolveMethod::SparseLU ? "lu" : "gmres";
}

}  // namespace mhd
