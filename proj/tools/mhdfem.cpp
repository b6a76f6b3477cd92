// Command-line driver: forced runs, mesh/timestep sweeps, energy and
// Gauss-law property checks, and the oracle/invariant selftest.
//
// Exit codes: 0 success, 1 assertion failure, 2 config error, 3 solver
// failure.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mhd/experiments.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string output_override;
  std::string dump_mesh_path;
  bool no_timestamp = false;
  bool reference = false;  // sweep-k: measure against a fine-step trajectory
};

mhd::RunConfig load(const CliOptions& opt, mhd::ExperimentKind kind) {
  mhd::RunConfig cfg = mhd::load_config_file(opt.config_path);
  if (cfg.experiment_explicit && cfg.experiment != kind)
    throw mhd::ConfigError(0, std::string("config pins experiment kind '") +
                                  mhd::to_string(cfg.experiment) + "' but the '" +
                                  mhd::to_string(kind) + "' driver was invoked");
  if (!opt.output_override.empty()) cfg.output = opt.output_override;
  return cfg;
}

int finish(const mhd::ExperimentResult& result, const mhd::RunConfig& cfg,
           const CliOptions& opt) {
  if (!result.rows.empty()) {
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open output file '" << cfg.output << "'\n";
      return 2;
    }
    out << mhd::csv_text(result, !opt.no_timestamp);
    std::cout << "wrote " << cfg.output << " (" << result.rows.size() << " rows)\n";
  }
  std::cout << result.note << "\n";
  if (result.failure_kind == mhd::RunReport::FailureKind::Solver ||
      result.failure_kind == mhd::RunReport::FailureKind::Picard)
    return 3;
  if (result.failure_kind == mhd::RunReport::FailureKind::Structure) return 1;
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incompressible MHD finite-element solver driver"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", opt.config_path, "INI-style run configuration")->required();
    sub->add_option("-o,--output", opt.output_override, "override the configured CSV path");
    sub->add_flag("--no-timestamp", opt.no_timestamp,
                  "omit the timestamp comment for byte-reproducible CSV");
  };

  CLI::App* run = app.add_subcommand("run", "one forced run with manufactured data");
  add_common(run);
  run->add_option("--dump-mesh", opt.dump_mesh_path, "write the mesh as plain text and continue");

  CLI::App* sweep_h =
      app.add_subcommand("sweep-h", "mesh refinement sweep at fixed k (errors vs exact fields)");
  add_common(sweep_h);

  CLI::App* sweep_k = app.add_subcommand("sweep-k", "time step sweep on a fixed mesh");
  add_common(sweep_k);
  sweep_k->add_flag("--reference", opt.reference,
                    "measure against a trajectory at one quarter of the finest swept step "
                    "instead of the exact fields (isolates the time error)");

  CLI::App* energy =
      app.add_subcommand("energy", "source-free decay: discrete energy law check");
  add_common(energy);

  CLI::App* gauss =
      app.add_subcommand("gauss", "source-free induction: cellwise div B invariance check");
  add_common(gauss);

  app.add_subcommand("selftest", "oracle equivalence, algebraic identities, quadrature exactness");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("selftest")) return mhd::run_selftest(std::cout) ? 0 : 1;

    if (app.got_subcommand(run)) {
      const mhd::RunConfig cfg = load(opt, mhd::ExperimentKind::Single);
      if (!opt.dump_mesh_path.empty()) {
        std::ofstream mesh_out(opt.dump_mesh_path);
        if (!mesh_out) throw mhd::ConfigError(0, "cannot open '" + opt.dump_mesh_path + "'");
        mhd::dump_mesh(
            mhd::build_box_mesh(cfg.divisions, cfg.divisions, cfg.divisions, cfg.extents),
            mesh_out);
        std::cout << "wrote mesh dump " << opt.dump_mesh_path << "\n";
      }
      return finish(mhd::run_single(cfg), cfg, opt);
    }
    if (app.got_subcommand(sweep_h)) {
      const mhd::RunConfig cfg = load(opt, mhd::ExperimentKind::SweepH);
      return finish(mhd::run_sweep_h(cfg), cfg, opt);
    }
    if (app.got_subcommand(sweep_k)) {
      const mhd::RunConfig cfg = load(opt, mhd::ExperimentKind::SweepK);
      return finish(mhd::run_sweep_k(cfg, !opt.reference), cfg, opt);
    }
    if (app.got_subcommand(energy)) {
      const mhd::RunConfig cfg = load(opt, mhd::ExperimentKind::Energy);
      return finish(mhd::run_energy(cfg), cfg, opt);
    }
    if (app.got_subcommand(gauss)) {
      const mhd::RunConfig cfg = load(opt, mhd::ExperimentKind::Gauss);
      return finish(mhd::run_gauss(cfg), cfg, opt);
    }
  } catch (const mhd::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mhd::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mhd::PicardFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mhd::StructureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand matched (unreachable with require_subcommand)
}
