#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdhelm/diagnostics.hpp"
#include "tdhelm/experiment.hpp"
#include "tdhelm/io.hpp"

namespace fs = std::filesystem;
using namespace tdhelm;

namespace {

// string-typed mirrors of the enum fields so config files stay readable
struct CliConfig {
  ExperimentConfig cfg;
  std::string model_type = "constant";
  std::string stencil = "second_order";
  std::string bounds = "analytic";
  std::string mode = "real";
  std::string config_path;
};

// CLI11 never processes a config file attached to a subcommand (only the
// top-level app runs the config stage), so expand the file into equivalent
// command-line tokens ourselves.  The derived tokens are spliced in right
// after the subcommand name and explicit flags keep their later position, so
// with a take-last policy the command line overrides the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> tokens(argv + 1, argv + argc);
  if (tokens.empty() || tokens.front().empty() || tokens.front()[0] == '-')
    return tokens;
  std::string path;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i] == "--config" && i + 1 < tokens.size()) path = tokens[i + 1];
    else if (tokens[i].rfind("--config=", 0) == 0) path = tokens[i].substr(9);
  }
  if (path.empty()) return tokens;
  std::vector<std::string> out{tokens.front()};
  for (const CLI::ConfigItem& item : CLI::ConfigTOML{}.from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string name;
    for (const std::string& p : item.parents) name += p + ".";
    name += item.name;
    if (name == "config") continue;  // a config file cannot chain-load another
    if (item.inputs.size() == 1) {
      out.push_back("--" + name + "=" + item.inputs.front());
    } else {
      out.push_back("--" + name);
      out.insert(out.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  out.insert(out.end(), tokens.begin() + 1, tokens.end());
  return out;
}

void add_common_options(CLI::App* cmd, CliConfig& c) {
  cmd->add_option("--config", c.config_path,
                  "TOML-style config file; command-line flags override its keys");
  cmd->option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);

  cmd->add_option("--model.type", c.model_type,
                  "velocity model: constant|inclusion|layered|file")
      ->check(CLI::IsMember({"constant", "inclusion", "layered", "file"}));
  cmd->add_option("--model.dim", c.cfg.model.dim, "spatial dimension")
      ->check(CLI::Range(2, 3));
  cmd->add_option("--model.interior", c.cfg.model.interior,
                  "interior grid points per axis");
  cmd->add_option("--model.layer_width", c.cfg.model.layer_width,
                  "absorbing-layer points per side");
  cmd->add_option("--model.ppw", c.cfg.model.ppw,
                  "min points per wavelength (sets the frequency unless freq > 0)");
  cmd->add_option("--model.freq", c.cfg.model.freq,
                  "physical frequency override (cycles per unit length over c)");
  cmd->add_option("--model.rmax", c.cfg.model.rmax,
                  "peak per-cycle damping at the outer boundary");
  cmd->add_option("--model.contrast", c.cfg.model.contrast,
                  "velocity contrast of the inclusion / layering");
  cmd->add_option("--model.path", c.cfg.model.path, "velocity file (type = file)");

  cmd->add_option("--discretization.stencil", c.stencil,
                  "second_order|compact")
      ->check(CLI::IsMember({"second_order", "compact"}));
  cmd->add_option("--discretization.table", c.cfg.table_path,
                  "coefficient CSV for the compact stencil (empty = built-in)");

  cmd->add_option("--scheme.safety", c.cfg.safety, "fraction of the max stable dt")
      ->check(CLI::Range(1e-3, 1.0));
  cmd->add_option("--scheme.bounds", c.bounds, "analytic|iterative")
      ->check(CLI::IsMember({"analytic", "iterative"}));

  cmd->add_option("--precond.T", c.cfg.precond.T,
                  "simulated periods per preconditioner application");
  cmd->add_option("--precond.rho", c.cfg.precond.rho,
                  "forcing taper fraction; 0 ramps over one period");
  cmd->add_option("--precond.mode", c.mode, "real|complex")
      ->check(CLI::IsMember({"real", "complex"}));

  cmd->add_option("--gmres.restart", c.cfg.gmres.restart, "restart length");
  cmd->add_option("--gmres.tol", c.cfg.gmres.rel_tol,
                  "relative residual reduction target");
  cmd->add_option("--gmres.max_cycles", c.cfg.gmres.max_cycles,
                  "restart cycles before giving up");
  cmd->add_option("--gmres.right_precond", c.cfg.gmres.right_precond,
                  "use right preconditioning (comparison variant)");

  cmd->add_option("--source.x", c.cfg.source[0], "source position, fraction of box");
  cmd->add_option("--source.y", c.cfg.source[1], "source position, fraction of box");
  cmd->add_option("--source.z", c.cfg.source[2], "source position, fraction of box");

  cmd->add_option("--output.dir", c.cfg.out_dir, "output directory");
  cmd->add_option("--output.snapshot_every", c.cfg.snapshot_every,
                  "steps between snapshots of the first application (0 = off)");

  cmd->add_option("--reference", c.cfg.with_reference,
                  "compute the direct-solve reference (small models)");
}

ExperimentConfig resolve(const CliConfig& c) {
  ExperimentConfig cfg = c.cfg;
  if (c.model_type == "constant") cfg.model.kind = ModelKind::constant;
  else if (c.model_type == "inclusion") cfg.model.kind = ModelKind::circular_inclusion;
  else if (c.model_type == "layered") cfg.model.kind = ModelKind::layered;
  else cfg.model.kind = ModelKind::from_file;
  cfg.stencil = c.stencil == "compact" ? Stencil::compact : Stencil::second_order;
  cfg.bounds_mode = c.bounds == "iterative" ? BoundsMode::iterative
                                            : BoundsMode::analytic_hint;
  cfg.precond.mode = c.mode == "complex" ? STMode::complex_run
                                         : STMode::real_extraction;
  return cfg;
}

void print_report(const SolveReport& rep) {
  std::printf("converged                 %s\n", rep.converged ? "yes" : "no");
  std::printf("iterations                %d (in %d cycles)\n", rep.outer_iterations,
              rep.cycles);
  std::printf("preconditioner calls      %d\n", rep.preconditioner_applications);
  std::printf("simulated periods         %.6g\n", rep.total_simulated_periods);
  if (!rep.residual_history.empty())
    std::printf("preconditioned residual   %.6e -> %.6e\n",
                rep.residual_history.front(), rep.residual_history.back());
  if (!rep.true_residual_history.empty())
    std::printf("true residual             %.6e -> %.6e\n",
                rep.true_residual_history.front(), rep.true_residual_history.back());
  if (!rep.true_error_history.empty())
    std::printf("relative error vs oracle  %.6e -> %.6e\n",
                rep.true_error_history.front(), rep.true_error_history.back());
  std::printf("wall time                 %.3f s\n", rep.wall_time_seconds);
}

int cmd_solve(const CliConfig& c) {
  const ExperimentConfig cfg = resolve(c);
  fs::create_directories(cfg.out_dir);
  const Experiment e = prepare(cfg);
  const SolveOutput out = run_solve(e, cfg);
  write_field(cfg.out_dir + "/solution.field", e.model.dim, e.model.npts, e.model.h,
              0, out.solution);
  write_history_csv(cfg.out_dir + "/history.csv", out.report, e.periods_per_apply);
  write_manifest(cfg.out_dir + "/manifest.toml", "solve", cfg, e, &out.report);
  print_report(out.report);
  std::printf("wrote %s/{solution.field,history.csv,manifest.toml}\n",
              cfg.out_dir.c_str());
  return out.report.converged ? 0 : 3;
}

int cmd_converge_t(const CliConfig& c, const std::vector<int>& t_list,
                   const std::vector<double>& rho_list) {
  ExperimentConfig cfg = resolve(c);
  cfg.with_reference = true;
  fs::create_directories(cfg.out_dir);
  const Experiment e = prepare(cfg);
  const auto rows = converge_t(e, cfg, t_list, rho_list);
  const std::string csv = cfg.out_dir + "/converge_t.csv";
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot open " + csv);
  out << "T_periods,rho_fraction,relative_error_l2\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.12e\n", r.T, r.rho, r.rel_error);
    out << buf;
    std::printf("T = %4d  rho = %-5g  error = %.6e\n", r.T, r.rho, r.rel_error);
  }
  write_manifest(cfg.out_dir + "/manifest.toml", "converge-t", cfg, e, nullptr);
  std::printf("wrote %s\n", csv.c_str());
  return 0;
}

int cmd_gmres_sweep(const CliConfig& c, const std::vector<int>& t_list,
                    int max_baseline) {
  ExperimentConfig cfg = resolve(c);
  cfg.with_reference = true;
  fs::create_directories(cfg.out_dir);
  const Experiment e = prepare(cfg);
  const auto rows = gmres_sweep(e, cfg, t_list, max_baseline);
  const std::string csv = cfg.out_dir + "/gmres_sweep.csv";
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot open " + csv);
  out << "T_periods,curve,iteration_index,cumulative_simulated_periods,"
         "preconditioned_residual_l2,true_residual_l2,relative_true_error\n";
  char buf[160];
  for (const auto& r : rows) {
    out << r.T << "," << (r.plain ? "plain" : "gmres") << "," << r.iteration << ",";
    std::snprintf(buf, sizeof buf, "%.6g,", r.periods);
    out << buf;
    if (std::isfinite(r.pres)) {
      std::snprintf(buf, sizeof buf, "%.12e", r.pres);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12e,%.12e\n", r.true_res, r.true_err);
    out << buf;
  }
  write_manifest(cfg.out_dir + "/manifest.toml", "gmres-sweep", cfg, e, nullptr);
  for (const int t : t_list) {
    double last_gmres = NAN, last_plain = NAN;
    for (const auto& r : rows)
      if (r.T == t) (r.plain ? last_plain : last_gmres) = r.true_err;
    std::printf("T = %4d  final error: gmres %.3e, plain %.3e\n", t, last_gmres,
                last_plain);
  }
  std::printf("wrote %s\n", csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-domain wave preconditioning for indefinite Helmholtz systems"};
  app.set_version_flag("--version", kArtifactVersion);
  app.require_subcommand(1);

  CliConfig c_solve, c_conv, c_sweep;
  std::vector<int> conv_t{25, 50, 100, 200};
  std::vector<double> conv_rho{0.0, 0.25, 0.5, 0.75};
  std::vector<int> sweep_t{12};
  int max_baseline = 16;
  std::string selfcheck_csv;

  CLI::App* solve = app.add_subcommand(
      "solve", "solve H U = F with time-domain-preconditioned GMRES");
  add_common_options(solve, c_solve);

  CLI::App* conv = app.add_subcommand(
      "converge-t", "S_T accuracy vs the direct solve over a (T, rho) grid");
  add_common_options(conv, c_conv);
  conv->add_option("--T-list", conv_t, "T values (whole periods)");
  conv->add_option("--rho-list", conv_rho, "taper fractions (0 = one-period ramp)");

  CLI::App* sweep = app.add_subcommand(
      "gmres-sweep",
      "GMRES convergence per T vs plain S_T at matched period budgets");
  add_common_options(sweep, c_sweep);
  sweep->add_option("--T-list", sweep_t, "T values (whole periods)");
  sweep->add_option("--max-baseline", max_baseline,
                    "plain-run budget samples per T");

  CLI::App* self = app.add_subcommand("selfcheck",
                                      "run the built-in verification battery");
  self->add_option("--csv", selfcheck_csv, "also write results as CSV");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // App::parse expects reversed args
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (solve->parsed()) return cmd_solve(c_solve);
    if (conv->parsed()) return cmd_converge_t(c_conv, conv_t, conv_rho);
    if (sweep->parsed()) return cmd_gmres_sweep(c_sweep, sweep_t, max_baseline);
    if (self->parsed()) return run_selfcheck(std::cout, selfcheck_csv) ? 0 : 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
