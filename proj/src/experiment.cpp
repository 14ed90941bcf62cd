#include "tdhelm/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "tdhelm/io.hpp"
#include "tdhelm/oracle.hpp"

namespace tdhelm {

namespace {

[[noreturn]] void stage_fail(const char* stage, const std::exception& err) {
  throw std::runtime_error(std::string(stage) + ": " + err.what());
}

const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::constant: return "constant";
    case ModelKind::circular_inclusion: return "inclusion";
    case ModelKind::layered: return "layered";
    case ModelKind::from_file: return "file";
  }
  return "constant";
}

double mode_factor(const PrecondConfig& pc) {
  return pc.mode == STMode::complex_run ? 2.0 : 1.0;
}

void check_memory_budget(const ExperimentConfig& cfg, long n) {
  const long basis = cfg.gmres.restart + 9 +
                     (cfg.gmres.right_precond ? cfg.gmres.restart : 0);
  double bytes = static_cast<double>(basis) * 2.0 * static_cast<double>(n) * 8.0;
  if (cfg.stencil == Stencil::compact) {
    const double per_point = std::pow(3.0, cfg.model.dim);
    bytes += static_cast<double>(n) * per_point * 8.0;
  }
  if (bytes > 4.5e9)
    throw std::runtime_error(
        "config: estimated memory " + std::to_string(bytes / 1e9) +
        " GB exceeds the budget; shrink the model or the restart length");
}

}  // namespace

Experiment prepare(const ExperimentConfig& cfg) {
  Experiment e;
  try {
    check_memory_budget(cfg, 1);  // cheap structural checks first
    e.model = build_model(cfg.model);
  } catch (const std::exception& err) {
    stage_fail("model", err);
  }
  try {
    check_memory_budget(cfg, e.model.num_points());
    if (cfg.stencil == Stencil::second_order) {
      e.op = build_second_order(e.model);
    } else {
      const CoeffTable table = cfg.table_path.empty()
                                   ? default_table(e.model.dim)
                                   : load_table_csv(cfg.table_path, e.model.dim);
      e.op = build_compact(e.model, table);
    }
  } catch (const std::exception& err) {
    stage_fail("operator", err);
  }
  try {
    e.bounds = estimate_bounds(e.op, cfg.bounds_mode);
  } catch (const std::exception& err) {
    stage_fail("bounds", err);
  }
  try {
    e.params = select_params(e.op, e.bounds, cfg.safety);
  } catch (const std::exception& err) {
    stage_fail("parameters", err);
  }
  try {
    e.kernel = build_kernel(e.op, e.params, true);
  } catch (const std::exception& err) {
    stage_fail("kernel", err);
  }
  try {
    e.rhs = point_source(e.model, cfg.source);
  } catch (const std::exception& err) {
    stage_fail("source", err);
  }
  if (cfg.with_reference) {
    try {
      if (e.model.num_points() > 200000)
        throw std::runtime_error(
            "direct-solve oracle capped at 200000 unknowns; shrink the model");
      e.reference = DirectSolver(e.op).solve(e.rhs);
    } catch (const std::exception& err) {
      stage_fail("reference", err);
    }
  }
  e.periods_per_apply = cfg.precond.T * mode_factor(cfg.precond);
  return e;
}

SolveOutput run_solve(const Experiment& e, const ExperimentConfig& cfg) {
  ComplexApply precond = as_preconditioner(e.kernel, cfg.precond);
  if (cfg.snapshot_every > 0) {
    const WindowSpec w = make_window(e.kernel, cfg.precond);
    auto first = std::make_shared<bool>(true);
    const KernelCoeffs kernel = e.kernel;
    const PrecondConfig pcfg = cfg.precond;
    const GridModel* model = &e.model;
    const std::string dir = cfg.out_dir;
    const long every = cfg.snapshot_every;
    precond = [=](const ComplexVector& f) {
      if (!*first) return apply_st(kernel, pcfg, f);
      *first = false;
      Observer snap = [&](const LeapfrogState& s) {
        if (s.step % every != 0) return;
        char name[64];
        std::snprintf(name, sizeof name, "/snapshot_%08ld.field", s.step);
        ComplexVector u(kernel.dim);
        u.re = s.u_curr;
        write_field(dir + name, model->dim, model->npts, model->h, s.step, u,
                    /*complex_parts=*/false);
      };
      const std::vector<Observer> obs{snap};
      return pcfg.mode == STMode::complex_run ? apply_st_complex(kernel, w, f, obs)
                                              : apply_st_real(kernel, w, f, obs);
    };
  }
  GmresConfig gcfg = cfg.gmres;
  gcfg.periods_per_apply = e.periods_per_apply;
  gcfg.reference = e.reference ? &*e.reference : nullptr;
  SolveOutput out;
  out.report = gmres(e.op, precond, e.rhs, out.solution, gcfg);
  return out;
}

std::vector<ConvergeRow> converge_t(const Experiment& e, const ExperimentConfig& cfg,
                                    const std::vector<int>& t_list,
                                    const std::vector<double>& rho_list) {
  const ComplexVector oracle =
      e.reference ? *e.reference : DirectSolver(e.op).solve(e.rhs);
  const double oracle_norm = norm(oracle);
  std::vector<ConvergeRow> rows;
  for (const double rho : rho_list) {
    for (const int t : t_list) {
      PrecondConfig pc = cfg.precond;
      pc.T = t;
      pc.rho = rho;
      const ComplexVector x = apply_st(e.kernel, pc, e.rhs);
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double dr = x.re[i] - oracle.re[i];
        const double di = x.im[i] - oracle.im[i];
        d2 += dr * dr + di * di;
      }
      rows.push_back({t, rho, std::sqrt(d2) / oracle_norm});
    }
  }
  return rows;
}

std::vector<SweepRow> gmres_sweep(const Experiment& e, const ExperimentConfig& cfg,
                                  const std::vector<int>& t_list,
                                  int max_baseline_runs) {
  const ComplexVector oracle =
      e.reference ? *e.reference : DirectSolver(e.op).solve(e.rhs);
  const double oracle_norm = norm(oracle);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepRow> rows;

  for (const int t : t_list) {
    PrecondConfig pc = cfg.precond;
    pc.T = t;
    GmresConfig gcfg = cfg.gmres;
    gcfg.periods_per_apply = t * mode_factor(pc);
    gcfg.reference = &oracle;
    gcfg.record_true_residual = true;
    ComplexVector x;
    const SolveReport rep =
        gmres(e.op, as_preconditioner(e.kernel, pc), e.rhs, x, gcfg);

    const std::size_t m = rep.residual_history.size();
    for (std::size_t j = 0; j < m; ++j)
      rows.push_back({t, false, static_cast<int>(j),
                      gcfg.periods_per_apply * rep.applications_history[j],
                      rep.residual_history[j], rep.true_residual_history[j],
                      rep.true_error_history[j]});

    // plain S_P at matched budgets, subsampled to keep the cost linear-ish
    std::vector<std::size_t> picks;
    if (m <= static_cast<std::size_t>(max_baseline_runs)) {
      for (std::size_t j = 0; j < m; ++j) picks.push_back(j);
    } else {
      for (int i = 0; i < max_baseline_runs; ++i)
        picks.push_back(static_cast<std::size_t>(
            std::lround(double(i) * double(m - 1) / double(max_baseline_runs - 1))));
    }
    for (const std::size_t j : picks) {
      const int p = rep.applications_history[j] * t;  // budget in whole periods
      if (p < 1) continue;
      PrecondConfig plain = pc;
      plain.T = p;
      const ComplexVector xp = apply_st(e.kernel, plain, e.rhs);
      double d2 = 0.0;
      for (std::size_t i = 0; i < xp.size(); ++i) {
        const double dr = xp.re[i] - oracle.re[i];
        const double di = xp.im[i] - oracle.im[i];
        d2 += dr * dr + di * di;
      }
      rows.push_back({t, true, static_cast<int>(j), p * mode_factor(pc), nan,
                      residual_norm(e.op, xp, e.rhs), std::sqrt(d2) / oracle_norm});
    }
  }
  return rows;
}

void write_manifest(const std::string& path, const std::string& command,
                    const ExperimentConfig& cfg, const Experiment& e,
                    const SolveReport* rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  char buf[320];
  out << "# run manifest (artifact version " << kArtifactVersion << ")\n";
  out << "# command: " << command << "\n";
  out << "# pass this file back via --config to reproduce the run\n";
  out << "# deterministic: fixed power-iteration seeds 12345/23456/34567, no "
         "other randomness\n";
  // bare keys must precede the first table header or they land in its table
  out << "\nreference = " << (cfg.with_reference ? "true" : "false") << "\n";
  out << "\n[model]\n";
  out << "type = \"" << kind_name(cfg.model.kind) << "\"\n";
  out << "dim = " << cfg.model.dim << "\n";
  out << "interior = " << cfg.model.interior << "\n";
  out << "layer_width = " << cfg.model.layer_width << "\n";
  std::snprintf(buf, sizeof buf, "ppw = %.17g\nfreq = %.17g\nrmax = %.17g\n",
                cfg.model.ppw, e.model.freq, cfg.model.rmax);
  out << buf;
  std::snprintf(buf, sizeof buf, "contrast = %.17g\n", cfg.model.contrast);
  out << buf;
  out << "path = \"" << cfg.model.path << "\"\n";
  out << "\n[discretization]\n";
  out << "stencil = \""
      << (cfg.stencil == Stencil::second_order ? "second_order" : "compact") << "\"\n";
  out << "table = \"" << cfg.table_path << "\"\n";
  out << "\n[scheme]\n";
  std::snprintf(buf, sizeof buf, "safety = %.17g\n", cfg.safety);
  out << buf;
  out << "bounds = \""
      << (cfg.bounds_mode == BoundsMode::analytic_hint ? "analytic" : "iterative")
      << "\"\n";
  out << "\n[precond]\n";
  out << "T = " << cfg.precond.T << "\n";
  std::snprintf(buf, sizeof buf, "rho = %.17g\n", cfg.precond.rho);
  out << buf;
  out << "mode = \""
      << (cfg.precond.mode == STMode::real_extraction ? "real" : "complex") << "\"\n";
  out << "\n[gmres]\n";
  out << "restart = " << cfg.gmres.restart << "\n";
  std::snprintf(buf, sizeof buf, "tol = %.17g\n", cfg.gmres.rel_tol);
  out << buf;
  out << "max_cycles = " << cfg.gmres.max_cycles << "\n";
  out << "right_precond = " << (cfg.gmres.right_precond ? "true" : "false") << "\n";
  out << "\n[source]\n";
  std::snprintf(buf, sizeof buf, "x = %.17g\ny = %.17g\nz = %.17g\n", cfg.source[0],
                cfg.source[1], cfg.source[2]);
  out << buf;
  out << "\n[output]\n";
  out << "dir = \"" << cfg.out_dir << "\"\n";
  out << "snapshot_every = " << cfg.snapshot_every << "\n";

  out << "\n# resolved discretization and scheme\n";
  std::snprintf(buf, sizeof buf,
                "# unknowns = %ld (grid %ld x %ld x %ld), h = %.12g, freq = %.12g\n",
                e.model.num_points(), e.model.npts[0], e.model.npts[1],
                e.model.npts[2], e.model.h, e.model.freq);
  out << buf;
  std::snprintf(
      buf, sizeof buf,
      "# bounds: lambda_min_re = %.12g, lambda_max_re = %.12g, lambda_max_im = "
      "%.12g (%s)\n",
      e.bounds.lambda_min_re, e.bounds.lambda_max_re, e.bounds.lambda_max_im,
      e.bounds.provenance == SpectralBounds::Provenance::analytic ? "analytic"
                                                                  : "iterative");
  out << buf;
  std::snprintf(buf, sizeof buf,
                "# scheme = %s, omega = %.12g, dt = %.12g, steps_per_period = %d, "
                "alpha = %.12g, beta = %.12g\n",
                e.params.scheme == Scheme::acd ? "acd" : "abd", e.params.omega,
                e.params.dt, e.params.steps_per_period, e.params.alpha, e.params.beta);
  out << buf;
  if (rep) {
    out << "# result\n";
    std::snprintf(buf, sizeof buf,
                  "# converged = %s, iterations = %d, cycles = %d, "
                  "preconditioner_applications = %d\n",
                  rep->converged ? "true" : "false", rep->outer_iterations,
                  rep->cycles, rep->preconditioner_applications);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "# total_simulated_periods = %.6g, wall_time_seconds = %.3f\n",
                  rep->total_simulated_periods, rep->wall_time_seconds);
    out << buf;
    if (!rep->residual_history.empty()) {
      std::snprintf(buf, sizeof buf,
                    "# final preconditioned residual = %.6e (initial %.6e)\n",
                    rep->residual_history.back(), rep->residual_history.front());
      out << buf;
    }
  }
  if (!out) throw std::runtime_error("write_manifest: write failed");
}

}  // namespace tdhelm
