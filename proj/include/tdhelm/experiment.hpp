#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tdhelm/fd.hpp"
#include "tdhelm/gmres.hpp"
#include "tdhelm/grid.hpp"
#include "tdhelm/precond.hpp"
#include "tdhelm/scheme.hpp"

namespace tdhelm {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Stencil { second_order, compact };

/// Everything a run needs, resolved from config file + flag overrides.
struct ExperimentConfig {
  ModelSpec model;
  Stencil stencil = Stencil::second_order;
  std::string table_path;  ///< sampled coefficient CSV; empty = built-in table
  double safety = 0.95;
  BoundsMode bounds_mode = BoundsMode::analytic_hint;
  PrecondConfig precond;
  GmresConfig gmres;
  bool with_reference = false;  ///< direct-solve oracle for error columns
  std::array<double, 3> source{0.5, 0.5, 0.5};
  std::string out_dir = ".";
  long snapshot_every = 0;  ///< steps between snapshots of the first application
};

/// Assembled pipeline state shared by the commands and the bindings.
struct Experiment {
  GridModel model;
  SplitOperator op;
  SpectralBounds bounds;
  SchemeParams params;
  KernelCoeffs kernel;
  ComplexVector rhs;
  std::optional<ComplexVector> reference;
  double periods_per_apply = 0.0;  ///< real-run periods per preconditioner call
};

/// model -> operator -> bounds -> parameters -> kernel -> source. Computes the
/// oracle solution when requested. Refuses configurations whose Krylov basis
/// would not fit in memory. Errors carry the failing stage's name.
Experiment prepare(const ExperimentConfig& cfg);

struct SolveOutput {
  SolveReport report;
  ComplexVector solution;
};

/// Preconditioned GMRES per the config. snapshot_every > 0 dumps real-field
/// snapshots of the first preconditioner application into out_dir.
SolveOutput run_solve(const Experiment& e, const ExperimentConfig& cfg);

struct ConvergeRow {
  int T;
  double rho;
  double rel_error;  ///< ||S_T F - H^{-1} F|| / ||H^{-1} F||
};

/// S_T accuracy sweep against the direct-solve oracle.
std::vector<ConvergeRow> converge_t(const Experiment& e, const ExperimentConfig& cfg,
                                    const std::vector<int>& t_list,
                                    const std::vector<double>& rho_list);

struct SweepRow {
  int T;
  bool plain;        ///< true: single S_P application at the matched budget
  int iteration;     ///< GMRES iteration index (matched row index for plain)
  double periods;    ///< cumulative simulated periods (budget)
  double pres;       ///< preconditioned residual (GMRES rows only, else NaN)
  double true_res;   ///< ||b - H x||
  double true_err;   ///< ||x - x*|| / ||x*||
};

/// Per T: one GMRES trace plus plain S_P applications at matched period
/// budgets (subsampled to at most max_baseline_runs budgets per T).
std::vector<SweepRow> gmres_sweep(const Experiment& e, const ExperimentConfig& cfg,
                                  const std::vector<int>& t_list,
                                  int max_baseline_runs = 16);

/// TOML-style manifest holding every resolved parameter; passing it back as
/// the config file reproduces the run. Result and environment go in comments.
void write_manifest(const std::string& path, const std::string& command,
                    const ExperimentConfig& cfg, const Experiment& e,
                    const SolveReport* rep);

}  // namespace tdhelm
