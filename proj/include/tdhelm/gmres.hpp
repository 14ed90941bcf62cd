#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tdhelm/complex_vector.hpp"
#include "tdhelm/split_operator.hpp"

namespace tdhelm {

using ComplexApply = std::function<ComplexVector(const ComplexVector&)>;

struct GmresConfig {
  int restart = 10;
  int max_cycles = 50;       ///< restart cycles before giving up
  double rel_tol = 1e-5;     ///< on the preconditioned residual
  double periods_per_apply = 0.0;  ///< simulated periods per preconditioner call
  bool record_true_residual = true;
  /// Comparison variant solving H P v = b, x = P v; convergence is then judged
  /// on the unpreconditioned residual. Default is left preconditioning.
  bool right_precond = false;
  const ComplexVector* reference = nullptr;  ///< oracle solution for error history
};

struct SolveReport {
  bool converged = false;
  int outer_iterations = 0;  ///< Arnoldi steps summed over cycles
  int cycles = 0;
  int preconditioner_applications = 0;
  double total_simulated_periods = 0.0;
  double wall_time_seconds = 0.0;
  /// Entry j belongs to iteration j (entry 0 is the initial residual).
  std::vector<double> residual_history;       ///< preconditioned ||P(b - H x)||
  std::vector<double> true_residual_history;  ///< ||b - H x|| (if recorded)
  std::vector<double> true_error_history;     ///< ||x - x*|| / ||x*|| (if reference)
  std::vector<int> applications_history;      ///< cumulative preconditioner calls
};

/// Left-preconditioned restarted GMRES on P H x = P b. precond may be null
/// (identity). Modified Gram-Schmidt with a measured-defect second pass.
/// Throws on NaN/Inf with the offending iteration in the message.
SolveReport gmres(const ComplexApply& op, const ComplexApply& precond,
                  const ComplexVector& b, ComplexVector& x, const GmresConfig& cfg);

SolveReport gmres(const SplitOperator& h, const ComplexApply& precond,
                  const ComplexVector& b, ComplexVector& x, const GmresConfig& cfg);

/// Plain GMRES on H x = b (no preconditioner), for comparison runs.
SolveReport unpreconditioned_baseline(const SplitOperator& h, const ComplexVector& b,
                                      ComplexVector& x, const GmresConfig& cfg);

}  // namespace tdhelm
