#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "tdhelm/scheme.hpp"
#include "tdhelm/split_operator.hpp"

namespace tdhelm {

/// One assembled two-step kernel. Both families advance
///   cd form: (I + L/2) u_{n+1} = (2I - K) u_n - (I - L/2) u_{n-1} + g_n
///   bd form:          u_{n+1} = (2I - K - L) u_n - (I - L) u_{n-1} + g_n
/// with g_n = g_scale * f_n. The cd form requires diagonal L so the half-step
/// solve stays elementwise.
struct KernelCoeffs {
  std::size_t dim = 0;
  bool cd_form = true;
  RealApply k_apply;            ///< y = K x
  RealApply l_apply;            ///< y = L x (bd form)
  std::vector<double> l_diag;   ///< diagonal of L (cd form)
  std::vector<double> inv_d;    ///< 1 / (1 + l_diag/2) (cd form)
  double g_scale = 0.0;

  // bookkeeping carried along for forcing phases and diagnostics
  double omega = 0.0;
  double dt = 0.0;
  int steps_per_period = 0;
};

/// Kernel for H under the given parameters. adapted=false builds the plain
/// cd/bd kernel at the same omega and dt (used to demonstrate phase error).
/// Throws if the cd form is requested with non-diagonal Im H.
KernelCoeffs build_kernel(const SplitOperator& h, const SchemeParams& params,
                          bool adapted = true);

/// Kernel directly from explicit K and L (stability studies run on raw
/// matrices meeting the theorem hypotheses, with no backing H).
KernelCoeffs kernel_from_matrices(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                                  bool cd_form, double g_scale = 1.0);

struct LeapfrogState {
  std::vector<double> u_prev;
  std::vector<double> u_curr;
  long step = 0;  ///< index of u_curr
  std::vector<double> scratch;   // K u_n
  std::vector<double> scratch2;  // u_n - u_{n-1} (bd form)
  std::vector<double> scratch3;  // L (u_n - u_{n-1}) (bd form)

  explicit LeapfrogState(std::size_t n)
      : u_prev(n, 0.0), u_curr(n, 0.0), scratch(n, 0.0) {}
};

/// Writes f at the given step into the output span.
using ForcingFn = std::function<void(long step, std::span<double>)>;

/// Called after every step with the updated state.
using Observer = std::function<void(const LeapfrogState&)>;

/// Advance once: consumes f at the state's current step index.
void step(const KernelCoeffs& k, LeapfrogState& s, std::span<const double> f);

/// Run n_steps steps from u_0 = u_1 = 0 (zero history), applying the forcing
/// at steps 0 .. n_steps-1. forcing may be null (homogeneous run from the
/// state passed in). Returns the final state (step index n_steps).
LeapfrogState run(const KernelCoeffs& k, const ForcingFn& forcing, long n_steps,
                  const std::vector<Observer>& observers = {});

/// Same, but continue from an explicit state (homogeneous stability runs).
void run_from(const KernelCoeffs& k, LeapfrogState& s, const ForcingFn& forcing,
              long n_steps, const std::vector<Observer>& observers = {});

}  // namespace tdhelm
