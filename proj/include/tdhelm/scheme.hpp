#pragma once

#include "tdhelm/spectral_bounds.hpp"
#include "tdhelm/split_operator.hpp"

namespace tdhelm {

enum class Scheme { acd, abd };

/// alpha = (w dt)^2 / (4 sin^2(w dt / 2)),  beta = w dt / sin(w dt).
/// Both tend to 1 as w dt -> 0; defined for 0 < w dt < pi.
struct AlphaBeta {
  double alpha;
  double beta;
};
AlphaBeta alpha_beta(double omega_dt);

enum class BoundsMode { analytic_hint, iterative };

/// Iterative mode runs power iteration (plain for the dominant end, shifted by
/// the current max estimate for the other end) and widens estimates outward by
/// 1%. analytic_hint requires bounds attached to the operator.
SpectralBounds estimate_bounds(const SplitOperator& op, BoundsMode mode,
                               double tol = 1e-6, int max_iters = 5000);

/// acd iff Im H is diagonal (its half-step solve must stay elementwise).
Scheme choose_scheme(const SplitOperator& op);

/// Everything the stepping kernel needs, reduced to scalars:
///   K = k_scale * A - bd_k_correction * B,  L = l_scale * B,  g = k_scale * f
/// with A = Re H + omega^2 I and B = Im H / omega.
struct SchemeParams {
  Scheme scheme = Scheme::acd;
  double omega = 0.0;
  double dt = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  int steps_per_period = 0;  ///< 2 pi / (omega dt); kept divisible by 4
  double k_scale = 0.0;          ///< dt^2 / alpha
  double l_scale = 0.0;          ///< beta dt / alpha
  double bd_k_correction = 0.0;  ///< dt beta (1 - cos(omega dt)) / alpha; abd only
};

/// omega = sqrt(-lambda_min_re); dt from the arcsin step bound with the given
/// safety factor, rounded so steps_per_period is a multiple of 4.
SchemeParams select_params_acd(const SpectralBounds& b, double safety = 0.95);

/// omega dt from the quadratic bound (r+1)x^2 + 2sx < 4, omega^2 raised by
/// tan(omega dt / 2) * lambda_max_im; rounding re-verified against the full
/// scalar stability condition. refine grows omega dt by bisection on the full
/// condition (default off).
SchemeParams select_params_abd(const SpectralBounds& b, double safety = 0.95,
                               bool refine = false);

/// Dispatch on choose_scheme(op).
SchemeParams select_params(const SplitOperator& op, const SpectralBounds& b,
                           double safety = 0.95);

/// Plain (unadapted) parameters for the same omega / dt: alpha = beta = 1 and
/// no bd correction. Used by diagnostics to exhibit the phase error of the
/// classical kernels.
SchemeParams plain_params(const SchemeParams& adapted);

}  // namespace tdhelm
