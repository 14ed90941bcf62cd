#include "tdhelm/scheme.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace tdhelm {

namespace {

constexpr double kPi = std::numbers::pi;

struct PowerResult {
  double value = 0.0;  // signed Rayleigh quotient of the dominant eigenvalue
  int iters = 0;
};

// Dominant eigenvalue (largest magnitude) of the symmetric operator A - shift I.
PowerResult power_dominant(const RealApply& a, std::size_t n, double shift,
                           double tol, int max_iters, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = g(rng);
  double nx = norm(std::span<const double>(x));
  for (auto& v : x) v /= nx;
  double theta = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    a(x, y);
    if (shift != 0.0)
      for (std::size_t i = 0; i < n; ++i) y[i] -= shift * x[i];
    const double next = dot(std::span<const double>(x), std::span<const double>(y));
    const double ny = norm(std::span<const double>(y));
    if (ny == 0.0) return {0.0, it};  // x in the kernel: dominant value 0
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    if (it > 1 && std::abs(next - theta) <= tol * std::max(std::abs(next), 1.0))
      return {next, it};
    theta = next;
  }
  throw std::runtime_error(
      "estimate_bounds: power iteration did not converge after " +
      std::to_string(max_iters) + " iterations; best estimate " + std::to_string(theta));
}

int round_steps_per_period(double omega_dt_target) {
  // smallest multiple of 4 with 2 pi / spp <= omega_dt_target
  if (!(omega_dt_target > 0.0))
    throw std::invalid_argument("step selection: nonpositive omega*dt bound");
  double raw = 2.0 * kPi / omega_dt_target;
  int spp = 4 * static_cast<int>(std::ceil(raw / 4.0 - 1e-12));
  return std::max(spp, 4);
}

void fill_scales(SchemeParams& p) {
  const double x = p.omega * p.dt;
  p.k_scale = p.dt * p.dt / p.alpha;
  p.l_scale = p.beta * p.dt / p.alpha;
  p.bd_k_correction =
      p.scheme == Scheme::abd ? p.dt * p.beta * (1.0 - std::cos(x)) / p.alpha : 0.0;
}

// Sharp sufficient condition for 4I - K - 2L > 0 via the bounds: the B-terms of
// K and 2L combine into (beta dt / alpha)(1 + cos(w dt)) B, so
//   (x^2/alpha)(lmax_re/w^2 + 1) + (beta/alpha) x (1+cos x) lmax_im/w^2 < 4.
bool abd_full_condition(double x, double alpha, double beta, double omega2,
                        const SpectralBounds& b) {
  const double term1 = x * x / alpha * (b.lambda_max_re / omega2 + 1.0);
  const double term2 = beta / alpha * x * (1.0 + std::cos(x)) * b.lambda_max_im / omega2;
  return term1 + term2 < 4.0;
}

// omega implied by the kernel-positivity constraint at a given x = omega dt.
double abd_omega2(double x, const SpectralBounds& b) {
  return -b.lambda_min_re + std::tan(0.5 * x) * b.lambda_max_im;
}

}  // namespace

AlphaBeta alpha_beta(double omega_dt) {
  if (!(omega_dt > 0.0) || !(omega_dt < kPi))
    throw std::invalid_argument("alpha_beta: omega*dt must lie in (0, pi)");
  const double s = std::sin(0.5 * omega_dt);
  return {omega_dt * omega_dt / (4.0 * s * s), omega_dt / std::sin(omega_dt)};
}

SpectralBounds estimate_bounds(const SplitOperator& op, BoundsMode mode, double tol,
                               int max_iters) {
  if (mode == BoundsMode::analytic_hint) {
    if (!op.analytic_bounds)
      throw std::invalid_argument("estimate_bounds: operator carries no analytic bounds");
    return *op.analytic_bounds;
  }
  SpectralBounds b;
  b.provenance = SpectralBounds::Provenance::iterative;
  const PowerResult dom = power_dominant(op.apply_re, op.dim, 0.0, tol, max_iters, 12345u);
  double lo, hi;
  if (dom.value >= 0.0) {
    hi = dom.value;
    lo = hi + power_dominant(op.apply_re, op.dim, hi, tol, max_iters, 23456u).value;
  } else {
    lo = dom.value;
    hi = lo + power_dominant(op.apply_re, op.dim, lo, tol, max_iters, 23456u).value;
  }
  // widen outward by 1% so the one-sided contract survives estimation error
  b.lambda_min_re = lo - 0.01 * std::abs(lo);
  b.lambda_max_re = hi + 0.01 * std::abs(hi);
  const double im = power_dominant(op.apply_im, op.dim, 0.0, tol, max_iters, 34567u).value;
  b.lambda_max_im = std::max(im, 0.0) * 1.01;
  return b;
}

Scheme choose_scheme(const SplitOperator& op) {
  return op.im_diagonal ? Scheme::acd : Scheme::abd;
}

SchemeParams select_params_acd(const SpectralBounds& b, double safety) {
  if (!(b.lambda_min_re < 0.0))
    throw std::invalid_argument(
        "select_params_acd: Re H is positive semidefinite; the system is definite, "
        "use an elliptic solver instead");
  if (!(safety > 0.0) || safety > 1.0)
    throw std::invalid_argument("select_params_acd: safety must lie in (0, 1]");
  SchemeParams p;
  p.scheme = Scheme::acd;
  p.omega = std::sqrt(-b.lambda_min_re);
  const double lmax_a = b.lambda_max_re + p.omega * p.omega;
  if (!(lmax_a > 0.0))
    throw std::invalid_argument("select_params_acd: inconsistent spectral bounds");
  const double arg = p.omega / std::sqrt(lmax_a);
  const double x_max = 2.0 * std::asin(std::min(arg, 1.0));
  p.steps_per_period = round_steps_per_period(safety * x_max);
  const double x = 2.0 * kPi / p.steps_per_period;
  p.dt = x / p.omega;
  const AlphaBeta ab = alpha_beta(x);
  p.alpha = ab.alpha;
  p.beta = ab.beta;
  fill_scales(p);
  return p;
}

SchemeParams select_params_abd(const SpectralBounds& b, double safety, bool refine) {
  if (!(b.lambda_min_re < 0.0))
    throw std::invalid_argument(
        "select_params_abd: Re H is positive semidefinite; the system is definite, "
        "use an elliptic solver instead");
  if (!(safety > 0.0) || safety > 1.0)
    throw std::invalid_argument("select_params_abd: safety must lie in (0, 1]");
  const double neg = -b.lambda_min_re;
  const double r = b.lambda_max_re / neg;
  const double s = std::max(b.lambda_max_im, 0.0) / neg;
  // positive root of (r+1) x^2 + 2 s x = 4
  double x_quad;
  if (r + 1.0 > 1e-14) {
    x_quad = (-s + std::sqrt(s * s + 4.0 * (r + 1.0))) / (r + 1.0);
  } else {
    x_quad = s > 0.0 ? 2.0 / s : kPi;  // degenerate spectrum collapses the bound
  }
  int spp = round_steps_per_period(safety * std::min(x_quad, kPi));
  SchemeParams p;
  p.scheme = Scheme::abd;
  bool ok = false;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double x = 2.0 * kPi / spp;
    const AlphaBeta ab = alpha_beta(x);
    const double omega2 = abd_omega2(x, b);
    if (abd_full_condition(x, ab.alpha, ab.beta, omega2, b)) {
      p.steps_per_period = spp;
      p.omega = std::sqrt(omega2);
      p.dt = x / p.omega;
      p.alpha = ab.alpha;
      p.beta = ab.beta;
      ok = true;
      break;
    }
    spp += 4;
  }
  if (!ok)
    throw std::runtime_error(
        "select_params_abd: full stability condition still violated after refinement");
  if (refine) {
    // grow omega dt (shrink steps_per_period) while the full condition holds strictly
    while (p.steps_per_period > 4) {
      const int cand = p.steps_per_period - 4;
      const double x = 2.0 * kPi / cand;
      if (!(x < kPi)) break;
      const AlphaBeta ab = alpha_beta(x);
      const double omega2 = abd_omega2(x, b);
      if (!abd_full_condition(x, ab.alpha, ab.beta, omega2, b)) break;
      p.steps_per_period = cand;
      p.omega = std::sqrt(omega2);
      p.dt = x / p.omega;
      p.alpha = ab.alpha;
      p.beta = ab.beta;
    }
  }
  fill_scales(p);
  return p;
}

SchemeParams select_params(const SplitOperator& op, const SpectralBounds& b, double safety) {
  return choose_scheme(op) == Scheme::acd ? select_params_acd(b, safety)
                                          : select_params_abd(b, safety);
}

SchemeParams plain_params(const SchemeParams& adapted) {
  SchemeParams p = adapted;
  p.alpha = 1.0;
  p.beta = 1.0;
  p.k_scale = p.dt * p.dt;
  p.l_scale = p.dt;
  p.bd_k_correction = 0.0;
  return p;
}

}  // namespace tdhelm
