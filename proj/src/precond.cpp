#include "tdhelm/precond.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tdhelm {

namespace {

constexpr double kPi = std::numbers::pi;

// cos/sin of 2 pi n / spp from one period's table; exact periodicity keeps the
// harmonic phase from drifting over long runs.
struct PhaseTable {
  std::vector<double> c, s;
  explicit PhaseTable(int spp) : c(spp), s(spp) {
    for (int i = 0; i < spp; ++i) {
      c[i] = std::cos(2.0 * kPi * i / spp);
      s[i] = std::sin(2.0 * kPi * i / spp);
    }
  }
};

}  // namespace

double window_value(double rho, double s) {
  if (s <= 0.0) return 0.0;
  if (s >= rho) return 1.0;
  const double v = std::sin(0.5 * kPi * s / rho);
  return v * v;
}

WindowSpec make_window(const KernelCoeffs& kernel, const PrecondConfig& cfg) {
  if (cfg.T < 1) throw std::invalid_argument("make_window: T must be a positive integer");
  if (kernel.steps_per_period <= 0 || kernel.steps_per_period % 4 != 0)
    throw std::invalid_argument("make_window: steps per period must be a multiple of 4");
  WindowSpec w;
  w.T = cfg.T;
  w.n_steps = static_cast<long>(cfg.T) * kernel.steps_per_period;
  w.rho = cfg.rho > 0.0 ? cfg.rho : 1.0 / cfg.T;  // "no taper" still ramps one period
  if (w.rho > 1.0) throw std::invalid_argument("make_window: rho must not exceed 1");
  if (w.rho * static_cast<double>(w.n_steps) < 1.0)
    throw std::invalid_argument("make_window: window support shorter than one step");
  return w;
}

ComplexVector apply_st_complex(const KernelCoeffs& kernel, const WindowSpec& w,
                               const ComplexVector& f,
                               const std::vector<Observer>& observers) {
  if (f.size() != kernel.dim) throw std::invalid_argument("apply_st: dimension mismatch");
  const PhaseTable ph(kernel.steps_per_period);
  const long n_steps = w.n_steps;
  const double inv_n = 1.0 / static_cast<double>(n_steps);
  // Re and Im fields never couple: two independent real runs.
  ForcingFn force_re = [&](long n, std::span<double> out) {
    const double chi = window_value(w.rho, static_cast<double>(n) * inv_n);
    const int p = static_cast<int>(n % kernel.steps_per_period);
    const double c = chi * ph.c[p], s = chi * ph.s[p];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * f.re[i] - s * f.im[i];
  };
  ForcingFn force_im = [&](long n, std::span<double> out) {
    const double chi = window_value(w.rho, static_cast<double>(n) * inv_n);
    const int p = static_cast<int>(n % kernel.steps_per_period);
    const double c = chi * ph.c[p], s = chi * ph.s[p];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * f.re[i] + c * f.im[i];
  };
  LeapfrogState sre = run(kernel, force_re, n_steps, observers);
  LeapfrogState sim = run(kernel, force_im, n_steps);
  // e^{-i 2 pi T} = 1 for integer T: the final fields are S_T F directly.
  ComplexVector out(kernel.dim);
  out.re = std::move(sre.u_curr);
  out.im = std::move(sim.u_curr);
  return out;
}

namespace {
void check_extraction_window(const WindowSpec& w) {
  const double rho_cap = 1.0 - 1.0 / (4.0 * w.T) + 1e-12;
  if (w.rho > rho_cap)
    throw std::invalid_argument(
        "apply_st: real extraction needs the window flat at T - 1/4 periods "
        "(rho <= 1 - 1/(4T))");
}
}  // namespace

ComplexVector apply_st_real(const KernelCoeffs& kernel, const WindowSpec& w,
                            const ComplexVector& f,
                            const std::vector<Observer>& observers) {
  if (f.size() != kernel.dim) throw std::invalid_argument("apply_st: dimension mismatch");
  check_extraction_window(w);
  const PhaseTable ph(kernel.steps_per_period);
  const long n_steps = w.n_steps;
  const long quarter_step = n_steps - kernel.steps_per_period / 4;
  const double inv_n = 1.0 / static_cast<double>(n_steps);
  ForcingFn force_re = [&](long n, std::span<double> out) {
    const double chi = window_value(w.rho, static_cast<double>(n) * inv_n);
    const int p = static_cast<int>(n % kernel.steps_per_period);
    const double c = chi * ph.c[p], s = chi * ph.s[p];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * f.re[i] - s * f.im[i];
  };
  ComplexVector out(kernel.dim);
  // Im U = Re(e^{i pi/2} U) = the real field a quarter period before the end.
  Observer snap = [&](const LeapfrogState& s) {
    if (s.step == quarter_step) out.im = s.u_curr;
  };
  std::vector<Observer> obs = observers;
  obs.push_back(snap);
  LeapfrogState sre = run(kernel, force_re, n_steps, obs);
  out.re = std::move(sre.u_curr);
  return out;
}

ComplexVector apply_st(const KernelCoeffs& kernel, const PrecondConfig& cfg,
                       const ComplexVector& f) {
  const WindowSpec w = make_window(kernel, cfg);
  return cfg.mode == STMode::complex_run ? apply_st_complex(kernel, w, f)
                                         : apply_st_real(kernel, w, f);
}

std::function<ComplexVector(const ComplexVector&)> as_preconditioner(
    const KernelCoeffs& kernel, const PrecondConfig& cfg) {
  // validate now, not on first application
  const WindowSpec w = make_window(kernel, cfg);
  if (cfg.mode == STMode::real_extraction) check_extraction_window(w);
  return [kernel, cfg](const ComplexVector& f) { return apply_st(kernel, cfg, f); };
}

}  // namespace tdhelm
