#pragma once

#include <functional>

#include "tdhelm/complex_vector.hpp"
#include "tdhelm/leapfrog.hpp"

namespace tdhelm {

/// Ramp window: 0 for s <= 0, sin^2(pi s / (2 rho)) for 0 < s < rho, 1 beyond.
/// s is time as a fraction of the full simulated interval.
double window_value(double rho, double s);

enum class STMode { real_extraction, complex_run };

struct PrecondConfig {
  int T = 25;          ///< simulated periods per application (integer)
  double rho = 0.25;   ///< taper fraction; <= 0 means "one period" (rho = 1/T)
  STMode mode = STMode::real_extraction;
};

struct WindowSpec {
  double rho = 0.25;
  int T = 25;
  long n_steps = 0;  ///< T * steps_per_period
};

WindowSpec make_window(const KernelCoeffs& kernel, const PrecondConfig& cfg);

/// S_T F: run the windowed time-harmonic forcing for T periods and read the
/// final field. The complex run steps real and imaginary fields independently;
/// real extraction runs once and samples at t = T and t = T - 1/4 periods.
ComplexVector apply_st(const KernelCoeffs& kernel, const PrecondConfig& cfg,
                       const ComplexVector& f);

/// The two modes individually (tests compare them). Observers watch the
/// real-part run (snapshot writers); complex mode does not call them for the
/// imaginary-part run.
ComplexVector apply_st_complex(const KernelCoeffs& kernel, const WindowSpec& w,
                               const ComplexVector& f,
                               const std::vector<Observer>& observers = {});
ComplexVector apply_st_real(const KernelCoeffs& kernel, const WindowSpec& w,
                            const ComplexVector& f,
                            const std::vector<Observer>& observers = {});

/// Fixed linear map F -> S_T F for the Krylov loop.
std::function<ComplexVector(const ComplexVector&)> as_preconditioner(
    const KernelCoeffs& kernel, const PrecondConfig& cfg);

}  // namespace tdhelm
