#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <string>
#include <utility>

#include "tdhelm/leapfrog.hpp"
#include "tdhelm/scheme.hpp"
#include "tdhelm/split_operator.hpp"

namespace tdhelm {

/// Discrete energy at the half step between u_prev and u_curr:
///   E_cd = <d, (4I - K) d> + <s, K s>,  d = u_curr - u_prev,  s = u_curr + u_prev
///   E_bd = E_cd - 2 <d, L d>
/// Non-increasing along homogeneous runs under the kernel's stability
/// conditions; exactly conserved when L = 0.
double energy_cd(const KernelCoeffs& k, const LeapfrogState& s);
double energy_bd(const KernelCoeffs& k, const LeapfrogState& s);

/// The step-to-step energy change in closed form,
///   -2 <u_next - u_prev, L (u_next - u_prev)>,
/// evaluated around the state BEFORE calling step() (u_prev held by caller).
double delta_energy_closed(const KernelCoeffs& k, std::span<const double> u_next,
                           std::span<const double> u_prev);

/// Companion matrix of the homogeneous two-step recursion,
///   [[0, I], [-(I+L/2)^{-1}(I-L/2), (I+L/2)^{-1}(2I-K)]]  (cd)
///   [[0, I], [-(I-L), 2I-K-L]]                            (bd)
/// so that [u_{n}; u_{n+1}] = Xi [u_{n-1}; u_n] reproduces step().
Eigen::MatrixXd companion_matrix(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                                 bool cd_form);

/// Roots of the scalar recurrence characteristic polynomial,
///   (1 + l/2) z^2 + (-2 + k) z + (1 - l/2) = 0   (cd)
///   z^2 + (-2 + k + l) z + (1 - l) = 0           (bd)
std::pair<std::complex<double>, std::complex<double>> scalar_roots(double k, double l,
                                                                   bool cd_form);

struct XiReport {
  double max_abs_eig = 0.0;
  double min_dist_to_minus_one = 0.0;
  /// max ||L u|| / ||u|| over eigenvectors with |xi| = 1, xi != 1
  double max_unit_kernel_residual = 0.0;
  /// max relative deviation from the [u; xi u] eigenvector shape
  double max_shape_residual = 0.0;
  /// true when all Jordan blocks at xi = 1 have size <= 2
  bool jordan_at_one_ok = true;
  int n_unit_modulus = 0;
};

/// Dense eigenstructure scan of the companion matrix.
XiReport xi_spectrum_check(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l,
                           bool cd_form, double unit_tol = 1e-8);

/// Substitute the dense-solve solution of H U = F as u_n = e^{i w n dt} U into
/// the stepped recurrence and return the largest step residual over three
/// consecutive steps, scaled by ||F||. Near zero exactly when the kernel is
/// the adapted one (at any step size); order (w dt)^2 for the plain kernels.
double timeharmonic_residual(const SplitOperator& h, const SchemeParams& p, bool adapted,
                             const ComplexVector& f);

struct GreensReport {
  double err = 0.0;         ///< || dt sum_n Phi(n dt) e^{-i w n dt} - H^{-1} ||_F
  double tail_bound = 0.0;  ///< geometric bound on the truncated tail
  double decay_rate = 0.0;
  bool conclusive = false;  ///< false when the tail estimate cannot certify tol
};

/// Columns of the causal Green's function by impulse runs; its discrete-time
/// Fourier transform at the carrier frequency must reproduce H^{-1}.
GreensReport greens_fourier_check(const SplitOperator& h, const SchemeParams& p,
                                  long n_max = 10000, double tol = 1e-8);

/// Built-in verification battery (schemes, energy, spectra, Green's function,
/// stencil degeneration, bound certification, extraction, Krylov sanity).
/// Writes one line per check; optional CSV (name, status, measured, tolerance).
/// Returns true when every check passes.
bool run_selfcheck(std::ostream& out, const std::string& csv_path = "");

}  // namespace tdhelm
