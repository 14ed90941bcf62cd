#include "tdhelm/leapfrog.hpp"

#include <memory>
#include <stdexcept>

namespace tdhelm {

KernelCoeffs build_kernel(const SplitOperator& h, const SchemeParams& params,
                          bool adapted) {
  if (h.dim == 0) throw std::invalid_argument("build_kernel: empty operator");
  if (!(params.omega > 0.0) || !(params.dt > 0.0))
    throw std::invalid_argument("build_kernel: parameters not selected");
  KernelCoeffs k;
  k.dim = h.dim;
  k.cd_form = params.scheme == Scheme::acd;
  k.omega = params.omega;
  k.dt = params.dt;
  k.steps_per_period = params.steps_per_period;

  const double k_scale = adapted ? params.k_scale : params.dt * params.dt;
  const double l_scale = adapted ? params.l_scale : params.dt;
  const double bd_corr = adapted ? params.bd_k_correction : 0.0;
  k.g_scale = k_scale;

  const double omega2 = params.omega * params.omega;
  const double omega = params.omega;
  const auto re = h.apply_re;
  const auto im = h.apply_im;

  if (k.cd_form) {
    if (!h.im_diagonal)
      throw std::invalid_argument("build_kernel: cd form requires diagonal Im H");
    // K = k_scale (Re H + w^2 I); L = (l_scale / w) Im H, elementwise
    k.k_apply = [re, k_scale, omega2](std::span<const double> x, std::span<double> y) {
      re(x, y);
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = k_scale * (y[i] + omega2 * x[i]);
    };
    k.l_diag.resize(h.dim);
    k.inv_d.resize(h.dim);
    for (std::size_t i = 0; i < h.dim; ++i) {
      const double l = l_scale * h.im_diag[i] / omega;
      if (l < 0.0) throw std::invalid_argument("build_kernel: negative damping entry");
      k.l_diag[i] = l;
      k.inv_d[i] = 1.0 / (1.0 + 0.5 * l);
    }
  } else {
    // K = k_scale (Re H + w^2 I) - (bd_corr / w) Im H; L = (l_scale / w) Im H
    const double c = bd_corr / omega;
    k.k_apply = [re, im, k_scale, omega2, c](std::span<const double> x,
                                             std::span<double> y) {
      re(x, y);
      std::vector<double> t(x.size());  // kernels stay immutable; scratch is local
      im(x, t);
      for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = k_scale * (y[i] + omega2 * x[i]) - c * t[i];
    };
    const double lw = l_scale / omega;
    k.l_apply = [im, lw](std::span<const double> x, std::span<double> y) {
      im(x, y);
      for (std::size_t i = 0; i < x.size(); ++i) y[i] *= lw;
    };
  }
  return k;
}

KernelCoeffs kernel_from_matrices(const Eigen::MatrixXd& kmat, const Eigen::MatrixXd& lmat,
                                  bool cd_form, double g_scale) {
  const auto n = kmat.rows();
  if (kmat.cols() != n || lmat.rows() != n || lmat.cols() != n)
    throw std::invalid_argument("kernel_from_matrices: shape mismatch");
  KernelCoeffs k;
  k.dim = static_cast<std::size_t>(n);
  k.cd_form = cd_form;
  k.g_scale = g_scale;
  auto pk = std::make_shared<const Eigen::MatrixXd>(kmat);
  k.k_apply = [pk](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
    yv.noalias() = (*pk) * xv;
  };
  if (cd_form) {
    Eigen::MatrixXd off = lmat;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("kernel_from_matrices: cd form requires diagonal L");
    k.l_diag.resize(k.dim);
    k.inv_d.resize(k.dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lmat(i, i) < 0.0)
        throw std::invalid_argument("kernel_from_matrices: negative damping entry");
      k.l_diag[i] = lmat(i, i);
      k.inv_d[i] = 1.0 / (1.0 + 0.5 * lmat(i, i));
    }
  } else {
    auto pl = std::make_shared<const Eigen::MatrixXd>(lmat);
    k.l_apply = [pl](std::span<const double> x, std::span<double> y) {
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
      Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
      yv.noalias() = (*pl) * xv;
    };
  }
  return k;
}

void step(const KernelCoeffs& k, LeapfrogState& s, std::span<const double> f) {
  const std::size_t n = k.dim;
  const bool forced = !f.empty();
  k.k_apply(s.u_curr, s.scratch);  // scratch = K u_n
  if (k.cd_form) {
    double* up = s.u_prev.data();
    const double* uc = s.u_curr.data();
    const double* ku = s.scratch.data();
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) {
      double rhs = 2.0 * uc[i] - ku[i] - (1.0 - 0.5 * k.l_diag[i]) * up[i];
      if (forced) rhs += k.g_scale * f[i];
      up[i] = k.inv_d[i] * rhs;  // u_prev slot becomes u_{n+1}
    }
  } else {
    if (s.scratch2.size() != n) s.scratch2.assign(n, 0.0);
    double* up = s.u_prev.data();
    const double* uc = s.u_curr.data();
    for (std::size_t i = 0; i < n; ++i) s.scratch2[i] = uc[i] - up[i];
    std::vector<double>& ld = s.scratch3;
    if (ld.size() != n) ld.assign(n, 0.0);
    k.l_apply(s.scratch2, ld);  // ld = L (u_n - u_{n-1})
    const double* ku = s.scratch.data();
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) {
      double rhs = 2.0 * uc[i] - ku[i] - up[i] - ld[i];
      if (forced) rhs += k.g_scale * f[i];
      up[i] = rhs;
    }
  }
  std::swap(s.u_prev, s.u_curr);
  ++s.step;
}

void run_from(const KernelCoeffs& k, LeapfrogState& s, const ForcingFn& forcing,
              long n_steps, const std::vector<Observer>& observers) {
  std::vector<double> f;
  if (forcing) f.assign(k.dim, 0.0);
  for (long i = 0; i < n_steps; ++i) {
    if (forcing) {
      forcing(s.step, f);
      step(k, s, f);
    } else {
      step(k, s, {});
    }
    for (const auto& ob : observers) ob(s);
  }
}

LeapfrogState run(const KernelCoeffs& k, const ForcingFn& forcing, long n_steps,
                  const std::vector<Observer>& observers) {
  LeapfrogState s(k.dim);
  run_from(k, s, forcing, n_steps, observers);
  return s;
}

}  // namespace tdhelm
