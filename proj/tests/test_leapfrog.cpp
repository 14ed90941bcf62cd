#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tdhelm/diagnostics.hpp"
#include "tdhelm/leapfrog.hpp"
#include "tdhelm/scheme.hpp"

using namespace tdhelm;

namespace {

// Assemble a kernel's K (or L) densely by probing the application.
Eigen::MatrixXd probe_dense(const RealApply& a, std::size_t n) {
  Eigen::MatrixXd m(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    a(e, col);
    for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

LeapfrogState scalar_state(double u_prev, double u_curr) {
  LeapfrogState s(1);
  s.u_prev[0] = u_prev;
  s.u_curr[0] = u_curr;
  s.step = 1;
  return s;
}

}  // namespace

TEST_CASE("build_kernel: zero damping gives L = 0 and the scaled stiffness") {
  std::mt19937 rng(301);
  const Eigen::MatrixXd re = testsup::sym_with_spectrum(
      testsup::random_orthogonal(6, rng), testsup::indefinite_spectrum(6, rng));
  const auto op = dense_operator(re, Eigen::VectorXd::Zero(6).eval());
  const SpectralBounds b = testsup::exact_bounds(re, Eigen::MatrixXd::Zero(6, 6));
  const SchemeParams p = select_params_acd(b, 0.95);
  const KernelCoeffs k = build_kernel(op, p);
  CHECK(k.cd_form);
  for (double l : k.l_diag) CHECK(l == 0.0);
  const Eigen::MatrixXd want =
      p.k_scale * (re + p.omega * p.omega * Eigen::MatrixXd::Identity(6, 6));
  CHECK((probe_dense(k.k_apply, 6) - want).cwiseAbs().maxCoeff() <=
        1e-13 * want.cwiseAbs().maxCoeff());
}

TEST_CASE("build_kernel: A = 0 on a 1x1 system gives K = 0 regardless of scaling") {
  SchemeParams p;
  p.scheme = Scheme::acd;
  p.omega = 2.0;
  p.dt = (std::numbers::pi / 4.0) / p.omega;
  p.steps_per_period = 8;
  const AlphaBeta ab = alpha_beta(p.omega * p.dt);
  p.alpha = ab.alpha;
  p.beta = ab.beta;
  p.k_scale = p.dt * p.dt / p.alpha;
  p.l_scale = p.beta * p.dt / p.alpha;
  Eigen::MatrixXd re(1, 1);
  re << -p.omega * p.omega;  // A = Re H + w^2 I = 0
  const auto op = dense_operator(re, Eigen::VectorXd::Zero(1).eval());
  const KernelCoeffs k = build_kernel(op, p);
  std::vector<double> x{1.7}, y{99.0};
  k.k_apply(x, y);
  CHECK(std::abs(y[0]) <= 1e-15);
}

TEST_CASE("build_kernel: K eigenvalues agree between probe and dense scaling routes") {
  std::mt19937 rng(302);
  const auto inst = testsup::make_abd_instance(8, rng);
  const SpectralBounds b = testsup::exact_bounds(inst.re, inst.im);
  const SchemeParams p = select_params_abd(b, 0.95);
  const KernelCoeffs kern = build_kernel(inst.op, p);
  const Eigen::MatrixXd k_probe = probe_dense(kern.k_apply, 8);
  const Eigen::MatrixXd a =
      inst.re + p.omega * p.omega * Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd k_dense =
      p.k_scale * a - p.bd_k_correction * (inst.im / p.omega);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(k_probe, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(k_dense, Eigen::EigenvaluesOnly);
  CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd l_probe = probe_dense(kern.l_apply, 8);
  CHECK((l_probe - p.l_scale * inst.im / p.omega).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("build_kernel: cd form with non-diagonal damping is rejected") {
  std::mt19937 rng(303);
  const auto inst = testsup::make_abd_instance(5, rng);
  SchemeParams p = select_params_abd(testsup::exact_bounds(inst.re, inst.im), 0.95);
  p.scheme = Scheme::acd;  // force the mismatch
  CHECK_THROWS_AS(build_kernel(inst.op, p), std::invalid_argument);
}

TEST_CASE("step: zero stiffness keeps a constant field constant") {
  const KernelCoeffs k = kernel_from_matrices(Eigen::MatrixXd::Zero(3, 3),
                                              Eigen::MatrixXd::Zero(3, 3), true);
  LeapfrogState s(3);
  for (int i = 0; i < 3; ++i) s.u_prev[i] = s.u_curr[i] = 0.8;
  step(k, s, {});
  for (int i = 0; i < 3; ++i) CHECK(s.u_curr[i] == 0.8);
}

TEST_CASE("step: scalar K = 2 orbits with period 4 (roots at +-i)") {
  Eigen::MatrixXd km(1, 1), lm(1, 1);
  km << 2.0;
  lm << 0.0;
  const KernelCoeffs k = kernel_from_matrices(km, lm, true);
  LeapfrogState s = scalar_state(1.0, 0.0);  // u0 = 1, u1 = 0
  step(k, s, {});
  CHECK(s.u_curr[0] == -1.0);  // u2
  step(k, s, {});
  CHECK(s.u_curr[0] == 0.0);  // u3
  step(k, s, {});
  CHECK(s.u_curr[0] == 1.0);  // u4
  const auto roots = scalar_roots(2.0, 0.0, true);
  CHECK(std::abs(roots.first - std::complex<double>(0.0, 1.0)) <= 1e-15);
  CHECK(std::abs(roots.second - std::complex<double>(0.0, -1.0)) <= 1e-15);
}

TEST_CASE("step: scalar bd recursion matches its defining formula") {
  Eigen::MatrixXd km(1, 1), lm(1, 1);
  km << 2.0;
  lm << 2.0;
  const KernelCoeffs k = kernel_from_matrices(km, lm, false);
  LeapfrogState s = scalar_state(0.3, 0.7);
  double prev = 0.3, curr = 0.7;
  for (int n = 0; n < 6; ++n) {
    step(k, s, {});
    const double next = (2.0 - 2.0 - 2.0) * curr - (1.0 - 2.0) * prev;
    CHECK(s.u_curr[0] == doctest::Approx(next).epsilon(1e-15));
    prev = curr;
    curr = next;
  }
}

TEST_CASE("run: zero forcing returns the zero state exactly") {
  std::mt19937 rng(304);
  const auto inst = testsup::make_acd_instance(6, rng);
  const SchemeParams p =
      select_params_acd(testsup::exact_bounds(inst.re, inst.im), 0.95);
  const KernelCoeffs k = build_kernel(inst.op, p);
  const LeapfrogState s = run(k, nullptr, 200);
  CHECK(s.step == 200);
  for (double v : s.u_curr) CHECK(v == 0.0);
}

TEST_CASE("run: impulse response equals the dense recursion oracle") {
  std::mt19937 rng(305);
  const auto inst = testsup::make_acd_instance(5, rng);
  const SchemeParams p =
      select_params_acd(testsup::exact_bounds(inst.re, inst.im), 0.95);
  const KernelCoeffs kern = build_kernel(inst.op, p);

  const std::size_t j = 2;
  ForcingFn impulse = [&](long n, std::span<double> out) {
    for (auto& v : out) v = 0.0;
    if (n == 0) out[j] = 1.0 / p.dt;
  };
  std::vector<std::vector<double>> trace;
  Observer record = [&](const LeapfrogState& s) { trace.push_back(s.u_curr); };
  run(kern, impulse, 40, {record});

  // oracle: u_{n+1} = D^{-1} [(2I - K) u_n - (I - L/2) u_{n-1} + g_n]
  const Eigen::MatrixXd kd = probe_dense(kern.k_apply, 5);
  Eigen::VectorXd ld(5);
  for (int i = 0; i < 5; ++i) ld[i] = kern.l_diag[i];
  Eigen::VectorXd up = Eigen::VectorXd::Zero(5), uc = Eigen::VectorXd::Zero(5);
  for (long n = 0; n < 40; ++n) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(5);
    if (n == 0) g[j] = kern.g_scale / p.dt;
    const Eigen::VectorXd rhs =
        2.0 * uc - kd * uc - (Eigen::VectorXd::Ones(5) - 0.5 * ld).cwiseProduct(up) + g;
    const Eigen::VectorXd un =
        rhs.cwiseQuotient(Eigen::VectorXd::Ones(5) + 0.5 * ld);
    up = uc;
    uc = un;
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(trace[static_cast<std::size_t>(n)][i] - uc[i]) <=
            1e-13 * std::max(1.0, uc.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("run: observers fire once per step with advancing indices") {
  const KernelCoeffs k = kernel_from_matrices(Eigen::MatrixXd::Zero(2, 2),
                                              Eigen::MatrixXd::Zero(2, 2), true);
  long calls = 0;
  Observer count = [&](const LeapfrogState& s) {
    ++calls;
    CHECK(s.step == calls);
  };
  run(k, nullptr, 17, {count});
  CHECK(calls == 17);
}

TEST_CASE("plain cd and adapted acd coincide bit for bit when alpha = beta = 1") {
  std::mt19937 rng(306);
  const Eigen::MatrixXd re = testsup::sym_with_spectrum(
      testsup::random_orthogonal(7, rng), testsup::indefinite_spectrum(7, rng));
  const auto op = dense_operator(re, Eigen::VectorXd::Zero(7).eval());
  SchemeParams p =
      select_params_acd(testsup::exact_bounds(re, Eigen::MatrixXd::Zero(7, 7)), 0.95);
  p.alpha = 1.0;  // hand-built plain scalings: the adapted path then IS cd
  p.beta = 1.0;
  p.k_scale = p.dt * p.dt;
  p.l_scale = p.dt;
  const KernelCoeffs adapted = build_kernel(op, p, true);
  const KernelCoeffs plain = build_kernel(op, p, false);

  std::normal_distribution<double> g(0.0, 1.0);
  LeapfrogState sa(7), sp(7);
  for (int i = 0; i < 7; ++i) {
    sa.u_prev[i] = sp.u_prev[i] = g(rng);
    sa.u_curr[i] = sp.u_curr[i] = g(rng);
  }
  for (int n = 0; n < 50; ++n) {
    step(adapted, sa, {});
    step(plain, sp, {});
  }
  for (int i = 0; i < 7; ++i) CHECK(sa.u_curr[i] == sp.u_curr[i]);
}

TEST_CASE("homogeneous runs keep energy flat and norms at most linear") {
  std::mt19937 rng(307);
  const int n = 6;
  const Eigen::MatrixXd q = testsup::random_orthogonal(n, rng);
  const Eigen::MatrixXd k =
      testsup::sym_with_spectrum(q, testsup::spectrum(n, 0.05, 3.6, rng));
  const KernelCoeffs kern = kernel_from_matrices(k, Eigen::MatrixXd::Zero(n, n), true);

  LeapfrogState s(static_cast<std::size_t>(n));
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    s.u_prev[i] = g(rng);
    s.u_curr[i] = g(rng);
  }
  const double e0 = energy_cd(kern, s);
  REQUIRE(e0 > 0.0);
  const double gap = 4.0 - 3.6;
  const double slope = std::sqrt(e0 / gap);
  const double u0 = norm(std::span<const double>(s.u_curr));
  double worst_delta = 0.0;
  double e_prev = e0;
  for (long step_i = 1; step_i <= 10000; ++step_i) {
    step(kern, s, {});
    const double e = energy_cd(kern, s);
    worst_delta = std::max(worst_delta, std::abs(e - e_prev));
    e_prev = e;
    CHECK(norm(std::span<const double>(s.u_curr)) <=
          u0 + static_cast<double>(step_i) * slope * (1.0 + 1e-8));
  }
  CHECK(worst_delta <= 1e-10 * e0);
}

TEST_CASE("violating the step bound by 1% blows up within ten thousand steps") {
  std::mt19937 rng(308);
  const int n = 5;
  const Eigen::MatrixXd q = testsup::random_orthogonal(n, rng);
  Eigen::MatrixXd k = testsup::sym_with_spectrum(q, testsup::spectrum(n, 0.2, 2.0, rng));
  k *= 1.01 * 4.0 / 2.0;  // lambda_max(K) = 4.04
  const KernelCoeffs kern = kernel_from_matrices(k, Eigen::MatrixXd::Zero(n, n), true);
  LeapfrogState s(static_cast<std::size_t>(n));
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    s.u_prev[i] = g(rng);
    s.u_curr[i] = g(rng);
  }
  const double u0 = norm(std::span<const double>(s.u_curr));
  bool grew = false;
  for (long i = 0; i < 10000 && !grew; ++i) {
    step(kern, s, {});
    grew = norm(std::span<const double>(s.u_curr)) >= 10.0 * u0;
  }
  CHECK(grew);
}
