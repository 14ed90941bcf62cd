#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tdhelm/fd.hpp"
#include "tdhelm/grid.hpp"
#include "tdhelm/scheme.hpp"

using namespace tdhelm;

namespace {

constexpr double kPi = std::numbers::pi;

// Dense evaluation of K and L exactly as the scheme contract defines them.
struct DenseKL {
  Eigen::MatrixXd k;
  Eigen::MatrixXd l;
};

DenseKL dense_kl(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im,
                 const SchemeParams& p) {
  const auto n = re.rows();
  DenseKL out;
  const Eigen::MatrixXd a =
      re + p.omega * p.omega * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd b = im / p.omega;
  out.k = p.k_scale * a - p.bd_k_correction * b;
  out.l = p.l_scale * b;
  return out;
}

}  // namespace

TEST_CASE("alpha_beta: Taylor limit, frozen values, and internal identity") {
  const AlphaBeta tiny = alpha_beta(1e-6);
  CHECK(std::abs(tiny.alpha - 1.0) <= 1e-9);
  CHECK(std::abs(tiny.beta - 1.0) <= 1e-9);

  const AlphaBeta half = alpha_beta(kPi / 2.0);
  CHECK(std::abs(half.alpha - kPi * kPi / 8.0) <= 1e-14 * half.alpha);
  CHECK(std::abs(half.beta - kPi / 2.0) <= 1e-14 * half.beta);

  const AlphaBeta quarter = alpha_beta(kPi / 4.0);
  CHECK(std::abs(quarter.alpha - 1.0530292875455149) <= 1e-14);
  CHECK(std::abs(quarter.beta - 1.1107207345395915) <= 1e-14);

  // the two textbook forms of alpha agree: x^2/(2-2cos x) == x^2/(4 sin^2(x/2))
  for (double x : {0.3, 0.9, 1.7, 2.8}) {
    const double via_cos = x * x / (2.0 - 2.0 * std::cos(x));
    CHECK(std::abs(alpha_beta(x).alpha - via_cos) <= 1e-14 * via_cos);
  }

  CHECK_THROWS_AS(alpha_beta(0.0), std::invalid_argument);
  CHECK_THROWS_AS(alpha_beta(kPi), std::invalid_argument);
  CHECK_THROWS_AS(alpha_beta(-0.5), std::invalid_argument);
}

TEST_CASE("estimate_bounds: iterative mode brackets a known diagonal spectrum") {
  Eigen::VectorXd d(3);
  d << -4.0, 1.0, 9.0;
  const auto op = dense_operator(Eigen::MatrixXd(d.asDiagonal()), Eigen::VectorXd::Zero(3).eval());
  const SpectralBounds b = estimate_bounds(op, BoundsMode::iterative);
  CHECK(b.provenance == SpectralBounds::Provenance::iterative);
  CHECK(b.lambda_min_re <= -4.0);
  CHECK(b.lambda_min_re >= -4.0 * 1.02);
  CHECK(b.lambda_max_re >= 9.0);
  CHECK(b.lambda_max_re <= 9.0 * 1.02);
  CHECK(b.lambda_max_im == 0.0);
}

TEST_CASE("estimate_bounds: iterative mode vs dense eigensolve on random operators") {
  std::mt19937 rng(201);
  for (int trial = 0; trial < 3; ++trial) {
    const auto inst = testsup::make_abd_instance(14, rng);
    const SpectralBounds exact = testsup::exact_bounds(inst.re, inst.im);
    const SpectralBounds est = estimate_bounds(inst.op, BoundsMode::iterative, 1e-9);
    CHECK(est.lambda_min_re <= exact.lambda_min_re + 1e-6);
    CHECK(est.lambda_max_re >= exact.lambda_max_re - 1e-6);
    CHECK(est.lambda_max_im >= exact.lambda_max_im - 1e-6);
    CHECK(est.lambda_min_re >= exact.lambda_min_re - 0.05 * std::abs(exact.lambda_min_re));
    CHECK(est.lambda_max_re <= exact.lambda_max_re + 0.05 * std::abs(exact.lambda_max_re));
  }
}

TEST_CASE("estimate_bounds: analytic mode passes discretization bounds through") {
  ModelSpec spec;
  spec.dim = 2;
  spec.interior = 8;
  spec.layer_width = 0;
  const GridModel m = build_model(spec);
  const SplitOperator op = build_second_order(m);
  const SpectralBounds b = estimate_bounds(op, BoundsMode::analytic_hint);
  const double k = m.k_point[0];
  CHECK(b.lambda_min_re == doctest::Approx(-k * k).epsilon(1e-14));
  CHECK(b.lambda_max_re ==
        doctest::Approx(8.0 / (m.h * m.h) - k * k).epsilon(1e-14));
  CHECK(b.provenance == SpectralBounds::Provenance::analytic);

  const auto bare = dense_operator(Eigen::MatrixXd::Identity(2, 2).eval(), Eigen::VectorXd::Zero(2).eval());
  CHECK_THROWS_AS(estimate_bounds(bare, BoundsMode::analytic_hint), std::invalid_argument);
}

TEST_CASE("choose_scheme: acd iff the imaginary part is diagonal") {
  std::mt19937 rng(202);
  CHECK(choose_scheme(testsup::make_acd_instance(6, rng).op) == Scheme::acd);
  CHECK(choose_scheme(testsup::make_abd_instance(6, rng).op) == Scheme::abd);
  const auto zero_damping =
      dense_operator(Eigen::MatrixXd::Identity(4, 4).eval(), Eigen::VectorXd::Zero(4).eval());
  CHECK(choose_scheme(zero_damping) == Scheme::acd);
}

TEST_CASE("select_params_acd: constant-k model hits omega = k and 12 steps per period") {
  ModelSpec spec;
  spec.dim = 2;
  spec.interior = 16;
  spec.layer_width = 0;
  spec.ppw = 6.0;  // kh = 2 pi / 6
  const GridModel m = build_model(spec);
  const SplitOperator op = build_second_order(m);
  const SchemeParams p = select_params_acd(*op.analytic_bounds, 0.95);
  const double k = m.k_point[0];
  CHECK(p.omega == doctest::Approx(k).epsilon(1e-14));
  // frozen: w dt_max = 2 asin(kh / sqrt(8)) ~ 0.75854, safety 0.95 -> 12 steps
  CHECK(p.steps_per_period == 12);
  CHECK(p.steps_per_period % 4 == 0);
  CHECK(p.omega * p.dt == doctest::Approx(2.0 * kPi / 12.0).epsilon(1e-15));
  const AlphaBeta ab = alpha_beta(p.omega * p.dt);
  CHECK(p.alpha == doctest::Approx(ab.alpha).epsilon(1e-14));
  CHECK(p.beta == doctest::Approx(ab.beta).epsilon(1e-14));
}

TEST_CASE("select_params_acd: arcsin boundary collapses to 4 steps per period") {
  SpectralBounds b;
  b.lambda_min_re = -4.0;  // omega = 2, lambda_max(A) = omega^2
  b.lambda_max_re = 0.0;
  b.lambda_max_im = 0.0;
  const SchemeParams p = select_params_acd(b, 0.95);
  CHECK(p.steps_per_period == 4);
  CHECK(p.omega == doctest::Approx(2.0));
}

TEST_CASE("select_params_acd: definite systems are rejected with advice") {
  SpectralBounds b;
  b.lambda_min_re = 0.5;
  b.lambda_max_re = 2.0;
  CHECK_THROWS_WITH_AS(select_params_acd(b, 0.95), doctest::Contains("definite"),
                       std::invalid_argument);
}

TEST_CASE("select_params_acd: stability predicate holds on dense instances") {
  std::mt19937 rng(203);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = testsup::make_acd_instance(12, rng);
    const SpectralBounds b = testsup::exact_bounds(inst.re, inst.im);
    const SchemeParams p = select_params_acd(b, 0.95);
    const auto kl = dense_kl(inst.re, inst.im, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(kl.k, Eigen::EigenvaluesOnly);
    CHECK(ek.eigenvalues().minCoeff() >= -1e-10);
    CHECK(ek.eigenvalues().maxCoeff() < 4.0);
    CHECK(kl.l.diagonal().minCoeff() >= -1e-10);
  }
}

TEST_CASE("select_params_abd: frozen quadratic roots map to 8 steps per period") {
  // s = 0, r = 1: positive root sqrt(2)
  SpectralBounds b1;
  b1.lambda_min_re = -1.0;
  b1.lambda_max_re = 1.0;
  b1.lambda_max_im = 0.0;
  const SchemeParams p1 = select_params_abd(b1, 0.95);
  CHECK(p1.steps_per_period == 8);  // 2 pi / (0.95 sqrt(2)) = 4.68, rounded up
  CHECK(p1.omega == doctest::Approx(1.0).epsilon(1e-14));  // Im term vanishes

  // r = 0, s = 1: positive root -1 + sqrt(5)
  SpectralBounds b2;
  b2.lambda_min_re = -1.0;
  b2.lambda_max_re = 0.0;
  b2.lambda_max_im = 1.0;
  const SchemeParams p2 = select_params_abd(b2, 0.95);
  CHECK(p2.steps_per_period == 8);  // 2 pi / (0.95 (sqrt(5)-1)) = 5.35, rounded up
  const double x = p2.omega * p2.dt;
  CHECK(x == doctest::Approx(2.0 * kPi / 8.0).epsilon(1e-14));
  CHECK(p2.omega * p2.omega ==
        doctest::Approx(1.0 + std::tan(0.5 * x) * 1.0).epsilon(1e-14));
}

TEST_CASE("select_params_abd: zero damping bound reduces to the acd frequency") {
  SpectralBounds b;
  b.lambda_min_re = -3.7;
  b.lambda_max_re = 11.0;
  b.lambda_max_im = 0.0;
  const SchemeParams p = select_params_abd(b, 0.95);
  CHECK(p.omega == doctest::Approx(std::sqrt(3.7)).epsilon(1e-14));
}

TEST_CASE("select_params_abd: full stability predicate holds on dense instances") {
  std::mt19937 rng(204);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = testsup::make_abd_instance(12, rng);
    const SpectralBounds b = testsup::exact_bounds(inst.re, inst.im);
    const SchemeParams p = select_params_abd(b, 0.95);
    CHECK(p.scheme == Scheme::abd);
    CHECK(p.steps_per_period % 4 == 0);
    const auto kl = dense_kl(inst.re, inst.im, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(kl.k, Eigen::EigenvaluesOnly);
    CHECK(ek.eigenvalues().minCoeff() >= -1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(kl.l, Eigen::EigenvaluesOnly);
    CHECK(el.eigenvalues().minCoeff() >= -1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ekl(kl.k + 2.0 * kl.l,
                                                       Eigen::EigenvaluesOnly);
    CHECK(ekl.eigenvalues().maxCoeff() < 4.0);
  }
}

TEST_CASE("select_params_acd: tightening the max bound never increases dt") {
  std::mt19937 rng(205);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    SpectralBounds b;
    b.lambda_min_re = -u(rng);
    b.lambda_max_re = u(rng);
    SpectralBounds wider = b;
    wider.lambda_max_re = b.lambda_max_re * (1.0 + u(rng) / 10.0);
    CHECK(select_params_acd(wider, 0.95).dt <= select_params_acd(b, 0.95).dt);
  }
}

TEST_CASE("select_params dispatches on the damping structure") {
  std::mt19937 rng(206);
  const auto acd_inst = testsup::make_acd_instance(8, rng);
  const auto abd_inst = testsup::make_abd_instance(8, rng);
  const SpectralBounds ba = testsup::exact_bounds(acd_inst.re, acd_inst.im);
  const SpectralBounds bb = testsup::exact_bounds(abd_inst.re, abd_inst.im);
  CHECK(select_params(acd_inst.op, ba).scheme == Scheme::acd);
  CHECK(select_params(abd_inst.op, bb).scheme == Scheme::abd);
}

TEST_CASE("plain_params strips the frequency adaptation only") {
  std::mt19937 rng(207);
  const auto inst = testsup::make_acd_instance(8, rng);
  const SpectralBounds b = testsup::exact_bounds(inst.re, inst.im);
  const SchemeParams p = select_params_acd(b, 0.95);
  const SchemeParams q = plain_params(p);
  CHECK(q.alpha == 1.0);
  CHECK(q.beta == 1.0);
  CHECK(q.omega == p.omega);
  CHECK(q.dt == p.dt);
  CHECK(q.k_scale == q.dt * q.dt);
  CHECK(q.l_scale == q.dt);
  CHECK(q.bd_k_correction == 0.0);
}
