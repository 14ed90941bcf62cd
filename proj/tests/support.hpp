#pragma once

// Shared fixtures and independent oracles. Everything here recomputes results
// from first principles (dense Eigen algebra, direct loop assembly) so the
// suites never certify the library against itself.

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "tdhelm/coeff_table.hpp"
#include "tdhelm/complex_vector.hpp"
#include "tdhelm/grid.hpp"
#include "tdhelm/spectral_bounds.hpp"
#include "tdhelm/split_operator.hpp"

namespace testsup {

constexpr double kPi = std::numbers::pi;

inline Eigen::VectorXcd to_eigen(const tdhelm::ComplexVector& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline tdhelm::ComplexVector from_eigen(const Eigen::VectorXcd& v) {
  tdhelm::ComplexVector out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out.set(static_cast<std::size_t>(i), v[i]);
  return out;
}

inline Eigen::MatrixXd random_orthogonal(int n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline Eigen::MatrixXd sym_with_spectrum(const Eigen::MatrixXd& q,
                                         const Eigen::VectorXd& eigs) {
  return q * eigs.asDiagonal() * q.transpose();
}

// Uniform spectrum on [lo, hi] with the end values pinned exactly.
inline Eigen::VectorXd spectrum(int n, double lo, double hi, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) e[i] = u(rng);
  e[0] = lo;
  if (n > 1) e[n - 1] = hi;
  return e;
}

// Indefinite spectrum bounded away from zero, so H stays well conditioned.
inline Eigen::VectorXd indefinite_spectrum(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) {
    const double v = u(rng);
    e[i] = u(rng) < 0.4 ? -(0.5 + 4.5 * v) : (0.5 + 9.5 * v);
  }
  e[0] = -(0.5 + 4.5 * u(rng));  // keep the system indefinite
  return e;
}

struct DenseInstance {
  tdhelm::SplitOperator op;
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;  // dense symmetric PSD; diagonal for acd instances
  Eigen::MatrixXcd h;
};

inline DenseInstance make_acd_instance(int n, std::mt19937& rng) {
  DenseInstance inst;
  inst.re = sym_with_spectrum(random_orthogonal(n, rng), indefinite_spectrum(n, rng));
  std::uniform_real_distribution<double> u(0.2, 1.5);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = u(rng);
  inst.im = Eigen::MatrixXd(d.asDiagonal());
  inst.op = tdhelm::dense_operator(inst.re, d);
  inst.h = Eigen::MatrixXcd(n, n);
  inst.h.real() = inst.re;
  inst.h.imag() = inst.im;
  return inst;
}

inline DenseInstance make_abd_instance(int n, std::mt19937& rng) {
  DenseInstance inst;
  inst.re = sym_with_spectrum(random_orthogonal(n, rng), indefinite_spectrum(n, rng));
  inst.im = sym_with_spectrum(random_orthogonal(n, rng), spectrum(n, 0.1, 1.2, rng));
  inst.op = tdhelm::dense_operator(inst.re, inst.im);
  inst.h = Eigen::MatrixXcd(n, n);
  inst.h.real() = inst.re;
  inst.h.imag() = inst.im;
  return inst;
}

// Exact one-sided bounds straight from dense eigensolves (oracle side).
inline tdhelm::SpectralBounds exact_bounds(const Eigen::MatrixXd& re,
                                           const Eigen::MatrixXd& im) {
  tdhelm::SpectralBounds b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(re, Eigen::EigenvaluesOnly);
  b.lambda_min_re = er.eigenvalues().minCoeff();
  b.lambda_max_re = er.eigenvalues().maxCoeff();
  if (im.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(im, Eigen::EigenvaluesOnly);
    b.lambda_max_im = std::max(ei.eigenvalues().maxCoeff(), 0.0);
  }
  return b;
}

inline Eigen::VectorXcd dense_solve(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& f) {
  return Eigen::FullPivLU<Eigen::MatrixXcd>(h).solve(f);
}

// Standard (2d+1)-point assembly written directly from the stencil formula.
inline tdhelm::DenseSplit hand_second_order(const tdhelm::GridModel& m) {
  const long n = m.num_points();
  tdhelm::DenseSplit out;
  out.re = Eigen::MatrixXd::Zero(n, n);
  out.im = Eigen::MatrixXd::Zero(n, n);
  const double inv_h2 = 1.0 / (m.h * m.h);
  for (long i = 0; i < m.npts[0]; ++i)
    for (long j = 0; j < m.npts[1]; ++j)
      for (long k = 0; k < m.npts[2]; ++k) {
        const long p = m.pindex(i, j, k);
        const double kp = m.k_point[static_cast<std::size_t>(p)];
        out.re(p, p) = 2.0 * m.dim * inv_h2 - kp * kp;
        out.im(p, p) = kp * kp * m.damping[static_cast<std::size_t>(p)] / kPi;
        if (i > 0) out.re(p, m.pindex(i - 1, j, k)) = -inv_h2;
        if (i + 1 < m.npts[0]) out.re(p, m.pindex(i + 1, j, k)) = -inv_h2;
        if (j > 0) out.re(p, m.pindex(i, j - 1, k)) = -inv_h2;
        if (j + 1 < m.npts[1]) out.re(p, m.pindex(i, j + 1, k)) = -inv_h2;
        if (m.dim == 3) {
          if (k > 0) out.re(p, m.pindex(i, j, k - 1)) = -inv_h2;
          if (k + 1 < m.npts[2]) out.re(p, m.pindex(i, j, k + 1)) = -inv_h2;
        }
      }
  return out;
}

// Compact-stencil assembly by the literal cell loop: every cell contributes
// h^-2 f_s(g)/2^(d-s) to each ordered corner pair at Manhattan distance s,
// with out-of-grid corners dropped (Dirichlet).
inline Eigen::MatrixXd brute_force_compact(const tdhelm::GridModel& m,
                                           const tdhelm::CoeffTable& t) {
  const int d = m.dim;
  const auto nc = m.ncells();
  const long n = m.num_points();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double inv_h2 = 1.0 / (m.h * m.h);
  const int ncorner = 1 << d;
  std::vector<long> pidx(static_cast<std::size_t>(ncorner));
  for (long ci = 0; ci < nc[0]; ++ci)
    for (long cj = 0; cj < nc[1]; ++cj)
      for (long ck = 0; ck < nc[2]; ++ck) {
        const long c = (ci * nc[1] + cj) * nc[2] + ck;
        const double g =
            m.k_cell[static_cast<std::size_t>(c)] * m.h / (2.0 * kPi);
        for (int corner = 0; corner < ncorner; ++corner) {
          const long pi = ci - 1 + ((corner >> 0) & 1);
          const long pj = cj - 1 + ((corner >> 1) & 1);
          const long pk = d == 3 ? ck - 1 + ((corner >> 2) & 1) : 0;
          const bool in = pi >= 0 && pi < m.npts[0] && pj >= 0 && pj < m.npts[1] &&
                          (d == 2 || (pk >= 0 && pk < m.npts[2]));
          pidx[static_cast<std::size_t>(corner)] = in ? m.pindex(pi, pj, pk) : -1;
        }
        for (int cb = 0; cb < ncorner; ++cb) {
          if (pidx[static_cast<std::size_t>(cb)] < 0) continue;
          for (int cg = 0; cg < ncorner; ++cg) {
            if (pidx[static_cast<std::size_t>(cg)] < 0) continue;
            const int s = __builtin_popcount(static_cast<unsigned>(cb ^ cg));
            a(pidx[static_cast<std::size_t>(cb)], pidx[static_cast<std::size_t>(cg)]) +=
                inv_h2 * t.value(s, g) / static_cast<double>(1 << (d - s));
          }
        }
      }
  return a;
}

// Per-point damping diagonal of the cell-based discretization: k at a point is
// the max over its adjacent cells.
inline Eigen::VectorXd compact_im_diag(const tdhelm::GridModel& m) {
  const auto nc = m.ncells();
  Eigen::VectorXd dg(m.num_points());
  for (long i = 0; i < m.npts[0]; ++i)
    for (long j = 0; j < m.npts[1]; ++j)
      for (long k = 0; k < m.npts[2]; ++k) {
        double kv = 0.0;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < (m.dim == 3 ? 2 : 1); ++dk) {
              const long c =
                  ((i + di) * nc[1] + (j + dj)) * nc[2] + (m.dim == 3 ? k + dk : 0);
              kv = std::max(kv, m.k_cell[static_cast<std::size_t>(c)]);
            }
        const long p = m.pindex(i, j, k);
        dg[p] = kv * kv * m.damping[static_cast<std::size_t>(p)] / kPi;
      }
  return dg;
}

inline tdhelm::ComplexVector random_complex(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  tdhelm::ComplexVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.re[i] = g(rng);
    v.im[i] = g(rng);
  }
  return v;
}

}  // namespace testsup
