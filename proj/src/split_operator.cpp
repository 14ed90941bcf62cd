#include "tdhelm/split_operator.hpp"

#include <memory>
#include <random>
#include <stdexcept>

namespace tdhelm {

Eigen::MatrixXcd DenseSplit::complex() const {
  Eigen::MatrixXcd h(re.rows(), re.cols());
  h.real() = re;
  h.imag() = im;
  return h;
}

Eigen::SparseMatrix<std::complex<double>> SparseSplit::complex() const {
  using T = Eigen::Triplet<std::complex<double>>;
  std::vector<T> trips;
  trips.reserve(re.nonZeros() + im.nonZeros());
  for (int k = 0; k < re.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(re, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), std::complex<double>(it.value(), 0.0));
  for (int k = 0; k < im.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(im, k); it; ++it)
      trips.emplace_back(it.row(), it.col(), std::complex<double>(0.0, it.value()));
  Eigen::SparseMatrix<std::complex<double>> h(re.rows(), re.cols());
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

ComplexVector apply(const SplitOperator& op, const ComplexVector& x) {
  if (x.size() != op.dim) throw std::invalid_argument("apply: dimension mismatch");
  ComplexVector y(op.dim);
  std::vector<double> t(op.dim);
  // (R + iS)(xr + i xi) = (R xr - S xi) + i (R xi + S xr)
  op.apply_re(x.re, y.re);
  op.apply_im(x.im, t);
  for (std::size_t i = 0; i < op.dim; ++i) y.re[i] -= t[i];
  op.apply_re(x.im, y.im);
  op.apply_im(x.re, t);
  for (std::size_t i = 0; i < op.dim; ++i) y.im[i] += t[i];
  return y;
}

double residual_norm(const SplitOperator& op, const ComplexVector& x, const ComplexVector& b) {
  ComplexVector hx = apply(op, x);
  double s = 0.0;
  for (std::size_t i = 0; i < op.dim; ++i) {
    const double dr = b.re[i] - hx.re[i];
    const double di = b.im[i] - hx.im[i];
    s += dr * dr + di * di;
  }
  return std::sqrt(s);
}

DenseSplit assemble_dense(const SplitOperator& op, std::size_t cap) {
  if (op.dim > cap)
    throw std::invalid_argument("assemble_dense: dimension exceeds cap");
  const auto n = static_cast<Eigen::Index>(op.dim);
  DenseSplit out;
  out.re.setZero(n, n);
  out.im.setZero(n, n);
  std::vector<double> e(op.dim, 0.0), col(op.dim);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply_re(e, col);
    for (Eigen::Index i = 0; i < n; ++i) out.re(i, j) = col[i];
    op.apply_im(e, col);
    for (Eigen::Index i = 0; i < n; ++i) out.im(i, j) = col[i];
    e[j] = 0.0;
  }
  return out;
}

namespace {

RealApply matrix_apply(std::shared_ptr<const Eigen::MatrixXd> m) {
  return [m](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
    yv.noalias() = (*m) * xv;
  };
}

RealApply diag_apply(std::shared_ptr<const std::vector<double>> d) {
  return [d](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (*d)[i] * x[i];
  };
}

}  // namespace

SplitOperator dense_operator(Eigen::MatrixXd re, Eigen::MatrixXd im) {
  SplitOperator op;
  op.dim = static_cast<std::size_t>(re.rows());
  if (im.size() == 0) im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (re.rows() != re.cols() || im.rows() != re.rows() || im.cols() != re.cols())
    throw std::invalid_argument("dense_operator: shape mismatch");
  auto pre = std::make_shared<const Eigen::MatrixXd>(std::move(re));
  auto pim = std::make_shared<const Eigen::MatrixXd>(std::move(im));
  op.apply_re = matrix_apply(pre);
  op.apply_im = matrix_apply(pim);
  op.assemble_sparse = [pre, pim]() {
    SparseSplit s;
    s.re = pre->sparseView();
    s.im = pim->sparseView();
    return s;
  };
  return op;
}

SplitOperator dense_operator(Eigen::MatrixXd re, Eigen::VectorXd im_diag) {
  SplitOperator op;
  op.dim = static_cast<std::size_t>(re.rows());
  if (re.rows() != re.cols() || im_diag.size() != re.rows())
    throw std::invalid_argument("dense_operator: shape mismatch");
  auto pre = std::make_shared<const Eigen::MatrixXd>(std::move(re));
  auto pd = std::make_shared<const std::vector<double>>(im_diag.data(),
                                                        im_diag.data() + im_diag.size());
  op.apply_re = matrix_apply(pre);
  op.apply_im = diag_apply(pd);
  op.im_diagonal = true;
  op.im_diag = *pd;
  op.assemble_sparse = [pre, pd]() {
    SparseSplit s;
    s.re = pre->sparseView();
    Eigen::Map<const Eigen::VectorXd> dv(pd->data(), static_cast<Eigen::Index>(pd->size()));
    s.im = Eigen::MatrixXd(dv.asDiagonal()).sparseView();
    return s;
  };
  return op;
}

double probe_contract_violation(const SplitOperator& op, int probes, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = op.dim;
  std::vector<double> x(n), y(n), rx(n), ry(n), sx(n), sy(n);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = g(rng);
    const double nx = norm(std::span<const double>(x));
    const double ny = norm(std::span<const double>(y));
    op.apply_re(x, rx);
    op.apply_re(y, ry);
    op.apply_im(x, sx);
    op.apply_im(y, sy);
    const double scale_r = std::max({norm(std::span<const double>(rx)) * ny,
                                     norm(std::span<const double>(ry)) * nx, 1e-300});
    const double scale_s = std::max({norm(std::span<const double>(sx)) * ny,
                                     norm(std::span<const double>(sy)) * nx, 1e-300});
    // symmetry: <y, Mx> == <x, My>
    worst = std::max(worst, std::abs(dot(std::span<const double>(y), rx) -
                                     dot(std::span<const double>(x), ry)) /
                                scale_r);
    worst = std::max(worst, std::abs(dot(std::span<const double>(y), sx) -
                                     dot(std::span<const double>(x), sy)) /
                                scale_s);
    // Im H >= 0 along probes
    const double q = dot(std::span<const double>(x), sx);
    if (q < 0.0) worst = std::max(worst, -q / (nx * nx));
  }
  return worst;
}

}  // namespace tdhelm
