#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tdhelm {

/// Complex vector stored as split real and imaginary parts of equal length.
/// The split layout matches the split application of operators H = Re H + i Im H
/// and lets time-domain code run on the real parts alone.
struct ComplexVector {
  std::vector<double> re;
  std::vector<double> im;

  ComplexVector() = default;
  explicit ComplexVector(std::size_t n) : re(n, 0.0), im(n, 0.0) {}

  std::size_t size() const { return re.size(); }

  void resize(std::size_t n) {
    re.assign(n, 0.0);
    im.assign(n, 0.0);
  }

  std::complex<double> operator[](std::size_t i) const { return {re[i], im[i]}; }

  void set(std::size_t i, std::complex<double> z) {
    re[i] = z.real();
    im[i] = z.imag();
  }
};

inline std::complex<double> dot(const ComplexVector& x, const ComplexVector& y) {
  assert(x.size() == y.size());
  double rr = 0.0, ii = 0.0, ri = 0.0, ir = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    rr += x.re[i] * y.re[i];
    ii += x.im[i] * y.im[i];
    ri += x.re[i] * y.im[i];
    ir += x.im[i] * y.re[i];
  }
  // <x, y> = sum conj(x_i) y_i
  return {rr + ii, ri - ir};
}

inline double norm(const ComplexVector& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += x.re[i] * x.re[i] + x.im[i] * x.im[i];
  return std::sqrt(s);
}

/// y += a * x
inline void axpy(std::complex<double> a, const ComplexVector& x, ComplexVector& y) {
  assert(x.size() == y.size());
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < x.size(); ++i) {
    y.re[i] += ar * x.re[i] - ai * x.im[i];
    y.im[i] += ar * x.im[i] + ai * x.re[i];
  }
}

inline void scale(std::complex<double> a, ComplexVector& x) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x.re[i], m = x.im[i];
    x.re[i] = ar * r - ai * m;
    x.im[i] = ar * m + ai * r;
  }
}

// Real-vector helpers shared by the time-stepping code.

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace tdhelm
