#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tdhelm/complex_vector.hpp"
#include "tdhelm/spectral_bounds.hpp"

namespace tdhelm {

/// y = M x for a real linear operator M; out and in never alias.
using RealApply = std::function<void(std::span<const double>, std::span<double>)>;

struct DenseSplit {
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;
  Eigen::MatrixXcd complex() const;
};

struct SparseSplit {
  Eigen::SparseMatrix<double> re;
  Eigen::SparseMatrix<double> im;
  Eigen::SparseMatrix<std::complex<double>> complex() const;
};

/// Matrix-free complex symmetric operator H = Re H + i Im H acting on C^N,
/// stored as two real applications. Contract: both parts are symmetric,
/// Im H is positive semidefinite, and Re H + cI is positive semidefinite for
/// some c > 0. Applications are const and safe to call concurrently.
struct SplitOperator {
  std::size_t dim = 0;
  RealApply apply_re;  ///< y = (Re H) x
  RealApply apply_im;  ///< y = (Im H) x; always callable (zero operator allowed)

  /// When Im H is diagonal, its entries; apply_im then equals the elementwise
  /// product with im_diag exactly. Diagonality selects the acd scheme.
  bool im_diagonal = false;
  std::vector<double> im_diag;

  /// Discretization-supplied bounds, if the builder can certify them.
  std::optional<SpectralBounds> analytic_bounds;

  /// Optional sparse assembly provided by builders that know their stencil;
  /// used by the direct-solve oracle at sizes where dense assembly is off the
  /// table.
  std::function<SparseSplit()> assemble_sparse;
};

/// y = H x in complex arithmetic (two real applications of each part).
ComplexVector apply(const SplitOperator& op, const ComplexVector& x);

/// ||b - H x||_2
double residual_norm(const SplitOperator& op, const ComplexVector& x, const ComplexVector& b);

/// Assemble both parts densely by probing with basis vectors. Guarded by an
/// unknown-count cap (the dense path is an oracle, not a solver).
DenseSplit assemble_dense(const SplitOperator& op, std::size_t cap = 20000);

/// Wrap explicit dense parts (tests, small instances). im may be empty for a
/// zero imaginary part; the diagonal overload marks im_diagonal.
SplitOperator dense_operator(Eigen::MatrixXd re, Eigen::MatrixXd im);
SplitOperator dense_operator(Eigen::MatrixXd re, Eigen::VectorXd im_diag);

/// Random-probe validation of the operator contract (symmetry of both parts,
/// Im H >= 0 along probes). Returns the largest violation found.
double probe_contract_violation(const SplitOperator& op, int probes = 8, unsigned seed = 7);

}  // namespace tdhelm
