#include "tdhelm/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>

namespace tdhelm {

namespace {
using cd = std::complex<double>;

Eigen::VectorXcd to_eigen(const ComplexVector& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

ComplexVector from_eigen(const Eigen::VectorXcd& v) {
  ComplexVector out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.set(static_cast<std::size_t>(i), v[i]);
  return out;
}
}  // namespace

struct DirectSolver::Impl {
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cd>, Eigen::COLAMDOrdering<int>>>
      sparse;
  std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXcd>> dense;
};

DirectSolver::DirectSolver(const SplitOperator& op, std::size_t dense_cap)
    : dim_(op.dim) {
  auto impl = std::make_shared<Impl>();
  if (op.assemble_sparse) {
    const SparseSplit split = op.assemble_sparse();
    Eigen::SparseMatrix<cd> h = split.complex();
    impl->sparse = std::make_unique<
        Eigen::SparseLU<Eigen::SparseMatrix<cd>, Eigen::COLAMDOrdering<int>>>();
    impl->sparse->analyzePattern(h);
    impl->sparse->factorize(h);
    if (impl->sparse->info() != Eigen::Success)
      throw std::runtime_error("DirectSolver: sparse factorization failed (singular H?)");
  } else {
    const DenseSplit split = assemble_dense(op, dense_cap);
    impl->dense = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(split.complex());
  }
  impl_ = std::move(impl);
}

ComplexVector DirectSolver::solve(const ComplexVector& b) const {
  if (b.size() != dim_) throw std::invalid_argument("DirectSolver: dimension mismatch");
  const Eigen::VectorXcd rhs = to_eigen(b);
  const Eigen::VectorXcd x =
      impl_->sparse ? Eigen::VectorXcd(impl_->sparse->solve(rhs))
                    : Eigen::VectorXcd(impl_->dense->solve(rhs));
  return from_eigen(x);
}

}  // namespace tdhelm
