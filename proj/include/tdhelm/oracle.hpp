#pragma once

#include <memory>

#include "tdhelm/split_operator.hpp"

namespace tdhelm {

/// Direct factorization of H used as the verification oracle. Grid-backed
/// operators provide a sparse assembly and get a sparse LU; anything else is
/// assembled densely under the cap.
class DirectSolver {
 public:
  explicit DirectSolver(const SplitOperator& op, std::size_t dense_cap = 20000);
  ComplexVector solve(const ComplexVector& b) const;
  std::size_t dim() const { return dim_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::size_t dim_;
};

}  // namespace tdhelm
