#pragma once

#include "tdhelm/coeff_table.hpp"
#include "tdhelm/grid.hpp"
#include "tdhelm/split_operator.hpp"

namespace tdhelm {

/// Standard (2d+1)-point stencil with Dirichlet walls:
///   Re H = h^-2 (2d I - sum of neighbors) - diag(k^2)
///   Im H = diag(k^2 R / pi)
/// Carries certified bounds lambda_min >= -max k^2,
/// lambda_max <= 4 d h^-2 - min k^2.
SplitOperator build_second_order(const GridModel& m);

/// Compact 3^d-point stencil assembled cell by cell: corner pair (b, c) of a
/// cell with normalized wavenumber g gets h^-2 f_s(g) / 2^(d-s) where s is the
/// Manhattan distance between the corners. Per-point weights are precomputed;
/// Im H is diagonal with the per-point k taken as the max over adjacent cells.
/// Bounds come from the extreme eigenvalues of the 2^d x 2^d cell matrices
/// (sign-pattern eigenbasis), scaled by the 2^d cells covering each point.
SplitOperator build_compact(const GridModel& m, const CoeffTable& table);

}  // namespace tdhelm
