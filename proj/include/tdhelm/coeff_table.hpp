#pragma once

#include <array>
#include <string>
#include <vector>

namespace tdhelm {

/// Coefficient functions f_s(g), s = 0..d, of the compact stencil, evaluated
/// at normalized wavenumber g = k h / (2 pi). Either the closed-form default
/// (which reduces the stencil to the standard second-order one) or sampled
/// piecewise-linear data loaded from a CSV with columns g, f0, .., fd.
struct CoeffTable {
  int dim = 3;
  bool closed_form = true;
  std::vector<double> g;                    // ascending sample points
  std::vector<std::array<double, 4>> f;     // per sample, f_s in slot s

  double value(int s, double gg) const;
  /// True when [g_min, g_max] lies inside the table's range.
  bool covers(double g_min, double g_max) const;
};

/// f0 = 2d - (2 pi g)^2, f1 = -1, higher orders zero.
CoeffTable default_table(int dim);

CoeffTable load_table_csv(const std::string& path, int dim);

}  // namespace tdhelm
