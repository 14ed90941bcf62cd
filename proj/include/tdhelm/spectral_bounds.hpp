#pragma once

namespace tdhelm {

/// One-sided spectral bounds for a split operator H = Re H + i Im H:
///   lambda_min_re <= lambda_min(Re H),
///   lambda_max_re >= lambda_max(Re H),
///   lambda_max_im >= lambda_max(Im H) >= 0.
/// Time step and frequency selection stays stable under any bounds satisfying
/// these inequalities; tighter bounds give larger steps.
struct SpectralBounds {
  double lambda_min_re = 0.0;
  double lambda_max_re = 0.0;
  double lambda_max_im = 0.0;
  enum class Provenance { analytic, iterative } provenance = Provenance::analytic;
};

}  // namespace tdhelm
