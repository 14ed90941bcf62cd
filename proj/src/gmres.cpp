#include "tdhelm/gmres.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace tdhelm {

namespace {

using cd = std::complex<double>;

void check_finite(double v, const char* what, int iter) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("gmres: non-finite ") + what +
                             " at iteration " + std::to_string(iter));
}

// x = x0 + V y for the y minimizing the least-squares system held in (hess, g).
void form_solution(const std::vector<ComplexVector>& v,
                   const std::vector<std::vector<cd>>& hess, const std::vector<cd>& g,
                   int j, const ComplexVector& x0, ComplexVector& x) {
  std::vector<cd> y(j);
  for (int i = j - 1; i >= 0; --i) {
    cd s = g[i];
    for (int l = i + 1; l < j; ++l) s -= hess[l][i] * y[l];
    if (std::abs(hess[i][i]) == 0.0)
      throw std::runtime_error("gmres: singular least-squares system (operator "
                               "maps the Krylov space into itself degenerately)");
    y[i] = s / hess[i][i];
  }
  x = x0;
  for (int i = 0; i < j; ++i) axpy(y[i], v[i], x);
}

}  // namespace

SolveReport gmres(const ComplexApply& op, const ComplexApply& precond,
                  const ComplexVector& b, ComplexVector& x, const GmresConfig& cfg) {
  if (cfg.restart < 1) throw std::invalid_argument("gmres: restart must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  auto papply = [&](const ComplexVector& v) {
    if (!precond) return v;
    ++rep.preconditioner_applications;
    return precond(v);
  };

  const std::size_t n = b.size();
  if (x.size() != n) x.resize(n);

  // Right preconditioning iterates on H P v = b; the Krylov residual is then
  // the plain one and the update runs through the cached P v_j.
  const bool right = cfg.right_precond && static_cast<bool>(precond);
  const ComplexVector pb = right ? b : papply(b);
  const double beta0 = norm(pb);
  check_finite(beta0, "right-hand side", 0);
  const double target = cfg.rel_tol * beta0;

  auto true_residual = [&](const ComplexVector& xx) {
    ComplexVector ax = op(xx);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dr = b.re[i] - ax.re[i];
      const double di = b.im[i] - ax.im[i];
      s += dr * dr + di * di;
    }
    return std::sqrt(s);
  };
  auto record = [&](double pres, const ComplexVector& xx) {
    rep.residual_history.push_back(pres);
    rep.applications_history.push_back(rep.preconditioner_applications);
    if (cfg.record_true_residual) rep.true_residual_history.push_back(true_residual(xx));
    if (cfg.reference) {
      double s = 0.0, sref = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dr = xx.re[i] - cfg.reference->re[i];
        const double di = xx.im[i] - cfg.reference->im[i];
        s += dr * dr + di * di;
        sref += cfg.reference->re[i] * cfg.reference->re[i] +
                cfg.reference->im[i] * cfg.reference->im[i];
      }
      rep.true_error_history.push_back(std::sqrt(s / sref));
    }
  };

  std::vector<ComplexVector> v;
  std::vector<std::vector<cd>> hess;  // hess[j]: column j, entries 0..j+1
  std::vector<cd> gs_c;               // Givens cosines
  std::vector<cd> gs_s;               // Givens sines
  std::vector<cd> g;                  // rotated rhs of the least-squares system

  bool done = false;
  for (int cycle = 0; cycle < cfg.max_cycles && !done; ++cycle) {
    ++rep.cycles;
    ComplexVector r = pb;
    if (cycle > 0 || norm(x) > 0.0) {
      const ComplexVector phx = right ? op(x) : papply(op(x));
      for (std::size_t i = 0; i < n; ++i) {
        r.re[i] -= phx.re[i];
        r.im[i] -= phx.im[i];
      }
    }
    double beta = norm(r);
    check_finite(beta, "residual", rep.outer_iterations);
    if (cycle == 0) record(beta, x);
    if (beta <= target) {
      rep.converged = true;
      break;
    }

    v.assign(1, r);
    scale(1.0 / beta, v[0]);
    hess.clear();
    gs_c.clear();
    gs_s.clear();
    g.assign(1, cd(beta, 0.0));
    std::vector<ComplexVector> pv;  // P v_j when right preconditioning

    const ComplexVector x0 = x;
    for (int j = 0; j < cfg.restart; ++j) {
      ComplexVector w;
      if (right) {
        pv.push_back(papply(v[j]));
        w = op(pv.back());
      } else {
        w = papply(op(v[j]));
      }
      std::vector<cd> col(j + 2, cd(0.0, 0.0));
      for (int i = 0; i <= j; ++i) {
        const cd hij = dot(v[i], w);
        col[i] = hij;
        axpy(-hij, v[i], w);
      }
      // measured-defect second pass
      double wn = norm(w);
      std::vector<cd> corr(j + 1);
      double defect = 0.0;
      for (int i = 0; i <= j; ++i) {
        corr[i] = dot(v[i], w);
        defect = std::max(defect, std::abs(corr[i]));
      }
      if (defect > 1e-8 * std::max(wn, 1e-300)) {
        for (int i = 0; i <= j; ++i) {
          col[i] += corr[i];
          axpy(-corr[i], v[i], w);
        }
        wn = norm(w);
      }
      check_finite(wn, "Arnoldi vector", rep.outer_iterations + 1);
      col[j + 1] = cd(wn, 0.0);

      // previous rotations, then a new one zeroing col[j+1]
      for (int i = 0; i < j; ++i) {
        const cd t = col[i];
        col[i] = std::conj(gs_c[i]) * t + std::conj(gs_s[i]) * col[i + 1];
        col[i + 1] = -gs_s[i] * t + gs_c[i] * col[i + 1];
      }
      const double denom = std::hypot(std::abs(col[j]), wn);
      cd cj(1.0, 0.0), sj(0.0, 0.0);
      if (denom > 0.0 && wn > 0.0) {
        cj = col[j] / denom;
        sj = cd(wn / denom, 0.0);
        // rotate so that the subdiagonal vanishes; |g[j+1]| is the residual
        col[j] = std::conj(cj) * col[j] + std::conj(sj) * cd(wn, 0.0);
        col[j + 1] = cd(0.0, 0.0);
      }
      gs_c.push_back(cj);
      gs_s.push_back(sj);
      g.push_back(-sj * g[j]);
      g[j] = std::conj(cj) * g[j];
      hess.push_back(std::move(col));
      ++rep.outer_iterations;

      const double pres = std::abs(g[j + 1]);
      check_finite(pres, "residual estimate", rep.outer_iterations);

      const bool happy = wn <= 1e-14 * beta0;
      form_solution(right ? pv : v, hess, g, j + 1, x0, x);
      record(pres, x);
      if (pres <= target || happy) {
        rep.converged = pres <= target || happy;
        done = true;
        break;
      }
      if (j + 1 < cfg.restart) {
        scale(1.0 / wn, w);
        v.push_back(std::move(w));
      }
    }
  }

  rep.total_simulated_periods = cfg.periods_per_apply * rep.preconditioner_applications;
  rep.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SolveReport gmres(const SplitOperator& h, const ComplexApply& precond,
                  const ComplexVector& b, ComplexVector& x, const GmresConfig& cfg) {
  ComplexApply op = [&h](const ComplexVector& v) { return apply(h, v); };
  return gmres(op, precond, b, x, cfg);
}

SolveReport unpreconditioned_baseline(const SplitOperator& h, const ComplexVector& b,
                                      ComplexVector& x, const GmresConfig& cfg) {
  return gmres(h, nullptr, b, x, cfg);
}

}  // namespace tdhelm
