#include "tdhelm/fd.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace tdhelm {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> im_diag_from(const GridModel& m, const std::vector<double>& k_pt) {
  std::vector<double> d(k_pt.size());
  for (std::size_t i = 0; i < k_pt.size(); ++i)
    d[i] = k_pt[i] * k_pt[i] * m.damping[i] / kPi;
  return d;
}

SparseSplit sparse_from_diag(const std::vector<double>& diag) {
  SparseSplit s;
  const auto n = static_cast<Eigen::Index>(diag.size());
  s.im.resize(n, n);
  s.im.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index i = 0; i < n; ++i)
    if (diag[static_cast<std::size_t>(i)] != 0.0)
      s.im.insert(i, i) = diag[static_cast<std::size_t>(i)];
  s.im.makeCompressed();
  return s;
}

}  // namespace

SplitOperator build_second_order(const GridModel& m) {
  if (m.k_point.empty()) throw std::invalid_argument("build_second_order: no k field");
  const long n = m.num_points();
  struct Data {
    std::array<long, 3> np;
    int dim;
    double inv_h2;
    std::vector<double> ksq;  // k^2 per point
  };
  auto d = std::make_shared<Data>();
  d->np = m.npts;
  d->dim = m.dim;
  d->inv_h2 = 1.0 / (m.h * m.h);
  d->ksq.resize(static_cast<std::size_t>(n));
  double k_min = m.k_point[0], k_max = m.k_point[0];
  for (long i = 0; i < n; ++i) {
    const double k = m.k_point[static_cast<std::size_t>(i)];
    if (!(k > 0.0)) throw std::invalid_argument("build_second_order: nonpositive k");
    d->ksq[static_cast<std::size_t>(i)] = k * k;
    k_min = std::min(k_min, k);
    k_max = std::max(k_max, k);
  }

  SplitOperator op;
  op.dim = static_cast<std::size_t>(n);
  op.apply_re = [d](std::span<const double> x, std::span<double> y) {
    const long nx = d->np[0], ny = d->np[1], nz = d->np[2];
    const double c = 2.0 * d->dim * d->inv_h2;
    const long sx = ny * nz, sy = nz;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nx; ++i)
      for (long j = 0; j < ny; ++j)
        for (long k = 0; k < nz; ++k) {
          const long p = (i * ny + j) * nz + k;
          double nb = 0.0;
          if (i > 0) nb += x[p - sx];
          if (i + 1 < nx) nb += x[p + sx];
          if (j > 0) nb += x[p - sy];
          if (j + 1 < ny) nb += x[p + sy];
          if (d->dim == 3) {
            if (k > 0) nb += x[p - 1];
            if (k + 1 < nz) nb += x[p + 1];
          }
          y[p] = (c - d->ksq[p]) * x[p] - d->inv_h2 * nb;
        }
  };
  op.im_diagonal = true;
  op.im_diag = im_diag_from(m, m.k_point);
  auto imd = std::make_shared<const std::vector<double>>(op.im_diag);
  op.apply_im = [imd](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (*imd)[i] * x[i];
  };

  SpectralBounds b;
  b.lambda_min_re = -k_max * k_max;
  b.lambda_max_re = 4.0 * m.dim / (m.h * m.h) - k_min * k_min;
  b.lambda_max_im = 0.0;
  for (double v : op.im_diag) b.lambda_max_im = std::max(b.lambda_max_im, v);
  b.provenance = SpectralBounds::Provenance::analytic;
  op.analytic_bounds = b;

  op.assemble_sparse = [d, imd]() {
    const long nx = d->np[0], ny = d->np[1], nz = d->np[2];
    const long n = nx * ny * nz;
    const double c = 2.0 * d->dim * d->inv_h2;
    SparseSplit s = sparse_from_diag(*imd);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * (2 * d->dim + 1));
    const long sx = ny * nz, sy = nz;
    for (long i = 0; i < nx; ++i)
      for (long j = 0; j < ny; ++j)
        for (long k = 0; k < nz; ++k) {
          const long p = (i * ny + j) * nz + k;
          trips.emplace_back(p, p, c - d->ksq[static_cast<std::size_t>(p)]);
          if (i > 0) trips.emplace_back(p, p - sx, -d->inv_h2);
          if (i + 1 < nx) trips.emplace_back(p, p + sx, -d->inv_h2);
          if (j > 0) trips.emplace_back(p, p - sy, -d->inv_h2);
          if (j + 1 < ny) trips.emplace_back(p, p + sy, -d->inv_h2);
          if (d->dim == 3) {
            if (k > 0) trips.emplace_back(p, p - 1, -d->inv_h2);
            if (k + 1 < nz) trips.emplace_back(p, p + 1, -d->inv_h2);
          }
        }
    s.re.resize(n, n);
    s.re.setFromTriplets(trips.begin(), trips.end());
    s.re.makeCompressed();
    return s;
  };
  return op;
}

SplitOperator build_compact(const GridModel& m, const CoeffTable& table) {
  if (m.k_cell.empty()) throw std::invalid_argument("build_compact: no cell k field");
  if (table.dim != m.dim)
    throw std::invalid_argument("build_compact: table dimension mismatch");
  const int dim = m.dim;
  const long n = m.num_points();
  const auto nc = m.ncells();

  double g_min = 0.0, g_max = 0.0;
  {
    double kc_min = m.k_cell[0], kc_max = m.k_cell[0];
    for (double k : m.k_cell) {
      if (!(k > 0.0)) throw std::invalid_argument("build_compact: nonpositive k");
      kc_min = std::min(kc_min, k);
      kc_max = std::max(kc_max, k);
    }
    g_min = kc_min * m.h / (2.0 * kPi);
    g_max = kc_max * m.h / (2.0 * kPi);
  }
  if (!table.covers(g_min, g_max))
    throw std::invalid_argument(
        "build_compact: normalized wavenumber leaves the table's range");

  // per-cell scaled coefficients f~_s = f_s / 2^(d-s), premultiplied by h^-2
  const long ncell = m.num_cells();
  const double inv_h2 = 1.0 / (m.h * m.h);
  std::vector<std::array<double, 4>> ft(static_cast<std::size_t>(ncell));
  for (long c = 0; c < ncell; ++c) {
    const double g = m.k_cell[static_cast<std::size_t>(c)] * m.h / (2.0 * kPi);
    for (int s = 0; s <= dim; ++s)
      ft[static_cast<std::size_t>(c)][s] =
          inv_h2 * table.value(s, g) / static_cast<double>(1 << (dim - s));
  }

  // gather per-point stencil weights over the 3^d offsets
  const int noff = dim == 3 ? 27 : 9;
  struct Data {
    std::array<long, 3> np;
    int dim;
    int noff;
    std::vector<long> off_delta;     // flat index delta per offset
    std::vector<std::array<int, 3>> off;  // offset vectors
    std::vector<double> w;           // noff weights per point
  };
  auto d = std::make_shared<Data>();
  d->np = m.npts;
  d->dim = dim;
  d->noff = noff;
  const long sx = m.npts[1] * m.npts[2], sy = m.npts[2], sz = 1;
  for (int oi = -1; oi <= 1; ++oi)
    for (int oj = -1; oj <= 1; ++oj)
      for (int ok = (dim == 3 ? -1 : 0); ok <= (dim == 3 ? 1 : 0); ++ok) {
        d->off.push_back({oi, oj, ok});
        d->off_delta.push_back(oi * sx + oj * sy + ok * sz);
      }

  auto cidx = [&](long i, long j, long k) { return (i * nc[1] + j) * nc[2] + k; };
  d->w.assign(static_cast<std::size_t>(n) * noff, 0.0);
  for (long i = 0; i < m.npts[0]; ++i)
    for (long j = 0; j < m.npts[1]; ++j)
      for (long k = 0; k < m.npts[2]; ++k) {
        const long p = m.pindex(i, j, k);
        for (int o = 0; o < noff; ++o) {
          const auto& ov = d->off[static_cast<std::size_t>(o)];
          const long qi = i + ov[0], qj = j + ov[1], qk = k + ov[2];
          if (qi < 0 || qi >= m.npts[0] || qj < 0 || qj >= m.npts[1] || qk < 0 ||
              qk >= m.npts[2])
            continue;  // Dirichlet neighbor: weight never used
          const int s = std::abs(ov[0]) + std::abs(ov[1]) + std::abs(ov[2]);
          // cells adjacent to both p and p+o; per axis the cell slab index
          // (shifted by +1) runs over {i, i+1} for o=0, {i+1} for o=1, {i} for o=-1
          double sum = 0.0;
          const long ai0 = ov[0] == 1 ? i + 1 : i, ai1 = ov[0] == 0 ? i + 1 : ai0;
          const long aj0 = ov[1] == 1 ? j + 1 : j, aj1 = ov[1] == 0 ? j + 1 : aj0;
          long ak0 = 0, ak1 = 0;
          if (dim == 3) {
            ak0 = ov[2] == 1 ? k + 1 : k;
            ak1 = ov[2] == 0 ? k + 1 : ak0;
          }
          for (long ci = ai0; ci <= ai1; ++ci)
            for (long cj = aj0; cj <= aj1; ++cj)
              for (long ck = ak0; ck <= ak1; ++ck)
                sum += ft[static_cast<std::size_t>(cidx(ci, cj, ck))][s];
          d->w[static_cast<std::size_t>(p) * noff + o] = sum;
        }
      }

  SplitOperator op;
  op.dim = static_cast<std::size_t>(n);
  op.apply_re = [d](std::span<const double> x, std::span<double> y) {
    const long nx = d->np[0], ny = d->np[1], nz = d->np[2];
    const int noff = d->noff;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nx; ++i) {
      const bool ei = i == 0 || i == nx - 1;
      for (long j = 0; j < ny; ++j) {
        const bool eij = ei || j == 0 || j == ny - 1;
        for (long k = 0; k < nz; ++k) {
          const long p = (i * ny + j) * nz + k;
          const double* wp = d->w.data() + static_cast<std::size_t>(p) * noff;
          double acc = 0.0;
          if (!eij && (d->dim == 2 || (k > 0 && k < nz - 1))) {
            for (int o = 0; o < noff; ++o) acc += wp[o] * x[p + d->off_delta[o]];
          } else {
            for (int o = 0; o < noff; ++o) {
              const auto& ov = d->off[static_cast<std::size_t>(o)];
              const long qi = i + ov[0], qj = j + ov[1], qk = k + ov[2];
              if (qi < 0 || qi >= nx || qj < 0 || qj >= ny || qk < 0 || qk >= nz)
                continue;
              acc += wp[o] * x[p + d->off_delta[o]];
            }
          }
          y[p] = acc;
        }
      }
    }
  };

  // per-point k for the damping diagonal: max over the 2^d adjacent cells
  std::vector<double> k_pt(static_cast<std::size_t>(n), 0.0);
  for (long i = 0; i < m.npts[0]; ++i)
    for (long j = 0; j < m.npts[1]; ++j)
      for (long k = 0; k < m.npts[2]; ++k) {
        double kv = 0.0;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < (dim == 3 ? 2 : 1); ++dk)
              kv = std::max(kv, m.k_cell[static_cast<std::size_t>(
                                    cidx(i + di, j + dj, dim == 3 ? k + dk : 0))]);
        k_pt[static_cast<std::size_t>(m.pindex(i, j, k))] = kv;
      }
  op.im_diagonal = true;
  op.im_diag = im_diag_from(m, k_pt);
  auto imd = std::make_shared<const std::vector<double>>(op.im_diag);
  op.apply_im = [imd](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (*imd)[i] * x[i];
  };

  // cell-matrix eigenvalues in the sign-pattern basis: for a pattern with
  // minus signs on a subset S of axes, lambda = sum_gamma f~_|gamma| (-1)^|gamma & S|
  {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    const int ncorner = 1 << dim;
    for (long c = 0; c < ncell; ++c) {
      for (int pat = 0; pat < ncorner; ++pat) {
        double lam = 0.0;
        for (int gam = 0; gam < ncorner; ++gam) {
          const int s = __builtin_popcount(static_cast<unsigned>(gam));
          const int flip = __builtin_popcount(static_cast<unsigned>(gam & pat));
          const double v = ft[static_cast<std::size_t>(c)][s];
          lam += (flip & 1) ? -v : v;
        }
        if (first || lam < lo) lo = lam;
        if (first || lam > hi) hi = lam;
        first = false;
      }
    }
    SpectralBounds b;
    b.lambda_min_re = ncorner * lo;
    b.lambda_max_re = ncorner * hi;
    b.lambda_max_im = 0.0;
    for (double v : op.im_diag) b.lambda_max_im = std::max(b.lambda_max_im, v);
    b.provenance = SpectralBounds::Provenance::analytic;
    op.analytic_bounds = b;
  }

  op.assemble_sparse = [d, imd]() {
    const long nx = d->np[0], ny = d->np[1], nz = d->np[2];
    const long n = nx * ny * nz;
    SparseSplit s = sparse_from_diag(*imd);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * d->noff);
    for (long i = 0; i < nx; ++i)
      for (long j = 0; j < ny; ++j)
        for (long k = 0; k < nz; ++k) {
          const long p = (i * ny + j) * nz + k;
          for (int o = 0; o < d->noff; ++o) {
            const auto& ov = d->off[static_cast<std::size_t>(o)];
            const long qi = i + ov[0], qj = j + ov[1], qk = k + ov[2];
            if (qi < 0 || qi >= nx || qj < 0 || qj >= ny || qk < 0 || qk >= nz) continue;
            const double w = d->w[static_cast<std::size_t>(p) * d->noff + o];
            if (w != 0.0) trips.emplace_back(p, p + d->off_delta[o], w);
          }
        }
    s.re.resize(n, n);
    s.re.setFromTriplets(trips.begin(), trips.end());
    s.re.makeCompressed();
    return s;
  };
  return op;
}

}  // namespace tdhelm
