#include "tdhelm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tdhelm {

namespace {

constexpr double kPi = std::numbers::pi;

double analytic_velocity(const ModelSpec& spec, double x, double y, double z) {
  x = std::clamp(x, 0.0, 1.0);
  y = std::clamp(y, 0.0, 1.0);
  z = std::clamp(z, 0.0, 1.0);
  switch (spec.kind) {
    case ModelKind::constant:
      return 1.0;
    case ModelKind::circular_inclusion: {
      const double cx = x - 0.5, cy = y - 0.5, cz = spec.dim == 3 ? z - 0.5 : 0.0;
      const double r = std::sqrt(cx * cx + cy * cy + cz * cz);
      return r < 0.2 ? 1.0 / spec.contrast : 1.0;
    }
    case ModelKind::layered: {
      const double depth_axis = spec.dim == 3 ? z : y;
      return depth_axis < 0.5 ? 1.0 / spec.contrast : 1.0;
    }
    case ModelKind::from_file:
      break;
  }
  throw std::logic_error("analytic_velocity: unexpected kind");
}

struct RawModel {
  int dim;
  std::array<long, 3> npts;
  double h;
  int layer_width;
  std::vector<double> velocity;  // per point
};

RawModel read_velocity_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_velocity_model: cannot open " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "tdhelm-model v1")
    throw std::runtime_error("read_velocity_model: bad magic in " + path);
  RawModel r{};
  std::string line, key;
  for (int want = 0; want < 4; ++want) {
    if (!std::getline(in, line))
      throw std::runtime_error("read_velocity_model: truncated header");
    std::stringstream ss(line);
    ss >> key;
    if (key == "dim")
      ss >> r.dim;
    else if (key == "npts")
      ss >> r.npts[0] >> r.npts[1] >> r.npts[2];
    else if (key == "h")
      ss >> r.h;
    else if (key == "layer_width")
      ss >> r.layer_width;
    else
      throw std::runtime_error("read_velocity_model: unknown header key " + key);
    if (!ss) throw std::runtime_error("read_velocity_model: malformed header line: " + line);
  }
  if (r.dim < 2 || r.dim > 3 || r.npts[0] < 1 || r.npts[1] < 1 || r.npts[2] < 1 ||
      !(r.h > 0.0))
    throw std::runtime_error("read_velocity_model: invalid header values");
  const long n = r.npts[0] * r.npts[1] * r.npts[2];
  r.velocity.resize(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(r.velocity.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    throw std::runtime_error("read_velocity_model: truncated field data");
  for (double v : r.velocity)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::runtime_error("read_velocity_model: velocities must be positive");
  return r;
}

}  // namespace

GridModel build_model(const ModelSpec& spec) {
  if (spec.dim < 2 || spec.dim > 3)
    throw std::invalid_argument("build_model: dim must be 2 or 3");
  if (spec.kind != ModelKind::from_file) {
    if (spec.interior < 1) throw std::invalid_argument("build_model: interior must be >= 1");
    if (spec.layer_width < 0) throw std::invalid_argument("build_model: negative layer");
    if (!(spec.contrast > 0.0)) throw std::invalid_argument("build_model: contrast <= 0");
  }
  if (!(spec.ppw > 0.0) && !(spec.freq > 0.0))
    throw std::invalid_argument("build_model: need points-per-wavelength or frequency");

  GridModel m;
  std::vector<double> vel_point;
  if (spec.kind == ModelKind::from_file) {
    RawModel raw = read_velocity_model(spec.path);
    m.dim = raw.dim;
    m.npts = raw.npts;
    m.h = raw.h;
    m.layer_width = raw.layer_width;
    for (int a = 0; a < m.dim; ++a)
      if (2L * m.layer_width >= raw.npts[a])
        throw std::invalid_argument("build_model: layers wider than half the grid");
    vel_point = std::move(raw.velocity);
  } else {
    m.dim = spec.dim;
    m.h = 1.0 / static_cast<double>(spec.interior + 1);
    m.layer_width = spec.layer_width;
    const long nt = spec.interior + 2 * spec.layer_width;
    m.npts = {nt, nt, spec.dim == 3 ? nt : 1};
  }

  const int lw = m.layer_width;
  auto coord = [&](long i) { return (static_cast<double>(i) - lw + 1.0) * m.h; };

  if (spec.kind != ModelKind::from_file) {
    vel_point.resize(static_cast<std::size_t>(m.num_points()));
    for (long i = 0; i < m.npts[0]; ++i)
      for (long j = 0; j < m.npts[1]; ++j)
        for (long k = 0; k < m.npts[2]; ++k)
          vel_point[static_cast<std::size_t>(m.pindex(i, j, k))] =
              analytic_velocity(spec, coord(i), coord(j), coord(k));
  }

  // cell velocities: analytic models sample the cell center, file models
  // average the cell's in-grid corner points
  const auto nc = m.ncells();
  std::vector<double> vel_cell(static_cast<std::size_t>(nc[0] * nc[1] * nc[2]));
  auto cindex = [&](long i, long j, long k) { return (i * nc[1] + j) * nc[2] + k; };
  for (long i = 0; i < nc[0]; ++i)
    for (long j = 0; j < nc[1]; ++j)
      for (long k = 0; k < nc[2]; ++k) {
        double v;
        if (spec.kind != ModelKind::from_file) {
          // cell (i,j,k) has lower point corner (i-1, j-1, k-1)
          const double cx = coord(i - 1) + 0.5 * m.h;
          const double cy = coord(j - 1) + 0.5 * m.h;
          const double cz = m.dim == 3 ? coord(k - 1) + 0.5 * m.h : 0.0;
          v = analytic_velocity(spec, cx, cy, cz);
        } else {
          double sum = 0.0;
          int cnt = 0;
          for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
              for (int dk = 0; dk < (m.dim == 3 ? 2 : 1); ++dk) {
                const long pi = i - 1 + di, pj = j - 1 + dj;
                const long pk = m.dim == 3 ? k - 1 + dk : 0;
                if (pi < 0 || pi >= m.npts[0] || pj < 0 || pj >= m.npts[1] || pk < 0 ||
                    pk >= m.npts[2])
                  continue;
                sum += vel_point[static_cast<std::size_t>(m.pindex(pi, pj, pk))];
                ++cnt;
              }
          v = cnt > 0 ? sum / cnt : 1.0;
        }
        vel_cell[static_cast<std::size_t>(cindex(i, j, k))] = v;
      }

  double c_min = *std::min_element(vel_point.begin(), vel_point.end());
  c_min = std::min(c_min, *std::min_element(vel_cell.begin(), vel_cell.end()));
  m.freq = spec.freq > 0.0 ? spec.freq : c_min / (spec.ppw * m.h);

  m.k_point.resize(vel_point.size());
  for (std::size_t i = 0; i < vel_point.size(); ++i)
    m.k_point[i] = 2.0 * kPi * m.freq / vel_point[i];
  m.k_cell.resize(vel_cell.size());
  for (std::size_t i = 0; i < vel_cell.size(); ++i)
    m.k_cell[i] = 2.0 * kPi * m.freq / vel_cell[i];

  // quadratic damping ramp across the layers, per axis depth combined by max
  m.damping.assign(static_cast<std::size_t>(m.num_points()), 0.0);
  if (lw > 0) {
    for (long i = 0; i < m.npts[0]; ++i)
      for (long j = 0; j < m.npts[1]; ++j)
        for (long k = 0; k < m.npts[2]; ++k) {
          const long di = std::max({lw - i, i - (m.npts[0] - 1 - lw), 0L});
          const long dj = std::max({lw - j, j - (m.npts[1] - 1 - lw), 0L});
          const long dk =
              m.dim == 3 ? std::max({lw - k, k - (m.npts[2] - 1 - lw), 0L}) : 0;
          const double depth = static_cast<double>(std::max({di, dj, dk}));
          if (depth > 0.0) {
            const double t = depth / lw;
            m.damping[static_cast<std::size_t>(m.pindex(i, j, k))] = spec.rmax * t * t;
          }
        }
  }
  return m;
}

ComplexVector point_source(const GridModel& m, std::array<double, 3> rel) {
  std::array<long, 3> idx{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    if (a >= m.dim) {
      idx[a] = 0;
      continue;
    }
    const long i = std::lround(rel[a] / m.h + m.layer_width - 1.0);
    idx[a] = std::clamp(i, 0L, m.npts[a] - 1);
  }
  ComplexVector f(static_cast<std::size_t>(m.num_points()));
  const long p = m.pindex(idx[0], idx[1], idx[2]);
  if (m.damping[static_cast<std::size_t>(p)] > 0.0)
    std::fprintf(stderr, "warning: point source sits inside the damping layer\n");
  f.re[static_cast<std::size_t>(p)] = 1.0;
  return f;
}

void write_velocity_model(const std::string& path, const GridModel& m,
                          const std::vector<double>& velocity) {
  if (velocity.size() != static_cast<std::size_t>(m.num_points()))
    throw std::invalid_argument("write_velocity_model: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_velocity_model: cannot open " + path);
  out << "tdhelm-model v1\n";
  out << "dim " << m.dim << "\n";
  out << "npts " << m.npts[0] << " " << m.npts[1] << " " << m.npts[2] << "\n";
  char hbuf[64];
  std::snprintf(hbuf, sizeof hbuf, "%.17g", m.h);
  out << "h " << hbuf << "\n";
  out << "layer_width " << m.layer_width << "\n";
  out.write(reinterpret_cast<const char*>(velocity.data()),
            static_cast<std::streamsize>(velocity.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_velocity_model: write failed");
}

}  // namespace tdhelm
