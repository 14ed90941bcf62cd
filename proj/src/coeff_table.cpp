#include "tdhelm/coeff_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tdhelm {

double CoeffTable::value(int s, double gg) const {
  if (s < 0 || s > dim) throw std::invalid_argument("CoeffTable: order out of range");
  if (closed_form) {
    if (s == 0) {
      const double w = 2.0 * std::numbers::pi * gg;
      return 2.0 * dim - w * w;
    }
    return s == 1 ? -1.0 : 0.0;
  }
  if (!covers(gg, gg))
    throw std::invalid_argument("CoeffTable: g outside tabulated range");
  const auto it = std::upper_bound(g.begin(), g.end(), gg);
  if (it == g.begin()) return f.front()[s];
  if (it == g.end()) return f.back()[s];
  const std::size_t j = static_cast<std::size_t>(it - g.begin());
  const double t = (gg - g[j - 1]) / (g[j] - g[j - 1]);
  return (1.0 - t) * f[j - 1][s] + t * f[j][s];
}

bool CoeffTable::covers(double g_min, double g_max) const {
  if (closed_form) return true;
  constexpr double slack = 1e-12;
  return g_min >= g.front() - slack && g_max <= g.back() + slack;
}

CoeffTable default_table(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("default_table: dim must be 1..3");
  CoeffTable t;
  t.dim = dim;
  t.closed_form = true;
  return t;
}

CoeffTable load_table_csv(const std::string& path, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("load_table_csv: dim must be 1..3");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_table_csv: cannot open " + path);
  CoeffTable t;
  t.dim = dim;
  t.closed_form = false;
  std::string line;
  bool header_checked = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_checked) {
      header_checked = true;
      if (!cells.empty() && cells[0] == "g") continue;  // header row optional
    }
    if (cells.size() != static_cast<std::size_t>(dim) + 2)
      throw std::runtime_error("load_table_csv: expected columns g,f0..f" +
                               std::to_string(dim));
    std::array<double, 4> row{0.0, 0.0, 0.0, 0.0};
    double gg;
    try {
      gg = std::stod(cells[0]);
      for (int s = 0; s <= dim; ++s) row[s] = std::stod(cells[1 + s]);
    } catch (const std::exception&) {
      throw std::runtime_error("load_table_csv: malformed row: " + line);
    }
    if (!t.g.empty() && gg <= t.g.back())
      throw std::runtime_error("load_table_csv: g samples must be strictly ascending");
    t.g.push_back(gg);
    t.f.push_back(row);
  }
  if (t.g.size() < 2)
    throw std::runtime_error("load_table_csv: need at least two samples");
  return t;
}

}  // namespace tdhelm
