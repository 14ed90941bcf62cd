#pragma once

#include <array>
#include <string>
#include <vector>

#include "tdhelm/complex_vector.hpp"

namespace tdhelm {

/// Regular grid covering the unit box plus absorbing layers. Interior points
/// live at spacing h = 1/(interior+1); layer_width extra points extend each
/// side. Everything beyond the total grid is a homogeneous Dirichlet boundary.
/// Wavenumbers are carried both per point (second-order stencil, damping) and
/// per cell (compact stencil; the cell grid has one more slab per axis so each
/// point touches 2^dim cells).
struct GridModel {
  int dim = 2;
  std::array<long, 3> npts{0, 0, 1};  // total points per axis; unused axes = 1
  double h = 0.0;
  int layer_width = 0;
  double freq = 0.0;  // the frequency the wavenumbers were derived from
  std::vector<double> k_point;
  std::vector<double> k_cell;
  std::vector<double> damping;  // per-cycle damping profile, zero in the interior

  long num_points() const { return npts[0] * npts[1] * npts[2]; }
  std::array<long, 3> ncells() const {
    return {npts[0] + 1, npts[1] + 1, dim == 3 ? npts[2] + 1 : 1};
  }
  long num_cells() const {
    const auto c = ncells();
    return c[0] * c[1] * c[2];
  }
  long pindex(long i, long j, long k) const { return (i * npts[1] + j) * npts[2] + k; }
};

enum class ModelKind { constant, circular_inclusion, layered, from_file };

struct ModelSpec {
  ModelKind kind = ModelKind::constant;
  int dim = 2;
  long interior = 64;    ///< interior points per axis
  int layer_width = 16;  ///< absorbing layer points per side
  double ppw = 6.0;      ///< min points per wavelength (at the slowest velocity)
  double freq = 0.0;     ///< physical frequency override; 0 derives it from ppw
  double rmax = 1.0;     ///< damping profile maximum (per-cycle units)
  double contrast = 2.0; ///< velocity contrast of inclusion / layering
  std::string path;      ///< velocity file for from_file
};

GridModel build_model(const ModelSpec& spec);

/// Unit right-hand side at the grid point nearest to the given box-relative
/// position (components in [0,1]).
ComplexVector point_source(const GridModel& m, std::array<double, 3> rel);

/// Velocity-field model file: text header (dims, h, layer_width) followed by
/// row-major little-endian float64 velocities for every grid point.
void write_velocity_model(const std::string& path, const GridModel& m,
                          const std::vector<double>& velocity);

}  // namespace tdhelm
