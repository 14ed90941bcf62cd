#pragma once

#include <array>
#include <string>

#include "tdhelm/complex_vector.hpp"
#include "tdhelm/gmres.hpp"

namespace tdhelm {

/// Field dump: small text header (dim, npts, h, step, components) followed by
/// row-major little-endian float64 blocks, Re then Im (components = 2) or a
/// single real block (components = 1).
void write_field(const std::string& path, int dim, const std::array<long, 3>& npts,
                 double h, long step, const ComplexVector& u, bool complex_parts = true);

struct FieldData {
  int dim = 0;
  std::array<long, 3> npts{0, 0, 1};
  double h = 0.0;
  long step = 0;
  int components = 2;
  ComplexVector u;  ///< im stays zero for single-component dumps
};
FieldData read_field(const std::string& path);

/// One row per recorded iteration: index, cumulative simulated periods,
/// preconditioned residual, true residual and relative true error when
/// recorded (blank otherwise). Includes a units-bearing header row.
void write_history_csv(const std::string& path, const SolveReport& rep,
                       double periods_per_apply);

}  // namespace tdhelm
