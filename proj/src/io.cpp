#include "tdhelm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tdhelm {

namespace {

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("read_field: truncated data block");
}

}  // namespace

void write_field(const std::string& path, int dim, const std::array<long, 3>& npts,
                 double h, long step, const ComplexVector& u, bool complex_parts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field: cannot open " + path);
  char hbuf[48];
  std::snprintf(hbuf, sizeof hbuf, "%.17g", h);
  out << "tdhelm-field v1\n"
      << "dim " << dim << "\n"
      << "npts " << npts[0] << " " << npts[1] << " " << npts[2] << "\n"
      << "h " << hbuf << "\n"
      << "step " << step << "\n"
      << "components " << (complex_parts ? 2 : 1) << "\n";
  write_doubles(out, u.re);
  if (complex_parts) write_doubles(out, u.im);
  if (!out) throw std::runtime_error("write_field: write failed");
}

FieldData read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field: cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "tdhelm-field v1")
    throw std::runtime_error("read_field: bad magic in " + path);
  FieldData fd;
  for (int i = 0; i < 5; ++i) {
    std::getline(in, line);
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim")
      ls >> fd.dim;
    else if (key == "npts")
      ls >> fd.npts[0] >> fd.npts[1] >> fd.npts[2];
    else if (key == "h")
      ls >> fd.h;
    else if (key == "step")
      ls >> fd.step;
    else if (key == "components")
      ls >> fd.components;
    else
      throw std::runtime_error("read_field: unexpected header key " + key);
    if (!ls) throw std::runtime_error("read_field: malformed header line " + line);
  }
  const long n = fd.npts[0] * fd.npts[1] * fd.npts[2];
  if (fd.dim < 1 || fd.dim > 3 || n <= 0 || (fd.components != 1 && fd.components != 2))
    throw std::runtime_error("read_field: inconsistent header in " + path);
  fd.u.resize(static_cast<std::size_t>(n));
  read_doubles(in, fd.u.re);
  if (fd.components == 2) read_doubles(in, fd.u.im);
  return fd;
}

void write_history_csv(const std::string& path, const SolveReport& rep,
                       double periods_per_apply) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
  out << "iteration_index,cumulative_simulated_periods,"
         "preconditioned_residual_l2,true_residual_l2,relative_true_error\n";
  char buf[64];
  for (std::size_t j = 0; j < rep.residual_history.size(); ++j) {
    const double periods =
        j < rep.applications_history.size()
            ? periods_per_apply * rep.applications_history[j]
            : 0.0;
    out << j << ",";
    std::snprintf(buf, sizeof buf, "%.6g", periods);
    out << buf << ",";
    std::snprintf(buf, sizeof buf, "%.12e", rep.residual_history[j]);
    out << buf << ",";
    // unrecorded or non-finite entries leave the cell empty
    if (j < rep.true_residual_history.size() &&
        std::isfinite(rep.true_residual_history[j])) {
      std::snprintf(buf, sizeof buf, "%.12e", rep.true_residual_history[j]);
      out << buf;
    }
    out << ",";
    if (j < rep.true_error_history.size() &&
        std::isfinite(rep.true_error_history[j])) {
      std::snprintf(buf, sizeof buf, "%.12e", rep.true_error_history[j]);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_history_csv: write failed");
}

}  // namespace tdhelm
