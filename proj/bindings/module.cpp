// Python bindings for the main operations: scheme selection, the windowed
// wave-run preconditioner, and the preconditioned solver on dense systems and
// on the built-in velocity models.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <stdexcept>
#include <string>

#include "tdhelm/diagnostics.hpp"
#include "tdhelm/experiment.hpp"
#include "tdhelm/gmres.hpp"
#include "tdhelm/leapfrog.hpp"
#include "tdhelm/precond.hpp"
#include "tdhelm/scheme.hpp"

namespace py = pybind11;
using namespace tdhelm;

namespace {

py::array_t<std::complex<double>> to_numpy(const ComplexVector& v) {
  py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(v.size()));
  auto r = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i)
    r(static_cast<py::ssize_t>(i)) = {v.re[i], v.im[i]};
  return out;
}

ComplexVector from_eigen(const Eigen::VectorXcd& f) {
  ComplexVector v(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    v.re[static_cast<std::size_t>(i)] = f[i].real();
    v.im[static_cast<std::size_t>(i)] = f[i].imag();
  }
  return v;
}

py::dict report_dict(const SolveReport& rep) {
  py::dict d;
  d["converged"] = rep.converged;
  d["iterations"] = rep.outer_iterations;
  d["cycles"] = rep.cycles;
  d["preconditioner_applications"] = rep.preconditioner_applications;
  d["simulated_periods"] = rep.total_simulated_periods;
  d["wall_time_seconds"] = rep.wall_time_seconds;
  d["residual_history"] = rep.residual_history;
  d["true_residual_history"] = rep.true_residual_history;
  d["true_error_history"] = rep.true_error_history;
  return d;
}

void add_scheme_info(py::dict& d, const SchemeParams& p) {
  d["scheme"] = p.scheme == Scheme::acd ? "acd" : "abd";
  d["omega"] = p.omega;
  d["dt"] = p.dt;
  d["steps_per_period"] = p.steps_per_period;
}

STMode mode_from_string(const std::string& mode) {
  if (mode == "real") return STMode::real_extraction;
  if (mode == "complex") return STMode::complex_run;
  throw std::invalid_argument("mode must be 'real' or 'complex'");
}

py::dict solve_dense(const Eigen::MatrixXd& re, const py::object& im,
                     const Eigen::VectorXcd& f, int T, double rho,
                     const std::string& mode, double tol, int restart,
                     int max_cycles) {
  const py::array imarr = py::array::ensure(im);
  if (!imarr) throw std::invalid_argument("im must be array-like");
  SplitOperator op = imarr.ndim() == 1
                         ? dense_operator(re, im.cast<Eigen::VectorXd>())
                         : dense_operator(re, im.cast<Eigen::MatrixXd>());
  const SpectralBounds b = estimate_bounds(op, BoundsMode::iterative);
  const SchemeParams p = select_params(op, b, 0.95);
  const KernelCoeffs kern = build_kernel(op, p, true);

  PrecondConfig pc;
  pc.T = T;
  pc.rho = rho;
  pc.mode = mode_from_string(mode);
  GmresConfig gcfg;
  gcfg.restart = restart;
  gcfg.max_cycles = max_cycles;
  gcfg.rel_tol = tol;
  gcfg.periods_per_apply =
      T * (pc.mode == STMode::complex_run ? 2.0 : 1.0);

  ComplexVector x;
  const SolveReport rep = gmres(op, as_preconditioner(kern, pc), from_eigen(f), x, gcfg);
  py::dict d = report_dict(rep);
  d["solution"] = to_numpy(x);
  add_scheme_info(d, p);
  return d;
}

py::dict solve_model(const std::string& kind, int dim, long interior,
                     int layer_width, double ppw, double freq, double rmax,
                     double contrast, const std::string& path,
                     const std::string& stencil, const std::string& table, int T,
                     double rho, const std::string& mode, double tol, int restart,
                     int max_cycles, bool reference,
                     std::array<double, 3> source) {
  ExperimentConfig cfg;
  if (kind == "constant") cfg.model.kind = ModelKind::constant;
  else if (kind == "inclusion") cfg.model.kind = ModelKind::circular_inclusion;
  else if (kind == "layered") cfg.model.kind = ModelKind::layered;
  else if (kind == "file") cfg.model.kind = ModelKind::from_file;
  else throw std::invalid_argument("kind must be constant|inclusion|layered|file");
  cfg.model.dim = dim;
  cfg.model.interior = interior;
  cfg.model.layer_width = layer_width;
  cfg.model.ppw = ppw;
  cfg.model.freq = freq;
  cfg.model.rmax = rmax;
  cfg.model.contrast = contrast;
  cfg.model.path = path;
  if (stencil == "second_order") cfg.stencil = Stencil::second_order;
  else if (stencil == "compact") cfg.stencil = Stencil::compact;
  else throw std::invalid_argument("stencil must be second_order|compact");
  cfg.table_path = table;
  cfg.precond.T = T;
  cfg.precond.rho = rho;
  cfg.precond.mode = mode_from_string(mode);
  cfg.gmres.restart = restart;
  cfg.gmres.rel_tol = tol;
  cfg.gmres.max_cycles = max_cycles;
  cfg.with_reference = reference;
  cfg.source = source;

  const Experiment e = prepare(cfg);
  const SolveOutput out = run_solve(e, cfg);
  py::dict d = report_dict(out.report);
  d["solution"] = to_numpy(out.solution);
  d["npts"] = py::make_tuple(e.model.npts[0], e.model.npts[1], e.model.npts[2]);
  d["h"] = e.model.h;
  d["freq"] = e.model.freq;
  add_scheme_info(d, e.params);
  return d;
}

std::pair<bool, std::string> selfcheck() {
  std::ostringstream text;
  const bool ok = run_selfcheck(text);
  return {ok, text.str()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-domain wave-run preconditioning for indefinite complex "
            "symmetric linear systems";
  m.attr("__version__") = kArtifactVersion;

  m.def(
      "alpha_beta",
      [](double omega_dt) {
        const AlphaBeta ab = alpha_beta(omega_dt);
        return py::make_tuple(ab.alpha, ab.beta);
      },
      py::arg("omega_dt"),
      "Exact-dispersion step coefficients (alpha, beta) for a step of omega*dt "
      "radians");

  m.def("window_value", &window_value, py::arg("rho"), py::arg("s"),
        "Forcing taper chi_rho at normalized time s in [0, 1]");

  m.def("selfcheck", &selfcheck,
        "Run the built-in verification battery; returns (ok, text)");

  m.def("solve_dense", &solve_dense, py::arg("re"), py::arg("im"), py::arg("f"),
        py::arg("T") = 25, py::arg("rho") = 0.25, py::arg("mode") = "complex",
        py::arg("tol") = 1e-5, py::arg("restart") = 10,
        py::arg("max_cycles") = 50,
        "Solve (re + i*im) x = f with the wave-run preconditioner; im may be a "
        "diagonal (1-d) or a full symmetric PSD matrix");

  m.def("solve_model", &solve_model, py::arg("kind") = "constant",
        py::arg("dim") = 2, py::arg("interior") = 32, py::arg("layer_width") = 8,
        py::arg("ppw") = 6.0, py::arg("freq") = 0.0, py::arg("rmax") = 1.0,
        py::arg("contrast") = 2.0, py::arg("path") = "",
        py::arg("stencil") = "second_order", py::arg("table") = "",
        py::arg("T") = 12, py::arg("rho") = 0.25, py::arg("mode") = "real",
        py::arg("tol") = 1e-5, py::arg("restart") = 10,
        py::arg("max_cycles") = 50, py::arg("reference") = false,
        py::arg("source") = std::array<double, 3>{0.5, 0.5, 0.5},
        "Discretize a built-in velocity model and solve it end to end; returns "
        "the solution and the convergence record");
}
