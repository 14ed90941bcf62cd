#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "tdhelm/io.hpp"

using namespace tdhelm;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST_CASE("field files round-trip complex data with their header") {
  std::mt19937 rng(701);
  const ComplexVector u = testsup::random_complex(24, rng);
  const std::array<long, 3> npts{6, 4, 1};
  const std::string path = "io_test_complex.field";
  write_field(path, 2, npts, 1.0 / 7.0, 480, u, true);
  const FieldData f = read_field(path);
  CHECK(f.dim == 2);
  CHECK(f.npts == npts);
  CHECK(f.h == 1.0 / 7.0);
  CHECK(f.step == 480);
  CHECK(f.components == 2);
  REQUIRE(f.u.size() == 24);
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(f.u.re[i] == u.re[i]);
    CHECK(f.u.im[i] == u.im[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("field files: single-component dumps leave the imaginary part zero") {
  std::mt19937 rng(702);
  const ComplexVector u = testsup::random_complex(8, rng);
  const std::string path = "io_test_real.field";
  write_field(path, 3, {2, 2, 2}, 0.25, 0, u, false);
  const FieldData f = read_field(path);
  CHECK(f.components == 1);
  REQUIRE(f.u.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(f.u.re[i] == u.re[i]);
    CHECK(f.u.im[i] == 0.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("field reader rejects foreign files") {
  const std::string path = "io_test_bad.field";
  {
    std::ofstream out(path);
    out << "something else entirely\n";
  }
  CHECK_THROWS_AS(read_field(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_field("io_test_missing.field"), std::runtime_error);
}

TEST_CASE("history csv: header, row count, periods column, blanks for NaN") {
  SolveReport rep;
  rep.residual_history = {10.0, 2.0, 0.5};
  rep.true_residual_history = {11.0, std::numeric_limits<double>::quiet_NaN(), 0.6};
  rep.true_error_history = {};  // no reference: the column stays blank
  rep.applications_history = {1, 2, 3};
  rep.preconditioner_applications = 3;

  const std::string path = "io_test_history.csv";
  write_history_csv(path, rep, 12.5);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] ==
        "iteration_index,cumulative_simulated_periods,preconditioned_residual_l2,"
        "true_residual_l2,relative_true_error");
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv(lines[r]);
    REQUIRE(cells.size() == 5);
    CHECK(cells[0] == std::to_string(r - 1));
    const double periods = std::stod(cells[1]);
    CHECK(periods ==
          doctest::Approx(12.5 * rep.applications_history[r - 1]).epsilon(1e-15));
    CHECK(std::stod(cells[2]) ==
          doctest::Approx(rep.residual_history[r - 1]).epsilon(1e-12));
    CHECK(cells[4] == "");  // no reference solution
  }
  CHECK(split_csv(lines[2])[3] == "");  // NaN true residual prints as blank
  CHECK(std::stod(split_csv(lines[1])[3]) == doctest::Approx(11.0).epsilon(1e-12));
  std::remove(path.c_str());
}
