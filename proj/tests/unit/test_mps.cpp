#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "icegrid/error.hpp"
#include "icegrid/mps.hpp"
#include "icegrid/solver.hpp"

using namespace icegrid;

namespace {

Model two_var_lp() {
  ModelBuilder mb;
  const int x = mb.add_col("x", 0, 4, -3);
  const int y = mb.add_col("y", 0, kInf, -2);
  mb.add_row("cap", -kInf, 6, {{x, 1}, {y, 1}});
  mb.add_row("mix", 1, kInf, {{x, 1}, {y, -1}});
  return mb.build();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void require_same(const Model& a, const Model& b) {
  REQUIRE(a.num_cols() == b.num_cols());
  REQUIRE(a.num_rows() == b.num_rows());
  CHECK(a.col_lower == b.col_lower);
  CHECK(a.col_upper == b.col_upper);
  CHECK(a.cost == b.cost);
  CHECK(a.is_integer == b.is_integer);
  CHECK(a.row_lower == b.row_lower);
  CHECK(a.row_upper == b.row_upper);
  CHECK(a.col_start == b.col_start);
  CHECK(a.row_index == b.row_index);
  CHECK(a.value == b.value);
  CHECK(a.objective_offset == b.objective_offset);
}

}  // namespace

TEST_CASE("mps: two-variable LP matches the frozen golden file") {
  std::ostringstream out;
  mps::write(two_var_lp(), out, "TWOVAR");
  CHECK(out.str() == slurp(ICEGRID_TEST_DATA "/two_var.mps"));
}

TEST_CASE("mps: integer columns are wrapped in markers") {
  ModelBuilder mb;
  mb.add_col("c", 0, 5, 1);
  mb.add_col("b", 0, 1, 2, true);
  mb.add_col("n", 0, kInf, 1, true);
  mb.add_row("r", 1, kInf, {{0, 1}, {1, 1}, {2, 1}});
  std::ostringstream out;
  mps::write(mb.build(), out);
  const std::string s = out.str();
  CHECK(s.find("'INTORG'") != std::string::npos);
  CHECK(s.find("'INTEND'") != std::string::npos);
  CHECK(s.find("'INTORG'") < s.find("'INTEND'"));
  std::istringstream in(s);
  require_same(mb.build(), mps::read(in));
}

TEST_CASE("mps: random models round-trip exactly") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int inst = 0; inst < 20; ++inst) {
    ModelBuilder mb;
    const int n = 3 + inst;
    for (int j = 0; j < n; ++j) {
      const int kind = (j + inst) % 6;
      double lo = 0, hi = kInf;
      if (kind == 1) lo = u(gen), hi = lo + std::abs(u(gen)) * 1e3;
      if (kind == 2) lo = -kInf, hi = kInf;
      if (kind == 3) lo = -kInf, hi = u(gen) / 3;
      if (kind == 4) lo = hi = 0.1 * u(gen);
      mb.add_col("x" + std::to_string(j), lo, hi, u(gen) / 7, kind == 5);
    }
    for (int i = 0; i < n / 2 + 1; ++i) {
      std::vector<std::pair<int, double>> e;
      for (int j = 0; j < n; ++j)
        if (u(gen) > 0) e.emplace_back(j, u(gen) * 1e-3 + u(gen));
      const int kind = i % 4;
      const double a = u(gen) * 10, b = a + std::abs(u(gen)) * 3.3;
      mb.add_row("r" + std::to_string(i), kind == 0 ? -kInf : a, kind == 1 ? kInf : (kind == 2 ? a : b), e);
    }
    mb.add_offset(inst * 0.37);
    const Model m = mb.build();
    std::stringstream s;
    mps::write(m, s);
    require_same(m, mps::read(s));
  }
}

TEST_CASE("mps: solving the re-parsed model gives the same optimum") {
  std::stringstream s;
  mps::write(two_var_lp(), s);
  const auto a = solver::solve_lp(two_var_lp());
  const auto b = solver::solve_lp(mps::read(s));
  REQUIRE(a.status == solver::Status::Optimal);
  CHECK(a.objective == b.objective);
}

TEST_CASE("mps: malformed input is rejected") {
  std::istringstream missing("NAME x\nROWS\n N OBJ\nCOLUMNS\n");
  CHECK_THROWS_AS(mps::read(missing), ParseError);
  std::istringstream bad_row("NAME x\nROWS\n N OBJ\nCOLUMNS\n    C1  R9  1\nENDATA\n");
  CHECK_THROWS_AS(mps::read(bad_row), ParseError);
  std::istringstream bad_num("NAME x\nROWS\n N OBJ\n L R1\nCOLUMNS\n    C1  R1  1.2.3\nENDATA\n");
  CHECK_THROWS_AS(mps::read(bad_num), ParseError);
}

TEST_CASE("mps: unwritable destination throws") {
  CHECK_THROWS(mps::write_file(two_var_lp(), "/nonexistent-dir/x.mps"));
}
