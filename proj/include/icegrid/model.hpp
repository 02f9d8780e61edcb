#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace icegrid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse mixed-integer linear program, minimisation form:
///   min c'x + offset   s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper.
/// A is stored column-wise (CSC) with row indices ascending inside a column.
struct Model {
  std::vector<double> col_lower, col_upper, cost;
  std::vector<std::uint8_t> is_integer;
  std::vector<std::string> col_names;

  std::vector<double> row_lower, row_upper;
  std::vector<std::string> row_names;

  std::vector<int> col_start{0};
  std::vector<int> row_index;
  std::vector<double> value;

  double objective_offset = 0.0;

  int num_cols() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(row_lower.size()); }
  std::size_t num_nonzeros() const { return value.size(); }

  double objective(std::span<const double> x) const;
  std::vector<double> row_activity(std::span<const double> x) const;
  /// Largest bound or row violation of x (absolute).
  double max_violation(std::span<const double> x) const;
  /// Largest distance of an integer column from the nearest integer.
  double max_integrality_violation(std::span<const double> x) const;
  /// Copy with every integrality flag cleared.
  Model relaxed() const;
};

/// Row-wise model assembly. Duplicate entries in a row are summed; explicit
/// zeros are dropped.
class ModelBuilder {
 public:
  int add_col(std::string name, double lower, double upper, double cost, bool integer = false);
  int add_row(std::string name, double lower, double upper, std::vector<std::pair<int, double>> entries);
  void set_cost(int col, double cost);
  void add_cost(int col, double cost);
  void set_bounds(int col, double lower, double upper);
  void add_offset(double c) { offset_ += c; }
  int num_cols() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(row_lo_.size()); }
  Model build() const;

 private:
  std::vector<double> col_lo_, col_hi_, cost_;
  std::vector<std::uint8_t> integer_;
  std::vector<std::string> col_names_, row_names_;
  std::vector<double> row_lo_, row_hi_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  double offset_ = 0.0;
};

}  // namespace icegrid
