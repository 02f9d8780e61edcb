#include "icegrid/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icegrid {

double Model::objective(std::span<const double> x) const {
  double z = objective_offset;
  for (int j = 0; j < num_cols(); ++j) z += cost[j] * x[j];
  return z;
}

std::vector<double> Model::row_activity(std::span<const double> x) const {
  std::vector<double> act(num_rows(), 0.0);
  for (int j = 0; j < num_cols(); ++j)
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) act[row_index[k]] += value[k] * x[j];
  return act;
}

double Model::max_violation(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_cols()) throw std::invalid_argument("solution length mismatch");
  double worst = 0.0;
  for (int j = 0; j < num_cols(); ++j) {
    worst = std::max(worst, col_lower[j] - x[j]);
    worst = std::max(worst, x[j] - col_upper[j]);
  }
  const auto act = row_activity(x);
  for (int i = 0; i < num_rows(); ++i) {
    worst = std::max(worst, row_lower[i] - act[i]);
    worst = std::max(worst, act[i] - row_upper[i]);
  }
  return worst;
}

double Model::max_integrality_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_cols(); ++j)
    if (is_integer[j]) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  return worst;
}

Model Model::relaxed() const {
  Model m = *this;
  std::fill(m.is_integer.begin(), m.is_integer.end(), 0);
  return m;
}

int ModelBuilder::add_col(std::string name, double lower, double upper, double cost, bool integer) {
  if (lower > upper) throw std::invalid_argument("column " + name + " has lower > upper");
  col_names_.push_back(std::move(name));
  col_lo_.push_back(lower);
  col_hi_.push_back(upper);
  cost_.push_back(cost);
  integer_.push_back(integer ? 1 : 0);
  return static_cast<int>(cost_.size()) - 1;
}

int ModelBuilder::add_row(std::string name, double lower, double upper,
                          std::vector<std::pair<int, double>> entries) {
  if (lower > upper) throw std::invalid_argument("row " + name + " has lower > upper");
  for (const auto& [c, _] : entries)
    if (c < 0 || c >= num_cols()) throw std::out_of_range("row " + name + " references unknown column");
  row_names_.push_back(std::move(name));
  row_lo_.push_back(lower);
  row_hi_.push_back(upper);
  rows_.push_back(std::move(entries));
  return static_cast<int>(row_lo_.size()) - 1;
}

void ModelBuilder::set_cost(int col, double cost) { cost_.at(col) = cost; }
void ModelBuilder::add_cost(int col, double cost) { cost_.at(col) += cost; }
void ModelBuilder::set_bounds(int col, double lower, double upper) {
  col_lo_.at(col) = lower;
  col_hi_.at(col) = upper;
}

Model ModelBuilder::build() const {
  Model m;
  m.col_lower = col_lo_;
  m.col_upper = col_hi_;
  m.cost = cost_;
  m.is_integer = integer_;
  m.col_names = col_names_;
  m.row_lower = row_lo_;
  m.row_upper = row_hi_;
  m.row_names = row_names_;
  m.objective_offset = offset_;

  const int n = num_cols();
  std::vector<std::vector<std::pair<int, double>>> cols(n);
  for (int i = 0; i < num_rows(); ++i) {
    auto entries = rows_[i];
    std::sort(entries.begin(), entries.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < entries.size();) {
      const int c = entries[k].first;
      double v = 0.0;
      while (k < entries.size() && entries[k].first == c) v += entries[k++].second;
      if (v != 0.0) cols[c].emplace_back(i, v);
    }
  }
  m.col_start.assign(1, 0);
  for (int j = 0; j < n; ++j) {
    for (const auto& [r, v] : cols[j]) {
      m.row_index.push_back(r);
      m.value.push_back(v);
    }
    m.col_start.push_back(static_cast<int>(m.value.size()));
  }
  return m;
}

}  // namespace icegrid
