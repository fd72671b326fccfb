#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "litlvm/core.hpp"

namespace testing {

inline litlvm::Vector random_vector(std::mt19937_64& gen, Eigen::Index size, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  litlvm::Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(gen);
  return v;
}

inline litlvm::Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                                    double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  litlvm::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  return m;
}

// Central differences of f at x, one coordinate at a time.
inline litlvm::Vector numeric_gradient(const std::function<double(const litlvm::Vector&)>& f,
                                       litlvm::Vector x, double h = 1e-5) {
  litlvm::Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||, floor): a relative error that stays defined
// when both gradients are tiny.
inline double relative_error(const litlvm::Vector& a, const litlvm::Vector& b, double floor = 1e-8) {
  const double scale = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / scale;
}

inline litlvm::Vector as_vector(const litlvm::Matrix& m) {
  return Eigen::Map<const litlvm::Vector>(m.data(), m.size());
}

inline litlvm::Matrix as_matrix(const litlvm::Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const litlvm::Matrix>(v.data(), rows, cols);
}

}  // namespace testing
