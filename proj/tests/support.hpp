#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "regulib/ode_core.hpp"

namespace regulib::testing {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(rng, -scale, scale);
  return m;
}

/// Random matrix shifted left until it is Hurwitz with margin.
inline Matrix random_hurwitz(std::mt19937_64& rng, Eigen::Index n) {
  Matrix m = random_matrix(rng, n, n);
  double max_re = -1e300;
  for (const auto& ev : eigenvalues(m)) max_re = std::max(max_re, ev.real());
  m -= (max_re + uniform(rng, 0.1, 2.0)) * Matrix::Identity(n, n);
  return m;
}

/// d-1 distinct negative roots separated by at least `gap`.
inline std::vector<double> distinct_negative_roots(std::mt19937_64& rng, std::size_t count,
                                                   double gap = 0.05) {
  std::vector<double> roots;
  while (roots.size() < count) {
    const double r = -uniform(rng, 0.2, 5.0);
    bool ok = true;
    for (double s : roots) ok = ok && std::abs(s - r) > gap;
    if (ok) roots.push_back(r);
  }
  return roots;
}

}  // namespace regulib::testing
