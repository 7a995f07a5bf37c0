#pragma once

#include "aspadmm/linop.hpp"

#include <cstdint>
#include <algorithm>
#include <cmath>
#include <random>

namespace testutil {

using aspadmm::Mat;
using aspadmm::Vec;

inline Mat randn(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(eng);
  return m;
}

inline Vec randn(Eigen::Index n, std::uint64_t seed) { return randn(n, 1, seed).col(0); }

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Minimizer of φ on a uniform grid of [lo, hi] followed by golden-section refinement.
template <class F>
double grid_argmin(F&& phi, double lo, double hi, int n = 20001) {
  double best = lo, fbest = phi(lo);
  const double h = (hi - lo) / (n - 1);
  for (int i = 1; i < n; ++i) {
    const double x = lo + h * i;
    const double fx = phi(x);
    if (fx < fbest) {
      fbest = fx;
      best = x;
    }
  }
  double a = std::max(lo, best - h), b = std::min(hi, best + h);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (phi(c) < phi(d)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace testutil
