#pragma once

#include "aspadmm/linop.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace aspadmm::detail {

// Seeded generator shared by the instance builders.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    eng_.seed(seq);
  }

  double normal() { return normal_(eng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }

  Vec normal_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  // Column by column, so the draw order does not depend on the storage order.
  Mat normal_mat(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  // Fisher-Yates with an explicit uniform draw; std::shuffle is not pinned by the standard.
  std::vector<Eigen::Index> permutation(Eigen::Index n) {
    std::vector<Eigen::Index> p(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(std::uniform_int_distribution<std::uint64_t>(
          0, static_cast<std::uint64_t>(i))(eng_));
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
  }

  // k distinct entries of {0..n-1} in draw order.
  std::vector<Eigen::Index> choose(Eigen::Index n, Eigen::Index k) {
    auto p = permutation(n);
    p.resize(static_cast<std::size_t>(k));
    return p;
  }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

inline Vec soft_threshold(const Vec& r, double t) {
  return r.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
}

}  // namespace aspadmm::detail
