#pragma once

#include "aspadmm/linop.hpp"

#include <limits>
#include <memory>
#include <vector>

namespace aspadmm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Componentwise sign(r)·max(|r| - t·w, 0).
Vec prox_l1(const Vec& r, double t, double w = 1.0);
Vec project_box(const Vec& r, double lo, double hi);
// Entries listed in `indices` take `values` (same length); the rest keep r.
Vec project_pinned(const Vec& r, const std::vector<Eigen::Index>& indices, const Vec& values);

// Closed proper convex function with a computable proximal map.
class ProxFunction {
 public:
  enum class Kind { zero, l1, box, nonneg, pinned, quadratic, tnn_ball, composite };

  static ProxFunction zero();
  static ProxFunction l1(double weight);
  static ProxFunction box(double lo, double hi);
  static ProxFunction nonneg();
  // δ{x : x_i = values_k for i = indices_k}.
  static ProxFunction pinned(Eigen::Index dim, std::vector<Eigen::Index> indices, Vec values);
  // ½⟨x, Px⟩ - ⟨b, x⟩
  static ProxFunction quadratic(Mat p, Vec b);
  // weight·‖X‖_TNN + δ{tensor spectral norm ≤ cap} on n1×n2×n3 tensors stored slice-major.
  static ProxFunction tnn_ball(double weight, double cap, Eigen::Index n1, Eigen::Index n2,
                               Eigen::Index n3);
  // Sum of separable parts: at most one l1 term plus any of box / nonneg / pinned.
  static ProxFunction composite(std::vector<ProxFunction> parts);

  Kind kind() const { return kind_; }
  // +inf outside the domain.
  double eval(const Vec& x) const;
  // argmin_p f(p) + ‖p - r‖²/(2t)
  Vec prox(const Vec& r, double t) const;
  // dist(g, ∂f(x)); +inf when x is outside the domain. Not defined for tnn_ball.
  double subgradient_distance(const Vec& x, const Vec& g) const;
  bool has_subgradient_distance() const;

  double weight() const { return w_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<ProxFunction>& parts() const { return parts_; }

 private:
  // Per-coordinate subdifferential interval [lo, hi] for separable kinds.
  void subdiff_intervals(const Vec& x, Vec& lo, Vec& hi) const;

  Kind kind_ = Kind::zero;
  double w_ = 0.0;
  double lo_ = -kInf, hi_ = kInf;
  Eigen::Index dim_ = -1;
  std::vector<Eigen::Index> indices_;
  Vec values_;
  std::shared_ptr<const Mat> p_;
  Vec b_;
  Eigen::Index n1_ = 0, n2_ = 0, n3_ = 0;
  std::vector<ProxFunction> parts_;
};

}  // namespace aspadmm
