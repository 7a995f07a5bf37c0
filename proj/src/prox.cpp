#include "aspadmm/prox.hpp"

#include "aspadmm/error.hpp"
#include "aspadmm/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace aspadmm {

namespace {

void require_same(const char* what, Eigen::Index a, Eigen::Index b) {
  if (a != b) throw DimensionError(what, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
}

bool at_value(double x, double v) {
  return std::isfinite(v) && std::abs(x - v) <= 1e-12 * (1.0 + std::abs(v));
}

double interval_distance(double g, double lo, double hi) {
  if (g < lo) return lo - g;
  if (g > hi) return g - hi;
  return 0.0;
}

bool separable(ProxFunction::Kind k) {
  using K = ProxFunction::Kind;
  return k == K::zero || k == K::l1 || k == K::box || k == K::nonneg || k == K::pinned;
}

}  // namespace

Vec prox_l1(const Vec& r, double t, double w) {
  if (!(t > 0.0) || !(w >= 0.0)) throw Error("prox_l1 needs t > 0 and w >= 0");
  const double thr = t * w;
  return r.unaryExpr([thr](double v) {
    const double m = std::abs(v) - thr;
    return m > 0.0 ? std::copysign(m, v) : 0.0;
  });
}

Vec project_box(const Vec& r, double lo, double hi) {
  if (lo > hi) throw Error("project_box: lo > hi");
  return r.cwiseMax(lo).cwiseMin(hi);
}

Vec project_pinned(const Vec& r, const std::vector<Eigen::Index>& indices, const Vec& values) {
  require_same("project_pinned values", static_cast<Eigen::Index>(indices.size()), values.size());
  Vec out = r;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Eigen::Index i = indices[k];
    if (i < 0 || i >= r.size()) {
      throw Error("project_pinned: index " + std::to_string(i) + " out of range [0, " +
                  std::to_string(r.size()) + ")");
    }
    out(i) = values(static_cast<Eigen::Index>(k));
  }
  return out;
}

ProxFunction ProxFunction::zero() { return {}; }

ProxFunction ProxFunction::l1(double weight) {
  if (!(weight >= 0.0)) throw Error("l1 weight must be nonnegative");
  ProxFunction f;
  f.kind_ = Kind::l1;
  f.w_ = weight;
  return f;
}

ProxFunction ProxFunction::box(double lo, double hi) {
  if (lo > hi) throw Error("box: lo > hi");
  ProxFunction f;
  f.kind_ = Kind::box;
  f.lo_ = lo;
  f.hi_ = hi;
  return f;
}

ProxFunction ProxFunction::nonneg() {
  ProxFunction f;
  f.kind_ = Kind::nonneg;
  f.lo_ = 0.0;
  return f;
}

ProxFunction ProxFunction::pinned(Eigen::Index dim, std::vector<Eigen::Index> indices, Vec values) {
  require_same("pinned values", static_cast<Eigen::Index>(indices.size()), values.size());
  for (Eigen::Index i : indices) {
    if (i < 0 || i >= dim) throw Error("pinned: index " + std::to_string(i) + " out of range");
  }
  ProxFunction f;
  f.kind_ = Kind::pinned;
  f.dim_ = dim;
  f.indices_ = std::move(indices);
  f.values_ = std::move(values);
  return f;
}

ProxFunction ProxFunction::quadratic(Mat p, Vec b) {
  require_same("quadratic P square", p.rows(), p.cols());
  require_same("quadratic b", p.rows(), b.size());
  ProxFunction f;
  f.kind_ = Kind::quadratic;
  f.dim_ = b.size();
  f.p_ = std::make_shared<const Mat>(std::move(p));
  f.b_ = std::move(b);
  return f;
}

ProxFunction ProxFunction::tnn_ball(double weight, double cap, Eigen::Index n1, Eigen::Index n2,
                                    Eigen::Index n3) {
  if (!(weight >= 0.0) || !(cap > 0.0)) throw Error("tnn_ball needs weight >= 0 and cap > 0");
  ProxFunction f;
  f.kind_ = Kind::tnn_ball;
  f.w_ = weight;
  f.hi_ = cap;
  f.n1_ = n1;
  f.n2_ = n2;
  f.n3_ = n3;
  f.dim_ = n1 * n2 * n3;
  return f;
}

ProxFunction ProxFunction::composite(std::vector<ProxFunction> parts) {
  int l1_count = 0;
  for (const auto& p : parts) {
    if (!separable(p.kind_)) throw Error("composite supports only separable parts");
    if (p.kind_ == Kind::l1) ++l1_count;
  }
  if (l1_count > 1) throw Error("composite supports at most one l1 part");
  ProxFunction f;
  f.kind_ = Kind::composite;
  f.parts_ = std::move(parts);
  return f;
}

double ProxFunction::eval(const Vec& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::l1:
      return w_ * x.lpNorm<1>();
    case Kind::box:
    case Kind::nonneg:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < lo_ || x(i) > hi_) return kInf;
      }
      return 0.0;
    case Kind::pinned:
      require_same("pinned eval", dim_, x.size());
      for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (x(indices_[k]) != values_(static_cast<Eigen::Index>(k))) return kInf;
      }
      return 0.0;
    case Kind::quadratic:
      require_same("quadratic eval", dim_, x.size());
      return 0.5 * x.dot(*p_ * x) - b_.dot(x);
    case Kind::tnn_ball: {
      require_same("tnn_ball eval", dim_, x.size());
      const Tensor3 t(n1_, n2_, n3_, x);
      if (tensor_spectral_norm(t) > hi_ * (1.0 + 1e-9)) return kInf;
      return w_ * tnn(t);
    }
    case Kind::composite: {
      double s = 0.0;
      for (const auto& p : parts_) s += p.eval(x);
      return s;
    }
  }
  return 0.0;
}

Vec ProxFunction::prox(const Vec& r, double t) const {
  if (!(t > 0.0)) throw Error("prox step must be positive");
  switch (kind_) {
    case Kind::zero:
      return r;
    case Kind::l1:
      return prox_l1(r, t, w_);
    case Kind::box:
    case Kind::nonneg:
      return project_box(r, lo_, hi_);
    case Kind::pinned:
      require_same("pinned prox", dim_, r.size());
      return project_pinned(r, indices_, values_);
    case Kind::quadratic: {
      require_same("quadratic prox", dim_, r.size());
      Mat h = t * *p_;
      h.diagonal().array() += 1.0;
      return h.llt().solve(r + t * b_);
    }
    case Kind::tnn_ball: {
      require_same("tnn_ball prox", dim_, r.size());
      return prox_tnn_capped(Tensor3(n1_, n2_, n3_, r), t * w_, hi_).vec();
    }
    case Kind::composite: {
      // Each coordinate solves a 1-D convex problem over an interval, so
      // shrinking first and then projecting is exact.
      Vec out = r;
      for (const auto& p : parts_) {
        if (p.kind_ == Kind::l1) out = prox_l1(out, t, p.w_);
      }
      for (const auto& p : parts_) {
        if (p.kind_ != Kind::l1 && p.kind_ != Kind::zero) out = p.prox(out, t);
      }
      return out;
    }
  }
  return r;
}

bool ProxFunction::has_subgradient_distance() const { return kind_ != Kind::tnn_ball; }

void ProxFunction::subdiff_intervals(const Vec& x, Vec& lo, Vec& hi) const {
  switch (kind_) {
    case Kind::zero:
      return;
    case Kind::l1:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) > 0.0) {
          lo(i) += w_;
          hi(i) += w_;
        } else if (x(i) < 0.0) {
          lo(i) -= w_;
          hi(i) -= w_;
        } else {
          lo(i) -= w_;
          hi(i) += w_;
        }
      }
      return;
    case Kind::box:
    case Kind::nonneg:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < lo_ - 1e-12 * (1.0 + std::abs(lo_)) || x(i) > hi_ + 1e-12 * (1.0 + std::abs(hi_))) {
          lo(i) = kInf;
          hi(i) = -kInf;
          continue;
        }
        if (at_value(x(i), lo_)) lo(i) = -kInf;
        if (at_value(x(i), hi_)) hi(i) = kInf;
      }
      return;
    case Kind::pinned:
      for (std::size_t k = 0; k < indices_.size(); ++k) {
        const Eigen::Index i = indices_[k];
        if (!at_value(x(i), values_(static_cast<Eigen::Index>(k)))) {
          lo(i) = kInf;
          hi(i) = -kInf;
        } else {
          lo(i) = -kInf;
          hi(i) = kInf;
        }
      }
      return;
    case Kind::composite:
      for (const auto& p : parts_) p.subdiff_intervals(x, lo, hi);
      return;
    default:
      throw Error("subdifferential intervals need a separable function");
  }
}

double ProxFunction::subgradient_distance(const Vec& x, const Vec& g) const {
  require_same("subgradient_distance", x.size(), g.size());
  if (kind_ == Kind::tnn_ball) throw Error("subgradient distance unsupported for tnn_ball");
  if (kind_ == Kind::quadratic) return (g - (*p_ * x - b_)).norm();
  Vec lo = Vec::Zero(x.size());
  Vec hi = Vec::Zero(x.size());
  subdiff_intervals(x, lo, hi);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (lo(i) > hi(i)) return kInf;
    const double d = interval_distance(g(i), lo(i), hi(i));
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace aspadmm
