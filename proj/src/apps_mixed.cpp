#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"

#include "apps_internal.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace aspadmm {

void MixedSparseInstance::validate() const {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0 || n == 0) throw Error("mixed instance has an empty matrix");
  if (b.size() != a.rows()) throw DimensionError("mixed b", a.rows(), b.size());
  std::vector<int> hits(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty()) throw Error("group " + std::to_string(i) + " is empty");
    for (Eigen::Index j : groups[i]) {
      if (j < 0 || j >= n) throw Error("group " + std::to_string(i) + " holds index " + std::to_string(j) +
                                       " outside [0, " + std::to_string(n) + ")");
      ++hits[static_cast<std::size_t>(j)];
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (hits[static_cast<std::size_t>(j)] != 1) {
      throw Error("groups do not partition the columns: index " + std::to_string(j) + " appears " +
                  std::to_string(hits[static_cast<std::size_t>(j)]) + " times");
    }
  }
  if (!(lambda1 > 0.0 && lambda2 > 0.0)) throw Error("mixed lambda1, lambda2 must be positive");
  if (!(rho1 > 0.0 && rho2 > 0.0)) throw Error("mixed rho1, rho2 must be positive");
  if (!(a_param >= 2.0)) throw Error("surrogate parameter a must be at least 2");
  if (eta && !(*eta > 0.0)) throw Error("PMM weight eta must be positive");
}

MixedSparseInstance gen_mixed_instance(Eigen::Index m, Eigen::Index n, Eigen::Index num_groups,
                                       Eigen::Index nonzero_groups, Eigen::Index per_group,
                                       std::uint64_t seed, double noise) {
  if (m <= 0 || n <= 0) throw Error("gen_mixed_instance: dimensions must be positive");
  if (num_groups <= 0 || n % num_groups != 0) {
    throw Error("gen_mixed_instance: N = " + std::to_string(num_groups) + " must divide n = " + std::to_string(n));
  }
  const Eigen::Index size = n / num_groups;
  if (nonzero_groups < 0 || nonzero_groups > num_groups) {
    throw Error("gen_mixed_instance: S = " + std::to_string(nonzero_groups) + " exceeds N = " +
                std::to_string(num_groups));
  }
  if (per_group < 0 || per_group > size) {
    throw Error("gen_mixed_instance: r = " + std::to_string(per_group) + " exceeds the group size " +
                std::to_string(size));
  }

  detail::Rng rng(seed);
  MixedSparseInstance inst;
  inst.a = rng.normal_mat(m, n);
  const auto perm = rng.permutation(n);
  inst.groups.resize(static_cast<std::size_t>(num_groups));
  for (Eigen::Index g = 0; g < num_groups; ++g) {
    auto& grp = inst.groups[static_cast<std::size_t>(g)];
    grp.assign(perm.begin() + g * size, perm.begin() + (g + 1) * size);
  }
  inst.x_true = Vec::Zero(n);
  for (Eigen::Index g : rng.choose(num_groups, nonzero_groups)) {
    const auto& grp = inst.groups[static_cast<std::size_t>(g)];
    for (Eigen::Index pos : rng.choose(size, per_group)) inst.x_true(grp[static_cast<std::size_t>(pos)]) = rng.normal();
  }
  for (auto& grp : inst.groups) std::sort(grp.begin(), grp.end());
  inst.b = inst.a * inst.x_true + noise * rng.normal_vec(m);
  inst.seed = seed;
  return inst;
}

Mat group_operator(const std::vector<std::vector<Eigen::Index>>& groups, Eigen::Index n) {
  Mat b = Mat::Zero(static_cast<Eigen::Index>(groups.size()), n);
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (Eigen::Index j : groups[i]) b(static_cast<Eigen::Index>(i), j) = 1.0;
  return b;
}

MixedReformulation mixed_reformulate(const MixedSparseInstance& inst, bool literal_link) {
  inst.validate();
  const Eigen::Index n = inst.n();
  MixedReformulation r;
  r.group = group_operator(inst.groups, n);
  r.a_split.resize(inst.a.rows(), 2 * n);
  r.a_split << inst.a, -inst.a;
  r.link.resize(r.group.rows(), 2 * n);
  if (literal_link) {
    r.link << r.group, -r.group;
  } else {
    r.link << r.group, r.group;
  }
  r.literal_link = literal_link;
  return r;
}

Vec split_nonneg(const Vec& x) {
  Vec z(2 * x.size());
  z << x.cwiseMax(0.0), (-x).cwiseMax(0.0);
  return z;
}

Vec merge_split(const Vec& z) {
  if (z.size() % 2 != 0) throw Error("split vector must have even length");
  const Eigen::Index n = z.size() / 2;
  return z.head(n) - z.tail(n);
}

namespace {

double count_nonzeros(const Vec& v) { return static_cast<double>((v.array() != 0.0).count()); }

}  // namespace

double mixed_objective(const MixedSparseInstance& inst, const Vec& x) {
  inst.validate();
  if (x.size() != inst.n()) throw DimensionError("mixed x", inst.n(), x.size());
  double groups_on = 0.0;
  for (const auto& grp : inst.groups) {
    bool on = false;
    for (Eigen::Index j : grp) on = on || x(j) != 0.0;
    groups_on += on ? 1.0 : 0.0;
  }
  return 0.5 * (inst.a * x - inst.b).squaredNorm() + inst.lambda1 * groups_on + inst.lambda2 * count_nonzeros(x);
}

double mixed_split_objective(const MixedSparseInstance& inst, const Vec& z, const Vec& y) {
  inst.validate();
  if (z.size() != 2 * inst.n()) throw DimensionError("mixed split z", 2 * inst.n(), z.size());
  if (y.size() != static_cast<Eigen::Index>(inst.groups.size()))
    throw DimensionError("mixed split y", inst.groups.size(), y.size());
  const Vec fit = inst.a * merge_split(z) - inst.b;
  return 0.5 * fit.squaredNorm() + inst.lambda1 * count_nonzeros(y) + inst.lambda2 * count_nonzeros(z);
}

double mixed_penalized_objective(const MixedSparseInstance& inst, const MixedReformulation& reform,
                                 const Vec& s) {
  if (s.size() != reform.a_split.cols()) throw DimensionError("mixed s", reform.a_split.cols(), s.size());
  const Vec sp = s.cwiseMax(0.0);
  const Vec y = reform.link * sp;
  const double k1 = inst.rho1 / inst.lambda1, k2 = inst.rho2 / inst.lambda2;
  return 0.5 * (reform.a_split * sp - inst.b).squaredNorm() + inst.rho1 * y.lpNorm<1>() -
         inst.lambda1 * h_separable(y, inst.a_param, k1, false) + inst.rho2 * sp.lpNorm<1>() -
         inst.lambda2 * h_separable(sp, inst.a_param, k2, true);
}

double mixed_default_eta(const MixedSparseInstance& inst, double beta, double tau) {
  if (!(beta > 0.0)) throw SetupError("mixed beta must be positive");
  const Mat& a = inst.a;
  const Mat g = a.rows() <= a.cols() ? Mat(a * a.transpose()) : Mat(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const double l = 2.0 * es.eigenvalues().maxCoeff();  // λ_max((A,-A)ᵀ(A,-A))
  const double hi = 4.0 * beta + l - 2.0 * beta * tau;
  const double lo = 2.0 * beta + l;
  return 2.0 * (hi * hi - lo * lo) / (2.0 * beta);
}

namespace {

// One PMM subproblem: min F(s, y, z; zᵗ, yᵗ) over Cs = y, z = s, s ≥ 0.
class MixedInner {
 public:
  MixedInner(const MixedSparseInstance& inst, const MixedReformulation& reform, const MixedOptions& opts,
             double eta)
      : inst_(inst), r_(reform), opts_(opts), eta_(eta) {
    ata_ = r_.a_split.transpose() * r_.a_split;
    atb_ = r_.a_split.transpose() * inst.b;
    ctc_ = r_.link.transpose() * r_.link;
    const Eigen::Index nn = r_.a_split.cols();
    h_dual_ = ata_ + eta_ * Mat::Identity(nn, nn);
    s_ = z_ = Vec::Zero(nn);
    mu_hat_ = Vec::Zero(nn);
    y_ = mu_ = Vec::Zero(r_.link.rows());
  }

  void set_anchor(const Vec& zt, const Vec& yt) {
    zt_ = zt;
    yt_ = yt;
    const double k1 = inst_.rho1 / inst_.lambda1, k2 = inst_.rho2 / inst_.lambda2;
    lin1_ = inst_.lambda1 * grad_h_separable(yt, inst_.a_param, k1, false);
    lin2_ = inst_.lambda2 * grad_h_separable(zt, inst_.a_param, k2, true);
    // Linearization constants, so F majorizes the penalized objective.
    constant_ = lin1_.dot(yt) - inst_.lambda1 * h_separable(yt, inst_.a_param, k1, false) + lin2_.dot(zt) -
                inst_.lambda2 * h_separable(zt, inst_.a_param, k2, true);
    dual_warm_.reset();
  }

  MixedInnerTrace run() {
    MixedInnerTrace tr;
    const double beta = opts_.beta, tau = opts_.tau;
    const Eigen::Index nn = s_.size();
    double theta_prev = opts_.accelerated ? 1.0 / tau : 1.0;
    Vec y_prev = y_;
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < opts_.inner_max; ++k) {
      double theta = 1.0;
      Vec v = y_;
      if (opts_.accelerated) {
        theta = theta_next(theta_prev, tau);
        v = extrapolate(y_, y_prev, theta, theta_prev);
      }
      const double bp = beta / theta;
      prepare(bp);
      const Vec base = atb_ - r_.link.transpose() * mu_ + bp * (r_.link.transpose() * v) + mu_hat_;
      const Vec s_half = s_step(base + bp * z_);
      const Vec rz = (eta_ * zt_ + lin2_ - mu_hat_ + bp * s_half) / (eta_ + bp);
      z_ = detail::soft_threshold(rz, inst_.rho2 / (eta_ + bp));
      s_ = s_step(base + bp * z_);
      const Vec cs = r_.link * s_;
      const Vec ry = (eta_ * yt_ + lin1_ + mu_ + bp * cs) / (eta_ + bp);
      const Vec y_new = detail::soft_threshold(ry, inst_.rho1 / (eta_ + bp));
      mu_ += tau * beta * (cs - y_new);
      mu_hat_ += tau * beta * (z_ - s_);
      y_prev = y_;
      y_ = y_new;
      theta_prev = theta;

      const double p = pobj();
      const double d = dobj();
      const double eg = diagnostics_gap(p, d);
      const double e1 = relative_mismatch(z_, s_);
      const double e2 = relative_mismatch(cs, y_);
      const double err = std::max({eg, e1, e2});
      tr.pobj.push_back(p);
      tr.dobj.push_back(d);
      tr.eps_gap.push_back(eg);
      tr.eps_p1.push_back(e1);
      tr.eps_p2.push_back(e2);
      tr.error.push_back(err);
      tr.neg_violation.push_back(nn > 0 ? std::max(0.0, -s_.minCoeff()) : 0.0);

      TraceRow row;
      row.k = k;
      row.theta = theta;
      row.objective = p;
      row.feasibility = std::sqrt((cs - y_).squaredNorm() + (z_ - s_).squaredNorm());
      row.kkt_residual = err;
      row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      tr.trace.append(row);
      tr.iterations = k + 1;
      if (err <= opts_.inner_tol) {
        tr.converged = true;
        break;
      }
    }
    return tr;
  }

  const Vec& s() const { return s_; }

 private:
  void prepare(double bp) {
    if (bp == cached_bp_) return;
    const Eigen::Index nn = s_.size();
    k_ = ata_ + bp * (ctc_ + Mat::Identity(nn, nn));
    if (opts_.mode == MixedSMode::unconstrained) {
      llt_.compute(k_);
      if (llt_.info() != Eigen::Success) throw SubproblemError("mixed s-step matrix is not positive definite");
    }
    cached_bp_ = bp;
  }

  // min ½⟨s, Ks⟩ - ⟨rhs, s⟩, with s ≥ 0 in the projected mode.
  Vec s_step(const Vec& rhs) {
    if (opts_.mode == MixedSMode::unconstrained) return llt_.solve(rhs);
    return nnqp(k_, -rhs, s_.cwiseMax(0.0));
  }

  double pobj() const {
    const Vec sp = s_.cwiseMax(0.0);
    const Vec yy = r_.link * sp;
    return inst_.rho1 * yy.lpNorm<1>() - lin1_.dot(yy) + 0.5 * eta_ * (yy - yt_).squaredNorm() +
           inst_.rho2 * sp.sum() - lin2_.dot(sp) + 0.5 * eta_ * (sp - zt_).squaredNorm() +
           0.5 * (r_.a_split * sp - inst_.b).squaredNorm() + constant_;
  }

  // Dual function of the link constraint Cs = y at the current μ.
  double dobj() {
    const Vec yy = detail::soft_threshold((eta_ * yt_ + lin1_ + mu_) / eta_, inst_.rho1 / eta_);
    const double vy = inst_.rho1 * yy.lpNorm<1>() - lin1_.dot(yy) + 0.5 * eta_ * (yy - yt_).squaredNorm() - mu_.dot(yy);
    const Eigen::Index nn = s_.size();
    const Vec q = -atb_ + inst_.rho2 * Vec::Ones(nn) - lin2_ - eta_ * zt_ + r_.link.transpose() * mu_;
    const Vec ss = nnqp(h_dual_, q, dual_warm_);
    dual_warm_ = ss;
    const double vs = 0.5 * (r_.a_split * ss - inst_.b).squaredNorm() + inst_.rho2 * ss.sum() - lin2_.dot(ss) +
                      0.5 * eta_ * (ss - zt_).squaredNorm() + mu_.dot(r_.link * ss);
    return vy + vs + constant_;
  }

  const MixedSparseInstance& inst_;
  const MixedReformulation& r_;
  const MixedOptions& opts_;
  double eta_;
  Mat ata_, ctc_, h_dual_, k_;
  Vec atb_;
  Eigen::LLT<Mat> llt_;
  double cached_bp_ = -1.0;
  Vec s_, z_, y_, mu_, mu_hat_;
  Vec zt_, yt_, lin1_, lin2_;
  double constant_ = 0.0;
  std::optional<Vec> dual_warm_;
};

}  // namespace

MixedResult mixed_pmm_run(const MixedSparseInstance& inst, const MixedOptions& opts) {
  inst.validate();
  if (!(opts.beta > 0.0)) throw SetupError("mixed beta must be positive");
  if (opts.accelerated) {
    if (!(opts.tau > 0.0 && opts.tau < 1.0)) throw SetupError("mixed tau must lie in (0, 1)");
  } else if (!(opts.tau > 0.0 && opts.tau < (1.0 + std::sqrt(5.0)) / 2.0)) {
    throw SetupError("mixed tau must lie in (0, (1 + sqrt 5)/2)");
  }
  if (opts.inner_max < 1 || opts.outer_max < 1) throw SetupError("mixed iteration caps must be positive");

  const MixedReformulation reform = mixed_reformulate(inst, opts.literal_link);
  MixedResult out;
  out.eta = inst.eta.value_or(mixed_default_eta(inst, opts.beta, opts.tau));
  if (!(out.eta > 0.0)) throw SetupError("PMM weight eta must be positive");

  const Eigen::Index nn = reform.a_split.cols(), ng = reform.link.rows();
  Vec zt = Vec::Zero(nn), yt = Vec::Zero(ng);
  MixedInner inner(inst, reform, opts, out.eta);
  for (int t = 0; t < opts.outer_max; ++t) {
    inner.set_anchor(zt, yt);
    try {
      out.inner.push_back(inner.run());
    } catch (const SubproblemError& e) {
      throw SubproblemError("outer step " + std::to_string(t) + ": " + e.what());
    }
    // Next anchor: the feasible point s⁺ with its link image.
    const Vec z_new = inner.s().cwiseMax(0.0);
    const Vec y_new = reform.link * z_new;
    const double change = std::sqrt((z_new - zt).squaredNorm() + (y_new - yt).squaredNorm());
    const double scale = 1.0 + std::sqrt(zt.squaredNorm() + yt.squaredNorm());
    zt = z_new;
    yt = y_new;
    out.outer_objective.push_back(mixed_penalized_objective(inst, reform, zt));
    out.outer_iterations = t + 1;
    if (change / scale <= opts.outer_tol) {
      out.converged = true;
      break;
    }
  }
  out.z = zt;
  out.y = yt;
  out.x = merge_split(zt);
  return out;
}

}  // namespace aspadmm
