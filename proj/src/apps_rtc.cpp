#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"

#include "apps_internal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace aspadmm {

void RtcInstance::validate() const {
  if (x_true.size() == 0) throw Error("RTC instance has an empty tensor");
  if (!observed.same_shape(x_true)) throw DimensionError("RTC observed tensor", x_true.size(), observed.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < 0 || omega[i] >= x_true.size()) throw Error("RTC sample index out of range");
    if (i > 0 && omega[i] <= omega[i - 1]) throw Error("RTC sample indices must be sorted and distinct");
  }
  if (!(j1 > 0.0 && j2 > 0.0)) throw Error("RTC caps j1, j2 must be positive");
  if (!(lambda > 0.0)) throw Error("RTC lambda must be positive");
  if (!(eta > 0.0)) throw SetupError("RTC PMM weight eta must be positive");
}

Tensor3 tproduct(const Tensor3& a, const Tensor3& b) {
  if (a.n2() != b.n1()) throw DimensionError("t-product inner dimension", a.n2(), b.n1());
  if (a.n3() != b.n3()) throw DimensionError("t-product tube length", a.n3(), b.n3());
  const FourierSlices fa = dft_mode3(a), fb = dft_mode3(b);
  FourierSlices fc(fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i) fc[i] = fa[i] * fb[i];
  return idft_mode3_real(fc);
}

RtcInstance gen_rtc_instance(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3, Eigen::Index rank,
                             double sr, double alpha, std::uint64_t seed) {
  if (n1 <= 0 || n2 <= 0 || n3 <= 0) throw Error("gen_rtc_instance: dimensions must be positive");
  if (rank <= 0) throw Error("gen_rtc_instance: rank must be positive");
  if (!(sr > 0.0 && sr <= 1.0)) throw Error("gen_rtc_instance: SR must lie in (0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("gen_rtc_instance: alpha must lie in [0, 1]");

  detail::Rng rng(seed);
  const Tensor3 left(n1, rank, n3, rng.normal_vec(n1 * rank * n3));
  const Tensor3 right(rank, n2, n3, rng.normal_vec(rank * n2 * n3));
  Tensor3 x = tproduct(left, right);
  const double lo = x.vec().minCoeff(), hi = x.vec().maxCoeff();
  if (!(hi > lo)) throw Error("gen_rtc_instance: constant tensor drawn");
  x.vec() = (x.vec().array() - lo) / (hi - lo);

  const Eigen::Index total = x.size();
  const auto count = static_cast<Eigen::Index>(std::llround(sr * static_cast<double>(total)));
  RtcInstance inst;
  inst.omega = rng.choose(total, count);
  std::sort(inst.omega.begin(), inst.omega.end());

  inst.observed = Tensor3::zeros(n1, n2, n3);
  for (Eigen::Index idx : inst.omega) inst.observed.vec()(idx) = x.vec()(idx);
  const auto corrupt = static_cast<Eigen::Index>(std::llround(alpha * static_cast<double>(count)));
  const auto picks = rng.choose(count, corrupt);
  const double vmin = x.vec().minCoeff(), vmax = x.vec().maxCoeff();
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const Eigen::Index idx = inst.omega[static_cast<std::size_t>(picks[i])];
    inst.observed.vec()(idx) = i < picks.size() / 2 ? vmin : vmax;  // pepper, then salt
  }

  inst.x_true = std::move(x);
  inst.sr = sr;
  inst.alpha = alpha;
  inst.lambda = 1.0 / std::sqrt(static_cast<double>(std::max(n1, n2) * n3));
  inst.seed = seed;
  return inst;
}

void check_rtc_tau(double tau, double eta, double beta) {
  if (!(beta > 0.0)) throw SetupError("RTC beta must be positive");
  if (!(eta > 0.0)) throw SetupError("RTC eta must be positive");
  const double lo = 2.0 - std::sqrt(1.0 + eta / (2.0 * beta));
  if (!(tau > std::max(lo, 0.0) && tau < 1.0)) {
    throw SetupError("RTC tau = " + format_double(tau) + " outside (" + format_double(std::max(lo, 0.0)) + ", 1)");
  }
}

namespace {

double sum_dc_h(const DcPenalty& p, const Vec& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += dc_h_eval(p, v(i));
  return s;
}

// Closed forms of one PMM subproblem anchored at (Gⁿ, Mⁿ, Zⁿ).
class RtcInner {
 public:
  RtcInner(const RtcInstance& inst, const RtcOptions& opts) : inst_(inst), opts_(opts) {
    const Tensor3& y = inst.observed;
    mu_ = Tensor3::zeros(y.n1(), y.n2(), y.n3());
  }

  void set_anchor(const Tensor3& gn, const Tensor3& mn, const Tensor3& zn) {
    gn_ = gn;
    mn_ = mn;
    zn_ = zn;
    g1_ = grad_h_spectral(gn, inst_.penalty_g).grad;
    g2_ = Tensor3(mn.n1(), mn.n2(), mn.n3(), mn.vec().unaryExpr([&](double v) { return dc_h_grad(inst_.penalty_m, v); }));
    constant_ = -h_spectral(gn, inst_.penalty_g) + g1_.vec().dot(gn.vec()) -
                inst_.lambda * (sum_dc_h(inst_.penalty_m, mn.vec()) - g2_.vec().dot(mn.vec()));
  }

  RtcInnerTrace run(Tensor3& g, Tensor3& m, Tensor3& z) {
    RtcInnerTrace tr;
    const double beta = opts_.beta, tau = opts_.tau, eta = inst_.eta, lam = inst_.lambda;
    const bool accelerated = opts_.arm == RtcArm::sgs_aspadmm;
    double theta_prev = accelerated ? 1.0 / tau : 1.0;
    Vec m_prev = m.vec();
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < opts_.inner_max; ++k) {
      double theta = 1.0;
      Vec v = m.vec();
      if (accelerated) {
        theta = theta_next(theta_prev, tau);
        v = extrapolate(m.vec(), m_prev, theta, theta_prev);
      }
      const double bp = beta / theta;
      if (opts_.arm != RtcArm::admm3d) {
        z = z_step(g.vec(), v, theta);
        tr.omega_pinned = tr.omega_pinned && pinned(z);
      }
      const Vec rg = (eta * gn_.vec() + g1_.vec() + mu_.vec() + bp * (z.vec() - v)) / (eta + bp);
      g = prox_tnn_capped(like(rg), 1.0 / (eta + bp), inst_.j1);
      z = z_step(g.vec(), v, theta);
      tr.omega_pinned = tr.omega_pinned && pinned(z);
      const Vec rm = (eta * mn_.vec() + lam * g2_.vec() + mu_.vec() + bp * (z.vec() - g.vec())) / (eta + bp);
      m_prev = m.vec();
      m.vec() = project_box(detail::soft_threshold(rm, lam / (eta + bp)), -inst_.j2, inst_.j2);
      mu_.vec() += tau * beta * (z.vec() - g.vec() - m.vec());
      theta_prev = theta;

      const double p = objective(g, m, z);
      const double d = dual();
      const double eg = diagnostics_gap(p, d);
      const double ep = diagnostics_pfeas(z.vec(), g.vec(), m.vec());
      const double err = std::max(eg, ep);
      tr.pobj.push_back(p);
      tr.dobj.push_back(d);
      tr.eps_gap.push_back(eg);
      tr.eps_p.push_back(ep);
      tr.error.push_back(err);
      tr.max_m_inf = std::max(tr.max_m_inf, m.vec().cwiseAbs().maxCoeff());
      tr.max_g_spec = std::max(tr.max_g_spec, tensor_spectral_norm(g));

      TraceRow row;
      row.k = k;
      row.theta = theta;
      row.objective = p;
      row.feasibility = (z.vec() - g.vec() - m.vec()).norm();
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

 private:
  Tensor3 like(Vec data) const {
    const Tensor3& y = inst_.observed;
    return Tensor3(y.n1(), y.n2(), y.n3(), std::move(data));
  }

  // Π_Ω(Y) + Π_Ω̄((ηθ + β)⁻¹(θηZⁿ + β(G + V) - θμ))
  Tensor3 z_step(const Vec& g, const Vec& v, double theta) const {
    const double eta = inst_.eta, beta = opts_.beta;
    Vec zc = (theta * eta * zn_.vec() + beta * (g + v) - theta * mu_.vec()) / (eta * theta + beta);
    for (Eigen::Index idx : inst_.omega) zc(idx) = inst_.observed.vec()(idx);
    return like(std::move(zc));
  }

  bool pinned(const Tensor3& z) const {
    for (Eigen::Index idx : inst_.omega)
      if (z.vec()(idx) != inst_.observed.vec()(idx)) return false;
    return true;
  }

  double objective(const Tensor3& g, const Tensor3& m, const Tensor3& z) const {
    return tnn(g) - g1_.vec().dot(g.vec()) + inst_.lambda * (m.vec().lpNorm<1>() - g2_.vec().dot(m.vec())) +
           0.5 * inst_.eta *
               ((g.vec() - gn_.vec()).squaredNorm() + (m.vec() - mn_.vec()).squaredNorm() +
                (z.vec() - zn_.vec()).squaredNorm()) +
           constant_;
  }

  // Lagrangian dual function at μ; each block minimizes in closed form.
  double dual() const {
    const double eta = inst_.eta, lam = inst_.lambda;
    Tensor3 zd = like(zn_.vec() - mu_.vec() / eta);
    for (Eigen::Index idx : inst_.omega) zd.vec()(idx) = inst_.observed.vec()(idx);
    const Tensor3 gd = prox_tnn_capped(like(gn_.vec() + (g1_.vec() + mu_.vec()) / eta), 1.0 / eta, inst_.j1);
    const Tensor3 md =
        like(project_box(detail::soft_threshold(mn_.vec() + (lam * g2_.vec() + mu_.vec()) / eta, lam / eta),
                         -inst_.j2, inst_.j2));
    return objective(gd, md, zd) + mu_.vec().dot(zd.vec() - gd.vec() - md.vec());
  }

  const RtcInstance& inst_;
  const RtcOptions& opts_;
  Tensor3 gn_, mn_, zn_, g1_, g2_, mu_;
  double constant_ = 0.0;
};

double stacked_norm(const Tensor3& a, const Tensor3& b, const Tensor3& c) {
  return std::sqrt(a.vec().squaredNorm() + b.vec().squaredNorm() + c.vec().squaredNorm());
}

}  // namespace

double rtc_objective(const RtcInstance& inst, const Tensor3& g, const Tensor3& m) {
  return tnn(g) - h_spectral(g, inst.penalty_g) +
         inst.lambda * (m.vec().lpNorm<1>() - sum_dc_h(inst.penalty_m, m.vec()));
}

RtcResult rtc_pmm_run(const RtcInstance& inst, const RtcOptions& opts) {
  inst.validate();
  check_rtc_tau(opts.tau, inst.eta, opts.beta);
  if (opts.inner_max < 1 || opts.outer_max < 1) throw SetupError("RTC iteration caps must be positive");

  const Tensor3& y = inst.observed;
  RtcResult out;
  Tensor3 gn = Tensor3::zeros(y.n1(), y.n2(), y.n3());
  Tensor3 mn = gn, zn = gn;
  Tensor3 g = gn, m = gn, z = gn;
  RtcInner inner(inst, opts);
  for (int t = 0; t < opts.outer_max; ++t) {
    inner.set_anchor(gn, mn, zn);
    try {
      out.inner.push_back(inner.run(g, m, z));
    } catch (const Error& e) {
      throw SubproblemError("outer step " + std::to_string(t) + ": " + e.what());
    }
    out.inner_iterations.push_back(out.inner.back().iterations);
    const double step = std::sqrt((g.vec() - gn.vec()).squaredNorm() + (m.vec() - mn.vec()).squaredNorm() +
                                  (z.vec() - zn.vec()).squaredNorm());
    const double change = step / (1.0 + stacked_norm(gn, mn, zn));
    gn = g;
    mn = m;
    zn = z;
    out.outer_objective.push_back(rtc_objective(inst, g, m));
    out.outer_iterations = t + 1;
    if (change <= opts.outer_tol) {
      out.converged = true;
      break;
    }
  }
  out.g = std::move(g);
  out.m = std::move(m);
  out.z = std::move(z);
  return out;
}

}  // namespace aspadmm
