#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"

#include "apps_internal.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>
#include <string>

namespace aspadmm {

namespace {

void check_lasso_shape(const LassoInstance& inst) {
  if (inst.a.rows() == 0 || inst.a.cols() == 0) throw Error("Lasso instance has an empty matrix");
  if (inst.b.size() != inst.a.rows()) throw DimensionError("Lasso b", inst.a.rows(), inst.b.size());
  if (!(inst.lambda > 0.0)) throw Error("Lasso lambda must be positive");
}

double gram_lambda_max(const Mat& a) {
  // The smaller Gram matrix has the same nonzero spectrum.
  const Mat g = a.rows() <= a.cols() ? Mat(a * a.transpose()) : Mat(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

LassoInstance gen_lasso_certified(Eigen::Index m, Eigen::Index n, double sparsity, std::uint64_t seed,
                                  double lambda) {
  if (m <= 0 || n <= 0) throw Error("gen_lasso_certified: dimensions must be positive");
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw Error("gen_lasso_certified: sparsity must lie in [0, 1]");
  if (!(lambda > 0.0)) throw Error("gen_lasso_certified: lambda must be positive");
  const auto k = static_cast<Eigen::Index>(std::llround(sparsity * static_cast<double>(n)));

  for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
    detail::Rng rng(seed, attempt);
    Mat a = rng.normal_mat(m, n) / std::sqrt(static_cast<double>(m));
    Vec w = rng.normal_vec(m);
    const auto support = rng.choose(n, k);
    std::vector<char> on(static_cast<std::size_t>(n), 0);
    for (Eigen::Index j : support) on[static_cast<std::size_t>(j)] = 1;

    // Shift the drawn dual seed by the least-norm correction that puts (Aᵀw)_S on the
    // sign pattern it already has, so no column needs to be blown up.
    if (k > 0) {
      Mat as(m, k);
      Vec sgn(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        as.col(i) = a.col(support[static_cast<std::size_t>(i)]);
        sgn(i) = as.col(i).dot(w) >= 0.0 ? 1.0 : -1.0;
      }
      Eigen::LDLT<Mat> gram(as.transpose() * as);
      if (gram.info() != Eigen::Success || gram.vectorD().minCoeff() < 1e-10) continue;
      w += as * gram.solve(sgn - as.transpose() * w);
    }
    const Vec v = a.transpose() * w;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!on[static_cast<std::size_t>(j)] && std::abs(v(j)) > 0.9) a.col(j) *= rng.uniform(0.0, 0.9) / std::abs(v(j));
    }
    const Vec s = a.transpose() * w;
    Vec x = Vec::Zero(n);
    for (Eigen::Index j : support) x(j) = (s(j) > 0.0 ? 1.0 : -1.0) * rng.uniform(1.0, 2.0);

    LassoInstance inst;
    inst.a = std::move(a);
    inst.b = inst.a * x + lambda * w;
    inst.lambda = lambda;
    inst.seed = seed;
    const Vec z = inst.a.transpose() * (inst.a * x - inst.b);
    inst.certificate = LassoCertificate{x, z};
    if (lasso_kkt_residual(inst, x) <= 1e-12) return inst;
  }
  throw Error("gen_lasso_certified: no usable draw in 10 attempts (seed " + std::to_string(seed) + ")");
}

LassoInstance gen_lasso_trend(Eigen::Index m, Eigen::Index n, std::uint64_t seed, double density,
                              double noise) {
  if (m <= 0 || n <= 0) throw Error("gen_lasso_trend: dimensions must be positive");
  if (!(density > 0.0 && density <= 1.0)) throw Error("gen_lasso_trend: density must lie in (0, 1]");
  detail::Rng rng(seed);
  Mat a = rng.normal_mat(m, n);
  for (Eigen::Index j = 0; j < n; ++j) a.col(j).normalize();
  const auto k = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(density * static_cast<double>(n))));
  Vec x = Vec::Zero(n);
  for (Eigen::Index j : rng.choose(n, k)) x(j) = rng.normal();
  LassoInstance inst;
  inst.b = a * x + noise * rng.normal_vec(m);
  inst.a = std::move(a);
  inst.lambda = 0.1 * (inst.a.transpose() * inst.b).cwiseAbs().maxCoeff();
  inst.seed = seed;
  return inst;
}

double lasso_objective(const LassoInstance& inst, const Vec& x) {
  check_lasso_shape(inst);
  if (x.size() != inst.a.cols()) throw DimensionError("Lasso x", inst.a.cols(), x.size());
  return 0.5 * (inst.a * x - inst.b).squaredNorm() + inst.lambda * x.lpNorm<1>();
}

double lasso_kkt_residual(const LassoInstance& inst, const Vec& x) {
  check_lasso_shape(inst);
  if (x.size() != inst.a.cols()) throw DimensionError("Lasso x", inst.a.cols(), x.size());
  const Vec g = inst.a.transpose() * (inst.a * x - inst.b);
  return ProxFunction::l1(inst.lambda).subgradient_distance(x, -g);
}

TwoBlockProblem lasso_problem(const LassoInstance& inst) {
  check_lasso_shape(inst);
  const Eigen::Index n = inst.a.cols();
  TwoBlockProblem p;
  p.a = LinearMap::identity(n);
  p.b = LinearMap::identity(n, -1.0);
  p.c = Vec::Zero(n);
  p.f = BlockSpec::make(n, Mat(inst.a.transpose() * inst.a), inst.a.transpose() * inst.b, ProxFunction::zero());
  p.g = BlockSpec::make(n, std::nullopt, Vec::Zero(n), ProxFunction::l1(inst.lambda));
  return p;
}

Metric lasso_proximal_term(const LassoInstance& inst) {
  check_lasso_shape(inst);
  const Eigen::Index n = inst.a.cols();
  const Mat s = gram_lambda_max(inst.a) * Mat::Identity(n, n) - inst.a.transpose() * inst.a;
  return Metric::certified(LinearMap::dense(s));
}

LassoResult lasso_run(const LassoInstance& inst, const LassoOptions& opts) {
  check_lasso_shape(inst);
  if (!(opts.beta > 0.0)) throw SetupError("Lasso beta must be positive");
  if (!(opts.tau > 0.0 && opts.tau < 1.0)) throw SetupError("Lasso tau must lie in (0, 1)");
  if (!(opts.tol_abs >= 0.0 && opts.tol_rel >= 0.0)) throw SetupError("Lasso tolerances must be nonnegative");

  const TwoBlockProblem problem = lasso_problem(inst);
  const Eigen::Index n = inst.a.cols();
  const Mat ata = inst.a.transpose() * inst.a;
  const Vec atb = inst.a.transpose() * inst.b;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  SolverConfig cfg;
  cfg.lambda = opts.beta;
  cfg.tau = opts.tau;
  cfg.mode = opts.arm == LassoArm::spadmm ? Mode::spadmm : Mode::aspadmm;
  cfg.grow_penalty = opts.arm == LassoArm::aspadmm_growing;
  cfg.s_schedule = ProximalSchedule::fixed(lasso_proximal_term(inst));
  cfg.x_strategy = Strategy::prox_via_majorization;
  cfg.y_strategy = Strategy::prox_direct;
  cfg.max_iter = opts.max_iter;
  cfg.stop_on_kkt = false;
  if (opts.use_certificate && inst.certificate) {
    cfg.reference = Reference{inst.certificate->x, inst.certificate->x, inst.certificate->z, "certified"};
  }

  // Residual pair of the stopping test, kept for the result.
  struct Residuals {
    double r = 0, s = 0, eps_pri = 0, eps_dual = 0;
  };
  auto last = std::make_shared<Residuals>();
  cfg.stop = [=](int, const Iterate& cur, const Iterate&, double) {
    const Vec mu = -cur.z;
    last->r = (cur.y - cur.x).norm();
    last->s = (ata * cur.x - atb + mu).norm();
    last->eps_pri = sqrt_n * opts.tol_abs + opts.tol_rel * std::max(cur.x.norm(), cur.y.norm());
    last->eps_dual = sqrt_n * opts.tol_abs + opts.tol_rel * mu.norm();
    return last->r <= last->eps_pri && last->s <= last->eps_dual;
  };

  SolveResult sr = cfg.mode == Mode::spadmm ? run_spadmm(problem, cfg) : run_aspadmm(problem, cfg);

  LassoResult out;
  out.x = sr.state.x;
  out.y = sr.state.y;
  out.mu = -sr.state.z;
  out.iterations = sr.iterations;
  out.converged = sr.converged;
  out.objective = lasso_objective(inst, out.y);
  out.r_norm = last->r;
  out.s_norm = last->s;
  out.eps_pri = last->eps_pri;
  out.eps_dual = last->eps_dual;
  out.trace = std::move(sr.trace);
  out.constants = std::move(sr.constants);
  return out;
}

}  // namespace aspadmm
