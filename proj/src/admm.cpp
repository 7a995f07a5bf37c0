#include "aspadmm/admm.hpp"

#include "aspadmm/error.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace aspadmm {

namespace {

void require_dim(const char* what, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw DimensionError(what, static_cast<std::size_t>(expected), static_cast<std::size_t>(got));
  }
}

double min_eig_dense(const Mat& m) {
  return extremal_eigenvalue(LinearMap::dense(m), Extremal::smallest);
}

}  // namespace

// ---------------------------------------------------------------- blocks

BlockSpec BlockSpec::make(Eigen::Index dim, std::optional<Mat> quad, Vec linear, ProxFunction prox,
                          std::optional<Metric> sigma) {
  BlockSpec b;
  b.dim = dim;
  if (quad) {
    require_dim("block quadratic rows", dim, quad->rows());
    require_dim("block quadratic cols", dim, quad->cols());
  }
  if (linear.size() == 0) linear = Vec::Zero(dim);
  require_dim("block linear term", dim, linear.size());
  b.linear = std::move(linear);
  b.prox = std::move(prox);
  if (sigma) {
    require_dim("block sigma", dim, sigma->dim());
    b.sigma = sigma->psd_certified() ? *sigma : Metric::certified(sigma->op());
  } else if (quad) {
    b.sigma = Metric::certified(LinearMap::dense(*quad));
  } else {
    b.sigma = Metric::zero(dim);
  }
  b.quad = std::move(quad);
  return b;
}

double BlockSpec::eval(const Vec& x) const {
  double v = prox.eval(x) - linear.dot(x);
  if (quad) v += 0.5 * x.dot(*quad * x);
  return v;
}

double BlockSpec::subgradient_distance(const Vec& x, const Vec& g) const {
  Vec smooth = -linear;
  if (quad) smooth += *quad * x;
  return prox.subgradient_distance(x, g - smooth);
}

void TwoBlockProblem::validate() const {
  require_dim("A codomain vs c", c.size(), a.codomain_dim());
  require_dim("B codomain vs c", c.size(), b.codomain_dim());
  require_dim("A domain vs f block", f.dim, a.domain_dim());
  require_dim("B domain vs g block", g.dim, b.domain_dim());
  require_dim("f linear term", f.dim, f.linear.size());
  require_dim("g linear term", g.dim, g.linear.size());
  require_dim("f sigma", f.dim, f.sigma.dim());
  require_dim("g sigma", g.dim, g.sigma.dim());
  if (!f.sigma.psd_certified()) throw SetupError("sigma_f is not certified PSD");
  if (!g.sigma.psd_certified()) throw SetupError("sigma_g is not certified PSD");
}

double TwoBlockProblem::objective(const Vec& x, const Vec& y) const { return f.eval(x) + g.eval(y); }

Vec TwoBlockProblem::residual(const Vec& x, const Vec& y) const {
  return a.apply(x) + b.apply(y) - c;
}

// -------------------------------------------------------------- schedule

ProximalSchedule ProximalSchedule::fixed(Metric m) {
  ProximalSchedule s;
  s.fixed_ = std::move(m);
  return s;
}

ProximalSchedule ProximalSchedule::rule(Rule r) {
  if (!r) throw Error("empty schedule rule");
  ProximalSchedule s;
  s.rule_ = std::move(r);
  return s;
}

Metric ProximalSchedule::at(int k, double penalty, Eigen::Index dim) const {
  if (rule_) {
    Metric m = rule_(k, penalty);
    require_dim("scheduled metric", dim, m.dim());
    return m;
  }
  if (fixed_.dim() == 0) return Metric::zero(dim);
  require_dim("fixed metric", dim, fixed_.dim());
  return fixed_;
}

Metric linearize_quadratic(const Mat& p) {
  require_dim("linearize_quadratic", p.rows(), p.cols());
  const double l = extremal_eigenvalue(LinearMap::dense(p), Extremal::largest);
  Mat s = -p;
  s.diagonal().array() += l * (1.0 + 1e-9);
  return Metric(LinearMap::dense(std::move(s)));
}

ProximalSchedule linearized_schedule(const LinearMap& a) {
  const Mat gram = a.gram().materialize();
  const double l = extremal_eigenvalue(LinearMap::dense(gram), Extremal::largest);
  Mat base = -gram;
  base.diagonal().array() += l * (1.0 + 1e-9);
  return ProximalSchedule::rule(
      [base = std::move(base)](int, double penalty) { return Metric(LinearMap::dense(penalty * base)); });
}

// ----------------------------------------------------------------- trace

void IterationTrace::append(const TraceRow& row) {
  if (!rows_.empty() && row.k <= rows_.back().k) {
    throw Error("trace rows must be appended in increasing k");
  }
  rows_.push_back(row);
}

void IterationTrace::write_csv(std::ostream& out) const {
  auto opt = [&out](const std::optional<double>& v) {
    out << ',';
    if (v) out << format_double(*v);
  };
  out << kTraceCsvHeader << '\n';
  for (const auto& r : rows_) {
    out << r.k << ',' << format_double(r.theta) << ',' << format_double(r.objective) << ','
        << format_double(r.feasibility) << ',' << format_double(r.kkt_residual);
    opt(r.dandiao);
    opt(r.bound_feas);
    opt(r.bound_obj_lo);
    opt(r.bound_obj_hi);
    out << ',' << format_double(r.time_ms) << '\n';
  }
}

// ---------------------------------------------------------- scheme pieces

double theta_next(double theta_prev, double tau) { return 1.0 / (1.0 - tau + 1.0 / theta_prev); }

Vec extrapolate(const Vec& y, const Vec& y_prev, double theta, double theta_prev) {
  require_dim("extrapolate", y.size(), y_prev.size());
  const double coef = theta * (1.0 - theta_prev) / theta_prev;
  if (coef == 0.0) return y;
  return y + coef * (y - y_prev);
}

namespace {

// Factorized form of min f(x) + ½⟨x, Mx⟩ - ⟨l, x⟩ for a fixed M.
struct PreparedSubproblem {
  Strategy strategy = Strategy::linear_solve;
  Mat h;
  Eigen::LLT<Mat> llt;
  double eta = 0.0;
};

PreparedSubproblem prepare_subproblem(const BlockSpec& block, const Mat& m, Strategy strategy) {
  require_dim("subproblem metric", block.dim, m.rows());
  PreparedSubproblem p;
  p.strategy = strategy;
  p.h = m;
  if (block.quad) p.h += *block.quad;
  switch (strategy) {
    case Strategy::linear_solve:
      if (block.prox.kind() != ProxFunction::Kind::zero) {
        throw SubproblemError("linear_solve needs a block without a nonsmooth part");
      }
      p.llt.compute(p.h);
      if (p.llt.info() != Eigen::Success) throw SubproblemError("subproblem operator is not positive definite");
      return p;
    case Strategy::prox_direct:
      if (block.quad) throw SubproblemError("prox_direct needs a block without a quadratic part");
      [[fallthrough]];
    case Strategy::prox_via_majorization: {
      const Eigen::Index n = p.h.rows();
      p.eta = n ? p.h.diagonal().mean() : 1.0;
      const double off = n ? (p.h - p.eta * Mat::Identity(n, n)).cwiseAbs().maxCoeff() : 0.0;
      if (off > 1e-9 * std::max(1.0, std::abs(p.eta))) throw SubproblemError("metric not proximable");
      if (!(p.eta > 0.0)) throw SubproblemError("subproblem operator is not positive definite");
      return p;
    }
  }
  return p;
}

Vec solve_prepared(const PreparedSubproblem& p, const BlockSpec& block, const Vec& l) {
  require_dim("subproblem linear term", block.dim, l.size());
  const Vec rhs = block.linear + l;
  if (p.strategy != Strategy::linear_solve) return block.prox.prox(rhs / p.eta, 1.0 / p.eta);
  Vec x = p.llt.solve(rhs);
  const double scale = rhs.norm();
  Vec res = p.h * x - rhs;
  if (res.norm() > 1e-10 * scale) {
    x -= p.llt.solve(res);
    res = p.h * x - rhs;
    if (res.norm() > 1e-10 * std::max(scale, 1e-300)) {
      throw SubproblemError("linear solve residual " + std::to_string(res.norm()) + " too large");
    }
  }
  return x;
}

}  // namespace

Vec solve_block_subproblem(const BlockSpec& block, const Mat& m, const Vec& l, Strategy strategy) {
  return solve_prepared(prepare_subproblem(block, m, strategy), block, l);
}

Vec solve_block_subproblem_anchor(const BlockSpec& block, const Metric& m, const Vec& r,
                                  Strategy strategy) {
  require_dim("subproblem anchor", m.dim(), r.size());
  return solve_block_subproblem(block, m.dense(), m.dense() * r, strategy);
}

double kkt_residual(const TwoBlockProblem& problem, const Vec& x, const Vec& y, const Vec& z) {
  if (!problem.f.prox.has_subgradient_distance() || !problem.g.prox.has_subgradient_distance()) {
    throw Error("kkt_residual: block kind has no subgradient residual");
  }
  const double feas = problem.residual(x, y).norm() / (1.0 + problem.c.norm());
  const double zn = 1.0 + z.norm();
  const double df = problem.f.subgradient_distance(x, problem.a.apply_adjoint(z)) / zn;
  const double dg = problem.g.subgradient_distance(y, problem.b.apply_adjoint(z)) / zn;
  return std::max({feas, df, dg});
}

double dandiao_quantity(const TwoBlockProblem& problem, const Metric& s, const Metric& t,
                        double lambda, double tau, const Iterate& cur, const Iterate& prev) {
  const double dz = (cur.z - prev.z).squaredNorm();
  const double dby = problem.b.apply(cur.y - prev.y).squaredNorm();
  return dz / (tau * lambda) + lambda * dby + metric_norm_sq(s, cur.x - prev.x) +
         metric_norm_sq(t, cur.y - prev.y);
}

// ----------------------------------------------------------- constants

std::optional<double> theorem1_m_factor(double tau, double lambda) {
  if (!(tau > 0.0 && tau < 1.0) || !(lambda > 0.0)) return std::nullopt;
  const double t = (tau - 1.0 - std::sqrt(tau * tau - tau + 1.0)) / (2.0 * tau * tau * lambda);
  return 2.0 * tau * lambda * t - (tau - 2.0) / tau;
}

BoundConstants theorem2_constants(const LinearMap& b, const Metric& s0, const Metric& t0, double lambda,
                                  double tau, const Iterate& init, const Reference& reference,
                                  double ref_objective) {
  const double lam = lambda;
  BoundConstants c;
  c.lambda = lam;
  c.tau = tau;
  c.reference_label = reference.label;
  c.z_star_norm = reference.z.norm();
  c.ref_objective = ref_objective;

  const double dz0 = (init.z - reference.z).norm();
  const double dby0 = b.apply(init.y - reference.y).norm();
  const double dxs = metric_norm_sq(s0, init.x - reference.x);
  const double dyt = metric_norm_sq(t0, init.y - reference.y);
  c.c3 = 2.0 / lam * dz0 + dby0 + (std::sqrt(dxs) + std::sqrt(dyt)) / std::sqrt(lam);
  c.c4 = dz0 * dz0 / (2.0 * lam) + lam / 2.0 * dby0 * dby0 + 0.5 * (dxs + dyt);
  return c;
}

BoundConstants bound_constants(const TwoBlockProblem& problem, const SolverConfig& config,
                               const Iterate& init, const Reference& reference,
                               const std::optional<Iterate>& iterate1) {
  require_dim("reference x", problem.f.dim, reference.x.size());
  require_dim("reference y", problem.g.dim, reference.y.size());
  require_dim("reference z", problem.c.size(), reference.z.size());
  const double lam = config.lambda, tau = config.tau;
  const Metric s0 = config.s_schedule.at(0, lam, problem.f.dim);
  const Metric t0 = config.t_schedule.at(0, lam, problem.g.dim);

  BoundConstants c = theorem2_constants(problem.b, s0, t0, lam, tau, init, reference,
                                        problem.objective(reference.x, reference.y));
  if (!config.s_schedule.varies() && !config.t_schedule.varies()) {
    c.c5 = c.c3;
    c.c6 = c.c4;
  }

  if (iterate1) {
    const double dz1 = (iterate1->z - reference.z).squaredNorm();
    const double dby1 = problem.b.apply(iterate1->y - reference.y).squaredNorm();
    const double dx1 = metric_norm_sq(s0, iterate1->x - reference.x);
    const double dy1 = metric_norm_sq(t0, iterate1->y - reference.y);
    const double dy01 = metric_norm_sq(t0, init.y - iterate1->y);
    c.c1 = dz1 / lam + lam * dby1 + dx1 + dy1 + dy01;
    if (const auto m = theorem1_m_factor(tau, lam)) {
      c.c2 = (dz1 / (tau * lam) + lam * dby1 + dx1 + dy1) / *m;
      c.c = std::max(*c.c1, *c.c2);
    } else if (tau == 1.0) {
      c.c = c.c1;
    }
  }
  return c;
}

BoundTriple bound_at(const BoundConstants& c, Theorem which, int big_k) {
  BoundTriple b;
  const double zs = c.z_star_norm;
  if (which == Theorem::theorem2) {
    const double den = 1.0 + big_k * (1.0 - c.tau);
    b.feas = 2.0 * c.c3 / den;
    b.obj_lo = -2.0 * c.c3 * zs / den;
    b.obj_hi = (2.0 * c.c3 * zs + c.c4) / den;
    return b;
  }
  if (!c.c || big_k < 1) return b;
  const double cc = *c.c;
  const double r = std::sqrt(cc / (c.tau * c.lambda * big_k));
  b.feas = r;
  b.obj_lo = -zs * r;
  b.obj_hi = zs * r + 4.0 * cc / std::sqrt(static_cast<double>(big_k)) + cc / (big_k * std::sqrt(c.tau));
  return b;
}

BoundReport verify_bounds(const IterationTrace& trace, const BoundConstants& constants,
                          Theorem which, double slack) {
  BoundReport rep;
  for (const auto& row : trace.rows()) {
    const BoundTriple b = bound_at(constants, which, row.k);
    if (!b.feas) continue;
    ++rep.checked_rows;
    if (row.feasibility > *b.feas + slack * (1.0 + *b.feas)) {
      rep.violations.push_back({row.k, "feasibility", row.feasibility, *b.feas});
    }
    const double gap = row.objective - constants.ref_objective;
    if (gap > *b.obj_hi + slack * (1.0 + std::abs(*b.obj_hi))) {
      rep.violations.push_back({row.k, "objective gap upper", gap, *b.obj_hi});
    }
    if (gap < *b.obj_lo - slack * (1.0 + std::abs(*b.obj_lo))) {
      rep.violations.push_back({row.k, "objective gap lower", gap, *b.obj_lo});
    }
  }
  return rep;
}

// ---------------------------------------------------------------- solver

namespace {

// Caches the factorization while the subproblem operator stays the same.
class BlockStep {
 public:
  BlockStep(const BlockSpec& block, const LinearMap& op, Strategy strategy)
      : block_(block), gram_(op.gram().materialize()), strategy_(strategy) {}

  Vec solve(double penalty, const Metric& prox_term, bool metric_varies, int k, const Vec& l) {
    if (!prepared_ || penalty != penalty_ || (metric_varies && k != k_)) {
      prepared_ = prepare_subproblem(block_, penalty * gram_ + prox_term.dense(), strategy_);
      penalty_ = penalty;
      k_ = k;
    }
    return solve_prepared(*prepared_, block_, l);
  }

 private:
  const BlockSpec& block_;
  Mat gram_;
  Strategy strategy_;
  std::optional<PreparedSubproblem> prepared_;
  double penalty_ = 0.0;
  int k_ = -1;
};

void check_setup(const TwoBlockProblem& problem, const SolverConfig& config, bool accelerated) {
  if (!(config.lambda > 0.0)) throw SetupError("lambda must be positive");
  if (accelerated) {
    if (!(config.tau > 0.0 && config.tau < 1.0)) throw SetupError("accelerated scheme needs tau in (0, 1)");
  } else if (!(config.tau > 0.0 && config.tau < (1.0 + std::sqrt(5.0)) / 2.0)) {
    throw SetupError("sPADMM needs tau in (0, (1 + sqrt 5)/2)");
  }
  if (config.max_iter < 0) throw SetupError("max_iter must be nonnegative");
  if (!config.check_conditions) return;

  const double lam = config.lambda;
  const Metric s0 = config.s_schedule.at(0, lam, problem.f.dim);
  const Metric t0 = config.t_schedule.at(0, lam, problem.g.dim);
  const double ef = min_eig_dense(problem.f.sigma.dense() + s0.dense() + lam * problem.a.gram().materialize());
  if (ef < 1e-10) {
    throw SetupError("Sigma_f + S0 + lambda A^T A is not positive definite (min eigenvalue " +
                     std::to_string(ef) + ")");
  }
  const double eg = min_eig_dense(problem.g.sigma.dense() + t0.dense() + lam * problem.b.gram().materialize());
  if (eg < 1e-10) {
    throw SetupError("Sigma_g + T0 + lambda B^T B is not positive definite (min eigenvalue " +
                     std::to_string(eg) + ")");
  }

  if (!accelerated) return;
  auto check_schedule = [&](const ProximalSchedule& sched, const BlockSpec& blk, const char* name) {
    if (!sched.varies()) return;
    double theta_prev = 1.0 / config.tau;
    double theta = theta_next(theta_prev, config.tau);
    for (int k = 0; k < config.schedule_check_horizon; ++k) {
      const double th1 = theta_next(theta, config.tau);
      const double p0 = config.grow_penalty ? lam / theta : lam;
      const double p1 = config.grow_penalty ? lam / th1 : lam;
      const Mat diff = sched.at(k + 1, p1, blk.dim).dense() - sched.at(k, p0, blk.dim).dense();
      const PsdCertificate cert = check_psd_relative(LinearMap::dense(blk.sigma.dense() - diff));
      if (!cert.ok) {
        throw SetupError(std::string("schedule condition Sigma ⪰ ") + name + "^{k+1} - " + name +
                         "^k fails at k = " + std::to_string(k) + " (min eigenvalue " +
                         std::to_string(cert.min_eig) +
                         "); use a larger tau or a strongly convex block");
      }
      theta = th1;
    }
  };
  check_schedule(config.s_schedule, problem.f, "S");
  check_schedule(config.t_schedule, problem.g, "T");
}

SolveResult run_two_block(const TwoBlockProblem& problem, const SolverConfig& config,
                          const std::optional<Iterate>& init, bool accelerated) {
  problem.validate();
  check_setup(problem, config, accelerated);
  const auto start = std::chrono::steady_clock::now();
  const double lam = config.lambda, tau = config.tau;
  const Eigen::Index nx = problem.f.dim, ny = problem.g.dim, m = problem.c.size();

  Iterate cur;
  if (init) {
    require_dim("init x", nx, init->x.size());
    require_dim("init y", ny, init->y.size());
    require_dim("init z", m, init->z.size());
    cur = *init;
  } else {
    cur = {Vec::Zero(nx), Vec::Zero(ny), Vec::Zero(m)};
  }
  const Iterate first = cur;

  SolveResult out;
  if (config.keep_history) out.history.push_back(cur);

  std::optional<Theorem> theorem;
  if (config.reference) {
    if (accelerated) {
      out.constants = bound_constants(problem, config, first, *config.reference);
      theorem = Theorem::theorem2;
    } else if (tau <= 1.0) {
      theorem = Theorem::theorem1;  // constants follow after iterate 1
    }
  }

  const bool kkt_ok = problem.f.prox.has_subgradient_distance() && problem.g.prox.has_subgradient_distance();
  BlockStep xstep(problem.f, problem.a, config.x_strategy);
  BlockStep ystep(problem.g, problem.b, config.y_strategy);

  SolverState& st = out.state;
  st.theta_prev = accelerated ? 1.0 / tau : 1.0;
  st.theta = 1.0;
  Vec y_prev = cur.y;

  for (int k = 0; k < config.max_iter; ++k) {
    double theta = 1.0, theta_prev = st.theta_prev;
    Vec v = cur.y;
    if (accelerated) {
      theta = theta_next(theta_prev, tau);
      v = extrapolate(cur.y, y_prev, theta, theta_prev);
    }
    const double rho = accelerated && config.grow_penalty ? lam / theta : lam;
    const Metric s = config.s_schedule.at(k, rho, nx);
    const Metric t = config.t_schedule.at(k, rho, ny);

    Iterate next;
    try {
      const Vec lx = problem.a.apply_adjoint(cur.z + rho * (problem.c - problem.b.apply(v))) + s.dense() * cur.x;
      next.x = xstep.solve(rho, s, config.s_schedule.varies(), k, lx);
      const Vec ly = problem.b.apply_adjoint(cur.z + rho * (problem.c - problem.a.apply(next.x))) + t.dense() * cur.y;
      next.y = ystep.solve(rho, t, config.t_schedule.varies(), k, ly);
    } catch (const SubproblemError& e) {
      throw SubproblemError("iteration " + std::to_string(k) + ": " + e.what());
    }
    const Vec r = problem.residual(next.x, next.y);
    next.z = cur.z - tau * lam * r;

    if (theorem == Theorem::theorem1 && k == 0) {
      out.constants = bound_constants(problem, config, first, *config.reference, next);
    }

    TraceRow row;
    row.k = k;
    row.theta = theta;
    row.objective = problem.objective(next.x, next.y);
    row.feasibility = r.norm();
    row.kkt_residual = kkt_ok ? kkt_residual(problem, next.x, next.y, next.z) : std::nan("");
    row.dandiao = dandiao_quantity(problem, s, t, lam, tau, next, cur);
    if (theorem && out.constants) {
      const BoundTriple b = bound_at(*out.constants, *theorem, k);
      row.bound_feas = b.feas;
      row.bound_obj_lo = b.obj_lo;
      row.bound_obj_hi = b.obj_hi;
    }
    row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.trace.append(row);

    const Iterate prev = std::move(cur);
    y_prev = prev.y;
    cur = std::move(next);
    st.theta_prev = theta;
    st.theta = theta;
    st.v = std::move(v);
    out.iterations = k + 1;
    if (config.keep_history) out.history.push_back(cur);

    const bool kkt_done = config.stop_on_kkt && kkt_ok && row.kkt_residual <= config.tol_kkt;
    const bool rule_done = config.stop && config.stop(k, cur, prev, rho);
    if (kkt_done || rule_done) {
      out.converged = true;
      break;
    }
  }

  st.k = out.iterations;
  st.x = cur.x;
  st.y = cur.y;
  st.z = cur.z;
  st.y_prev = y_prev;
  return out;
}

}  // namespace

SolveResult run_spadmm(const TwoBlockProblem& problem, const SolverConfig& config,
                       const std::optional<Iterate>& init) {
  if (config.mode != Mode::spadmm) throw SetupError("run_spadmm called with an accelerated config");
  return run_two_block(problem, config, init, false);
}

SolveResult run_aspadmm(const TwoBlockProblem& problem, const SolverConfig& config,
                        const std::optional<Iterate>& init) {
  if (config.mode != Mode::aspadmm) throw SetupError("run_aspadmm called with an sPADMM config");
  return run_two_block(problem, config, init, true);
}

}  // namespace aspadmm
