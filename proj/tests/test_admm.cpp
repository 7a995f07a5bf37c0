#include "aspadmm/admm.hpp"
#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <sstream>

using namespace aspadmm;
using testutil::randn;

namespace {

Mat spd(Eigen::Index n, std::uint64_t seed, double shift = 0.5) {
  const Mat m = randn(n, n, seed);
  return m * m.transpose() + shift * Mat::Identity(n, n);
}

// min ½xᵀPx - qᵀx + ½yᵀQy - dᵀy  s.t.  Ax + By = c
struct QuadToy {
  TwoBlockProblem problem;
  Mat p, q, a, b;
  Vec qv, dv, c;

  explicit QuadToy(std::uint64_t seed, Eigen::Index n = 2) {
    p = spd(n, seed);
    q = spd(n, seed + 1);
    a = randn(n, n, seed + 2);
    b = randn(n, n, seed + 3);
    qv = randn(n, seed + 4);
    dv = randn(n, seed + 5);
    c = randn(n, seed + 6);
    problem.a = LinearMap::dense(a);
    problem.b = LinearMap::dense(b);
    problem.c = c;
    problem.f = BlockSpec::make(n, p, qv, ProxFunction::zero());
    problem.g = BlockSpec::make(n, q, dv, ProxFunction::zero());
  }

  // Dense KKT solve: Px - q - Aᵀz = 0, Qy - d - Bᵀz = 0, Ax + By = c.
  Iterate kkt() const {
    const Eigen::Index n = p.rows();
    Mat k = Mat::Zero(3 * n, 3 * n);
    k.block(0, 0, n, n) = p;
    k.block(0, 2 * n, n, n) = -a.transpose();
    k.block(n, n, n, n) = q;
    k.block(n, 2 * n, n, n) = -b.transpose();
    k.block(2 * n, 0, n, n) = a;
    k.block(2 * n, n, n, n) = b;
    Vec rhs(3 * n);
    rhs << qv, dv, c;
    const Vec s = k.fullPivLu().solve(rhs);
    return {s.head(n), s.segment(n, n), s.tail(n)};
  }
};

SolverConfig quad_config(Mode mode, double tau) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.tau = tau;
  cfg.lambda = 1.3;
  cfg.x_strategy = Strategy::linear_solve;
  cfg.y_strategy = Strategy::linear_solve;
  return cfg;
}

}  // namespace

TEST_SUITE("admm_core") {

TEST_CASE("theta schedule against the closed form") {
  double th = theta_next(1.0 / 0.5, 0.5);
  CHECK(th == doctest::Approx(1.0));
  th = theta_next(th, 0.5);
  CHECK(th == doctest::Approx(2.0 / 3.0));
  th = theta_next(th, 0.5);
  CHECK(th == doctest::Approx(0.5));

  double t = 1.0 / 0.95;
  for (int k = 0; k <= 20; ++k) t = theta_next(t, 0.95);
  CHECK(t == doctest::Approx(0.5).epsilon(1e-13));

  const double tau = 1.0 - 1e-12;
  double s = 1.0 / tau;
  for (int k = 0; k < 5; ++k) s = theta_next(s, tau);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));

  double prev = 1.0 / 0.9, cur = theta_next(prev, 0.9);
  for (int k = 0; k < 50; ++k) {
    const double next = theta_next(cur, 0.9);
    CHECK(1.0 / next - 1.0 / cur == doctest::Approx(1.0 - 0.9).epsilon(1e-12));
    cur = next;
  }
}

TEST_CASE("extrapolation coefficient") {
  const Vec y = (Vec(2) << 1, 2).finished(), yp = (Vec(2) << 0, 1).finished();
  CHECK(extrapolate(y, y, 0.7, 0.8) == y);
  CHECK(extrapolate(y, yp, 0.7, 1.0) == y);
  // k = 0, τ = 0.5: θ⁰ = 1, θ_prev = 2, coefficient 1·(1 - 2)/2 = -0.5.
  const Vec v = extrapolate(y, yp, 1.0, 2.0);
  CHECK(v(0) == doctest::Approx(0.5));
  CHECK(v(1) == doctest::Approx(1.5));
}

TEST_CASE("block subproblem closed forms") {
  const Vec r = (Vec(2) << 3, -0.2).finished();
  const BlockSpec zero = BlockSpec::make(2, std::nullopt, Vec::Zero(2), ProxFunction::zero());
  CHECK((solve_block_subproblem_anchor(zero, Metric(LinearMap::dense(spd(2, 1))), r, Strategy::linear_solve) - r).norm() < 1e-12);

  const Vec d = (Vec(2) << 1, 5).finished();
  const BlockSpec half = BlockSpec::make(2, Mat::Identity(2, 2), d, ProxFunction::zero());
  CHECK((solve_block_subproblem_anchor(half, Metric::scaled_identity(2, 1.0), r, Strategy::linear_solve) - (r + d) / 2).norm() < 1e-12);

  const BlockSpec l1 = BlockSpec::make(2, std::nullopt, Vec::Zero(2), ProxFunction::l1(1.0));
  const Vec p = solve_block_subproblem_anchor(l1, Metric::scaled_identity(2, 2.0), r, Strategy::prox_direct);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double ri = r(i);
    const double oracle = testutil::grid_argmin([&](double x) { return std::abs(x) + (x - ri) * (x - ri); }, -5, 5);
    CHECK(p(i) == doctest::Approx(oracle).epsilon(1e-7));
  }
  CHECK(p(0) == doctest::Approx(2.5));
  CHECK(p(1) == 0.0);

  CHECK_THROWS_AS(solve_block_subproblem(l1, spd(2, 3), r, Strategy::prox_direct), SubproblemError);
}

TEST_CASE("one sPADMM iteration equals the dense subproblem solves") {
  QuadToy toy(11);
  SolverConfig cfg = quad_config(Mode::spadmm, 1.2);
  const Mat s = 0.3 * Mat::Identity(2, 2), t = spd(2, 40, 0.1);
  cfg.s_schedule = ProximalSchedule::fixed(Metric(LinearMap::dense(s)));
  cfg.t_schedule = ProximalSchedule::fixed(Metric(LinearMap::dense(t)));
  cfg.max_iter = 1;
  cfg.keep_history = true;
  const Iterate init{randn(2, 50), randn(2, 51), randn(2, 52)};
  const SolveResult res = run_spadmm(toy.problem, cfg, init);
  const double lam = cfg.lambda;

  const Vec x1 = (toy.p + lam * toy.a.transpose() * toy.a + s)
                     .ldlt()
                     .solve(toy.qv + toy.a.transpose() * init.z - lam * toy.a.transpose() * (toy.b * init.y - toy.c) + s * init.x);
  const Vec y1 = (toy.q + lam * toy.b.transpose() * toy.b + t)
                     .ldlt()
                     .solve(toy.dv + toy.b.transpose() * init.z - lam * toy.b.transpose() * (toy.a * x1 - toy.c) + t * init.y);
  const Vec z1 = init.z - cfg.tau * lam * (toy.a * x1 + toy.b * y1 - toy.c);
  REQUIRE(res.history.size() == 2);
  CHECK((res.history[1].x - x1).norm() < 1e-10);
  CHECK((res.history[1].y - y1).norm() < 1e-10);
  CHECK((res.history[1].z - z1).norm() < 1e-10);
}

TEST_CASE("a KKT point is a fixed point of both schemes") {
  QuadToy toy(21, 3);
  const Iterate star = toy.kkt();
  CHECK(kkt_residual(toy.problem, star.x, star.y, star.z) <= 1e-10);
  for (Mode mode : {Mode::spadmm, Mode::aspadmm}) {
    SolverConfig cfg = quad_config(mode, 0.9);
    cfg.max_iter = 5;
    cfg.stop_on_kkt = false;
    const SolveResult res = mode == Mode::spadmm ? run_spadmm(toy.problem, cfg, star) : run_aspadmm(toy.problem, cfg, star);
    CHECK((res.state.x - star.x).norm() < 1e-10);
    CHECK((res.state.y - star.y).norm() < 1e-10);
    CHECK((res.state.z - star.z).norm() < 1e-10);
    for (const auto& row : res.trace.rows()) CHECK(row.feasibility < 1e-10);
    BoundConstants c = bound_constants(toy.problem, cfg, star, Reference{star.x, star.y, star.z});
    CHECK(c.c3 == 0.0);
    CHECK(c.c4 == 0.0);
    CHECK(verify_bounds(res.trace, c, Theorem::theorem2).certified());
  }
}

TEST_CASE("kkt residual cases") {
  TwoBlockProblem zero;
  zero.a = LinearMap::identity(2);
  zero.b = LinearMap::identity(2);
  zero.c = Vec::Zero(2);
  zero.f = BlockSpec::make(2, std::nullopt, Vec::Zero(2), ProxFunction::zero());
  zero.g = BlockSpec::make(2, std::nullopt, Vec::Zero(2), ProxFunction::zero());
  CHECK(kkt_residual(zero, Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)) == 0.0);

  QuadToy toy(31);
  const Iterate star = toy.kkt();
  const double r = kkt_residual(toy.problem, star.x, star.y, star.z + Vec::Ones(2));
  CHECK(r > 0.0);
  CHECK(toy.problem.residual(star.x, star.y).norm() < 1e-12);

  const LassoInstance inst = gen_lasso_certified(20, 50, 0.1, 3);
  const Vec& xs = inst.certificate->x;
  CHECK(kkt_residual(lasso_problem(inst), xs, xs, inst.certificate->z) <= 1e-10);
}

TEST_CASE("bound constants by hand") {
  TwoBlockProblem p;
  p.a = LinearMap::identity(2);
  p.b = LinearMap::identity(2, -1.0);
  p.c = Vec::Zero(2);
  p.f = BlockSpec::make(2, Mat::Identity(2, 2), Vec::Zero(2), ProxFunction::zero());
  p.g = BlockSpec::make(2, std::nullopt, Vec::Zero(2), ProxFunction::l1(1.0));
  SolverConfig cfg;
  cfg.lambda = 1.0;
  cfg.tau = 0.9;
  const Reference ref{Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)};
  const Iterate init{Vec::Zero(2), Vec::Zero(2), (Vec(2) << 1, 0).finished()};
  const BoundConstants c = bound_constants(p, cfg, init, ref);
  CHECK(c.c3 == doctest::Approx(2.0));
  CHECK(c.c4 == doctest::Approx(0.5));
  CHECK(c.c5 == c.c3);
  CHECK(c.c6 == c.c4);

  const BoundConstants same = bound_constants(p, cfg, Iterate{Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)}, ref);
  CHECK(same.c3 == 0.0);
  CHECK(same.c4 == 0.0);

  const auto m = theorem1_m_factor(0.5, 1.0);
  REQUIRE(m);
  const double t = (-0.5 - std::sqrt(0.75)) / 0.5;
  CHECK(*m == doctest::Approx(2 * 0.5 * t + 3));
  CHECK(*m > 0.0);
  CHECK(*m < 1.0);
  CHECK_FALSE(theorem1_m_factor(1.0, 1.0));
}

TEST_CASE("certified Lasso: bounds hold and corrupted traces are caught") {
  const LassoInstance inst = gen_lasso_certified(20, 50, 0.1, 5);
  const TwoBlockProblem problem = lasso_problem(inst);
  const Reference ref{inst.certificate->x, inst.certificate->x, inst.certificate->z};
  SolverConfig cfg;
  cfg.lambda = 1.0;
  cfg.tau = 0.9;
  cfg.s_schedule = ProximalSchedule::fixed(lasso_proximal_term(inst));
  cfg.x_strategy = Strategy::prox_via_majorization;
  cfg.max_iter = 500;
  cfg.stop_on_kkt = false;
  cfg.reference = ref;
  const SolveResult res = run_aspadmm(problem, cfg);
  REQUIRE(res.constants);
  const BoundReport rep = verify_bounds(res.trace, *res.constants, Theorem::theorem2);
  CHECK(rep.certified());
  CHECK(rep.checked_rows == 500);

  IterationTrace bad;
  for (TraceRow row : res.trace.rows()) {
    row.feasibility = 2.0 * *bound_at(*res.constants, Theorem::theorem2, row.k).feas;
    bad.append(row);
  }
  CHECK_FALSE(verify_bounds(bad, *res.constants, Theorem::theorem2).certified());

  std::ostringstream csv;
  res.trace.write_csv(csv);
  const std::string text = csv.str();
  CHECK(text.rfind(kTraceCsvHeader, 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 501);
}

TEST_CASE("sPADMM on the certified Lasso reaches the certificate objective") {
  for (std::uint64_t seed : {5, 6, 7}) {
    const LassoInstance inst = gen_lasso_certified(20, 50, 0.1, seed);
    SolverConfig cfg;
    cfg.mode = Mode::spadmm;
    cfg.tau = 1.0;
    cfg.s_schedule = ProximalSchedule::fixed(lasso_proximal_term(inst));
    cfg.x_strategy = Strategy::prox_via_majorization;
    cfg.tol_kkt = 1e-10;
    cfg.max_iter = 50000;
    const SolveResult res = run_spadmm(lasso_problem(inst), cfg);
    const double fstar = lasso_objective(inst, inst.certificate->x);
    CHECK(std::abs(lasso_objective(inst, res.state.y) - fstar) <= 1e-6 * fstar);
  }
}

TEST_CASE("dandiao quantity") {
  QuadToy toy(41);
  const Metric s = Metric::scaled_identity(2, 0.4), t = Metric(LinearMap::dense(spd(2, 42, 0.2)));
  const Iterate a{randn(2, 43), randn(2, 44), randn(2, 45)};
  const Iterate b{randn(2, 46), randn(2, 47), randn(2, 48)};
  CHECK(dandiao_quantity(toy.problem, s, t, 1.3, 0.8, a, a) == 0.0);
  const double hand = (a.z - b.z).squaredNorm() / (0.8 * 1.3) + 1.3 * (toy.b * (a.y - b.y)).squaredNorm() +
                      0.4 * (a.x - b.x).squaredNorm() + (a.y - b.y).dot(t.dense() * (a.y - b.y));
  CHECK(dandiao_quantity(toy.problem, s, t, 1.3, 0.8, a, b) == doctest::Approx(hand).epsilon(1e-12));

  const LassoInstance inst = gen_lasso_certified(20, 50, 0.1, 7);
  SolverConfig cfg;
  cfg.mode = Mode::spadmm;
  cfg.tau = 0.7;
  cfg.s_schedule = ProximalSchedule::fixed(lasso_proximal_term(inst));
  cfg.x_strategy = Strategy::prox_via_majorization;
  cfg.max_iter = 300;
  cfg.stop_on_kkt = false;
  const SolveResult res = run_spadmm(lasso_problem(inst), cfg);
  const auto& rows = res.trace.rows();
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(*rows[i].dandiao <= *rows[i - 1].dandiao + 1e-10);
}

TEST_CASE("setup checks") {
  QuadToy toy(51);
  SolverConfig cfg = quad_config(Mode::aspadmm, 1.0);
  CHECK_THROWS_AS(run_aspadmm(toy.problem, cfg), SetupError);
  cfg.tau = 0.9;
  cfg.mode = Mode::spadmm;
  CHECK_THROWS_AS(run_aspadmm(toy.problem, cfg), SetupError);
  cfg.tau = 1.7;
  CHECK_THROWS_AS(run_spadmm(toy.problem, cfg), SetupError);

  // Σ_g + T + λBᵀB singular: a linear y-block with a rank-deficient B.
  TwoBlockProblem p = toy.problem;
  p.b = LinearMap::dense((Mat(2, 2) << 1, 0, 0, 0).finished());
  p.g = BlockSpec::make(2, std::nullopt, Vec::Zero(2), ProxFunction::l1(1.0));
  SolverConfig c2 = quad_config(Mode::spadmm, 1.0);
  c2.y_strategy = Strategy::prox_direct;
  CHECK_THROWS_AS(run_spadmm(p, c2), SetupError);

  // A growing linearized metric on a block that is not strongly convex.
  const LassoInstance inst = gen_lasso_certified(10, 20, 0.1, 8);
  TwoBlockProblem lp = lasso_problem(inst);
  lp.f = BlockSpec::make(20, inst.a.transpose() * inst.a, inst.a.transpose() * inst.b, ProxFunction::zero(), Metric::zero(20));
  SolverConfig c3;
  c3.tau = 0.9;
  c3.s_schedule = linearized_schedule(LinearMap::dense(inst.a));
  c3.x_strategy = Strategy::prox_via_majorization;
  CHECK_THROWS_AS(run_aspadmm(lp, c3), SetupError);
}

TEST_CASE("trace rows must increase") {
  IterationTrace tr;
  TraceRow r;
  r.k = 3;
  tr.append(r);
  CHECK_THROWS(tr.append(r));
}

}  // TEST_SUITE
