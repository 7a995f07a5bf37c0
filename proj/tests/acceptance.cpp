// Acceptance harness: one PASS/FAIL line per criterion, exit status = number of failures.

#include "aspadmm/apps.hpp"
#include "aspadmm/sgs.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace aspadmm;
using testutil::randn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Certified Lasso setup shared by the bound criteria.
SolverConfig certified_config(const LassoInstance& inst, Mode mode, double tau, int iters) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.lambda = 1.0;
  cfg.tau = tau;
  cfg.s_schedule = ProximalSchedule::fixed(lasso_proximal_term(inst));
  cfg.x_strategy = Strategy::prox_via_majorization;
  cfg.y_strategy = Strategy::prox_direct;
  cfg.max_iter = iters;
  cfg.stop_on_kkt = false;
  cfg.reference = Reference{inst.certificate->x, inst.certificate->x, inst.certificate->z};
  return cfg;
}

std::vector<LassoInstance> certified_instances() {
  std::vector<LassoInstance> out;
  for (std::uint64_t seed = 0; seed < 10; ++seed) out.push_back(gen_lasso_certified(20, 50, 0.1, seed));
  return out;
}

Outcome theta_schedule() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double tau : {0.5, 0.9, 0.95, 0.99}) {
    double prev = 1.0 / tau;
    for (int k = 0; k <= 10000; ++k) {
      const double th = theta_next(prev, tau);
      worst = std::max(worst, std::abs(th - 1.0 / (k * (1.0 - tau) + 1.0)));
      prev = th;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 1.0, fmt("max |recursive - closed form| = %.2e over k <= 1e4; %.3f s", worst, secs)};
}

Outcome bound_certificate(const std::vector<LassoInstance>& insts, Theorem which) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t violations = 0;
  int rows = 0;
  const bool t2 = which == Theorem::theorem2;
  for (const auto& inst : insts) {
    const SolverConfig cfg = certified_config(inst, t2 ? Mode::aspadmm : Mode::spadmm, t2 ? 0.9 : 1.0, 500);
    const SolveResult r = t2 ? run_aspadmm(lasso_problem(inst), cfg) : run_spadmm(lasso_problem(inst), cfg);
    const BoundReport rep = verify_bounds(r.trace, *r.constants, which, 1e-8);
    violations += rep.violations.size();
    rows += rep.checked_rows;
  }
  // The sPADMM bound is vacuous at K = 0, so that row is not checked.
  const int expected = t2 ? 5000 : 4990;
  const double secs = seconds_since(t0);
  return {violations == 0 && rows == expected && secs < 10.0,
          fmt("%zu violations over %d checked rows (10 instances x 500 iterations); %.2f s", violations, rows, secs)};
}

Outcome dandiao_monotone(const std::vector<LassoInstance>& insts) {
  double worst = -std::numeric_limits<double>::infinity();
  int runs = 0;
  for (double tau : {0.5, 1.0}) {
    for (const auto& inst : insts) {
      SolverConfig cfg = certified_config(inst, Mode::spadmm, tau, 500);
      cfg.reference.reset();
      const SolveResult r = run_spadmm(lasso_problem(inst), cfg);
      const auto& rows = r.trace.rows();
      for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, *rows[i].dandiao - *rows[i - 1].dandiao);
      ++runs;
    }
  }
  return {worst <= 1e-10, fmt("largest increase %.2e over %d sPADMM runs (tau 0.5, 1.0)", worst, runs)};
}

MultiBlockProblem random_multiblock(std::size_t p, std::size_t q, std::uint64_t seed) {
  MultiBlockProblem pb;
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<int> dim(1, 3);
  for (std::size_t i = 0; i < p; ++i) pb.x_dims.push_back(dim(eng));
  for (std::size_t j = 0; j < q; ++j) pb.y_dims.push_back(dim(eng));
  const Eigen::Index m = 4;
  std::uint64_t s = seed * 100;
  for (Eigen::Index d : pb.x_dims) pb.a_blocks.push_back(LinearMap::dense(randn(m, d, ++s)));
  for (Eigen::Index d : pb.y_dims) pb.b_blocks.push_back(LinearMap::dense(randn(m, d, ++s)));
  const Eigen::Index nx = pb.nx(), ny = pb.ny();
  const Mat r = randn(nx, nx, ++s), t = randn(ny, ny, ++s);
  pb.p = r * r.transpose() / static_cast<double>(nx) + 0.1 * Mat::Identity(nx, nx);
  pb.q = t * t.transpose() / static_cast<double>(ny) + 0.1 * Mat::Identity(ny, ny);
  pb.c = randn(m, ++s);
  pb.b = randn(nx, ++s);
  pb.d = randn(ny, ++s);
  return pb;
}

Outcome sgs_equivalence() {
  double worst = 0.0;
  int checked = 0;
  const double lam = 1.3, tau = 0.9;
  for (std::size_t p : {2, 3}) {
    for (std::size_t q : {1, 2}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MultiBlockProblem pb = random_multiblock(p, q, 1000 * p + 100 * q + seed);
        const Eigen::Index nx = pb.nx(), ny = pb.ny();
        SgsConfig cfg;
        cfg.lambda = lam;
        cfg.tau = tau;
        cfg.t_f = Metric::scaled_identity(nx, 0.1);
        cfg.t_g = Metric::scaled_identity(ny, 0.2);
        cfg.check_dominance = false;
        cfg.max_iter = 3;
        cfg.stop_on_kkt = false;
        cfg.keep_history = true;
        const Iterate init{randn(nx, seed + 7), randn(ny, seed + 8), randn(pb.c.size(), seed + 9)};
        const SolveResult r = run_sgs_aspadmm(pb, cfg, init);

        // Replay each iteration as the one-shot semi-proximal update with sGS proximal terms.
        const Mat a = pb.a().materialize(), b = pb.b_op().materialize();
        double theta_prev = 1.0 / tau;
        Vec y_prev = init.y;
        for (std::size_t k = 0; k + 1 < r.history.size(); ++k) {
          const Iterate& cur = r.history[k];
          const double theta = theta_next(theta_prev, tau);
          const Vec v = extrapolate(cur.y, y_prev, theta, theta_prev);
          const double rho = lam / theta;
          const Mat tf = 0.1 * Mat::Identity(nx, nx), tg = 0.2 * Mat::Identity(ny, ny);
          const Mat hx = pb.p + rho * (a.transpose() * a + tf);
          const Mat sx = sgs_operator(BlockMatrixView::from_dense(hx, pb.x_dims)).materialize();
          const Vec rx = pb.b + a.transpose() * (cur.z + rho * (pb.c - b * v)) + rho * tf * cur.x;
          const Vec x = (hx + sx).ldlt().solve(rx + sx * cur.x);
          const Mat hy = pb.q + rho * (b.transpose() * b + tg);
          const Mat sy = sgs_operator(BlockMatrixView::from_dense(hy, pb.y_dims)).materialize();
          const Vec ry = pb.d + b.transpose() * (cur.z + rho * (pb.c - a * x)) + rho * tg * cur.y;
          const Vec y = (hy + sy).ldlt().solve(ry + sy * cur.y);
          const Iterate& next = r.history[k + 1];
          worst = std::max({worst, (next.x - x).cwiseAbs().maxCoeff(), (next.y - y).cwiseAbs().maxCoeff()});
          y_prev = cur.y;
          theta_prev = theta;
          ++checked;
        }
      }
    }
  }
  return {worst <= 1e-8, fmt("max difference %.2e over %d sweep pairs, (p,q) in {2,3}x{1,2}", worst, checked)};
}

MultiBlockProblem prop1_instance(std::uint64_t seed, bool block_diagonal) {
  MultiBlockProblem pb;
  pb.x_dims = {2, 2, 2};
  pb.y_dims = {2, 2};
  const Eigen::Index m = 4;
  std::uint64_t s = 50000 + 100 * seed;
  for (Eigen::Index d : pb.x_dims) pb.a_blocks.push_back(LinearMap::dense(randn(m, d, ++s) / 2.0));
  for (Eigen::Index d : pb.y_dims) pb.b_blocks.push_back(LinearMap::dense(randn(m, d, ++s) / 2.0));
  const Mat r = randn(6, 6, ++s), t = randn(4, 4, ++s);
  pb.p = r * r.transpose() / 6.0;
  pb.q = t * t.transpose() / 4.0;
  if (block_diagonal) {
    pb.p = BlockMatrixView::from_dense(pb.p, pb.x_dims).d;
    pb.q = BlockMatrixView::from_dense(pb.q, pb.y_dims).d;
  }
  pb.c = Vec::Zero(m);
  pb.b = Vec::Zero(6);
  pb.d = Vec::Zero(4);
  return pb;
}

Outcome proposition_dominance(std::string& note) {
  auto sweep = [](bool block_diagonal, int& failing, double& worst) {
    failing = 0;
    worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const MultiBlockProblem pb = prop1_instance(seed, block_diagonal);
      for (double tau : {0.5, 0.9, 0.99}) {
        const Proposition1Report rep = check_proposition1(pb, 1.0, tau, Metric::zero(6), Metric::zero(4), 20);
        failing += rep.pass ? 0 : 1;
        worst = std::min(worst, rep.worst);
      }
    }
  };
  int fail_general = 0, fail_diag = 0;
  double worst_general = 0.0, worst_diag = 0.0;
  sweep(false, fail_general, worst_general);
  sweep(true, fail_diag, worst_diag);
  note = fmt("block-diagonal P, Q diagnostic: %d/30 failing, worst min-eig %.2e", fail_diag, worst_diag);
  return {fail_general == 0,
          fmt("%d/30 (instance, tau) pairs below -1e-8 for k <= 20, worst min-eig %.2e (coupled P, Q)", fail_general,
              worst_general)};
}

Outcome lasso_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (auto [m, n] : {std::pair<Eigen::Index, Eigen::Index>{64, 256}, {128, 512}}) {
    const LassoInstance inst = gen_lasso_trend(m, n, 7);
    LassoOptions o;
    o.arm = LassoArm::aspadmm;
    const LassoResult as = lasso_run(inst, o);
    o.arm = LassoArm::spadmm;
    const LassoResult sp = lasso_run(inst, o);
    const double rel = std::abs(as.objective - sp.objective) / std::abs(sp.objective);
    ok = ok && as.converged && sp.converged && as.iterations < sp.iterations && rel <= 1e-6;
    detail += fmt("%ldx%ld AsPADMM %d vs sPADMM %d iterations, objective rel diff %.1e; ", static_cast<long>(m),
                  static_cast<long>(n), as.iterations, sp.iterations, rel);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 30.0, detail + fmt("%.2f s", secs)};
}

Outcome oracle_optimality(const std::vector<LassoInstance>& insts) {
  double worst_obj = 0.0, worst_kkt = 0.0;
  int runs = 0;
  bool all_converged = true;
  for (const auto& inst : insts) {
    const Vec& xs = inst.certificate->x;
    const double fstar = lasso_objective(inst, xs);
    worst_kkt = std::max({worst_kkt, lasso_kkt_residual(inst, xs),
                          kkt_residual(lasso_problem(inst), xs, xs, inst.certificate->z)});
    for (LassoArm arm : {LassoArm::aspadmm, LassoArm::aspadmm_growing, LassoArm::spadmm}) {
      LassoOptions o;
      o.arm = arm;
      const LassoResult r = lasso_run(inst, o);
      all_converged = all_converged && r.converged;
      worst_obj = std::max(worst_obj, std::abs(r.objective - fstar) / std::abs(fstar));
      ++runs;
    }
  }
  return {worst_obj <= 1e-6 && worst_kkt <= 1e-10 && all_converged,
          fmt("worst relative objective error %.2e over %d runs (3 arms); certificate KKT <= %.2e", worst_obj, runs,
              worst_kkt)};
}

Outcome tensor_toolkit() {
  using testutil::rand_tensor;
  double dft = 0.0, tnn_err = 0.0, prox_err = 0.0, grad_err = 0.0;
  const std::vector<std::array<Eigen::Index, 3>> shapes = {{4, 4, 3}, {3, 5, 4}, {6, 2, 5}, {2, 2, 1}};
  std::uint64_t seed = 900;
  for (const auto& s : shapes) {
    const Tensor3 g = rand_tensor(s[0], s[1], s[2], ++seed);
    dft = std::max(dft, (idft_mode3_real(dft_mode3(g)).vec() - g.vec()).cwiseAbs().maxCoeff());
    const double oracle = testutil::block_diag_nuclear(g);
    tnn_err = std::max(tnn_err, std::abs(tnn(g) - oracle) / (1.0 + oracle));

    const double t = 0.7, cap = 1.8;
    const auto in = tsvd_slices(g);
    const auto out = tsvd_slices(prox_tnn_capped(g, t, cap));
    for (std::size_t k = 0; k < in.size(); ++k) {
      for (Eigen::Index i = 0; i < in[k].sigma.size(); ++i) {
        const double sg = in[k].sigma(i);
        const double best = testutil::grid_argmin([&](double x) { return t * x + 0.5 * (x - sg) * (x - sg); }, 0.0, cap);
        prox_err = std::max(prox_err, std::abs(out[k].sigma(i) - best));
      }
    }
  }
  for (const DcPenalty& pen : {DcPenalty::mcp(1.5), DcPenalty::scad(0.5, 2.5)}) {
    for (int rep = 0; rep < 3; ++rep) {
      const Tensor3 g = rand_tensor(4, 4, 3, ++seed);
      const Vec grad = grad_h_spectral(g, pen).grad.vec();
      const Vec fd = testutil::tensor_fd_gradient([&](const Tensor3& x) { return h_spectral(x, pen); }, g);
      grad_err = std::max(grad_err, (fd - grad).norm() / grad.norm());
    }
  }
  return {dft <= 1e-10 && tnn_err <= 1e-9 && prox_err <= 1e-6 && grad_err <= 1e-5,
          fmt("DFT round-trip %.1e, TNN vs oracle %.1e, capped prox vs grid %.1e, spectral gradient vs FD %.1e", dft,
              tnn_err, prox_err, grad_err)};
}

Outcome rtc_run() {
  const auto t0 = std::chrono::steady_clock::now();
  const RtcInstance inst = gen_rtc_instance(8, 8, 3, 2, 0.8, 0.2, 1);
  int iters[2] = {0, 0};
  bool ok = true;
  std::string detail;
  int idx = 0;
  for (RtcArm arm : {RtcArm::sgs_aspadmm, RtcArm::sgs_spadmm}) {
    RtcOptions o;
    o.arm = arm;
    o.beta = 0.1;
    o.tau = 0.95;
    o.outer_max = 1;
    const RtcResult r = rtc_pmm_run(inst, o);
    const RtcInnerTrace& tr = r.inner.front();
    const bool arm_ok = tr.converged && tr.iterations <= 200 && tr.error.back() <= 1e-4 && tr.omega_pinned &&
                        tr.max_m_inf <= inst.j2;
    ok = ok && arm_ok;
    iters[idx++] = tr.iterations;
    detail += fmt("%s: %d iterations, final error %.1e, Omega pinned %s, max |M| %.3f; ",
                  arm == RtcArm::sgs_aspadmm ? "sGS-AsPADMM" : "sGS-sPADMM", tr.iterations, tr.error.back(),
                  tr.omega_pinned ? "yes" : "no", tr.max_m_inf);
  }
  const bool trend = iters[0] <= iters[1];
  const double secs = seconds_since(t0);
  return {ok && trend && secs < 60.0, detail + fmt("trend As <= sP %s; %.2f s", trend ? "holds" : "does not hold", secs)};
}

Outcome mixed_pipeline() {
  double conj_err = 0.0;
  for (double a : {2.0, 3.0}) {
    for (int i = 0; i < 500; ++i) {
      const double u = -4.0 + 10.0 * i / 499.0;
      const double oracle = testutil::conj_oracle(a, u);
      conj_err = std::max(conj_err, std::abs(conj_f0_star(a, u) - oracle));
    }
  }

  const MixedSparseInstance inst = gen_mixed_instance(32, 128, 8, 3, 8, 0);
  std::vector<double> err[2];
  double weak = -std::numeric_limits<double>::infinity();
  for (int arm = 0; arm < 2; ++arm) {
    MixedOptions o;
    o.mode = MixedSMode::projected;
    o.accelerated = arm == 0;
    o.inner_tol = 0.0;
    o.inner_max = 200;
    o.outer_max = 1;
    const MixedResult r = mixed_pmm_run(inst, o);
    const MixedInnerTrace& tr = r.inner.front();
    err[arm] = tr.error;
    for (std::size_t k = 0; k < tr.pobj.size(); ++k) weak = std::max(weak, tr.dobj[k] - tr.pobj[k]);
  }
  int below = 0, from20 = 0;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 19; k < std::min(err[0].size(), err[1].size()); ++k) {
    ++from20;
    below += err[0][k] < err[1][k];
    margin = std::min(margin, err[1][k] - err[0][k]);
  }
  const bool ok = conj_err <= 1e-6 && from20 == 181 && below == from20 && weak <= 1e-9;
  return {ok, fmt("conjugate vs grid %.1e at 1000 points; AsPADMM error below sPADMM at %d/%d iterations from 20 on "
                  "(min margin %.1e); max dobj - pobj %.2e",
                  conj_err, below, from20, margin, weak)};
}

Outcome reduction_consistency() {
  double worst = 0.0;
  int rows = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::Index n = 4;
    const Mat a = randn(n, n, 7000 + seed);
    const Mat r = randn(n, n, 7100 + seed);
    MultiBlockProblem mp;
    mp.x_dims = {n};
    mp.y_dims = {n};
    mp.a_blocks = {LinearMap::dense(a)};
    mp.b_blocks = {LinearMap::identity(n, -1.0)};
    mp.c = randn(n, 7200 + seed);
    mp.p = r * r.transpose() + 0.1 * Mat::Identity(n, n);
    mp.q = Mat::Zero(n, n);
    mp.b = randn(n, 7300 + seed);
    mp.d = Vec::Zero(n);
    mp.g = ProxFunction::l1(0.3);
    SgsConfig sc;
    sc.lambda = 0.8;
    sc.tau = 0.85;
    sc.max_iter = 100;
    sc.stop_on_kkt = false;
    sc.keep_history = true;
    const SolveResult s = run_sgs_aspadmm(mp, sc);

    TwoBlockProblem tp;
    tp.a = LinearMap::dense(a);
    tp.b = LinearMap::identity(n, -1.0);
    tp.c = mp.c;
    tp.f = BlockSpec::make(n, mp.p, mp.b, ProxFunction::zero());
    tp.g = BlockSpec::make(n, std::nullopt, Vec::Zero(n), ProxFunction::l1(0.3));
    SolverConfig tc;
    tc.lambda = 0.8;
    tc.tau = 0.85;
    tc.max_iter = 100;
    tc.stop_on_kkt = false;
    tc.keep_history = true;
    tc.x_strategy = Strategy::linear_solve;
    tc.y_strategy = Strategy::prox_direct;
    const SolveResult t = run_aspadmm(tp, tc);
    if (s.history.size() != t.history.size()) return {false, "history lengths differ"};
    for (std::size_t k = 0; k < s.history.size(); ++k) {
      worst = std::max({worst, (s.history[k].x - t.history[k].x).cwiseAbs().maxCoeff(),
                        (s.history[k].y - t.history[k].y).cwiseAbs().maxCoeff(),
                        (s.history[k].z - t.history[k].z).cwiseAbs().maxCoeff()});
      ++rows;
    }
  }
  return {worst <= 1e-10, fmt("max iterate difference %.2e over %d iterates on 5 instances", worst, rows)};
}

}  // namespace

int main() {
  const std::vector<LassoInstance> certified = certified_instances();
  std::string prop_note;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"theta schedule exactness", theta_schedule},
      {"accelerated-scheme bound certificate", [&] { return bound_certificate(certified, Theorem::theorem2); }},
      {"sPADMM bound certificate", [&] { return bound_certificate(certified, Theorem::theorem1); }},
      {"monotone sPADMM quantity", [&] { return dandiao_monotone(certified); }},
      {"sGS sweep equals one-shot update", sgs_equivalence},
      {"Xi dominance of sGS increments", [&] { return proposition_dominance(prop_note); }},
      {"Lasso iteration trend", lasso_trend},
      {"certificate optimality", [&] { return oracle_optimality(certified); }},
      {"tensor toolkit", tensor_toolkit},
      {"RTC desk-scale run", rtc_run},
      {"mixed-sparse pipeline", mixed_pipeline},
      {"single-block reduction", reduction_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    if (i == 5 && !prop_note.empty()) std::printf("             note  %s\n", prop_note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
