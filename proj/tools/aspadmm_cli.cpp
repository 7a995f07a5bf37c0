// Command-line runner: instance generation, solver arms, traces and summaries.
//
// Exit codes: 0 ok, 1 bad configuration, 2 solver setup failure, 3 non-convergence
// (artifacts are still written).

#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"
#include "aspadmm/sgs.hpp"

#include "cli_config.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

namespace fs = std::filesystem;
using namespace aspadmm;
using cli::json;
using cli::Kind;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSetup = 2;
constexpr int kExitNoConvergence = 3;

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

fs::path prepare_out(const json& cfg) {
  const fs::path dir = cli::get_str(cfg, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw cli::ConfigError("--out: cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_echo(const cli::ParamSet& params, const fs::path& dir) {
  const std::string text = params.echo().dump(2) + "\n";
  std::cout << text;
  if (!dir.empty()) write_file(dir / "resolved_config.json", text);
}

// Trace CSV; wall-clock time is zeroed unless requested so repeated runs are byte-identical.
void write_trace(const fs::path& path, const IterationTrace& trace, bool timing) {
  IterationTrace copy;
  for (TraceRow row : trace.rows()) {
    if (!timing) row.time_ms = 0.0;
    copy.append(row);
  }
  std::ostringstream out;
  copy.write_csv(out);
  write_file(path, out.str());
}

void write_plot(const fs::path& path, const std::vector<double>& error) {
  std::ostringstream out;
  out << "iter,error\n";
  for (std::size_t i = 0; i < error.size(); ++i) out << i + 1 << ',' << format_double(error[i]) << '\n';
  write_file(path, out.str());
}

void write_summary(const fs::path& dir, const std::string& command, const json& arms) {
  const json doc = {{"subcommand", command}, {"arms", arms}};
  write_file(dir / "summary.json", doc.dump(2) + "\n");
}

std::vector<std::string> checked_arms(const json& cfg, const std::vector<std::string>& allowed) {
  const auto arms = cli::get_str_list(cfg, "arms");
  if (arms.empty()) throw cli::ConfigError("--arms: at least one arm is required");
  for (const auto& a : arms) {
    if (std::find(allowed.begin(), allowed.end(), a) == allowed.end()) {
      std::string list;
      for (const auto& x : allowed) list += (list.empty() ? "" : ", ") + x;
      throw cli::ConfigError("--arms: unknown arm '" + a + "' (choose from " + list + ")");
    }
  }
  return arms;
}

std::uint64_t seed_of(const json& cfg) {
  const long s = cli::get_int(cfg, "seed");
  if (s < 0) throw cli::ConfigError("--seed: must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

void add_common(cli::ParamSet& p, const std::string& out) {
  p.add("seed", Kind::integer, 0, "RNG seed (ASPADMM_SEED overrides file and default)")
      .add("out", Kind::string, out, "output directory")
      .add("timing", Kind::boolean, false, "keep wall-clock times in trace CSVs");
}

// Concatenates inner traces with a running iteration index.
IterationTrace concat_traces(const std::vector<const IterationTrace*>& parts) {
  IterationTrace all;
  int k = 0;
  for (const IterationTrace* t : parts) {
    for (TraceRow row : t->rows()) {
      row.k = k++;
      all.append(row);
    }
  }
  return all;
}

// ----------------------------------------------------------------------- lasso

void lasso_params(cli::ParamSet& p) {
  add_common(p, "out/lasso");
  p.add("instance", Kind::string, nullptr, "load an instance JSON instead of generating one")
      .add("m", Kind::integer, 64, "rows of A")
      .add("n", Kind::integer, 256, "columns of A")
      .add("certified", Kind::boolean, false, "generate a certified instance with a known KKT point")
      .add("sparsity", Kind::number, 0.1, "nonzero fraction of x* for certified instances")
      .add("beta", Kind::number, 1.0, "penalty parameter")
      .add("tau", Kind::number, 0.9, "dual step factor")
      .add("tol-abs", Kind::number, 1e-6, "absolute tolerance")
      .add("tol-rel", Kind::number, 1e-6, "relative tolerance")
      .add("max-iter", Kind::integer, 20000, "iteration cap")
      .add("arms", Kind::string_list, json::array({"aspadmm", "spadmm"}), "aspadmm, spadmm, aspadmm-growing");
}

// Dual objective at the scaled residual ν = (Ax - b)·min(1, λ/‖Aᵀ(Ax - b)‖∞).
double lasso_dual(const LassoInstance& inst, const Vec& x) {
  Vec nu = inst.a * x - inst.b;
  const double top = (inst.a.transpose() * nu).cwiseAbs().maxCoeff();
  if (top > inst.lambda) nu *= inst.lambda / top;
  return -0.5 * nu.squaredNorm() - inst.b.dot(nu);
}

int run_lasso(cli::ParamSet& params) {
  const json cfg = params.resolve();
  const auto arms = checked_arms(cfg, {"aspadmm", "spadmm", "aspadmm-growing"});
  LassoInstance inst;
  if (cli::has(cfg, "instance")) {
    inst = load_lasso_instance(cli::get_str(cfg, "instance"));
  } else if (cli::get_bool(cfg, "certified")) {
    inst = gen_lasso_certified(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), cli::get_num(cfg, "sparsity"), seed_of(cfg));
  } else {
    inst = gen_lasso_trend(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), seed_of(cfg));
  }
  const fs::path dir = prepare_out(cfg);
  write_echo(params, dir);

  json summary = json::object();
  bool all_converged = true;
  for (const auto& arm : arms) {
    LassoOptions o;
    o.beta = cli::get_num(cfg, "beta");
    o.tau = cli::get_num(cfg, "tau");
    o.tol_abs = cli::get_num(cfg, "tol_abs");
    o.tol_rel = cli::get_num(cfg, "tol_rel");
    o.max_iter = static_cast<int>(cli::get_int(cfg, "max_iter"));
    o.arm = arm == "spadmm" ? LassoArm::spadmm : arm == "aspadmm" ? LassoArm::aspadmm : LassoArm::aspadmm_growing;
    const LassoResult r = lasso_run(inst, o);
    write_trace(dir / (arm + ".csv"), r.trace, cli::get_bool(cfg, "timing"));
    std::vector<double> err;
    for (const auto& row : r.trace.rows()) err.push_back(row.kkt_residual);
    write_plot(dir / (arm + ".plot.csv"), err);
    summary[arm] = {{"iterations", r.iterations},
                    {"final_objective", r.objective},
                    {"eps_gap", diagnostics_gap(r.objective, lasso_dual(inst, r.y))},
                    {"eps_p", relative_mismatch(r.x, r.y)},
                    {"converged", r.converged},
                    {"r_norm", r.r_norm},
                    {"s_norm", r.s_norm}};
    all_converged = all_converged && r.converged;
    std::cerr << "lasso " << arm << ": " << r.iterations << " iterations, objective " << format_double(r.objective)
              << (r.converged ? "" : " (not converged)") << '\n';
  }
  write_summary(dir, "lasso", summary);
  return all_converged ? 0 : kExitNoConvergence;
}

// ----------------------------------------------------------------------- mixed

void mixed_params(cli::ParamSet& p) {
  add_common(p, "out/mixed");
  p.add("instance", Kind::string, nullptr, "load an instance JSON instead of generating one")
      .add("m", Kind::integer, 32, "rows of A")
      .add("n", Kind::integer, 128, "columns of A")
      .add("groups", Kind::integer, 8, "number of equal-size groups N")
      .add("nonzero-groups", Kind::integer, 3, "nonzero groups S")
      .add("per-group", Kind::integer, 8, "nonzeros r inside each active group")
      .add("noise", Kind::number, 1e-3, "noise level of b")
      .add("eta", Kind::number, nullptr, "PMM proximal weight (derived from beta, tau when unset)")
      .add("beta", Kind::number, 0.05, "penalty parameter")
      .add("tau", Kind::number, 0.99, "dual step factor")
      .add("mode", Kind::string, "unconstrained", "s-step: unconstrained or projected")
      .add("literal-link", Kind::boolean, false, "use (B, -B) for the group link")
      .add("inner-max", Kind::integer, 200, "inner iteration cap")
      .add("inner-tol", Kind::number, 1e-6, "inner tolerance on max(eps_gap, eps_p1, eps_p2)")
      .add("outer-tol", Kind::number, 1e-4, "outer relative change tolerance")
      .add("outer-max", Kind::integer, 30, "outer iteration cap")
      .add("arms", Kind::string_list, json::array({"sgs-aspadmm", "sgs-spadmm"}), "sgs-aspadmm, sgs-spadmm");
}

int run_mixed(cli::ParamSet& params) {
  const json cfg = params.resolve();
  const auto arms = checked_arms(cfg, {"sgs-aspadmm", "sgs-spadmm"});
  const std::string mode = cli::get_str(cfg, "mode");
  if (mode != "unconstrained" && mode != "projected") {
    throw cli::ConfigError("--mode: expected 'unconstrained' or 'projected', got '" + mode + "'");
  }
  MixedSparseInstance inst =
      cli::has(cfg, "instance")
          ? load_mixed_instance(cli::get_str(cfg, "instance"))
          : gen_mixed_instance(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), cli::get_int(cfg, "groups"),
                               cli::get_int(cfg, "nonzero_groups"), cli::get_int(cfg, "per_group"), seed_of(cfg),
                               cli::get_num(cfg, "noise"));
  if (cli::has(cfg, "eta")) inst.eta = cli::get_num(cfg, "eta");
  const fs::path dir = prepare_out(cfg);
  write_echo(params, dir);

  json summary = json::object();
  bool all_converged = true;
  for (const auto& arm : arms) {
    MixedOptions o;
    o.beta = cli::get_num(cfg, "beta");
    o.tau = cli::get_num(cfg, "tau");
    o.accelerated = arm == "sgs-aspadmm";
    o.mode = mode == "projected" ? MixedSMode::projected : MixedSMode::unconstrained;
    o.literal_link = cli::get_bool(cfg, "literal_link");
    o.inner_max = static_cast<int>(cli::get_int(cfg, "inner_max"));
    o.inner_tol = cli::get_num(cfg, "inner_tol");
    o.outer_tol = cli::get_num(cfg, "outer_tol");
    o.outer_max = static_cast<int>(cli::get_int(cfg, "outer_max"));
    const MixedResult r = mixed_pmm_run(inst, o);

    std::vector<const IterationTrace*> parts;
    std::vector<double> err;
    json per_step = json::array();
    int total = 0;
    for (const auto& tr : r.inner) {
      parts.push_back(&tr.trace);
      err.insert(err.end(), tr.error.begin(), tr.error.end());
      per_step.push_back(tr.iterations);
      total += tr.iterations;
    }
    write_trace(dir / (arm + ".csv"), concat_traces(parts), cli::get_bool(cfg, "timing"));
    write_plot(dir / (arm + ".plot.csv"), err);
    const MixedInnerTrace& last = r.inner.back();
    summary[arm] = {{"iterations", total},
                    {"final_objective", mixed_objective(inst, r.x)},
                    {"penalized_objective", r.outer_objective.back()},
                    {"eps_gap", last.eps_gap.back()},
                    {"eps_p", std::max(last.eps_p1.back(), last.eps_p2.back())},
                    {"converged", r.converged},
                    {"outer_iterations", r.outer_iterations},
                    {"inner_iterations", per_step},
                    {"eta", r.eta}};
    all_converged = all_converged && r.converged;
    std::cerr << "mixed " << arm << ": " << r.outer_iterations << " outer steps, " << total << " inner iterations"
              << (r.converged ? "" : " (not converged)") << '\n';
  }
  write_summary(dir, "mixed", summary);
  return all_converged ? 0 : kExitNoConvergence;
}

// ------------------------------------------------------------------------- rtc

void rtc_params(cli::ParamSet& p) {
  add_common(p, "out/rtc");
  p.add("instance", Kind::string, nullptr, "load an instance JSON instead of generating one")
      .add("dims", Kind::int_list, json::array({8, 8, 3}), "tensor dimensions n1,n2,n3")
      .add("rank", Kind::integer, 2, "tubal rank of the ground truth")
      .add("sr", Kind::number, 0.8, "sampling ratio")
      .add("alpha", Kind::number, 0.2, "salt-and-pepper ratio on observed entries")
      .add("lambda", Kind::number, nullptr, "weight of the sparse part (instance default when unset)")
      .add("eta", Kind::number, nullptr, "PMM proximal weight (instance default when unset)")
      .add("beta", Kind::number, 0.1, "penalty parameter")
      .add("tau", Kind::number, 0.95, "dual step factor")
      .add("inner-max", Kind::integer, 200, "inner iteration cap")
      .add("inner-tol", Kind::number, 1e-4, "inner tolerance on max(eps_gap, eps_p)")
      .add("outer-tol", Kind::number, 1e-4, "outer relative change tolerance")
      .add("outer-max", Kind::integer, 30, "outer iteration cap")
      .add("arms", Kind::string_list, json::array({"sgs-aspadmm", "sgs-spadmm", "admm-3d"}),
           "sgs-aspadmm, sgs-spadmm, admm-3d");
}

std::array<Eigen::Index, 3> dims_of(const json& cfg) {
  const auto d = cli::get_int_list(cfg, "dims");
  if (d.size() != 3 || d[0] <= 0 || d[1] <= 0 || d[2] <= 0) {
    throw cli::ConfigError("--dims: expected three positive integers n1,n2,n3");
  }
  return {d[0], d[1], d[2]};
}

int run_rtc(cli::ParamSet& params) {
  const json cfg = params.resolve();
  const auto arms = checked_arms(cfg, {"sgs-aspadmm", "sgs-spadmm", "admm-3d"});
  RtcInstance inst;
  if (cli::has(cfg, "instance")) {
    inst = load_rtc_instance(cli::get_str(cfg, "instance"));
  } else {
    const auto d = dims_of(cfg);
    inst = gen_rtc_instance(d[0], d[1], d[2], cli::get_int(cfg, "rank"), cli::get_num(cfg, "sr"),
                            cli::get_num(cfg, "alpha"), seed_of(cfg));
  }
  if (cli::has(cfg, "lambda")) inst.lambda = cli::get_num(cfg, "lambda");
  if (cli::has(cfg, "eta")) inst.eta = cli::get_num(cfg, "eta");
  const fs::path dir = prepare_out(cfg);
  write_echo(params, dir);

  json summary = json::object();
  bool all_converged = true;
  for (const auto& arm : arms) {
    RtcOptions o;
    o.beta = cli::get_num(cfg, "beta");
    o.tau = cli::get_num(cfg, "tau");
    o.arm = arm == "sgs-aspadmm" ? RtcArm::sgs_aspadmm : arm == "sgs-spadmm" ? RtcArm::sgs_spadmm : RtcArm::admm3d;
    o.inner_max = static_cast<int>(cli::get_int(cfg, "inner_max"));
    o.inner_tol = cli::get_num(cfg, "inner_tol");
    o.outer_tol = cli::get_num(cfg, "outer_tol");
    o.outer_max = static_cast<int>(cli::get_int(cfg, "outer_max"));
    const RtcResult r = rtc_pmm_run(inst, o);

    std::vector<const IterationTrace*> parts;
    std::vector<double> err;
    int total = 0;
    for (const auto& tr : r.inner) {
      parts.push_back(&tr.trace);
      err.insert(err.end(), tr.error.begin(), tr.error.end());
      total += tr.iterations;
    }
    write_trace(dir / (arm + ".csv"), concat_traces(parts), cli::get_bool(cfg, "timing"));
    write_plot(dir / (arm + ".plot.csv"), err);
    const RtcInnerTrace& last = r.inner.back();
    const Vec diff = r.g.vec() - inst.x_true.vec();
    summary[arm] = {{"iterations", total},
                    {"final_objective", rtc_objective(inst, r.g, r.m)},
                    {"eps_gap", last.eps_gap.back()},
                    {"eps_p", last.eps_p.back()},
                    {"converged", r.converged},
                    {"outer_iterations", r.outer_iterations},
                    {"inner_iterations", r.inner_iterations},
                    {"relative_error", num_or_null(diff.norm() / inst.x_true.frobenius())}};
    all_converged = all_converged && r.converged;
    std::cerr << "rtc " << arm << ": " << r.outer_iterations << " outer steps, " << total << " inner iterations"
              << (r.converged ? "" : " (not converged)") << '\n';
  }
  write_summary(dir, "rtc", summary);
  return all_converged ? 0 : kExitNoConvergence;
}

// --------------------------------------------------------------- verify-bounds

void bounds_params(cli::ParamSet& p) {
  add_common(p, "out/verify-bounds");
  p.add("instance", Kind::string, nullptr, "certified Lasso instance JSON (must carry a certificate)")
      .add("which", Kind::string, "theorem2", "theorem2 (accelerated, tau < 1) or theorem1 (sPADMM)")
      .add("m", Kind::integer, 20, "rows of A")
      .add("n", Kind::integer, 50, "columns of A")
      .add("sparsity", Kind::number, 0.1, "nonzero fraction of x*")
      .add("beta", Kind::number, 1.0, "penalty parameter")
      .add("tau", Kind::number, nullptr, "dual step factor [default: 0.9 for theorem2, 1 for theorem1]")
      .add("iters", Kind::integer, 500, "iterations to certify")
      .add("slack", Kind::number, 1e-8, "relative slack of each bound");
}

int run_bounds(cli::ParamSet& params) {
  const json cfg = params.resolve();
  const std::string which = cli::get_str(cfg, "which");
  if (which != "theorem1" && which != "theorem2") {
    throw cli::ConfigError("--which: expected 'theorem1' or 'theorem2', got '" + which + "'");
  }
  const bool t2 = which == "theorem2";
  const LassoInstance inst =
      cli::has(cfg, "instance")
          ? load_lasso_instance(cli::get_str(cfg, "instance"))
          : gen_lasso_certified(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), cli::get_num(cfg, "sparsity"), seed_of(cfg));
  if (!inst.certificate) throw cli::ConfigError("--instance: the instance has no certificate");
  const fs::path dir = prepare_out(cfg);
  write_echo(params, dir);

  SolverConfig sc;
  sc.mode = t2 ? Mode::aspadmm : Mode::spadmm;
  sc.lambda = cli::get_num(cfg, "beta");
  sc.tau = cli::has(cfg, "tau") ? cli::get_num(cfg, "tau") : (t2 ? 0.9 : 1.0);
  sc.s_schedule = ProximalSchedule::fixed(lasso_proximal_term(inst));
  sc.x_strategy = Strategy::prox_via_majorization;
  sc.y_strategy = Strategy::prox_direct;
  sc.max_iter = static_cast<int>(cli::get_int(cfg, "iters"));
  sc.stop_on_kkt = false;
  sc.reference = Reference{inst.certificate->x, inst.certificate->x, inst.certificate->z};
  const TwoBlockProblem problem = lasso_problem(inst);
  const SolveResult r = t2 ? run_aspadmm(problem, sc) : run_spadmm(problem, sc);
  const BoundReport rep =
      verify_bounds(r.trace, *r.constants, t2 ? Theorem::theorem2 : Theorem::theorem1, cli::get_num(cfg, "slack"));
  write_trace(dir / (which + ".csv"), r.trace, cli::get_bool(cfg, "timing"));

  const BoundConstants& c = *r.constants;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json violations = json::array();
  for (std::size_t i = 0; i < rep.violations.size() && i < 20; ++i) {
    const auto& v = rep.violations[i];
    violations.push_back({{"k", v.k}, {"what", v.what}, {"value", v.value}, {"bound", v.bound}});
  }
  const json doc = {{"subcommand", "verify-bounds"},
                    {"which", which},
                    {"violations", rep.violations.size()},
                    {"checked_rows", rep.checked_rows},
                    {"first_violations", violations},
                    {"constants",
                     {{"c1", opt(c.c1)}, {"c2", opt(c.c2)}, {"c", opt(c.c)}, {"c3", c.c3}, {"c4", c.c4},
                      {"c5", opt(c.c5)}, {"c6", opt(c.c6)}, {"ref_objective", c.ref_objective}}}};
  write_file(dir / "summary.json", doc.dump(2) + "\n");
  std::cout << "verify-bounds " << which << ": " << rep.violations.size() << " violations over " << rep.checked_rows
            << " rows\n";
  return rep.certified() ? 0 : kExitNoConvergence;
}

// ------------------------------------------------------------------- sgs-check

void sgs_params(cli::ParamSet& p) {
  add_common(p, "out/sgs-check");
  p.add("problem", Kind::string, nullptr, "multi-block problem JSON (random quadratic instance when unset)")
      .add("p", Kind::integer, 3, "x-blocks of the random instance")
      .add("q", Kind::integer, 2, "y-blocks of the random instance")
      .add("block-dim", Kind::integer, 2, "block size of the random instance")
      .add("ridge", Kind::number, 10.0, "identity shift of P and Q in the random instance")
      .add("lambda", Kind::number, 1.0, "penalty parameter")
      .add("tau", Kind::number, 0.9, "dual step factor")
      .add("horizon", Kind::integer, 20, "largest k of the increment check")
      .add("max-iter", Kind::integer, 200, "iteration cap of the solver run")
      .add("tol", Kind::number, 1e-6, "KKT tolerance of the solver run")
      .add("skip-dominance", Kind::boolean, false, "run the solver even if the dominance condition fails")
      .add("y-backward", Kind::string, "previous", "backward y-pass anchor: previous or extrapolated");
}

MultiBlockProblem random_multiblock(long p, long q, long dim, double ridge, std::uint64_t seed) {
  if (p < 1 || q < 1 || dim < 1) throw cli::ConfigError("--p, --q, --block-dim: must be positive");
  if (!(ridge >= 0.0)) throw cli::ConfigError("--ridge: must be nonnegative");
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  auto gauss = [&](Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(eng);
    return m;
  };
  MultiBlockProblem pb;
  pb.x_dims.assign(static_cast<std::size_t>(p), dim);
  pb.y_dims.assign(static_cast<std::size_t>(q), dim);
  const Eigen::Index m = 2 * dim;
  for (long i = 0; i < p; ++i) pb.a_blocks.push_back(LinearMap::dense(gauss(m, dim)));
  for (long j = 0; j < q; ++j) pb.b_blocks.push_back(LinearMap::dense(gauss(m, dim)));
  const Eigen::Index nx = pb.nx(), ny = pb.ny();
  const Mat r = gauss(nx, nx), t = gauss(ny, ny);
  pb.p = r * r.transpose() / static_cast<double>(nx) + ridge * Mat::Identity(nx, nx);
  pb.q = t * t.transpose() / static_cast<double>(ny) + ridge * Mat::Identity(ny, ny);
  pb.c = gauss(m, 1).col(0);
  pb.b = gauss(nx, 1).col(0);
  pb.d = gauss(ny, 1).col(0);
  return pb;
}

int run_sgs(cli::ParamSet& params) {
  const json cfg = params.resolve();
  const std::string back = cli::get_str(cfg, "y_backward");
  if (back != "previous" && back != "extrapolated") {
    throw cli::ConfigError("--y-backward: expected 'previous' or 'extrapolated', got '" + back + "'");
  }
  const MultiBlockProblem pb = cli::has(cfg, "problem")
                                   ? load_multiblock_json(cli::get_str(cfg, "problem"))
                                   : random_multiblock(cli::get_int(cfg, "p"), cli::get_int(cfg, "q"),
                                                       cli::get_int(cfg, "block_dim"), cli::get_num(cfg, "ridge"), seed_of(cfg));
  const fs::path dir = prepare_out(cfg);
  write_echo(params, dir);

  const double lam = cli::get_num(cfg, "lambda"), tau = cli::get_num(cfg, "tau");
  const Metric tf = default_block_boost(pb.p, pb.a(), pb.x_dims, lam);
  const Metric tg = default_block_boost(pb.q, pb.b_op(), pb.y_dims, lam);
  const StepCertificate step = check_step_condition(pb, lam, tf, tg);
  const Proposition1Report prop =
      check_proposition1(pb, lam, tau, tf, tg, static_cast<int>(cli::get_int(cfg, "horizon")));
  const XiOperators xi = xi_operators(pb, lam, tau, tf, tg);
  auto min_eig = [](const Mat& m) { return m.size() ? Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().minCoeff() : 0.0; };
  const double dom_f = min_eig(pb.p - symmetrize(xi.xi_f)), dom_g = min_eig(pb.q - symmetrize(xi.xi_g));

  SgsConfig sc;
  sc.lambda = lam;
  sc.tau = tau;
  sc.t_f = tf;
  sc.t_g = tg;
  sc.max_iter = static_cast<int>(cli::get_int(cfg, "max_iter"));
  sc.tol_kkt = cli::get_num(cfg, "tol");
  sc.check_dominance = !cli::get_bool(cfg, "skip_dominance");
  sc.y_backward = back == "previous" ? BackwardAnchor::previous_iterate : BackwardAnchor::extrapolated;
  json rows = json::array();
  for (const auto& row : prop.rows) rows.push_back({{"k", row.k}, {"min_eig_f", row.min_eig_f}, {"min_eig_g", row.min_eig_g}});
  json doc = {{"subcommand", "sgs-check"},
              {"step_condition", {{"ok", step.ok}, {"x_min_eigs", step.x_min_eigs}, {"y_min_eigs", step.y_min_eigs}}},
              {"dominance", {{"min_eig_f", dom_f}, {"min_eig_g", dom_g}}},
              {"increment_check", {{"pass", prop.pass}, {"worst", prop.worst}, {"rows", rows}}}};
  const std::string checks = std::string("sgs-check: step condition ") + (step.ok ? "ok" : "fails") +
                             ", increment check " + (prop.pass ? "passes" : "fails") + " (worst " +
                             format_double(prop.worst) + ")";

  std::optional<SolveResult> run;
  try {
    run = run_sgs_aspadmm(pb, sc);
  } catch (const SetupError& e) {
    // The report is still useful when the solver refuses the instance.
    doc["arms"] = {{"sgs-aspadmm", {{"skipped", e.what()}}}};
    write_file(dir / "summary.json", doc.dump(2) + "\n");
    std::cout << checks << ", solver refused\n";
    throw;
  }
  const SolveResult& r = *run;
  write_trace(dir / "sgs-aspadmm.csv", r.trace, cli::get_bool(cfg, "timing"));
  std::vector<double> err;
  for (const auto& row : r.trace.rows()) err.push_back(row.kkt_residual);
  write_plot(dir / "sgs-aspadmm.plot.csv", err);
  doc["arms"] = {{"sgs-aspadmm",
                  {{"iterations", r.iterations},
                   {"final_objective", pb.objective(r.state.x, r.state.y)},
                   {"eps_gap", nullptr},
                   {"eps_p", r.trace.empty() ? 0.0 : r.trace.rows().back().feasibility},
                   {"converged", r.converged}}}};
  write_file(dir / "summary.json", doc.dump(2) + "\n");
  std::cout << checks << ", solver " << r.iterations << " iterations" << (r.converged ? "" : " (not converged)") << '\n';
  return r.converged ? 0 : kExitNoConvergence;
}

// ------------------------------------------------------------------------- gen

void gen_lasso_params(cli::ParamSet& p) {
  p.add("seed", Kind::integer, 0, "RNG seed")
      .add("out", Kind::string, "lasso.json", "instance JSON path")
      .add("m", Kind::integer, 20, "rows of A")
      .add("n", Kind::integer, 50, "columns of A")
      .add("certified", Kind::boolean, false, "reverse-engineered instance with a KKT certificate")
      .add("sparsity", Kind::number, 0.1, "nonzero fraction of x* (certified)");
}

void gen_mixed_params(cli::ParamSet& p) {
  p.add("seed", Kind::integer, 0, "RNG seed")
      .add("out", Kind::string, "mixed.json", "instance JSON path")
      .add("m", Kind::integer, 32, "rows of A")
      .add("n", Kind::integer, 128, "columns of A")
      .add("groups", Kind::integer, 8, "number of equal-size groups N")
      .add("nonzero-groups", Kind::integer, 3, "nonzero groups S")
      .add("per-group", Kind::integer, 8, "nonzeros r inside each active group")
      .add("noise", Kind::number, 1e-3, "noise level of b");
}

void gen_rtc_params(cli::ParamSet& p) {
  p.add("seed", Kind::integer, 0, "RNG seed")
      .add("out", Kind::string, "rtc.json", "instance JSON path")
      .add("dims", Kind::int_list, json::array({8, 8, 3}), "tensor dimensions n1,n2,n3")
      .add("rank", Kind::integer, 2, "tubal rank")
      .add("sr", Kind::number, 0.8, "sampling ratio")
      .add("alpha", Kind::number, 0.2, "salt-and-pepper ratio");
}

fs::path gen_target(const json& cfg) {
  const fs::path path = cli::get_str(cfg, "out");
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw cli::ConfigError("--out: cannot create " + path.parent_path().string());
  }
  return path;
}

int run_gen(cli::ParamSet& params, const std::string& kind) {
  const json cfg = params.resolve();
  write_echo(params, {});
  const fs::path path = gen_target(cfg);
  if (kind == "lasso") {
    const LassoInstance inst =
        cli::get_bool(cfg, "certified")
            ? gen_lasso_certified(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), cli::get_num(cfg, "sparsity"), seed_of(cfg))
            : gen_lasso_trend(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), seed_of(cfg));
    save_lasso_instance(path.string(), inst);
  } else if (kind == "mixed") {
    save_mixed_instance(path.string(),
                        gen_mixed_instance(cli::get_int(cfg, "m"), cli::get_int(cfg, "n"), cli::get_int(cfg, "groups"),
                                           cli::get_int(cfg, "nonzero_groups"), cli::get_int(cfg, "per_group"),
                                           seed_of(cfg), cli::get_num(cfg, "noise")));
  } else {
    const auto d = dims_of(cfg);
    save_rtc_instance(path.string(), gen_rtc_instance(d[0], d[1], d[2], cli::get_int(cfg, "rank"),
                                                      cli::get_num(cfg, "sr"), cli::get_num(cfg, "alpha"), seed_of(cfg)));
  }
  std::cerr << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated semi-proximal ADMM runner"};
  app.require_subcommand(1);

  struct Command {
    std::string name;
    std::string help;
    void (*params)(cli::ParamSet&);
    int (*run)(cli::ParamSet&);
  };
  const std::vector<Command> commands = {
      {"lasso", "Lasso benchmark: sPADMM vs AsPADMM arms", lasso_params, run_lasso},
      {"mixed", "mixed-sparsity regression through the PMM outer loop", mixed_params, run_mixed},
      {"rtc", "robust tensor completion through the PMM outer loop", rtc_params, run_rtc},
      {"verify-bounds", "per-iteration bound certificate on a certified Lasso instance", bounds_params, run_bounds},
      {"sgs-check", "sGS step and increment conditions plus a solver run", sgs_params, run_sgs},
  };
  std::vector<std::unique_ptr<cli::ParamSet>> sets;
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    sets.push_back(std::make_unique<cli::ParamSet>(c.name));
    c.params(*sets.back());
    subs.push_back(app.add_subcommand(c.name, c.help));
    sets.back()->attach(*subs.back());
  }

  CLI::App* gen = app.add_subcommand("gen", "write a seeded instance to disk");
  gen->require_subcommand(1);
  const std::vector<std::pair<std::string, void (*)(cli::ParamSet&)>> gens = {
      {"lasso", gen_lasso_params}, {"mixed", gen_mixed_params}, {"rtc", gen_rtc_params}};
  std::vector<std::unique_ptr<cli::ParamSet>> gen_sets;
  std::vector<CLI::App*> gen_subs;
  for (const auto& [kind, fill] : gens) {
    gen_sets.push_back(std::make_unique<cli::ParamSet>("gen " + kind));
    fill(*gen_sets.back());
    gen_subs.push_back(gen->add_subcommand(kind, "generate a " + kind + " instance"));
    gen_sets.back()->attach(*gen_subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].run(*sets[i]);
    }
    for (std::size_t i = 0; i < gens.size(); ++i) {
      if (gen_subs[i]->parsed()) return run_gen(*gen_sets[i], gens[i].first);
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SetupError& e) {
    std::cerr << "setup failure: " << e.what() << '\n';
    return kExitSetup;
  } catch (const NotPsdError& e) {
    std::cerr << "setup failure: " << e.what() << '\n';
    return kExitSetup;
  } catch (const SubproblemError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSetup;
  } catch (const Error& e) {
    // Instance construction and file errors come from the configuration.
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
