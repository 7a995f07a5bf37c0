#include "aspadmm/sgs.hpp"

#include "aspadmm/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

namespace aspadmm {

namespace {

void require_dim(const std::string& what, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw DimensionError(what, static_cast<std::size_t>(expected), static_cast<std::size_t>(got));
  }
}

std::vector<Eigen::Index> offsets_of(const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> o(dims.size() + 1, 0);
  for (std::size_t i = 0; i < dims.size(); ++i) o[i + 1] = o[i] + dims[i];
  return o;
}

Eigen::Index total(const std::vector<Eigen::Index>& dims) {
  return std::accumulate(dims.begin(), dims.end(), Eigen::Index{0});
}

Mat dense_or_zero(const Metric& m, Eigen::Index n) {
  if (m.dim() == 0) return Mat::Zero(n, n);
  require_dim("metric", n, m.dim());
  return m.dense();
}

double min_eig_sym(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Solves D X = R with D the block diagonal of m; names the singular block.
Mat block_diag_solve(const Mat& m, const std::vector<Eigen::Index>& dims, const Mat& r, const char* what) {
  const auto o = offsets_of(dims);
  Mat x(r.rows(), r.cols());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const Mat di = m.block(o[i], o[i], dims[i], dims[i]);
    Eigen::LLT<Mat> llt(di);
    if (llt.info() != Eigen::Success || min_eig_sym(di) <= 1e-10) {
      throw SetupError(std::string(what) + ": diagonal block " + std::to_string(i + 1) +
                       " is not positive definite");
    }
    x.middleRows(o[i], dims[i]) = llt.solve(r.middleRows(o[i], dims[i]));
  }
  return x;
}

}  // namespace

// ----------------------------------------------------------- problem

Eigen::Index MultiBlockProblem::nx() const { return total(x_dims); }
Eigen::Index MultiBlockProblem::ny() const { return total(y_dims); }

void MultiBlockProblem::validate() const {
  if (x_dims.empty() || y_dims.empty()) throw SetupError("multi-block problem needs at least one x and one y block");
  require_dim("number of A blocks", static_cast<Eigen::Index>(x_dims.size()),
              static_cast<Eigen::Index>(a_blocks.size()));
  require_dim("number of B blocks", static_cast<Eigen::Index>(y_dims.size()),
              static_cast<Eigen::Index>(b_blocks.size()));
  for (std::size_t i = 0; i < x_dims.size(); ++i) {
    if (x_dims[i] <= 0) throw SetupError("x block " + std::to_string(i + 1) + " has nonpositive dimension");
    require_dim("A_" + std::to_string(i + 1) + " domain", x_dims[i], a_blocks[i].domain_dim());
    require_dim("A_" + std::to_string(i + 1) + " codomain", c.size(), a_blocks[i].codomain_dim());
  }
  for (std::size_t j = 0; j < y_dims.size(); ++j) {
    if (y_dims[j] <= 0) throw SetupError("y block " + std::to_string(j + 1) + " has nonpositive dimension");
    require_dim("B_" + std::to_string(j + 1) + " domain", y_dims[j], b_blocks[j].domain_dim());
    require_dim("B_" + std::to_string(j + 1) + " codomain", c.size(), b_blocks[j].codomain_dim());
  }
  require_dim("P rows", nx(), p.rows());
  require_dim("P cols", nx(), p.cols());
  require_dim("Q rows", ny(), q.rows());
  require_dim("Q cols", ny(), q.cols());
  require_dim("b", nx(), b.size());
  require_dim("d", ny(), d.size());
}

LinearMap MultiBlockProblem::a() const {
  return a_blocks.size() == 1 ? a_blocks.front() : LinearMap::hstack(a_blocks);
}

LinearMap MultiBlockProblem::b_op() const {
  return b_blocks.size() == 1 ? b_blocks.front() : LinearMap::hstack(b_blocks);
}

double MultiBlockProblem::objective(const Vec& x, const Vec& y) const {
  const Vec x1 = x.head(x_dims.front());
  const Vec y1 = y.head(y_dims.front());
  return f.eval(x1) + 0.5 * x.dot(p * x) - b.dot(x) + g.eval(y1) + 0.5 * y.dot(q * y) - d.dot(y);
}

Vec MultiBlockProblem::residual(const Vec& x, const Vec& y) const { return a().apply(x) + b_op().apply(y) - c; }

double MultiBlockProblem::kkt_residual(const Vec& x, const Vec& y, const Vec& z) const {
  if (!f.has_subgradient_distance() || !g.has_subgradient_distance()) {
    throw Error("kkt_residual: block kind has no subgradient residual");
  }
  auto side = [](const ProxFunction& fn, Eigen::Index n1, const Vec& v, const Vec& grad_rest) {
    const double d1 = fn.subgradient_distance(v.head(n1), grad_rest.head(n1));
    const double rest = grad_rest.tail(v.size() - n1).squaredNorm();
    return std::sqrt(d1 * d1 + rest);
  };
  const double feas = residual(x, y).norm() / (1.0 + c.norm());
  const double zn = 1.0 + z.norm();
  const Vec gx = a().apply_adjoint(z) - (p * x - b);
  const Vec gy = b_op().apply_adjoint(z) - (q * y - d);
  return std::max({feas, side(f, x_dims.front(), x, gx) / zn, side(g, y_dims.front(), y, gy) / zn});
}

// -------------------------------------------------------- block views

std::vector<Eigen::Index> BlockMatrixView::offsets() const { return offsets_of(dims); }

Mat BlockMatrixView::diag_block(std::size_t i) const {
  const auto o = offsets();
  return d.block(o[i], o[i], dims[i], dims[i]);
}

BlockMatrixView BlockMatrixView::from_dense(const Mat& m, std::vector<Eigen::Index> dims) {
  const Eigen::Index n = total(dims);
  require_dim("block view rows", n, m.rows());
  require_dim("block view cols", n, m.cols());
  BlockMatrixView v;
  v.dims = std::move(dims);
  v.d = Mat::Zero(n, n);
  v.u = Mat::Zero(n, n);
  const auto o = v.offsets();
  for (std::size_t i = 0; i < v.dims.size(); ++i) {
    v.d.block(o[i], o[i], v.dims[i], v.dims[i]) = m.block(o[i], o[i], v.dims[i], v.dims[i]);
    const Eigen::Index right = n - o[i + 1];
    if (right > 0) v.u.block(o[i], o[i + 1], v.dims[i], right) = m.block(o[i], o[i + 1], v.dims[i], right);
  }
  return v;
}

BlockMatrixView block_split(const Mat& m, const std::vector<Eigen::Index>& dims) {
  return BlockMatrixView::from_dense(m, dims);
}

std::pair<BlockMatrixView, BlockMatrixView> assemble_M_N(const MultiBlockProblem& problem, double lambda,
                                                         const Metric& t_f, const Metric& t_g) {
  problem.validate();
  const Mat m = problem.p + lambda * (problem.a().gram().materialize() + dense_or_zero(t_f, problem.nx()));
  const Mat n = problem.q + lambda * (problem.b_op().gram().materialize() + dense_or_zero(t_g, problem.ny()));
  return {BlockMatrixView::from_dense(m, problem.x_dims), BlockMatrixView::from_dense(n, problem.y_dims)};
}

StepCertificate check_step_condition(const MultiBlockProblem& problem, double lambda, const Metric& t_f,
                                     const Metric& t_g) {
  const auto [m, n] = assemble_M_N(problem, lambda, t_f, t_g);
  StepCertificate cert;
  auto scan = [&cert](const BlockMatrixView& v, std::vector<double>& out, const char* side) {
    for (std::size_t i = 0; i < v.dims.size(); ++i) {
      const double e = min_eig_sym(v.diag_block(i));
      out.push_back(e);
      if (e < 1e-10 && cert.ok) {
        cert.ok = false;
        cert.message = std::string(side) + " diagonal block " + std::to_string(i + 1) +
                       " has min eigenvalue " + std::to_string(e);
      }
    }
  };
  scan(m, cert.x_min_eigs, "x");
  scan(n, cert.y_min_eigs, "y");
  return cert;
}

LinearMap sgs_operator(const BlockMatrixView& view) {
  const Mat x = block_diag_solve(view.d, view.dims, view.u.transpose(), "sGS operator");
  const Mat s = symmetrize(view.u * x);
  const PsdCertificate cert = check_psd_relative(LinearMap::dense(s), 1e-9);
  if (!cert.ok) throw NotPsdError("sGS operator is not PSD", cert.min_eig);
  return LinearMap::dense(s);
}

Metric default_block_boost(const Mat& p, const LinearMap& a, const std::vector<Eigen::Index>& dims,
                           double lambda) {
  const Mat m = p + lambda * a.gram().materialize();
  const auto o = offsets_of(dims);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (min_eig_sym(m.block(o[i], o[i], dims[i], dims[i])) <= 1e-10) {
      const double top = extremal_eigenvalue(LinearMap::dense(m), Extremal::largest);
      return Metric::scaled_identity(m.rows(), 1e-8 * std::max(top, 1.0));
    }
  }
  return Metric::zero(m.rows());
}

// ----------------------------------------------------------- sweeps

namespace {

struct SweepBlocks {
  std::vector<Eigen::Index> dims, offs;
  std::vector<BlockSpec> specs;  // block 0 carries the prox part
};

SweepBlocks make_sweep_blocks(const std::vector<Eigen::Index>& dims, const ProxFunction& prox) {
  SweepBlocks s;
  s.dims = dims;
  s.offs = offsets_of(dims);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    s.specs.push_back(BlockSpec::make(dims[i], std::nullopt, Vec(), i == 0 ? prox : ProxFunction::zero()));
  }
  return s;
}

// min Σ φ(x₁) + ½⟨x, Hx⟩ - ⟨rhs, x⟩ by one backward and one forward block pass.
Vec gauss_seidel(const Mat& h, const Vec& rhs, const SweepBlocks& blk, const Vec& backward, const char* side) {
  const std::size_t nb = blk.dims.size();
  const auto& o = blk.offs;
  const Eigen::Index n = o[nb];
  Vec cur = backward;

  auto solve = [&](std::size_t i, const char* pass) {
    Vec r = rhs.segment(o[i], blk.dims[i]);
    if (o[i] > 0) r.noalias() -= h.block(o[i], 0, blk.dims[i], o[i]) * cur.head(o[i]);
    const Eigen::Index right = n - o[i + 1];
    if (right > 0) r.noalias() -= h.block(o[i], o[i + 1], blk.dims[i], right) * cur.tail(right);
    const BlockSpec& spec = blk.specs[i];
    const Strategy st = spec.prox.kind() == ProxFunction::Kind::zero ? Strategy::linear_solve : Strategy::prox_direct;
    try {
      cur.segment(o[i], blk.dims[i]) =
          solve_block_subproblem(spec, h.block(o[i], o[i], blk.dims[i], blk.dims[i]), r, st);
    } catch (const SubproblemError& e) {
      throw SubproblemError(std::string(side) + " " + pass + " pass, block " + std::to_string(i + 1) + ": " +
                            e.what());
    }
  };

  for (std::size_t i = nb; i-- > 1;) solve(i, "backward");
  for (std::size_t i = 0; i < nb; ++i) solve(i, "forward");
  return cur;
}

}  // namespace

Vec sgs_sweep(const MultiBlockProblem& problem, Side side, const SweepInput& in) {
  problem.validate();
  const bool xs = side == Side::x;
  const LinearMap self = xs ? problem.a() : problem.b_op();
  const LinearMap other = xs ? problem.b_op() : problem.a();
  const Eigen::Index n = xs ? problem.nx() : problem.ny();
  require_dim("sweep anchor", n, in.anchor.size());
  require_dim("sweep backward values", n, in.backward.size());
  require_dim("sweep other block", other.domain_dim(), in.other.size());
  require_dim("sweep dual", problem.c.size(), in.z.size());
  const double rho = in.penalty;
  const Mat st = rho * (in.t.size() ? in.t : Mat::Zero(n, n));
  Mat h = rho * self.gram().materialize() + st;
  h += xs ? problem.p : problem.q;
  const Vec l = self.apply_adjoint(in.z + rho * (problem.c - other.apply(in.other))) + st * in.anchor;
  const Vec rhs = (xs ? problem.b : problem.d) + l;
  const SweepBlocks blk = make_sweep_blocks(xs ? problem.x_dims : problem.y_dims, xs ? problem.f : problem.g);
  return gauss_seidel(h, rhs, blk, in.backward, xs ? "x" : "y");
}

// -------------------------------------------------------- Ξ operators

XiOperators xi_operators(const MultiBlockProblem& problem, double lambda, double tau, const Metric& t_f,
                         const Metric& t_g) {
  problem.validate();
  const Mat tf = dense_or_zero(t_f, problem.nx());
  const Mat tg = dense_or_zero(t_g, problem.ny());
  const Mat hf = problem.a().gram().materialize() + tf;
  const Mat hg = problem.b_op().gram().materialize() + tg;
  const auto vf = BlockMatrixView::from_dense(hf, problem.x_dims);
  const auto vg = BlockMatrixView::from_dense(hg, problem.y_dims);
  const auto mf = BlockMatrixView::from_dense(problem.p + lambda * hf, problem.x_dims);
  const auto mg = BlockMatrixView::from_dense(problem.q + lambda * hg, problem.y_dims);
  const auto pf = BlockMatrixView::from_dense(problem.p, problem.x_dims);
  const auto qg = BlockMatrixView::from_dense(problem.q + tg, problem.y_dims);

  const double w1 = 2.0 * (1.0 - tau) * lambda;
  const double w2 = 2.0 * (1.0 - tau) * (3.0 - tau) * lambda;
  XiOperators xi;
  xi.xi_f = w1 * vf.u * block_diag_solve(mf.d, problem.x_dims, pf.u.transpose(), "(P + lambda H_f)_d") +
            w2 * vf.u * block_diag_solve(vf.d, problem.x_dims, vf.u.transpose(), "(A^T A + T_f)_d");
  xi.xi_g = w1 * vg.u * block_diag_solve(mg.d, problem.y_dims, qg.u.transpose(), "(Q + lambda H_g)_d") +
            w2 * vg.u * block_diag_solve(vg.d, problem.y_dims, vg.u.transpose(), "(B^T B + T_g)_d");
  return xi;
}

Proposition1Report check_proposition1(const MultiBlockProblem& problem, double lambda, double tau,
                                      const Metric& t_f, const Metric& t_g, int horizon, double xi_scale) {
  const XiOperators xi = xi_operators(problem, lambda, tau, t_f, t_g);
  const Mat sf = xi_scale * symmetrize(xi.xi_f);
  const Mat sg = xi_scale * symmetrize(xi.xi_g);
  auto theta = [tau](int k) { return 1.0 / (k * (1.0 - tau) + 1.0); };

  Proposition1Report rep;
  auto [m0, n0] = assemble_M_N(problem, lambda / theta(0), t_f, t_g);
  Mat sm0 = sgs_operator(m0).materialize();
  Mat sn0 = sgs_operator(n0).materialize();
  for (int k = 0; k <= horizon; ++k) {
    const auto [m1, n1] = assemble_M_N(problem, lambda / theta(k + 1), t_f, t_g);
    const Mat sm1 = sgs_operator(m1).materialize();
    const Mat sn1 = sgs_operator(n1).materialize();
    const double ef = min_eig_sym(sf - (sm1 - sm0));
    const double eg = min_eig_sym(sg - (sn1 - sn0));
    rep.rows.push_back({k, ef, eg});
    rep.worst = std::min({rep.worst, ef, eg});
    sm0 = sm1;
    sn0 = sn1;
  }
  rep.pass = rep.worst >= -1e-8;
  return rep;
}

// ------------------------------------------------------------- solver

SolveResult run_sgs_aspadmm(const MultiBlockProblem& problem, const SgsConfig& config,
                            const std::optional<Iterate>& init) {
  problem.validate();
  const double lam = config.lambda, tau = config.tau;
  if (!(lam > 0.0)) throw SetupError("lambda must be positive");
  if (config.accelerated) {
    if (!(tau > 0.0 && tau < 1.0)) throw SetupError("accelerated scheme needs tau in (0, 1)");
  } else if (!(tau > 0.0 && tau < (1.0 + std::sqrt(5.0)) / 2.0)) {
    throw SetupError("sGS-sPADMM needs tau in (0, (1 + sqrt 5)/2)");
  }
  for (const auto& [mat, name] : {std::pair{&problem.p, "P"}, std::pair{&problem.q, "Q"}}) {
    const PsdCertificate c = check_psd_relative(LinearMap::dense(*mat));
    if (!c.ok) throw NotPsdError(std::string(name) + " is not PSD", c.min_eig);
  }

  const LinearMap a = problem.a(), b = problem.b_op();
  const Eigen::Index nx = problem.nx(), ny = problem.ny(), m = problem.c.size();
  const Metric t_f = config.t_f ? *config.t_f : default_block_boost(problem.p, a, problem.x_dims, lam);
  const Metric t_g = config.t_g ? *config.t_g : default_block_boost(problem.q, b, problem.y_dims, lam);
  const Mat tf = dense_or_zero(t_f, nx), tg = dense_or_zero(t_g, ny);

  const StepCertificate step = check_step_condition(problem, lam, t_f, t_g);
  if (!step.ok) throw SetupError("block step condition fails: " + step.message);
  if (config.accelerated && config.check_dominance) {
    const XiOperators xi = xi_operators(problem, lam, tau, t_f, t_g);
    const double ef = min_eig_sym(problem.p - symmetrize(xi.xi_f));
    const double eg = min_eig_sym(problem.q - symmetrize(xi.xi_g));
    const double scale = 1e-9 * (1.0 + problem.p.cwiseAbs().maxCoeff() + problem.q.cwiseAbs().maxCoeff());
    if (ef < -scale || eg < -scale) {
      throw SetupError("dominance condition P ⪰ sym(Xi_f), Q ⪰ sym(Xi_g) fails (min eigenvalues " +
                       std::to_string(ef) + ", " + std::to_string(eg) +
                       "); disable check_dominance to run anyway");
    }
  }

  Iterate cur;
  if (init) {
    require_dim("init x", nx, init->x.size());
    require_dim("init y", ny, init->y.size());
    require_dim("init z", m, init->z.size());
    cur = *init;
  } else {
    cur = {Vec::Zero(nx), Vec::Zero(ny), Vec::Zero(m)};
  }

  SolveResult out;
  if (config.keep_history) out.history.push_back(cur);
  if (config.reference && config.accelerated) {
    const auto [m0, n0] = assemble_M_N(problem, lam, t_f, t_g);
    const Metric s0(LinearMap::dense(lam * tf + sgs_operator(m0).materialize()));
    const Metric q0(LinearMap::dense(lam * tg + sgs_operator(n0).materialize()));
    out.constants = theorem2_constants(b, s0, q0, lam, tau, cur, *config.reference,
                                       problem.objective(config.reference->x, config.reference->y));
  }

  const bool kkt_ok = problem.f.has_subgradient_distance() && problem.g.has_subgradient_distance();
  const Mat gram_a = a.gram().materialize();
  const Mat gram_b = b.gram().materialize();
  const SweepBlocks xblk = make_sweep_blocks(problem.x_dims, problem.f);
  const SweepBlocks yblk = make_sweep_blocks(problem.y_dims, problem.g);
  const auto start = std::chrono::steady_clock::now();

  SolverState& st = out.state;
  st.theta_prev = config.accelerated ? 1.0 / tau : 1.0;
  Vec y_prev = cur.y;

  for (int k = 0; k < config.max_iter; ++k) {
    double theta = 1.0;
    const double theta_prev = st.theta_prev;
    Vec v = cur.y;
    if (config.accelerated) {
      theta = theta_next(theta_prev, tau);
      v = extrapolate(cur.y, y_prev, theta, theta_prev);
    }
    const double rho = config.accelerated ? lam / theta : lam;

    Iterate next;
    try {
      const Mat sx = rho * tf;
      Mat hx = rho * gram_a + sx;
      hx += problem.p;
      const Vec lx = a.apply_adjoint(cur.z + rho * (problem.c - b.apply(v))) + sx * cur.x;
      next.x = gauss_seidel(hx, problem.b + lx, xblk, cur.x, "x");

      const Mat sy = rho * tg;
      Mat hy = rho * gram_b + sy;
      hy += problem.q;
      const Vec ly = b.apply_adjoint(cur.z + rho * (problem.c - a.apply(next.x))) + sy * cur.y;
      const Vec& back = config.y_backward == BackwardAnchor::extrapolated ? v : cur.y;
      next.y = gauss_seidel(hy, problem.d + ly, yblk, back, "y");
    } catch (const SubproblemError& e) {
      throw SubproblemError("iteration " + std::to_string(k) + ": " + e.what());
    }
    const Vec r = problem.residual(next.x, next.y);
    next.z = cur.z - tau * lam * r;

    TraceRow row;
    row.k = k;
    row.theta = theta;
    row.objective = problem.objective(next.x, next.y);
    row.feasibility = r.norm();
    row.kkt_residual = kkt_ok ? problem.kkt_residual(next.x, next.y, next.z) : std::nan("");
    if (out.constants) {
      const BoundTriple bt = bound_at(*out.constants, Theorem::theorem2, k);
      row.bound_feas = bt.feas;
      row.bound_obj_lo = bt.obj_lo;
      row.bound_obj_hi = bt.obj_hi;
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
    if (kkt_done || (config.stop && config.stop(k, cur, prev, rho))) {
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

// --------------------------------------------------------------- JSON

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error("multi-block JSON " + path + ": " + msg);
}

std::vector<Eigen::Index> read_dims(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a nonempty array of positive integers");
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || j[i].get<long>() <= 0) {
      fail(path + "[" + std::to_string(i) + "]", "must be a positive integer");
    }
    out.push_back(j[i].get<long>());
  }
  return out;
}

Mat read_matrix_ref(const json& j, const std::string& path, const std::filesystem::path& base) {
  if (!j.is_string()) fail(path, "must be a matrix file path");
  const auto file = base / j.get<std::string>();
  try {
    return read_matrix_file(file.string());
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Vec read_vector(const json& j, const std::string& path, Eigen::Index n) {
  if (!j.is_array()) fail(path, "must be an array of numbers");
  if (static_cast<Eigen::Index>(j.size()) != n) {
    fail(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  }
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "must be a number");
    v(i) = j[i].get<double>();
  }
  return v;
}

ProxFunction read_prox(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) fail(path, "needs a string field kind");
  const std::string kind = j["kind"].get<std::string>();
  auto num = [&](const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) fail(path + "." + key, "must be a number");
    return j[key].get<double>();
  };
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "weight" && key != "lo" && key != "hi") fail(path + "." + key, "unknown key");
  }
  if (kind == "zero") return ProxFunction::zero();
  if (kind == "l1") return ProxFunction::l1(num("weight", 1.0));
  if (kind == "box") return ProxFunction::box(num("lo", -kInf), num("hi", kInf));
  if (kind == "nonneg") return ProxFunction::nonneg();
  fail(path + ".kind", "unknown kind '" + kind + "' (zero, l1, box, nonneg)");
}

}  // namespace

MultiBlockProblem load_multiblock_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("multi-block JSON " + path + ": " + e.what());
  }
  if (!doc.is_object()) fail("$", "must be an object");
  static const std::set<std::string> known = {"x_dims", "y_dims", "A", "B", "c", "P", "Q", "b", "d", "f", "g"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) fail("$." + key, "unknown key");
  }
  for (const char* key : {"x_dims", "y_dims", "A", "B", "c"}) {
    if (!doc.contains(key)) fail(std::string("$.") + key, "missing");
  }
  const auto base = std::filesystem::path(path).parent_path();

  MultiBlockProblem pb;
  pb.x_dims = read_dims(doc["x_dims"], "$.x_dims");
  pb.y_dims = read_dims(doc["y_dims"], "$.y_dims");
  auto read_ops = [&](const char* key, const std::vector<Eigen::Index>& dims) {
    const json& arr = doc[key];
    const std::string p = std::string("$.") + key;
    if (!arr.is_array() || arr.size() != dims.size()) {
      fail(p, "must list one matrix file per block (" + std::to_string(dims.size()) + ")");
    }
    std::vector<LinearMap> ops;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string pi = p + "[" + std::to_string(i) + "]";
      Mat mi = read_matrix_ref(arr[i], pi, base);
      if (mi.cols() != dims[i]) {
        fail(pi, "has " + std::to_string(mi.cols()) + " columns, block dimension is " + std::to_string(dims[i]));
      }
      ops.push_back(LinearMap::dense(std::move(mi)));
    }
    return ops;
  };
  pb.a_blocks = read_ops("A", pb.x_dims);
  pb.b_blocks = read_ops("B", pb.y_dims);
  const Eigen::Index m = pb.a_blocks.front().codomain_dim();
  pb.c = read_vector(doc["c"], "$.c", m);
  const Eigen::Index nx = pb.nx(), ny = pb.ny();
  pb.p = doc.contains("P") ? read_matrix_ref(doc["P"], "$.P", base) : Mat::Zero(nx, nx);
  pb.q = doc.contains("Q") ? read_matrix_ref(doc["Q"], "$.Q", base) : Mat::Zero(ny, ny);
  pb.b = doc.contains("b") ? read_vector(doc["b"], "$.b", nx) : Vec::Zero(nx);
  pb.d = doc.contains("d") ? read_vector(doc["d"], "$.d", ny) : Vec::Zero(ny);
  if (doc.contains("f")) pb.f = read_prox(doc["f"], "$.f");
  if (doc.contains("g")) pb.g = read_prox(doc["g"], "$.g");
  pb.validate();
  return pb;
}

}  // namespace aspadmm
