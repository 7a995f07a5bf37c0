#include "aspadmm/linop.hpp"

#include "aspadmm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace aspadmm {

struct LinearMap::Node {
  virtual ~Node() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Vec apply(const Vec& x) const = 0;
  virtual Vec apply_adjoint(const Vec& y) const = 0;
  virtual Mat materialize() const = 0;
  virtual std::string describe() const = 0;
};

namespace {

using Node = LinearMap::Node;
using NodePtr = std::shared_ptr<const Node>;

struct DenseNode final : Node {
  Mat m;
  explicit DenseNode(Mat mat) : m(std::move(mat)) {}
  Eigen::Index rows() const override { return m.rows(); }
  Eigen::Index cols() const override { return m.cols(); }
  Vec apply(const Vec& x) const override { return m * x; }
  Vec apply_adjoint(const Vec& y) const override { return m.transpose() * y; }
  Mat materialize() const override { return m; }
  std::string describe() const override {
    return "dense(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
  }
};

struct ScaledIdentityNode final : Node {
  Eigen::Index n;
  double alpha;
  ScaledIdentityNode(Eigen::Index dim, double a) : n(dim), alpha(a) {}
  Eigen::Index rows() const override { return n; }
  Eigen::Index cols() const override { return n; }
  Vec apply(const Vec& x) const override { return alpha * x; }
  Vec apply_adjoint(const Vec& y) const override { return alpha * y; }
  Mat materialize() const override { return alpha * Mat::Identity(n, n); }
  std::string describe() const override {
    return format_double(alpha) + "*I(" + std::to_string(n) + ")";
  }
};

struct ZeroNode final : Node {
  Eigen::Index r, c;
  ZeroNode(Eigen::Index rr, Eigen::Index cc) : r(rr), c(cc) {}
  Eigen::Index rows() const override { return r; }
  Eigen::Index cols() const override { return c; }
  Vec apply(const Vec&) const override { return Vec::Zero(r); }
  Vec apply_adjoint(const Vec&) const override { return Vec::Zero(c); }
  Mat materialize() const override { return Mat::Zero(r, c); }
  std::string describe() const override {
    return "zero(" + std::to_string(r) + "x" + std::to_string(c) + ")";
  }
};

// Grid of blocks; row heights and column widths fixed at construction.
struct BlockNode final : Node {
  std::vector<std::vector<NodePtr>> grid;
  std::vector<Eigen::Index> row_off, col_off;

  Eigen::Index rows() const override { return row_off.back(); }
  Eigen::Index cols() const override { return col_off.back(); }

  Vec apply(const Vec& x) const override {
    Vec y = Vec::Zero(rows());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        const auto& b = grid[i][j];
        y.segment(row_off[i], b->rows()) += b->apply(x.segment(col_off[j], b->cols()));
      }
    }
    return y;
  }
  Vec apply_adjoint(const Vec& y) const override {
    Vec x = Vec::Zero(cols());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        const auto& b = grid[i][j];
        x.segment(col_off[j], b->cols()) += b->apply_adjoint(y.segment(row_off[i], b->rows()));
      }
    }
    return x;
  }
  Mat materialize() const override {
    Mat m(rows(), cols());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        const auto& b = grid[i][j];
        m.block(row_off[i], col_off[j], b->rows(), b->cols()) = b->materialize();
      }
    }
    return m;
  }
  std::string describe() const override {
    std::string s = "block[";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (i) s += "; ";
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        if (j) s += ", ";
        s += grid[i][j]->describe();
      }
    }
    return s + "]";
  }
};

struct AdjointNode final : Node {
  NodePtr inner;
  explicit AdjointNode(NodePtr n) : inner(std::move(n)) {}
  Eigen::Index rows() const override { return inner->cols(); }
  Eigen::Index cols() const override { return inner->rows(); }
  Vec apply(const Vec& x) const override { return inner->apply_adjoint(x); }
  Vec apply_adjoint(const Vec& y) const override { return inner->apply(y); }
  Mat materialize() const override { return inner->materialize().transpose(); }
  std::string describe() const override { return "adj(" + inner->describe() + ")"; }
};

struct ComposeNode final : Node {
  NodePtr outer, inner;
  ComposeNode(NodePtr o, NodePtr i) : outer(std::move(o)), inner(std::move(i)) {}
  Eigen::Index rows() const override { return outer->rows(); }
  Eigen::Index cols() const override { return inner->cols(); }
  Vec apply(const Vec& x) const override { return outer->apply(inner->apply(x)); }
  Vec apply_adjoint(const Vec& y) const override {
    return inner->apply_adjoint(outer->apply_adjoint(y));
  }
  Mat materialize() const override { return outer->materialize() * inner->materialize(); }
  std::string describe() const override {
    return outer->describe() + "*" + inner->describe();
  }
};

struct ScaledNode final : Node {
  NodePtr inner;
  double alpha;
  ScaledNode(NodePtr n, double a) : inner(std::move(n)), alpha(a) {}
  Eigen::Index rows() const override { return inner->rows(); }
  Eigen::Index cols() const override { return inner->cols(); }
  Vec apply(const Vec& x) const override { return alpha * inner->apply(x); }
  Vec apply_adjoint(const Vec& y) const override { return alpha * inner->apply_adjoint(y); }
  Mat materialize() const override { return alpha * inner->materialize(); }
  std::string describe() const override {
    return format_double(alpha) + "*(" + inner->describe() + ")";
  }
};

struct SumNode final : Node {
  NodePtr a, b;
  SumNode(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
  Eigen::Index rows() const override { return a->rows(); }
  Eigen::Index cols() const override { return a->cols(); }
  Vec apply(const Vec& x) const override { return a->apply(x) + b->apply(x); }
  Vec apply_adjoint(const Vec& y) const override {
    return a->apply_adjoint(y) + b->apply_adjoint(y);
  }
  Mat materialize() const override { return a->materialize() + b->materialize(); }
  std::string describe() const override {
    return "(" + a->describe() + " + " + b->describe() + ")";
  }
};

void require_dim(const char* what, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw DimensionError(what, static_cast<std::size_t>(expected), static_cast<std::size_t>(got));
  }
}

}  // namespace

LinearMap LinearMap::dense(Mat m) { return LinearMap(std::make_shared<DenseNode>(std::move(m))); }

LinearMap LinearMap::identity(Eigen::Index n, double scale) {
  return LinearMap(std::make_shared<ScaledIdentityNode>(n, scale));
}

LinearMap LinearMap::zero(Eigen::Index rows, Eigen::Index cols) {
  return LinearMap(std::make_shared<ZeroNode>(rows, cols));
}

LinearMap LinearMap::block(const std::vector<std::vector<LinearMap>>& grid) {
  if (grid.empty() || grid.front().empty()) throw Error("block map needs at least one block");
  auto node = std::make_shared<BlockNode>();
  const std::size_t ncols = grid.front().size();
  node->row_off.push_back(0);
  node->col_off.push_back(0);
  for (std::size_t j = 0; j < ncols; ++j) {
    node->col_off.push_back(node->col_off.back() + grid.front()[j].domain_dim());
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != ncols) require_dim("block map row length", ncols, grid[i].size());
    const Eigen::Index h = grid[i].front().codomain_dim();
    std::vector<NodePtr> row;
    for (std::size_t j = 0; j < ncols; ++j) {
      require_dim("block map row height", h, grid[i][j].codomain_dim());
      require_dim("block map column width", node->col_off[j + 1] - node->col_off[j],
                  grid[i][j].domain_dim());
      row.push_back(grid[i][j].node_);
    }
    node->grid.push_back(std::move(row));
    node->row_off.push_back(node->row_off.back() + h);
  }
  return LinearMap(node);
}

LinearMap LinearMap::hstack(const std::vector<LinearMap>& blocks) { return block({blocks}); }

LinearMap LinearMap::vstack(const std::vector<LinearMap>& blocks) {
  std::vector<std::vector<LinearMap>> grid;
  for (const auto& b : blocks) grid.push_back({b});
  return block(grid);
}

Eigen::Index LinearMap::domain_dim() const { return node_->cols(); }
Eigen::Index LinearMap::codomain_dim() const { return node_->rows(); }

Vec LinearMap::apply(const Vec& x) const {
  require_dim("apply_forward", domain_dim(), x.size());
  return node_->apply(x);
}

Vec LinearMap::apply_adjoint(const Vec& y) const {
  require_dim("apply_adjoint", codomain_dim(), y.size());
  return node_->apply_adjoint(y);
}

Mat LinearMap::materialize() const { return node_->materialize(); }

LinearMap LinearMap::adjoint() const { return LinearMap(std::make_shared<AdjointNode>(node_)); }

LinearMap LinearMap::compose(const LinearMap& inner) const {
  require_dim("compose", domain_dim(), inner.codomain_dim());
  return LinearMap(std::make_shared<ComposeNode>(node_, inner.node_));
}

LinearMap LinearMap::scaled(double alpha) const {
  return LinearMap(std::make_shared<ScaledNode>(node_, alpha));
}

LinearMap LinearMap::plus(const LinearMap& other) const {
  require_dim("sum rows", codomain_dim(), other.codomain_dim());
  require_dim("sum cols", domain_dim(), other.domain_dim());
  return LinearMap(std::make_shared<SumNode>(node_, other.node_));
}

LinearMap LinearMap::gram() const { return adjoint().compose(*this); }

std::string LinearMap::describe() const { return node_->describe(); }

Vec apply_forward(const LinearMap& map, const Vec& x) { return map.apply(x); }
Vec apply_adjoint(const LinearMap& map, const Vec& y) { return map.apply_adjoint(y); }

namespace {

Vec random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v / v.norm();
}

// Largest eigenvalue of a PSD operator x ↦ op(x) + shift·x.
double power_largest(const LinearMap& op, double shift, int max_iter, double rel_tol) {
  std::mt19937_64 rng(0x5eed);
  Vec v = random_unit(op.domain_dim(), rng);
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = op.apply(v) + shift * v;
    const double next = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 0 && std::abs(next - est) <= rel_tol * std::max(1.0, std::abs(next))) return next;
    est = next;
  }
  throw ConvergenceError("power iteration did not converge", est);
}

}  // namespace

double extremal_eigenvalue(const LinearMap& op, Extremal which, int max_iter, double rel_tol) {
  require_dim("extremal_eigenvalue (square)", op.codomain_dim(), op.domain_dim());
  const Eigen::Index n = op.domain_dim();
  if (n == 0) return 0.0;
  if (n < kDenseEigenLimit) {
    const Mat m = op.materialize();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolve failed", 0.0);
    return which == Extremal::largest ? es.eigenvalues()(n - 1) : es.eigenvalues()(0);
  }
  // Spectral radius bound, then shift so the wanted end is dominant.
  std::mt19937_64 rng(0xb0b);
  Vec v = random_unit(n, rng);
  double rho = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec w = op.apply(v);
    rho = std::max(rho, w.norm());
    if (w.norm() == 0.0) break;
    v = w / w.norm();
  }
  rho = 1.01 * rho + 1e-300;
  if (which == Extremal::largest) {
    return power_largest(op, rho, max_iter, rel_tol) - rho;
  }
  return rho - power_largest(op.scaled(-1.0), rho, max_iter, rel_tol);
}

PsdCertificate check_psd(const LinearMap& op, double tol) {
  PsdCertificate cert;
  cert.min_eig = extremal_eigenvalue(op, Extremal::smallest);
  const double hi = extremal_eigenvalue(op, Extremal::largest);
  cert.max_abs_eig = std::max(std::abs(hi), std::abs(cert.min_eig));
  cert.ok = cert.min_eig >= -tol;
  return cert;
}

PsdCertificate check_psd_relative(const LinearMap& op, double rel) {
  PsdCertificate cert = check_psd(op, 0.0);
  cert.ok = cert.min_eig >= -rel * cert.max_abs_eig;
  return cert;
}

Metric::Metric(LinearMap op)
    : op_(std::move(op)), dense_(std::make_shared<const Mat>(op_.materialize())) {
  require_dim("metric (square)", op_.codomain_dim(), op_.domain_dim());
}

Metric Metric::zero(Eigen::Index n) {
  Metric m(LinearMap::zero(n, n));
  m.certified_ = true;
  return m;
}

Metric Metric::scaled_identity(Eigen::Index n, double alpha) {
  Metric m(LinearMap::identity(n, alpha));
  m.certified_ = alpha >= 0.0;
  m.min_eig_ = alpha;
  return m;
}

Metric Metric::certified(LinearMap op, double rel_tol) {
  Metric m(std::move(op));
  const PsdCertificate cert = check_psd_relative(m.op_, rel_tol);
  if (!cert.ok) throw NotPsdError("metric not PSD", cert.min_eig);
  m.certified_ = true;
  m.min_eig_ = cert.min_eig;
  return m;
}

double metric_norm_sq(const Metric& s, const Vec& x) {
  require_dim("metric_norm_sq", s.dim(), x.size());
  const double v = x.dot(s.dense() * x);
  if (v >= 0.0) return v;
  if (v >= -1e-12) return 0.0;
  throw NotPsdError("metric not PSD", v);
}

double self_adjointness_defect(const LinearMap& op, int draws, unsigned seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int d = 0; d < draws; ++d) {
    const Vec u = random_unit(op.domain_dim(), rng);
    const Vec v = random_unit(op.domain_dim(), rng);
    const double a = op.apply(u).dot(v);
    const double b = u.dot(op.apply(v));
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))));
  }
  return worst;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Mat read_matrix_text(std::istream& in) {
  long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw Error("matrix text: bad header");
  Mat m(rows, cols);
  std::string tok;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> tok)) throw Error("matrix text: truncated at entry " + std::to_string(i * cols + j));
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw Error("matrix text: malformed number '" + tok + "'");
      }
      m(i, j) = v;
    }
  }
  return m;
}

void write_matrix_text(std::ostream& out, const Mat& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Mat read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file " + path);
  return read_matrix_text(in);
}

void write_matrix_file(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write matrix file " + path);
  write_matrix_text(out, m);
}

}  // namespace aspadmm
