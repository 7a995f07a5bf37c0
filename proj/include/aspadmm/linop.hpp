#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace aspadmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Immutable linear operator. Copies share the underlying realization.
class LinearMap {
 public:
  struct Node;

  static LinearMap dense(Mat m);
  static LinearMap identity(Eigen::Index n, double scale = 1.0);
  static LinearMap zero(Eigen::Index rows, Eigen::Index cols);
  // [A1 A2 ...]: the domain is the concatenation of the blocks' domains.
  static LinearMap hstack(const std::vector<LinearMap>& blocks);
  // [A1; A2; ...]: the codomain is the concatenation of the blocks' codomains.
  static LinearMap vstack(const std::vector<LinearMap>& blocks);
  // Block grid; every row must share codomains and every column domains.
  static LinearMap block(const std::vector<std::vector<LinearMap>>& grid);

  Eigen::Index domain_dim() const;
  Eigen::Index codomain_dim() const;

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& y) const;
  Mat materialize() const;

  LinearMap adjoint() const;
  // this ∘ inner
  LinearMap compose(const LinearMap& inner) const;
  LinearMap scaled(double alpha) const;
  LinearMap plus(const LinearMap& other) const;
  // Aᵀ A
  LinearMap gram() const;

  std::string describe() const;

 private:
  explicit LinearMap(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline LinearMap operator+(const LinearMap& a, const LinearMap& b) { return a.plus(b); }
inline LinearMap operator-(const LinearMap& a, const LinearMap& b) { return a.plus(b.scaled(-1.0)); }
inline LinearMap operator*(double alpha, const LinearMap& a) { return a.scaled(alpha); }
inline LinearMap operator*(const LinearMap& a, const LinearMap& b) { return a.compose(b); }

Vec apply_forward(const LinearMap& map, const Vec& x);
Vec apply_adjoint(const LinearMap& map, const Vec& y);

struct PsdCertificate {
  bool ok = false;
  double min_eig = 0.0;
  double max_abs_eig = 0.0;
};

enum class Extremal { largest, smallest };

// Dense eigensolve below this dimension, power iteration above.
inline constexpr Eigen::Index kDenseEigenLimit = 512;

double extremal_eigenvalue(const LinearMap& op, Extremal which, int max_iter = 20000,
                           double rel_tol = 1e-12);
PsdCertificate check_psd(const LinearMap& op, double tol);
// Relative tolerance: ok iff min_eig >= -rel * max|eig|.
PsdCertificate check_psd_relative(const LinearMap& op, double rel = 1e-9);

// Self-adjoint operator used as a (semi-)norm ‖x‖²_S = ⟨x, Sx⟩.
class Metric {
 public:
  Metric() = default;
  explicit Metric(LinearMap op);

  static Metric zero(Eigen::Index n);
  static Metric scaled_identity(Eigen::Index n, double alpha);
  // Runs check_psd_relative and throws NotPsdError on failure.
  static Metric certified(LinearMap op, double rel_tol = 1e-9);

  const LinearMap& op() const { return op_; }
  Eigen::Index dim() const { return op_.domain_dim(); }
  bool psd_certified() const { return certified_; }
  double certified_min_eig() const { return min_eig_; }
  const Mat& dense() const { return *dense_; }

 private:
  LinearMap op_ = LinearMap::zero(0, 0);
  std::shared_ptr<const Mat> dense_ = std::make_shared<const Mat>();
  bool certified_ = false;
  double min_eig_ = 0.0;
};

double metric_norm_sq(const Metric& s, const Vec& x);

// Max |⟨Su, v⟩ - ⟨u, Sv⟩| / scale over random draws.
double self_adjointness_defect(const LinearMap& op, int draws, unsigned seed);

Mat read_matrix_text(std::istream& in);
void write_matrix_text(std::ostream& out, const Mat& m);
Mat read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Mat& m);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace aspadmm
