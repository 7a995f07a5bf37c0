#pragma once

#include "aspadmm/linop.hpp"
#include "aspadmm/prox.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aspadmm {

// f(x) = ½⟨x, Px⟩ - ⟨q, x⟩ + φ(x), with Σ the strong-convexity operator of f.
struct BlockSpec {
  Eigen::Index dim = 0;
  std::optional<Mat> quad;  // P
  Vec linear;               // q
  ProxFunction prox = ProxFunction::zero();
  Metric sigma;

  // Σ defaults to P for a quadratic block and to zero otherwise.
  static BlockSpec make(Eigen::Index dim, std::optional<Mat> quad, Vec linear, ProxFunction prox,
                        std::optional<Metric> sigma = std::nullopt);

  double eval(const Vec& x) const;
  // dist(g, ∂f(x))
  double subgradient_distance(const Vec& x, const Vec& g) const;
};

// min f(x) + g(y)  s.t.  Ax + By = c
struct TwoBlockProblem {
  LinearMap a = LinearMap::zero(0, 0);
  LinearMap b = LinearMap::zero(0, 0);
  Vec c;
  BlockSpec f, g;

  void validate() const;
  double objective(const Vec& x, const Vec& y) const;
  Vec residual(const Vec& x, const Vec& y) const;  // Ax + By - c
};

enum class Mode { spadmm, aspadmm };

enum class Strategy {
  linear_solve,           // quadratic block without prox part: dense solve
  prox_via_majorization,  // P + M must equal ηI
  prox_direct,            // no quadratic part, M must equal ηI
};

// Proximal term per iteration; `penalty` is the current λ/θᵏ.
class ProximalSchedule {
 public:
  using Rule = std::function<Metric(int k, double penalty)>;

  ProximalSchedule() = default;
  static ProximalSchedule fixed(Metric m);
  static ProximalSchedule rule(Rule r);

  bool varies() const { return static_cast<bool>(rule_); }
  bool empty() const { return !rule_ && fixed_.dim() == 0; }
  Metric at(int k, double penalty, Eigen::Index dim) const;

 private:
  Metric fixed_;
  Rule rule_;
};

// λ_max(P)(1 + 1e-9)·I - P, which turns a quadratic x-step into a scaled identity.
Metric linearize_quadratic(const Mat& p);
// Sᵏ = penalty·λ_max(AᵀA)(1 + 1e-9)·I - penalty·AᵀA.
ProximalSchedule linearized_schedule(const LinearMap& a);

struct Reference {
  Vec x, y, z;
  std::string label = "certified";
};

struct Iterate {
  Vec x, y, z;
};

// Extra termination test evaluated after each iteration; `penalty` is the one just used.
using StopRule = std::function<bool(int k, const Iterate& cur, const Iterate& prev, double penalty)>;

struct SolverConfig {
  double lambda = 1.0;
  double tau = 0.95;
  Mode mode = Mode::aspadmm;
  ProximalSchedule s_schedule, t_schedule;
  int max_iter = 10000;
  double tol_kkt = 1e-6;
  bool stop_on_kkt = true;
  Strategy x_strategy = Strategy::linear_solve;
  Strategy y_strategy = Strategy::prox_direct;
  int schedule_check_horizon = 10;
  bool check_conditions = true;
  std::optional<Reference> reference;
  bool keep_history = false;
  // false keeps the penalty at λ in the accelerated scheme (fixed-β variant).
  bool grow_penalty = true;
  StopRule stop;
};

struct SolverState {
  int k = 0;
  Vec x, y, z;
  Vec y_prev;
  double theta = 1.0;
  double theta_prev = 1.0;
  Vec v;
};

struct TraceRow {
  int k = 0;
  double theta = 1.0;
  double objective = 0.0;
  double feasibility = 0.0;
  double kkt_residual = 0.0;
  std::optional<double> dandiao;
  std::optional<double> bound_feas, bound_obj_lo, bound_obj_hi;
  double time_ms = 0.0;
};

class IterationTrace {
 public:
  void append(const TraceRow& row);
  const std::vector<TraceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }
  void write_csv(std::ostream& out) const;

 private:
  std::vector<TraceRow> rows_;
};

inline constexpr const char* kTraceCsvHeader =
    "k,theta,objective,feasibility,kkt_residual,dandiao,bound_feas,bound_obj_lo,bound_obj_hi,time_ms";

struct BoundConstants {
  std::optional<double> c1, c2, c;
  double c3 = 0.0, c4 = 0.0;
  std::optional<double> c5, c6;
  double z_star_norm = 0.0;
  double ref_objective = 0.0;
  double lambda = 1.0, tau = 1.0;
  std::string reference_label;
};

struct SolveResult {
  SolverState state;
  IterationTrace trace;
  bool converged = false;
  int iterations = 0;
  // (x, y, z) after every iteration when SolverConfig::keep_history is set; entry 0 is the init.
  std::vector<Iterate> history;
  std::optional<BoundConstants> constants;  // set when a reference was supplied
};

double theta_next(double theta_prev, double tau);
Vec extrapolate(const Vec& y, const Vec& y_prev, double theta, double theta_prev);

// min f(x) + ½⟨x, Mx⟩ - ⟨l, x⟩
Vec solve_block_subproblem(const BlockSpec& block, const Mat& m, const Vec& l, Strategy strategy);
// Anchor form: min f(x) + ½‖x - r‖²_M.
Vec solve_block_subproblem_anchor(const BlockSpec& block, const Metric& m, const Vec& r,
                                  Strategy strategy);

SolveResult run_spadmm(const TwoBlockProblem& problem, const SolverConfig& config,
                       const std::optional<Iterate>& init = std::nullopt);
SolveResult run_aspadmm(const TwoBlockProblem& problem, const SolverConfig& config,
                        const std::optional<Iterate>& init = std::nullopt);

double kkt_residual(const TwoBlockProblem& problem, const Vec& x, const Vec& y, const Vec& z);


// m-factor of the τ < 1 branch of the sPADMM bound constants; nullopt at τ = 1.
std::optional<double> theorem1_m_factor(double tau, double lambda);

// C3..C6 need only the init; C1, C2 additionally need iterate 1.
BoundConstants bound_constants(const TwoBlockProblem& problem, const SolverConfig& config,
                               const Iterate& init, const Reference& reference,
                               const std::optional<Iterate>& iterate1 = std::nullopt);

// C3, C4 for explicit initial metrics S⁰, T⁰ (used by reductions to the two-block scheme).
BoundConstants theorem2_constants(const LinearMap& b, const Metric& s0, const Metric& t0, double lambda,
                                  double tau, const Iterate& init, const Reference& reference,
                                  double ref_objective);

enum class Theorem { theorem1, theorem2 };

struct BoundReport {
  struct Violation {
    int k;
    std::string what;
    double value;
    double bound;
  };
  std::vector<Violation> violations;
  int checked_rows = 0;
  bool certified() const { return violations.empty(); }
};

// Bound at K for the feasibility and two-sided objective-gap inequalities.
struct BoundTriple {
  std::optional<double> feas, obj_lo, obj_hi;
};
BoundTriple bound_at(const BoundConstants& c, Theorem which, int big_k);

BoundReport verify_bounds(const IterationTrace& trace, const BoundConstants& constants,
                          Theorem which, double slack = 1e-8);

// (1/τλ)‖zᵏ - zᵏ⁻¹‖² + λ‖B(yᵏ - yᵏ⁻¹)‖² + ‖xᵏ - xᵏ⁻¹‖²_S + ‖yᵏ - yᵏ⁻¹‖²_T
double dandiao_quantity(const TwoBlockProblem& problem, const Metric& s, const Metric& t,
                        double lambda, double tau, const Iterate& cur, const Iterate& prev);

}  // namespace aspadmm
