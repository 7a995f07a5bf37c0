#pragma once

#include "aspadmm/admm.hpp"
#include "aspadmm/dc.hpp"
#include "aspadmm/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aspadmm {

// ---------------------------------------------------------------- diagnostics

// |p - d| / (1 + |p| + |d|)
double diagnostics_gap(double pobj, double dobj);
// ‖z - g - m‖ / (1 + ‖z‖ + ‖g‖ + ‖m‖)
double diagnostics_pfeas(const Vec& z, const Vec& g, const Vec& m);
// ‖a - b‖ / (1 + ‖a‖ + ‖b‖)
double relative_mismatch(const Vec& a, const Vec& b);

// min ½⟨s, Hs⟩ + ⟨q, s⟩ over s ≥ 0 for positive definite H (Lawson-Hanson active set).
// `warm` seeds the passive set with its positive entries.
Vec nnqp(const Mat& h, const Vec& q, const std::optional<Vec>& warm = std::nullopt, int max_iter = 5000);

// ---------------------------------------------------------------------- Lasso

struct LassoCertificate {
  Vec x;  // primal solution
  Vec z;  // multiplier of x - y = 0 in the split form, equals Aᵀ(Ax* - b)
};

// ½‖Ax - b‖² + λ‖x‖₁
struct LassoInstance {
  Mat a;
  Vec b;
  double lambda = 1.0;
  std::optional<LassoCertificate> certificate;
  std::uint64_t seed = 0;
};

// Reverse-engineered instance whose KKT conditions hold by construction; `sparsity` is the
// fraction of nonzeros in x*.
LassoInstance gen_lasso_certified(Eigen::Index m, Eigen::Index n, double sparsity, std::uint64_t seed,
                                  double lambda = 1.0);
// Benchmark instance: unit-norm Gaussian columns, sparse x*, b = Ax* + noise, λ = 0.1‖Aᵀb‖∞.
LassoInstance gen_lasso_trend(Eigen::Index m, Eigen::Index n, std::uint64_t seed, double density = 0.05,
                              double noise = 1e-3);

double lasso_objective(const LassoInstance& inst, const Vec& x);
// dist(0, Aᵀ(Ax - b) + λ∂‖x‖₁)
double lasso_kkt_residual(const LassoInstance& inst, const Vec& x);

// Split form min f(x) + λ‖y‖₁ s.t. x - y = 0 with f = ½‖Ax - b‖² (constant ½‖b‖² dropped).
TwoBlockProblem lasso_problem(const LassoInstance& inst);
// S = λ_max(AᵀA)·I - AᵀA
Metric lasso_proximal_term(const LassoInstance& inst);

enum class LassoArm {
  aspadmm,         // fixed β with θ-extrapolation on the y-block
  aspadmm_growing, // penalty β/θᵏ
  spadmm,          // θ ≡ 1
};

struct LassoOptions {
  double beta = 1.0;
  double tau = 0.9;
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  int max_iter = 20000;
  LassoArm arm = LassoArm::aspadmm;
  bool use_certificate = true;  // feed the certificate to the solver as the bound reference
};

struct LassoResult {
  Vec x, y;
  Vec mu;  // multiplier in the sign convention of the x-update (μ = -z)
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;  // at y
  double r_norm = 0.0, s_norm = 0.0, eps_pri = 0.0, eps_dual = 0.0;
  IterationTrace trace;
  std::optional<BoundConstants> constants;
};

LassoResult lasso_run(const LassoInstance& inst, const LassoOptions& opts);

// ------------------------------------------------------------- mixed sparsity

// ½‖Ax - b‖² + λ₁‖x‖_{2,0} + λ₂‖x‖₀ over groups G₁..G_N.
struct MixedSparseInstance {
  Mat a;
  Vec b;
  std::vector<std::vector<Eigen::Index>> groups;
  double lambda1 = 1e-4, lambda2 = 1e-6;
  double rho1 = 3.3e-5, rho2 = 3e-6;
  double a_param = 2.0;
  std::optional<double> eta;  // PMM weight; derived from β, τ when absent
  Vec x_true;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return a.cols(); }
  void validate() const;
};

MixedSparseInstance gen_mixed_instance(Eigen::Index m, Eigen::Index n, Eigen::Index num_groups,
                                       Eigen::Index nonzero_groups, Eigen::Index per_group,
                                       std::uint64_t seed, double noise = 1e-3);

// N×n matrix with a unit entry at (i, j) for j ∈ G_i.
Mat group_operator(const std::vector<std::vector<Eigen::Index>>& groups, Eigen::Index n);

struct MixedReformulation {
  Mat a_split;  // (A, -A)
  Mat link;     // (B, B), or (B, -B) when literal_link
  Mat group;    // B
  bool literal_link = false;
};

MixedReformulation mixed_reformulate(const MixedSparseInstance& inst, bool literal_link = false);

// (x⁺; x⁻) and its inverse z₁ - z₂.
Vec split_nonneg(const Vec& x);
Vec merge_split(const Vec& z);

double mixed_objective(const MixedSparseInstance& inst, const Vec& x);
// Split objective ½‖(A,-A)z - b‖² + λ₁‖y‖₀ + λ₂‖z‖₀ (constraints not checked).
double mixed_split_objective(const MixedSparseInstance& inst, const Vec& z, const Vec& y);
// Penalized DC objective at s⁺ = max(s, 0) with y = link·s⁺.
double mixed_penalized_objective(const MixedSparseInstance& inst, const MixedReformulation& reform,
                                 const Vec& s);
// Twice the smallest η allowed by the step-size remark of the inner scheme.
double mixed_default_eta(const MixedSparseInstance& inst, double beta, double tau);

enum class MixedSMode {
  unconstrained,  // gradient set to zero, s ≥ 0 dropped
  projected,      // exact bound-constrained QP
};

struct MixedOptions {
  double beta = 0.05;
  double tau = 0.99;
  bool accelerated = true;
  MixedSMode mode = MixedSMode::unconstrained;
  bool literal_link = false;
  int inner_max = 200;
  double inner_tol = 1e-6;
  double outer_tol = 1e-4;
  int outer_max = 30;
};

struct MixedInnerTrace {
  IterationTrace trace;  // objective = pobj, feasibility = ‖Cs - y‖ + ‖z - s‖, kkt_residual = error
  std::vector<double> pobj, dobj, eps_gap, eps_p1, eps_p2, error;
  std::vector<double> neg_violation;  // max(0, -min s) after the full s-step
  int iterations = 0;
  bool converged = false;
};

struct MixedResult {
  Vec x, z, y;
  int outer_iterations = 0;
  bool converged = false;
  double eta = 0.0;
  std::vector<MixedInnerTrace> inner;
  std::vector<double> outer_objective;  // penalized objective after each outer step
};

MixedResult mixed_pmm_run(const MixedSparseInstance& inst, const MixedOptions& opts);

// ------------------------------------------------------------ tensor completion

// min TNN(G) - H₁(G) + λ(‖M‖₁ - H₂(M)) s.t. Π_Ω(G + M) = Π_Ω(Y), ‖G‖ ≤ j₁, ‖M‖∞ ≤ j₂.
struct RtcInstance {
  Tensor3 x_true;
  Tensor3 observed;                 // corrupted data; only Ω entries are meaningful
  std::vector<Eigen::Index> omega;  // sorted flat indices
  double sr = 1.0, alpha = 0.0;
  double j1 = 1e3, j2 = 1.0;
  double lambda = 0.0;
  double eta = 1.0;
  DcPenalty penalty_g = DcPenalty::mcp(1.0);
  DcPenalty penalty_m = DcPenalty::mcp(1.0);
  std::uint64_t seed = 0;

  void validate() const;
};

Tensor3 tproduct(const Tensor3& a, const Tensor3& b);

RtcInstance gen_rtc_instance(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3, Eigen::Index rank,
                             double sr, double alpha, std::uint64_t seed);

enum class RtcArm { sgs_aspadmm, sgs_spadmm, admm3d };

struct RtcOptions {
  double beta = 0.1;
  double tau = 0.95;
  RtcArm arm = RtcArm::sgs_aspadmm;
  int inner_max = 200;
  double inner_tol = 1e-4;
  double outer_tol = 1e-4;
  int outer_max = 30;
};

struct RtcInnerTrace {
  IterationTrace trace;  // objective = pobj, feasibility = ‖Z - G - M‖, kkt_residual = error
  std::vector<double> pobj, dobj, eps_gap, eps_p, error;
  int iterations = 0;
  bool converged = false;
  bool omega_pinned = true;  // every Z-iterate matched the data on Ω exactly
  double max_m_inf = 0.0;     // largest ‖M‖∞ seen
  double max_g_spec = 0.0;    // largest tensor spectral norm of G seen
};

struct RtcResult {
  Tensor3 g, m, z;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<RtcInnerTrace> inner;
  std::vector<int> inner_iterations;
  std::vector<double> outer_objective;
};

// Throws SetupError unless τ ∈ (2 - √(1 + η/(2β)), 1).
void check_rtc_tau(double tau, double eta, double beta);

double rtc_objective(const RtcInstance& inst, const Tensor3& g, const Tensor3& m);

RtcResult rtc_pmm_run(const RtcInstance& inst, const RtcOptions& opts);

// ------------------------------------------------------------- serialization

// JSON document plus sibling matrix/tensor files named <stem>.<part>.txt / .bin.
void save_lasso_instance(const std::string& path, const LassoInstance& inst);
LassoInstance load_lasso_instance(const std::string& path);
void save_mixed_instance(const std::string& path, const MixedSparseInstance& inst);
MixedSparseInstance load_mixed_instance(const std::string& path);
void save_rtc_instance(const std::string& path, const RtcInstance& inst);
RtcInstance load_rtc_instance(const std::string& path);

}  // namespace aspadmm
