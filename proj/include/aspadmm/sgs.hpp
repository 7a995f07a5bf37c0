#pragma once

#include "aspadmm/admm.hpp"

#include <string>
#include <utility>
#include <vector>

namespace aspadmm {

// min f(x₁) + ½⟨x,Px⟩ - ⟨b,x⟩ + g(y₁) + ½⟨y,Qy⟩ - ⟨d,y⟩  s.t.  Σ Aᵢxᵢ + Σ Bⱼyⱼ = c
struct MultiBlockProblem {
  std::vector<Eigen::Index> x_dims, y_dims;
  std::vector<LinearMap> a_blocks, b_blocks;
  Vec c;
  Mat p, q;
  Vec b, d;
  ProxFunction f = ProxFunction::zero();
  ProxFunction g = ProxFunction::zero();

  Eigen::Index nx() const;
  Eigen::Index ny() const;
  void validate() const;

  // Full operators A = [A₁ … A_p] and B = [B₁ … B_q].
  LinearMap a() const;
  LinearMap b_op() const;

  double objective(const Vec& x, const Vec& y) const;
  Vec residual(const Vec& x, const Vec& y) const;
  double kkt_residual(const Vec& x, const Vec& y, const Vec& z) const;
};

// Operator on a partitioned space split as u + d + uᵀ.
struct BlockMatrixView {
  std::vector<Eigen::Index> dims;
  Mat d;  // block diagonal
  Mat u;  // strictly block upper

  static BlockMatrixView from_dense(const Mat& m, std::vector<Eigen::Index> dims);
  Mat full() const { return u + d + u.transpose(); }
  std::vector<Eigen::Index> offsets() const;
  Mat diag_block(std::size_t i) const;
};

// Block split of a PSD metric; empty means zero.
BlockMatrixView block_split(const Mat& m, const std::vector<Eigen::Index>& dims);

// M = P + λ(AᵀA + T_f), N = Q + λ(BᵀB + T_g).
std::pair<BlockMatrixView, BlockMatrixView> assemble_M_N(const MultiBlockProblem& problem, double lambda,
                                                         const Metric& t_f, const Metric& t_g);

struct StepCertificate {
  bool ok = true;
  std::vector<double> x_min_eigs, y_min_eigs;
  std::string message;
};

StepCertificate check_step_condition(const MultiBlockProblem& problem, double lambda, const Metric& t_f,
                                     const Metric& t_g);

// M_u M_d⁻¹ M_uᵀ
LinearMap sgs_operator(const BlockMatrixView& view);

// εI with ε = 1e-8·λ_max(M) when some diagonal block of M is singular, else zero.
Metric default_block_boost(const Mat& p, const LinearMap& a, const std::vector<Eigen::Index>& dims,
                           double lambda);

enum class Side { x, y };

// One backward (blocks n..2) then forward (1..n) Gauss-Seidel pass for the x- or y-subproblem.
struct SweepInput {
  double penalty = 1.0;
  Vec anchor;    // xᵏ or yᵏ, center of the T term
  Vec backward;  // values of earlier blocks during the backward pass
  Vec other;     // vᵏ for the x side, x^{k+1} for the y side
  Vec z;
  Mat t;         // dense T_f or T_g (unscaled)
};

Vec sgs_sweep(const MultiBlockProblem& problem, Side side, const SweepInput& in);

struct XiOperators {
  Mat xi_f, xi_g;  // as displayed, not symmetrized
};

XiOperators xi_operators(const MultiBlockProblem& problem, double lambda, double tau, const Metric& t_f,
                         const Metric& t_g);

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

struct Proposition1Report {
  struct Row {
    int k;
    double min_eig_f, min_eig_g;
  };
  std::vector<Row> rows;
  double worst = 0.0;
  bool pass = true;
};

// min-eig(sym(s·Ξ) - [sGS(M_{λ/θ^{k+1}}) - sGS(M_{λ/θᵏ})]) for k = 0..horizon; s = xi_scale.
Proposition1Report check_proposition1(const MultiBlockProblem& problem, double lambda, double tau,
                                      const Metric& t_f, const Metric& t_g, int horizon,
                                      double xi_scale = 1.0);

// Where the backward y-pass reads the earlier blocks.
enum class BackwardAnchor {
  previous_iterate,  // yᵏ, the form equivalent to the one-shot sGS update
  extrapolated,      // vᵏ as the algorithm listing shows it
};

struct SgsConfig {
  double lambda = 1.0;
  double tau = 0.95;
  bool accelerated = true;  // false: θ ≡ 1, penalty λ, no extrapolation
  std::optional<Metric> t_f, t_g;
  int max_iter = 10000;
  double tol_kkt = 1e-6;
  bool stop_on_kkt = true;
  bool check_dominance = true;
  BackwardAnchor y_backward = BackwardAnchor::previous_iterate;
  std::optional<Reference> reference;
  bool keep_history = false;
  StopRule stop;
};

SolveResult run_sgs_aspadmm(const MultiBlockProblem& problem, const SgsConfig& config,
                            const std::optional<Iterate>& init = std::nullopt);

// Loads a problem from JSON; matrix entries are paths to matrix text files relative to the document.
MultiBlockProblem load_multiblock_json(const std::string& path);

}  // namespace aspadmm
