#include "aspadmm/apps.hpp"
#include "aspadmm/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace aspadmm {

double diagnostics_gap(double pobj, double dobj) {
  return std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
}

double diagnostics_pfeas(const Vec& z, const Vec& g, const Vec& m) {
  if (g.size() != z.size()) throw DimensionError("pfeas block G", z.size(), g.size());
  if (m.size() != z.size()) throw DimensionError("pfeas block M", z.size(), m.size());
  return (z - g - m).norm() / (1.0 + z.norm() + g.norm() + m.norm());
}

double relative_mismatch(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionError("relative mismatch", a.size(), b.size());
  return (a - b).norm() / (1.0 + a.norm() + b.norm());
}

namespace {

// Solve the unconstrained problem on the passive set; zero elsewhere.
Vec passive_solve(const Mat& h, const Vec& q, const std::vector<char>& passive) {
  std::vector<Eigen::Index> idx;
  for (std::size_t j = 0; j < passive.size(); ++j)
    if (passive[j]) idx.push_back(static_cast<Eigen::Index>(j));
  Vec t = Vec::Zero(q.size());
  if (idx.empty()) return t;
  const Mat hp = h(idx, idx);
  Eigen::LLT<Mat> llt(hp);
  if (llt.info() != Eigen::Success) throw SubproblemError("nnqp: Hessian is not positive definite");
  const Vec tp = llt.solve(-q(idx));
  for (std::size_t i = 0; i < idx.size(); ++i) t(idx[i]) = tp(static_cast<Eigen::Index>(i));
  return t;
}

// Move s toward the passive-set minimizer while keeping it feasible.
void restore_feasibility(const Mat& h, const Vec& q, std::vector<char>& passive, Vec& s) {
  const auto n = static_cast<std::size_t>(q.size());
  for (std::size_t guard = 0; guard <= n + 1; ++guard) {
    const Vec t = passive_solve(h, q, passive);
    double alpha = 1.0;
    std::size_t hit = n;
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (!passive[j] || t(jj) > 0.0) continue;
      const double d = s(jj) - t(jj);
      const double a = d > 0.0 ? s(jj) / d : 0.0;
      if (hit == n || a < alpha) {
        alpha = a;
        hit = j;
      }
    }
    if (hit == n) {
      s = t;
      return;
    }
    s += alpha * (t - s);
    s(static_cast<Eigen::Index>(hit)) = 0.0;
    passive[hit] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (passive[j] && s(jj) <= 1e-15) passive[j] = 0;
      if (!passive[j]) s(jj) = 0.0;
    }
  }
  throw SubproblemError("nnqp: passive-set loop did not terminate");
}

}  // namespace

Vec nnqp(const Mat& h, const Vec& q, const std::optional<Vec>& warm, int max_iter) {
  const Eigen::Index n = q.size();
  if (h.rows() != n || h.cols() != n) throw DimensionError("nnqp Hessian", static_cast<std::size_t>(n),
                                                           static_cast<std::size_t>(h.rows()));
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  Vec s = Vec::Zero(n);
  if (warm) {
    if (warm->size() != n) throw DimensionError("nnqp warm start", n, warm->size());
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((*warm)(j) > 0.0) {
        passive[static_cast<std::size_t>(j)] = 1;
        s(j) = (*warm)(j);
      }
    }
    restore_feasibility(h, q, passive, s);
  }
  const double scale = 1.0 + (n > 0 ? q.cwiseAbs().maxCoeff() : 0.0);
  for (int it = 0; it < max_iter; ++it) {
    const Vec w = -(h * s + q);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)] || !(w(j) > 1e-13 * scale)) continue;
      if (best < 0 || w(j) > w(best)) best = j;
    }
    if (best < 0) return s;
    passive[static_cast<std::size_t>(best)] = 1;
    restore_feasibility(h, q, passive, s);
  }
  throw SubproblemError("nnqp: no convergence after " + std::to_string(max_iter) + " active-set steps");
}

}  // namespace aspadmm
