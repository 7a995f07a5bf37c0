#include "aspadmm/dc.hpp"

#include "aspadmm/error.hpp"
#include "aspadmm/prox.hpp"

#include <algorithm>
#include <cmath>

namespace aspadmm {

DcPenalty DcPenalty::mcp(double gamma) {
  if (!(gamma > 0.0)) throw Error("MCP needs gamma > 0");
  return {Kind::mcp, gamma, gamma};
}

DcPenalty DcPenalty::scad(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0) || gamma2 < gamma1) throw Error("SCAD needs 0 < gamma1 <= gamma2");
  return {Kind::scad, gamma1, gamma2};
}

double dc_h_eval(const DcPenalty& p, double x) {
  const double ax = std::abs(x);
  if (p.kind == DcPenalty::Kind::mcp) {
    const double g = p.gamma1;
    return ax <= g ? x * x / (2.0 * g) : ax - g / 2.0;
  }
  const double g1 = p.gamma1, g2 = p.gamma2;
  if (ax <= g1) return 0.0;
  if (ax <= g2) return (x * x - 2.0 * g1 * ax + g1 * g1) / (2.0 * (g2 - g1));
  return ax - (g1 + g2) / 2.0;
}

namespace {

double h_grad_abs(const DcPenalty& p, double ax) {
  if (p.kind == DcPenalty::Kind::mcp) {
    const double g = p.gamma1;
    if (ax < g) return ax / g;
    if (ax > g) return 1.0;
    return 0.5 * (ax / g + 1.0);
  }
  const double g1 = p.gamma1, g2 = p.gamma2;
  const double mid = g2 > g1 ? (ax - g1) / (g2 - g1) : 1.0;
  if (ax < g1) return 0.0;
  if (ax == g1) return 0.5 * (0.0 + (g2 > g1 ? 0.0 : 1.0));
  if (ax < g2) return mid;
  if (ax == g2) return 0.5 * (mid + 1.0);
  return 1.0;
}

}  // namespace

double dc_h_grad(const DcPenalty& p, double x) {
  if (x == 0.0) return 0.0;
  return std::copysign(h_grad_abs(p, std::abs(x)), x);
}

double phi_f0(double a, double chi) {
  if (chi < 0.0 || chi > 1.0) return kInf;
  const double c = std::max(a - 2.0, 0.0);
  return a * a / 4.0 * chi * chi - a * a / 2.0 * chi + a * chi + c * c / 4.0;
}

double conj_f0_star(double a, double u) {
  if (a < 2.0) throw Error("surrogate parameter a must be >= 2");
  const double c = std::max(a - 2.0, 0.0);
  const double c2 = c * c / 4.0;
  const double lo = (2.0 * a - a * a) / 2.0;
  if (u <= lo) return -c2;
  if (u < a) {
    const double s = (a * a - 2.0 * a) / 2.0 + u;
    return s * s / (a * a) - c2;
  }
  return u - 1.0;
}

double conj_f0_star_deriv(double a, double u) {
  if (a < 2.0) throw Error("surrogate parameter a must be >= 2");
  const double s = 2.0 * (u + (a * a - 2.0 * a) / 2.0) / (a * a);
  return std::clamp(s, 0.0, 1.0);
}

double h_separable(const Vec& z, double a, double scale, bool use_abs) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    s += conj_f0_star(a, scale * (use_abs ? std::abs(z(j)) : z(j)));
  }
  return s;
}

Vec grad_h_separable(const Vec& z, double a, double scale, bool use_abs) {
  Vec g(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (!use_abs) {
      g(j) = scale * conj_f0_star_deriv(a, scale * z(j));
    } else if (z(j) == 0.0) {
      g(j) = 0.0;  // midpoint of the two one-sided derivatives
    } else {
      g(j) = std::copysign(scale * conj_f0_star_deriv(a, scale * std::abs(z(j))), z(j));
    }
  }
  return g;
}

}  // namespace aspadmm
