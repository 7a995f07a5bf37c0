#pragma once

#include "aspadmm/linop.hpp"

namespace aspadmm {

// Smooth convex component h of the MCP / SCAD penalties; the nonconvex
// penalty is |x| - h(x).
struct DcPenalty {
  enum class Kind { mcp, scad };
  Kind kind = Kind::mcp;
  double gamma1 = 1.0;  // γ for MCP
  double gamma2 = 1.0;

  static DcPenalty mcp(double gamma);
  static DcPenalty scad(double gamma1, double gamma2);
};

double dc_h_eval(const DcPenalty& p, double x);
// a.e. derivative; the average of one-sided derivatives at breakpoints.
double dc_h_grad(const DcPenalty& p, double x);

// Surrogate f̂(χ) = (a²/4)χ² - (a²/2)χ + aχ + (a-2)₊²/4 restricted to [0,1] (+inf elsewhere).
double phi_f0(double a, double chi);
// Conjugate of phi_f0 in closed form.
double conj_f0_star(double a, double u);
double conj_f0_star_deriv(double a, double u);

// Σ_j f0*(scale·|z_j|) when use_abs, Σ_j f0*(scale·z_j) otherwise.
double h_separable(const Vec& z, double a, double scale, bool use_abs);
Vec grad_h_separable(const Vec& z, double a, double scale, bool use_abs);

}  // namespace aspadmm
