#include "aspadmm/dc.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace aspadmm;
using testutil::conj_oracle;
using testutil::randn;

TEST_SUITE("dc") {

TEST_CASE("MCP pieces") {
  const DcPenalty p = DcPenalty::mcp(1.0);
  CHECK(dc_h_eval(p, 0.0) == 0.0);
  // Both branches at the breakpoint: x²/(2γ) and |x| - γ/2.
  CHECK(dc_h_eval(p, 1.0) == doctest::Approx(0.5));
  CHECK(dc_h_eval(p, 1.0 - 1e-13) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dc_h_eval(p, 1.0 + 1e-13) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dc_h_grad(p, 0.0) == 0.0);
  CHECK(dc_h_grad(p, -3.0) == doctest::Approx(-1.0));
}

TEST_CASE("SCAD third branch and continuity") {
  const DcPenalty p = DcPenalty::scad(1.0, 3.0);
  CHECK(dc_h_eval(p, 4.0) == doctest::Approx(2.0));
  // Integrate h' numerically from 0 to 4.
  double integral = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) integral += dc_h_grad(p, (i + 0.5) * 4.0 / n) * 4.0 / n;
  CHECK(integral == doctest::Approx(2.0).epsilon(1e-6));
  for (double bp : {1.0, 3.0}) {
    CHECK(std::abs(dc_h_eval(p, bp - 1e-13) - dc_h_eval(p, bp + 1e-13)) <= 1e-12);
  }
}

TEST_CASE("h is convex, even and nonnegative") {
  for (const DcPenalty& p : {DcPenalty::mcp(0.7), DcPenalty::scad(0.5, 2.5)}) {
    for (double x = -5; x <= 5; x += 0.05) {
      CHECK(dc_h_eval(p, x) >= 0.0);
      CHECK(dc_h_eval(p, x) == doctest::Approx(dc_h_eval(p, -x)));
      CHECK(dc_h_eval(p, x) <= 0.5 * (dc_h_eval(p, x - 0.1) + dc_h_eval(p, x + 0.1)) + 1e-12);
    }
  }
}

TEST_CASE("conjugate closed form against the grid oracle") {
  CHECK(conj_f0_star(2.0, -1.0) == doctest::Approx(0.0));
  CHECK(conj_f0_star(2.0, 1.0) == doctest::Approx(0.25));
  CHECK(conj_f0_star(2.0, 2.0) == doctest::Approx(1.0));
  for (double a : {2.0, 3.5}) {
    for (int i = 0; i <= 200; ++i) {
      const double u = -4.0 + 0.05 * i;
      CHECK(conj_f0_star(a, u) == doctest::Approx(conj_oracle(a, u)).epsilon(1e-6));
    }
  }
}

TEST_CASE("separable gradient") {
  const double a = 2.0, k = 0.33;
  CHECK(grad_h_separable(Vec::Zero(4), a, k, true).norm() == 0.0);
  // Scaled value beyond a: derivative of the u - 1 branch is the scale itself.
  const Vec big = (Vec(2) << 10.0 / k, -10.0 / k).finished();
  const Vec g = grad_h_separable(big, a, k, true);
  CHECK(g(0) == doctest::Approx(k));
  CHECK(g(1) == doctest::Approx(-k));

  const Vec z = randn(6, 5) * 3.0;
  for (bool use_abs : {false, true}) {
    const Vec gz = grad_h_separable(z, a, k, use_abs);
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      Vec zp = z, zm = z;
      zp(j) += 1e-6;
      zm(j) -= 1e-6;
      const double fd = (h_separable(zp, a, k, use_abs) - h_separable(zm, a, k, use_abs)) / 2e-6;
      CHECK(gz(j) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  const Vec godd = grad_h_separable(-z, a, k, true);
  CHECK((godd + grad_h_separable(z, a, k, true)).norm() < 1e-15);
}

}  // TEST_SUITE
