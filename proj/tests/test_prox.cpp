#include "aspadmm/error.hpp"
#include "aspadmm/prox.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace aspadmm;
using testutil::grid_argmin;
using testutil::randn;

TEST_SUITE("prox") {

TEST_CASE("soft thresholding") {
  CHECK(prox_l1((Vec(1) << 3).finished(), 1.0)(0) == 2.0);
  CHECK(prox_l1((Vec(1) << -0.5).finished(), 1.0)(0) == 0.0);

  const Vec r = (Vec(3) << 2, -3, 0.1).finished();
  const Vec p = prox_l1(r, 0.5, 2.0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double ri = r(i);
    const double oracle = grid_argmin([&](double x) { return 2.0 * std::abs(x) + (x - ri) * (x - ri) / (2 * 0.5); }, -5, 5);
    CHECK(p(i) == doctest::Approx(oracle).epsilon(1e-7));
  }
  CHECK(p == (Vec(3) << 1, -2, 0).finished());
}

TEST_CASE("box projection") {
  CHECK(project_box((Vec(3) << 5, -5, 0).finished(), -1, 1) == (Vec(3) << 1, -1, 0).finished());
  const Vec inside = (Vec(2) << 0.3, -0.2).finished();
  CHECK(project_box(inside, -1, 1) == inside);
}

TEST_CASE("shrink then clamp is the prox of w|x| plus a box") {
  const ProxFunction f = ProxFunction::composite({ProxFunction::l1(0.7), ProxFunction::box(-1.0, 1.5)});
  const double t = 0.8;
  for (double r : {-3.0, -1.2, -0.3, 0.2, 1.0, 2.4, 4.0}) {
    const double oracle = grid_argmin([&](double x) { return 0.7 * std::abs(x) + (x - r) * (x - r) / (2 * t); }, -1.0, 1.5);
    const double got = f.prox((Vec(1) << r).finished(), t)(0);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(got == doctest::Approx(project_box(prox_l1((Vec(1) << r).finished(), t, 0.7), -1.0, 1.5)(0)));
  }
}

TEST_CASE("pinned projection") {
  const Vec r = randn(5, 1);
  const Vec vals = (Vec(5) << 1, 2, 3, 4, 5).finished();
  CHECK(project_pinned(r, {0, 1, 2, 3, 4}, vals) == vals);
  CHECK(project_pinned(r, {}, Vec()) == r);
  const Vec once = project_pinned(r, {1, 3}, (Vec(2) << 7, 8).finished());
  CHECK(project_pinned(once, {1, 3}, (Vec(2) << 7, 8).finished()) == once);
  CHECK(once(1) == 7.0);
  CHECK(once(0) == r(0));
}

TEST_CASE("prox optimality via subgradient residual") {
  const std::vector<ProxFunction> fs = {
      ProxFunction::zero(), ProxFunction::l1(0.4), ProxFunction::box(-0.5, 0.5), ProxFunction::nonneg(),
      ProxFunction::pinned(6, {0, 4}, (Vec(2) << 1.0, -2.0).finished()),
      ProxFunction::composite({ProxFunction::l1(0.3), ProxFunction::nonneg()})};
  for (const ProxFunction& f : fs) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Vec r = 2.0 * randn(6, 100 + s);
      const double t = 0.7;
      const Vec p = f.prox(r, t);
      CHECK(f.subgradient_distance(p, (r - p) / t) <= 1e-8);
    }
  }
}

TEST_CASE("quadratic prox against a dense solve") {
  const Mat m = randn(4, 4, 21);
  const Mat p = m * m.transpose();
  const Vec b = randn(4, 22), r = randn(4, 23);
  const ProxFunction f = ProxFunction::quadratic(p, b);
  const double t = 0.3;
  const Vec oracle = (p + Mat::Identity(4, 4) / t).ldlt().solve(b + r / t);
  CHECK((f.prox(r, t) - oracle).norm() < 1e-10);
  CHECK(f.eval(r) == doctest::Approx(0.5 * r.dot(p * r) - b.dot(r)));
}

TEST_CASE("firm nonexpansiveness") {
  const ProxFunction f = ProxFunction::composite({ProxFunction::l1(0.5), ProxFunction::box(-1, 1)});
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vec r1 = 3.0 * randn(8, 200 + s), r2 = 3.0 * randn(8, 300 + s);
    const Vec d = f.prox(r1, 0.6) - f.prox(r2, 0.6);
    CHECK(d.squaredNorm() <= d.dot(r1 - r2) + 1e-12);
  }
}

TEST_CASE("domain and argument errors") {
  CHECK(ProxFunction::box(0, 1).eval((Vec(1) << 2).finished()) == kInf);
  CHECK(ProxFunction::nonneg().eval((Vec(1) << -1).finished()) == kInf);
  CHECK_THROWS(ProxFunction::l1(-1.0));
  CHECK_THROWS(ProxFunction::box(1.0, 0.0));
  CHECK_THROWS(prox_l1(Vec::Ones(2), -1.0));
}

}  // TEST_SUITE
