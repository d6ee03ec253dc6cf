#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace ibcm;

namespace {

FieldSolution zero_field(const Problem& pb) {
  FieldSolution u;
  for (const auto& p : pb.patches) u.coef.push_back(Eigen::VectorXd::Zero(p.num_dofs()));
  return u;
}

Case unit_square(Theory t, int p, int level, bool split, const ExactSolution& ex) {
  CaseOptions o;
  o.theory = t;
  o.p = p;
  o.level = level;
  return split_square(o, split, ex);
}

}  // namespace

TEST_CASE("norms of the manufactured sine against the zero field") {
  // u_i = 0.1 sin(2 pi x) sin(2 pi y) for i = 1..3 on the unit square.
  const ExactSolution ex = plate_exact_solution(Theory::KL);
  const double twopi = 2 * kPi;
  const double l2 = 0.1 * std::sqrt(3.0) / 2;
  const double h1 = std::sqrt(3 * 0.01 * twopi * twopi * 0.5);
  const double h2 = std::sqrt(3 * 0.01 * std::pow(twopi, 4));
  for (bool split : {false, true}) {
    const Case c = unit_square(Theory::KL, 3, 2, split, ex);
    const NormSet n = error_norms(c.problem, zero_field(c.problem), ex, true, 8);
    CHECK(n.l2 == doctest::Approx(l2).epsilon(1e-10));
    CHECK(n.h1 == doctest::Approx(h1).epsilon(1e-10));
    REQUIRE(n.has_h2);
    CHECK(n.h2 == doctest::Approx(h2).epsilon(1e-10));
    const NormSet s = solution_norms(c.problem, zero_field(c.problem), false);
    CHECK(s.l2 == 0.0);
  }
}

TEST_CASE("norms of a constant field") {
  const Case c = unit_square(Theory::RM, 2, 1, false, plate_exact_solution(Theory::RM));
  const NormSet n = integrate_norms(
      c.problem,
      [](int, const Vec2&, const SurfaceFrame&, int) {
        FieldJet j;
        j.u[0] = Vec3(3, 0, 4);
        return j;
      },
      true);
  CHECK(n.l2 == doctest::Approx(5.0));
  CHECK(n.h1 == 0.0);
  CHECK(n.h2 == 0.0);
}

TEST_CASE("the exact spline fit has zero error and zero interface jump") {
  // Quadratic polynomial displacement lies in the p = 2 spaces of both halves.
  ExactSolution ex;
  ex.u = polynomial_field({{Vec3(0.1, -0.2, 0.3), 2, 0}, {Vec3(0.05, 0.1, -0.1), 1, 1}, {Vec3(0.2, 0.0, 0.1), 0, 1}});
  const Case c = unit_square(Theory::KL, 2, 2, true, ex);
  const FieldSolution u = fit_exact(c.problem, ex);
  const NormSet e = error_norms(c.problem, u, ex, true);
  CHECK(e.l2 < 1e-13);
  CHECK(e.h1 < 1e-12);
  CHECK(e.h2 < 1e-11);
  CHECK(interface_jump_norm(c.problem, u, c.problem.interfaces.at(0)) < 1e-13);
  // Differences between a field and itself.
  CHECK(difference_norms(c.problem, u, c.problem, u, false).l2 < 1e-15);
}

TEST_CASE("rate fits recover power laws") {
  std::vector<double> h, e;
  for (int k = 0; k < 5; ++k) {
    h.push_back(std::pow(0.5, k));
    e.push_back(7.0 * std::pow(h.back(), 3.0));
  }
  CHECK(*fit_rate(h, e) == doctest::Approx(3.0));
  // Only the last window counts: a different early slope is ignored.
  e[0] *= 10;
  CHECK(*fit_rate(h, e) == doctest::Approx(3.0));
  CHECK(*fit_rate(h, e, 2) == doctest::Approx(3.0));
  CHECK_FALSE(fit_rate({0.5}, {1.0}).has_value());
}

TEST_CASE("convergence studies skip failed levels and flag slow first pairs") {
  ConvergenceStudy st;
  for (int k = 0; k < 4; ++k) {
    ErrorReport r;
    r.level = k;
    r.h = std::pow(0.5, k);
    r.err.l2 = std::pow(r.h, 4.0);
    r.err.h1 = std::pow(r.h, 3.0);
    r.spd.spd = true;
    st.levels.push_back(r);
  }
  st.levels[3].spd.spd = false;
  st.levels[3].err.l2 = 1.0;  // would spoil the fit if used
  st.fit(3);
  REQUIRE(st.rate_l2.has_value());
  CHECK(*st.rate_l2 == doctest::Approx(4.0));
  CHECK(*st.rate_h1 == doctest::Approx(3.0));
  CHECK_FALSE(st.locking_flag);
  // First-pair L2 rate 2 < p + 0.5.
  st.levels[1].err.l2 = 0.25 * st.levels[0].err.l2;
  st.fit(3);
  CHECK(st.locking_flag);
}

TEST_CASE("crack-tip reference") {
  const double a = 5, R = 20, tau = 1;
  // lambda^4 = 12 (1 - nu^2) a^4 / (R^2 tau^2)
  const double lam4 = 12.0 * (8.0 / 9.0) * 625.0 / 400.0;
  CHECK(std::pow(folias_lambda(a, R, tau, 1.0 / 3.0), 4) == doctest::Approx(lam4));
  CHECK(folias_lambda(1, 1, 1, 0) == doctest::Approx(std::pow(12.0, 0.25)));
  const double lam = std::pow(lam4, 0.25);
  const double ref = std::sqrt(a / (2 * 2.0)) * (1 + (0.37 - 0.30 * std::log(lam)) * lam * lam) * R / tau;
  CHECK(folias_reference(2.0, a, R, tau) == doctest::Approx(ref));
  // Inverse square root in the distance.
  CHECK(folias_reference(4.0, a, R, tau) == doctest::Approx(0.5 * folias_reference(1.0, a, R, tau)));
  CHECK_THROWS_AS(folias_reference(1.0, a, R, tau, 0.3), Error);
  CHECK_THROWS_AS(folias_reference(0.0, a, R, tau), Error);
}
