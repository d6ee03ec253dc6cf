#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace ibcm;
using ibcm::test::Gen;

namespace {

CurvePtr elliptic_spline(double scale, int n, int p) {
  std::vector<double> br;
  for (int i = 0; i <= n; ++i) br.push_back(2 * kPi * i / n);
  const KnotVector kv = KnotVector::periodic(br, p);
  std::vector<Vec2> cp;
  for (int i = 0; i < kv.num_functions(); ++i) {
    const double phi = 2 * kPi * (i + 0.5) / kv.num_functions();
    cp.push_back(Vec2(0.5, 0.5) + scale * Vec2(std::cos(phi), -0.8 * std::sin(phi)));
  }
  return make_spline_curve(kv, cp);
}

Vec2 left_normal(const CurveJet& j) { return Vec2(-j.d1[1], j.d1[0]).normalized(); }

}  // namespace

TEST_CASE("circle points, derivatives and orientation") {
  const Vec2 c(0.5, 0.5);
  const auto cw = make_circle(c, 0.2, true), ccw = make_circle(c, 0.2, false);
  Gen g(31);
  for (int k = 0; k < 50; ++k) {
    const double s = g.uniform(0, 2 * kPi);
    const CurveJet j = ccw->eval(s);
    CHECK((j.p - (c + 0.2 * Vec2(std::cos(s), std::sin(s)))).norm() < 1e-15);
    CHECK((j.d1 - 0.2 * Vec2(-std::sin(s), std::cos(s))).norm() < 1e-14);
    CHECK((j.d2 + 0.2 * Vec2(std::cos(s), std::sin(s))).norm() < 1e-13);
    CHECK((cw->eval(s).p - (c + 0.2 * Vec2(std::cos(s), -std::sin(s)))).norm() < 1e-15);
  }
  // Clockwise keeps the exterior active.
  CHECK(cw->side({0.9, 0.5}) > 0);
  CHECK(cw->side({0.5, 0.5}) < 0);
  CHECK(ccw->side({0.5, 0.5}) > 0);
  CHECK(std::abs(cw->side({0.8, 0.5}) - 0.1) < 1e-12);
  CHECK(make_reversed(cw)->side({0.9, 0.5}) < 0);
}

TEST_CASE("closed-curve side tests resolve points next to spline curves") {
  const auto base = elliptic_spline(0.22, 16, 3);
  const auto off = make_offset(base, 0.1);
  Gen g(32);
  for (const auto& c : {base, off}) {
    for (int k = 0; k < 200; ++k) {
      const double s = g.uniform(c->s0(), c->s1());
      const CurveJet j = c->eval(s);
      const Vec2 n = left_normal(j);
      for (double d : {1e-7, 1e-5, 1e-3}) {
        CHECK(c->side(j.p + d * n) > 0);
        CHECK(c->side(j.p - d * n) < 0);
      }
      CHECK(std::abs(c->side(j.p + 1e-4 * n) - 1e-4) < 1e-9);
    }
  }
}

TEST_CASE("offset curves keep a constant normal distance") {
  const auto base = elliptic_spline(0.22, 16, 3);
  const auto off = make_offset(base, 0.1);
  Gen g(33);
  for (int k = 0; k < 100; ++k) {
    const double s = g.uniform(base->s0(), base->s1());
    const CurveJet jb = base->eval(s), jo = off->eval(s);
    CHECK(std::abs((jo.p - jb.p).norm() - 0.1) < 1e-12);
    CHECK(std::abs((jo.p - jb.p).normalized().dot(left_normal(jb)) - 1.0) < 1e-12);
    // The offset is parallel to the base.
    CHECK(std::abs(jo.d1.normalized().dot(jb.d1.normalized()) - 1.0) < 1e-12);
  }
  CHECK_FALSE(curves_intersect(*base, *off));
  CHECK_FALSE(curve_self_intersects(*off));
}

TEST_CASE("graphs keep the region above active") {
  const auto gr = make_graph([](const Series& s) { return 0.5 + 0.1 * sin(s); }, 0, 2 * kPi);
  CHECK(gr->side({1.0, 0.9}) > 0);
  CHECK(gr->side({1.0, 0.1}) < 0);
  const CurveJet j = gr->eval(1.0);
  CHECK(j.p[0] == doctest::Approx(1.0));
  CHECK(j.p[1] == doctest::Approx(0.5 + 0.1 * std::sin(1.0)));
  CHECK(j.d1[1] == doctest::Approx(0.1 * std::cos(1.0)));
}

TEST_CASE("polygon helpers") {
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(polygon_area(sq) == doctest::Approx(1.0));
  CHECK(point_in_polygon(sq, {0.5, 0.5}));
  CHECK_FALSE(point_in_polygon(sq, {1.5, 0.5}));
  CHECK(polyline_distance(sq, {0.5, 0.25}, true) == doctest::Approx(0.25));
  const PolylineCurve pl(sq, true);
  CHECK(pl.s1() == doctest::Approx(4.0));
  CHECK((pl.point(1.5) - Vec2(1, 0.5)).norm() < 1e-15);
  // A counterclockwise square keeps its inside active.
  CHECK(pl.side({0.5, 0.5}) > 0);
  CHECK(pl.side({2, 2}) < 0);
}

TEST_CASE("sampled circle polygons converge to the circle area") {
  const auto c = make_circle({0, 0}, 1.0, false);
  const double a64 = polygon_area(sample_curve(*c, 64)), a256 = polygon_area(sample_curve(*c, 256));
  CHECK(std::abs(a256 - kPi) < std::abs(a64 - kPi));
  CHECK(std::abs(a256 - kPi) < 1e-3);
}

TEST_CASE("self-intersecting curves are detected") {
  // Limacon with an inner loop crossing itself at the origin.
  const auto lim = std::make_shared<AnalyticCurve>(
      [](const Series& s) { return SeriesPoint{(0.5 + cos(s)) * cos(s), (0.5 + cos(s)) * sin(s)}; }, 0.0, 2 * kPi, true);
  CHECK(curve_self_intersects(*lim));
  CHECK_FALSE(curve_self_intersects(*make_circle({0, 0}, 1, false)));
}
