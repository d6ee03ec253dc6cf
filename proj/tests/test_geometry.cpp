#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace ibcm;
using ibcm::test::Gen;
using ibcm::test::d2_index;
using ibcm::test::d3_index;

namespace {

struct NamedMap {
  std::string name;
  std::shared_ptr<const SurfaceMap> map;
  double scale;
};

// Quadratic planar map used as an inner map.
class QuadraticMap : public PlanarMap {
 public:
  Jet2 eval(const Vec2& e, int order) const override {
    Jet2 j;
    j.v = Vec2(e[0] + 0.1 * e[0] * e[1], e[1] + 0.05 * e[0] * e[0]);
    if (order >= 1) {
      j.d1[0] = Vec2(1 + 0.1 * e[1], 0.1 * e[0]);
      j.d1[1] = Vec2(0.1 * e[0], 1.0);
    }
    if (order >= 2) {
      j.d2[0] = Vec2(0, 0.1);
      j.d2[1] = Vec2(0.1, 0);
      j.d2[2] = Vec2(0, 0);
    }
    return j;
  }
  std::array<double, 4> domain() const override { return {-1, 1, -1, 1}; }
};

std::vector<NamedMap> test_maps() {
  std::vector<NamedMap> m;
  m.push_back({"plane", std::make_shared<PlaneMap>(std::array<double, 4>{0, 1, 0, 1}), 1.0});
  m.push_back({"cylinder a", std::make_shared<CylinderMap>(1.0, std::array<double, 4>{0, 2 * kPi, -2, 2}), 1.0});
  m.push_back({"cylinder b", std::make_shared<CylinderMap>(0.6, std::array<double, 4>{0, 2 * kPi, 0, 4}, CylinderMap::rotation_y(-kPi / 3)), 1.0});
  auto arc = std::make_shared<ArcCylinderMap>(20.0, std::array<double, 4>{-10 * kPi, 10 * kPi, -50, 50});
  m.push_back({"arc cylinder", arc, 20.0});
  m.push_back({"arc cylinder o quadratic", std::make_shared<ComposedMap>(arc, std::make_shared<QuadraticMap>()), 20.0});
  const BoundaryLayer layer = build_boundary_layer(make_circle({0.5, 0.5}, 0.2, true), 0.1, 16, 2);
  m.push_back({"plate layer", std::make_shared<ComposedMap>(std::make_shared<PlaneMap>(std::array<double, 4>{0, 1, 0, 1}), layer.map), 1.0});
  // Bicubic spline surface with a bumpy control net.
  const KnotVector k = KnotVector::open({0, 0.5, 1}, 3, 2);
  std::vector<Vec3> cp;
  Gen g(21);
  for (int j = 0; j < k.num_functions(); ++j)
    for (int i = 0; i < k.num_functions(); ++i)
      cp.push_back(Vec3(i / 4.0, j / 4.0, 0.1 * g.uniform(-1, 1)));
  m.push_back({"spline", std::make_shared<SplineSurfaceMap>(TensorSplineSpace(k, k), cp), 1.0});
  return m;
}

Vec2 interior_point(Gen& g, const std::array<double, 4>& r) {
  const double mu = 0.1 * (r[1] - r[0]), mv = 0.1 * (r[3] - r[2]);
  return {g.uniform(r[0] + mu, r[1] - mu), g.uniform(r[2] + mv, r[3] - mv)};
}

}  // namespace

TEST_CASE("map derivatives match central differences") {
  Gen g(22);
  for (const auto& nm : test_maps()) {
    CAPTURE(nm.name);
    const auto r = nm.map->domain();
    for (int k = 0; k < 20; ++k) {
      const Vec2 x = interior_point(g, r);
      const double h = 1e-5 * std::max(r[1] - r[0], r[3] - r[2]);
      const Jet3 j = nm.map->eval(x, 3);
      for (int a = 0; a < 2; ++a) {
        const Vec2 e = h * Vec2::Unit(a);
        const Jet3 jp = nm.map->eval(x + e, 3), jm = nm.map->eval(x - e, 3);
        const Vec3 d1 = (jp.v - jm.v) / (2 * h);
        CHECK((d1 - j.d1[a]).norm() < 1e-6 * nm.scale);
        for (int b = 0; b < 2; ++b) {
          const Vec3 d2 = (jp.d1[b] - jm.d1[b]) / (2 * h);
          CHECK((d2 - j.d2[d2_index(a, b)]).norm() < 1e-5 * (1 + j.d2[d2_index(a, b)].norm()));
          for (int c = b; c < 2; ++c) {
            const Vec3 d3 = (jp.d2[d2_index(b, c)] - jm.d2[d2_index(b, c)]) / (2 * h);
            CHECK((d3 - j.d3[d3_index(a, b, c)]).norm() < 1e-5 * (1 + j.d3[d3_index(a, b, c)].norm()));
          }
        }
      }
    }
  }
}

TEST_CASE("surface frame identities hold at random points") {
  Gen g(23);
  for (const auto& nm : test_maps()) {
    CAPTURE(nm.name);
    const auto r = nm.map->domain();
    for (int k = 0; k < 100; ++k) {
      const SurfaceFrame f = surface_frame(nm.map->eval(interior_point(g, r), 3), 3);
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          CHECK(std::abs(f.a[a].dot(f.acon[b]) - (a == b ? 1.0 : 0.0)) < 1e-12);
          // Gauss relation and frame reconstruction.
          CHECK(std::abs(f.da3[a].dot(f.a[b]) + f.b(a, b)) < 1e-10 / nm.scale);
          Vec3 rec = f.b(a, b) * f.a3;
          for (int l = 0; l < 2; ++l) rec += f.gam[l](a, b) * f.a[l];
          CHECK((rec - f.da_ab(a, b)).norm() < 1e-10);
        }
        CHECK(std::abs(f.a3.dot(f.a[a])) < 1e-12 * nm.scale);
      }
      CHECK(std::abs(f.a3.norm() - 1.0) < 1e-12);
      CHECK(std::abs(f.b(0, 1) - f.b(1, 0)) < 1e-12);
      CHECK(f.sqrt_a > 0);
    }
  }
}

TEST_CASE("plane and arc-length cylinder frames") {
  const PlaneMap plane({0, 1, 0, 1});
  const SurfaceFrame fp = surface_frame(plane.eval({0.3, 0.7}, 2), 2);
  CHECK((fp.g - Mat2::Identity()).norm() < 1e-15);
  CHECK(fp.b.norm() < 1e-15);
  CHECK(fp.sqrt_a == doctest::Approx(1.0));
  const double R = 20;
  const ArcCylinderMap cyl(R, {-R * kPi / 2, R * kPi / 2, -50, 50});
  const SurfaceFrame fc = surface_frame(cyl.eval({3.0, 12.0}, 2), 2);
  CHECK(fc.g(0, 0) == doctest::Approx(1.0));
  CHECK(fc.g(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(fc.b(0, 0)) - 1.0 / R) < 1e-14);
  CHECK(std::abs(fc.b(1, 1)) < 1e-15);
  CHECK(std::abs(fc.b(0, 1)) < 1e-15);
}

TEST_CASE("identity and affine inner maps compose exactly") {
  const auto arc = std::make_shared<ArcCylinderMap>(5.0, std::array<double, 4>{-5, 5, -5, 5});
  Mat2 A;
  A << 1.3, 0.2, -0.4, 0.9;
  const Vec2 c(0.1, -0.2);
  const ComposedMap id(arc, std::make_shared<AffinePlanarMap>(Mat2::Identity(), Vec2::Zero(), arc->domain()));
  const ComposedMap af(arc, std::make_shared<AffinePlanarMap>(A, c, std::array<double, 4>{-1, 1, -1, 1}));
  const Vec2 eta(0.3, -0.4);
  const Jet3 j0 = arc->eval(eta, 3), j1 = id.eval(eta, 3);
  CHECK((j0.v - j1.v).norm() < 1e-14);
  for (int k = 0; k < 4; ++k) CHECK((j0.d3[k] - j1.d3[k]).norm() < 1e-14);
  const Vec2 xi = A * eta + c;
  const Jet3 jo = arc->eval(xi, 3), ja = af.eval(eta, 3);
  CHECK((jo.v - ja.v).norm() < 1e-14);
  // x_{,ab} = A_la A_mb X_{,lm}
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      Vec3 ref = Vec3::Zero();
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m) ref += A(l, a) * A(m, b) * jo.d2[d2_index(l, m)];
      CHECK((ref - ja.d2[d2_index(a, b)]).norm() < 1e-13);
    }
}

TEST_CASE("curve frames on a flat plate") {
  const PlaneMap plane({0, 1, 0, 1});
  const SurfaceFrame f = surface_frame(plane.eval({1.0, 0.4}, 2), 2);
  // Edge xi1 = 1 traversed upward has the plate on its left.
  const CurveFrame c = curve_frame(f, Vec2(0, 1), Vec2::Zero(), true);
  CHECK((c.n - Vec3::UnitX()).norm() < 1e-15);
  CHECK((c.t - Vec3::UnitY()).norm() < 1e-15);
  const CurveFrame o = curve_frame(f, Vec2(0, 1), Vec2::Zero(), false);
  CHECK((o.n + Vec3::UnitX()).norm() < 1e-15);
  Gen g(24);
  for (int k = 0; k < 50; ++k) {
    const double s = g.uniform(0, 2 * kPi), R = 0.2;
    const Vec2 x(0.5 + R * std::cos(s), 0.5 + R * std::sin(s));
    const SurfaceFrame fc = surface_frame(plane.eval(x, 2), 2);
    // Counterclockwise circle with the disk on the left: outward normal is radial.
    const CurveFrame cf = curve_frame(fc, R * Vec2(-std::sin(s), std::cos(s)), -R * Vec2(std::cos(s), std::sin(s)), true);
    CHECK((cf.n - Vec3(std::cos(s), std::sin(s), 0)).norm() < 1e-13);
    CHECK(std::abs(cf.n.dot(cf.t)) < 1e-12);
    CHECK(std::abs(cf.n.dot(fc.a3)) < 1e-12);
    CHECK(cf.jac == doctest::Approx(R));
  }
}
