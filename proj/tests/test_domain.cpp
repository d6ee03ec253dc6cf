#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

using namespace ibcm;
using ibcm::test::Gen;

namespace {

const Vec2 kCenter(0.5, 0.5);

TrimmedDomain holed_plate(int n, int q, double r = 0.2) {
  return classify_elements(uniform_grid({0, 1, 0, 1}, n, n), Region{{0, 1, 0, 1}, {make_circle(kCenter, r, true)}}, q);
}

double active_area(const TrimmedDomain& d, int npts) {
  double a = 0;
  for (const auto& cr : domain_quadrature(d, npts, npts))
    for (const auto& qp : cr.pts) a += qp.w;
  return a;
}

double cell_of(const TrimmedDomain& d, double u0, double v0) { return d.grid.cell(d.grid.locate({u0, v0})[0], d.grid.locate({u0, v0})[1]); }

}  // namespace

TEST_CASE("cells are classified against the hole") {
  const TrimmedDomain d = holed_plate(8, 3);
  CHECK(d.kind[cell_of(d, 0.4, 0.4)] == CellKind::Empty);
  CHECK(d.kind[cell_of(d, 0.05, 0.05)] == CellKind::Entire);
  CHECK(d.count(CellKind::Partial) > 0);
  CHECK(d.count(CellKind::Entire) + d.count(CellKind::Partial) + d.count(CellKind::Empty) == 64);
  const TrimmedDomain full = classify_elements(uniform_grid({0, 1, 0, 1}, 4, 4), Region{{0, 1, 0, 1}, {}}, 3);
  CHECK(full.count(CellKind::Entire) == 16);
}

TEST_CASE("trimmed area converges to the closed form and improves with the tile order") {
  const double exact = 1.0 - kPi * 0.04;
  double prev = 1.0;
  for (int q = 1; q <= 5; ++q) {
    const double err = std::abs(active_area(holed_plate(8, q), q + 1) - exact) / exact;
    CAPTURE(q);
    // Monotone until the roundoff floor.
    if (prev > 1e-13) CHECK(err < prev);
    if (q >= 3) CHECK(err < 1e-8);
    prev = err;
  }
}

TEST_CASE("straight cuts are integrated exactly") {
  // Region above y = 0.3 + 0.4 x; linear tiles are exact.
  const auto line = make_graph([](const Series& s) { return 0.3 + 0.4 * s; }, 0.0, 1.0);
  const TrimmedDomain d = classify_elements(uniform_grid({0, 1, 0, 1}, 7, 7), Region{{0, 1, 0, 1}, {line}}, 1);
  CHECK(d.count(CellKind::Partial) > 0);
  CHECK(std::abs(active_area(d, 2) - 0.5) < 1e-14);
}

TEST_CASE("tile quadrature points stay inside the active region") {
  const TrimmedDomain d = holed_plate(8, 3);
  const Region& r = d.region;
  for (size_t c = 0; c < d.tiles.size(); ++c)
    for (const auto& t : d.tiles[c]) {
      for (const auto& qp : tile_quadrature(t, 4)) {
        CHECK(r.side(qp.x) > -1e-9);
        CHECK(qp.w > 0);
      }
    }
}

TEST_CASE("Gauss rules integrate polynomials of degree 2n-1 exactly") {
  for (int p = 1; p <= 6; ++p) {
    double s = 0;
    for (const auto& qp : cell_quadrature({0, 1, 0, 1}, p + 1)) s += qp.w * std::pow(qp.x[0], 2 * p + 1);
    CHECK(std::abs(s - 1.0 / (2 * p + 2)) < 1e-14);
  }
}

TEST_CASE("annular boundary layer: offset radius, area and circumference") {
  const BoundaryLayer bl = build_boundary_layer(make_circle(kCenter, 0.2, true), 0.1, 16, 2);
  Gen g(41);
  for (int k = 0; k < 50; ++k) {
    const double s = g.uniform(0, 2 * kPi);
    CHECK(std::abs((bl.offset->point(s) - kCenter).norm() - 0.3) < 1e-12);
    CHECK((bl.map->eval({s, 0.0}, 0).v - bl.boundary->point(s)).norm() < 1e-12);
    CHECK((bl.map->eval({s, 1.0}, 0).v - bl.offset->point(s)).norm() < 1e-12);
  }
  const auto dom = bl.map->domain();
  double area = 0;
  for (size_t i = 0; i + 1 < bl.breaks1.size(); ++i)
    for (size_t j = 0; j + 1 < bl.breaks2.size(); ++j)
      for (const auto& qp : cell_quadrature({bl.breaks1[i], bl.breaks1[i + 1], bl.breaks2[j], bl.breaks2[j + 1]}, 6)) {
        const Jet2 jt = bl.map->eval(qp.x, 1);
        const double det = jt.d1[0][0] * jt.d1[1][1] - jt.d1[0][1] * jt.d1[1][0];
        CHECK(det > 0);
        area += qp.w * det;
      }
  CHECK(std::abs(area - kPi * (0.09 - 0.04)) < 1e-10);
  double len = 0;
  const GaussRule& gr = gauss01(8);
  for (size_t i = 0; i + 1 < bl.breaks1.size(); ++i)
    for (size_t q = 0; q < gr.x.size(); ++q) {
      const double h = bl.breaks1[i + 1] - bl.breaks1[i];
      len += gr.w[q] * h * bl.offset->eval(bl.breaks1[i] + h * gr.x[q]).d1.norm();
    }
  CHECK(std::abs(len - 2 * kPi * 0.3) < 1e-10);
  CHECK(dom[1] - dom[0] == doctest::Approx(2 * kPi));
}

TEST_CASE("straight boundary segments give rectangular strips") {
  const BoundaryLayer bl = build_boundary_layer(make_segment({0, 0}, {1, 0}), 0.1, 4, 1);
  const Jet2 j = bl.map->eval({0.5, 1.0}, 1);
  CHECK((j.v - Vec2(0.5, 0.1)).norm() < 1e-15);
  CHECK((j.d1[1] - Vec2(0, 0.1)).norm() < 1e-15);
}

TEST_CASE("interface segmentation against the trimmed interior") {
  const BoundaryLayer bl = build_boundary_layer(make_circle(kCenter, 0.2, true), 0.1, 16, 2);
  const TrimmedDomain in = classify_elements(uniform_grid({0, 1, 0, 1}, 8, 8), Region{{0, 1, 0, 1}, {bl.offset}}, 3);
  const auto segs = segment_interface(bl, in);
  CHECK(segs.size() >= 16);
  double total = 0;
  for (const auto& s : segs) {
    CHECK(s.s1 > s.s0);
    CHECK(s.plus_cell >= 0);
    CHECK(s.minus_cell >= 0);
    CHECK(in.kind[s.minus_cell] != CellKind::Empty);
    const Vec2 mid = bl.offset->point(0.5 * (s.s0 + s.s1));
    const auto box = in.grid.box(s.minus_cell);
    CHECK(mid[0] >= box[0] - 1e-12);
    CHECK(mid[0] <= box[1] + 1e-12);
    CHECK(mid[1] >= box[2] - 1e-12);
    CHECK(mid[1] <= box[3] + 1e-12);
    total += s.s1 - s.s0;
  }
  CHECK(std::abs(total - 2 * kPi) < 1e-10);
}

TEST_CASE("two arcs through one cell ask for refinement") {
  // Thin ellipse whose two long sides pass through the same row of cells.
  const auto e = make_ellipse({0.5, 0.3}, 0.3, 0.02, true);
  CHECK_THROWS_AS(classify_elements(uniform_grid({0, 1, 0, 1}, 4, 4), Region{{0, 1, 0, 1}, {e}}, 3), Error);
  CHECK_NOTHROW(classify_elements(uniform_grid({0, 1, 0, 1}, 16, 16), Region{{0, 1, 0, 1}, {make_ellipse({0.5, 0.3}, 0.3, 0.1, true)}}, 3));
}
