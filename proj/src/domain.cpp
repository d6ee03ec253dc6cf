#include "ibcm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ibcm {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

std::vector<double> uniform_breaks(double lo, double hi, int n) {
  std::vector<double> b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = lo + (hi - lo) * i / n;
  b.back() = hi;
  return b;
}

// Index of the interval [b_i, b_{i+1}) containing x, clamped to the valid range.
int interval_of(const std::vector<double>& b, double x) {
  auto it = std::upper_bound(b.begin(), b.end(), x);
  int i = static_cast<int>(it - b.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(b.size()) - 2);
}

// Perimeter coordinate of a boundary point, counter-clockwise from (u0, v0).
struct Perimeter {
  double x0, x1, y0, y1, w, h;
  explicit Perimeter(const std::array<double, 4>& b)
      : x0(b[0]), x1(b[1]), y0(b[2]), y1(b[3]), w(b[1] - b[0]), h(b[3] - b[2]) {}
  double length() const { return 2 * (w + h); }
  Vec2 corner(int k) const {
    static const int cx[4] = {0, 1, 1, 0}, cy[4] = {0, 0, 1, 1};
    return Vec2(cx[k] ? x1 : x0, cy[k] ? y1 : y0);
  }
  double corner_pos(int k) const {
    const double p[4] = {0, w, w + h, 2 * w + h};
    return p[k];
  }
  // Returns edge index (0 bottom, 1 right, 2 top, 3 left) and position.
  std::pair<int, double> locate(const Vec2& x, double tol) const {
    const double d[4] = {std::abs(x[1] - y0), std::abs(x[0] - x1), std::abs(x[1] - y1), std::abs(x[0] - x0)};
    const int e = static_cast<int>(std::min_element(d, d + 4) - d);
    if (d[e] > tol) fail(ErrorKind::RefineRequired, "trimming arc ends inside a cell");
    switch (e) {
      case 0: return {0, std::clamp(x[0] - x0, 0.0, w)};
      case 1: return {1, w + std::clamp(x[1] - y0, 0.0, h)};
      case 2: return {2, w + h + std::clamp(x1 - x[0], 0.0, w)};
      default: return {3, 2 * w + h + std::clamp(y1 - x[1], 0.0, h)};
    }
  }
};

Tile make_tile(const Vec2& l0, const Vec2& l1, const CurvePtr& c, double sa, double sb, int q) {
  Tile t;
  t.l0 = l0;
  t.l1 = l1;
  t.curve = c;
  t.sa = sa;
  t.sb = sb;
  t.q = q;
  if (t.det(0.5, 0.5) < 0) t.flip = true;
  const int m = q + 2;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!(t.det((i + 0.5) / m, (j + 0.5) / m) > 0))
        fail(ErrorKind::RefineRequired, "tile with non-positive Jacobian");
  return t;
}

bool on_grid_line(const std::vector<double>& lines, double x, double tol) {
  auto it = std::lower_bound(lines.begin(), lines.end(), x - tol);
  return it != lines.end() && std::abs(*it - x) <= tol;
}

}  // namespace

std::array<double, 4> Grid::box(int c) const {
  const int i = c % nu(), j = c / nu();
  return {u[i], u[i + 1], v[j], v[j + 1]};
}

std::array<int, 2> Grid::locate(const Vec2& x) const { return {interval_of(u, x[0]), interval_of(v, x[1])}; }

double Grid::min_size() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nu(); ++i) m = std::min(m, u[i + 1] - u[i]);
  for (int j = 0; j < nv(); ++j) m = std::min(m, v[j + 1] - v[j]);
  return m;
}

Grid uniform_grid(const std::array<double, 4>& rect, int nu, int nv) {
  if (nu < 1 || nv < 1) fail(ErrorKind::InvalidInput, "grid needs at least one cell per direction");
  return Grid{uniform_breaks(rect[0], rect[1], nu), uniform_breaks(rect[2], rect[3], nv)};
}

double Region::side(const Vec2& x) const {
  double s = std::min({x[0] - rect[0], rect[1] - x[0], x[1] - rect[2], rect[3] - x[1]});
  for (const auto& c : curves) s = std::min(s, c->side(x));
  return s;
}

int TrimmedDomain::count(CellKind k) const { return static_cast<int>(std::count(kind.begin(), kind.end(), k)); }

Vec2 Tile::point(double s, double t) const {
  const double sig = flip ? 1.0 - s : s;
  const Vec2 a = curve->point(sa + sig * (sb - sa));
  const Vec2 l = l0 + sig * (l1 - l0);
  return (1.0 - t) * l + t * a;
}

Mat2 Tile::jacobian(double s, double t) const {
  const double sig = flip ? 1.0 - s : s;
  const double dsig = flip ? -1.0 : 1.0;
  const CurveJet cj = curve->eval(sa + sig * (sb - sa));
  const Vec2 l = l0 + sig * (l1 - l0);
  Mat2 j;
  j.col(0) = dsig * ((1.0 - t) * (l1 - l0) + t * cj.d1 * (sb - sa));
  j.col(1) = cj.p - l;
  return j;
}

std::vector<double> grid_crossings(const ParamCurve& curve, const Grid& grid, double lo, double hi,
                                   std::vector<std::string>* warnings) {
  const int n = std::max(4096, 64 * (grid.nu() + grid.nv()));
  std::vector<double> ss(n + 1);
  std::vector<Vec2> pts(n + 1);
  for (int i = 0; i <= n; ++i) {
    ss[i] = lo + (hi - lo) * i / n;
    pts[i] = curve.point(ss[i]);
  }
  // Zero counts as the positive side, so a curve running along a grid line
  // produces crossings only where it leaves the line.
  std::vector<double> out;
  for (int k = 0; k < 2; ++k) {
    const auto& lines = k == 0 ? grid.u : grid.v;
    for (int i = 0; i < n; ++i) {
      const double xa = pts[i][k], xb = pts[i + 1][k];
      auto first = std::lower_bound(lines.begin(), lines.end(), std::min(xa, xb));
      auto last = std::upper_bound(lines.begin(), lines.end(), std::max(xa, xb));
      for (auto it = first; it != last; ++it) {
        const double L = *it;
        const bool pa = xa - L >= 0, pb = xb - L >= 0;
        if (pa == pb) continue;
        double a = ss[i], b = ss[i + 1];
        for (int it2 = 0; it2 < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it2) {
          const double m = 0.5 * (a + b);
          if ((curve.point(m)[k] - L >= 0) == pa) a = m;
          else b = m;
        }
        double root = (xa == L) ? ss[i] : (xb == L ? ss[i + 1] : 0.5 * (a + b));
        if (curve.closed() && root > hi - 1e-13 * (hi - lo)) root = lo;
        if (root > hi || root < lo) continue;
        if (!curve.closed() && (root <= lo || root >= hi)) continue;
        if (warnings) {
          const CurveJet j = curve.eval(root);
          if (std::abs(j.d1[k]) < 1e-8 * j.d1.norm())
            warnings->push_back("degenerate cut: curve tangent to grid line at s=" + std::to_string(root));
        }
        out.push_back(root);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [&](double x, double y) { return std::abs(x - y) < 1e-13 * (hi - lo); }),
            out.end());
  return out;
}

std::vector<Tile> tile_cut_element(const std::array<double, 4>& box, const CurvePtr& curve, double sP, double sQ, int q,
                                   std::vector<double>* split_params) {
  const Perimeter per(box);
  const double tol = 1e-9 * std::max(per.w, per.h);
  const Vec2 P = curve->point(sP), Q = curve->point(sQ);
  const auto [eP, posP] = per.locate(P, tol);
  const auto [eQ, posQ] = per.locate(Q, tol);
  const double L = per.length();
  const double span = std::fmod(posP - posQ + L, L);
  // Corners met walking counter-clockwise from Q to P bound the active part.
  std::vector<std::pair<double, int>> walk;
  for (int k = 0; k < 4; ++k) {
    const double d = std::fmod(per.corner_pos(k) - posQ + 2 * L, L);
    if (d > tol && d < span - tol) walk.emplace_back(d, k);
  }
  std::sort(walk.begin(), walk.end());
  const int k = static_cast<int>(walk.size());
  if (eP == eQ && (k == 0 || k == 4)) fail(ErrorKind::RefineRequired, "trimming arc enters and leaves a cell through one edge");
  if (k == 0 || k == 4) fail(ErrorKind::RefineRequired, "unsupported cut topology");
  std::vector<Tile> tiles;
  if (k == 1) {
    const Vec2 c = per.corner(walk[0].second);
    tiles.push_back(make_tile(c, c, curve, sP, sQ, q));
  } else if (k == 2) {
    tiles.push_back(make_tile(per.corner(walk[1].second), per.corner(walk[0].second), curve, sP, sQ, q));
  } else {
    const Vec2 c0 = per.corner(walk[0].second), c1 = per.corner(walk[1].second), c2 = per.corner(walk[2].second);
    const int out_idx = 6 - walk[0].second - walk[1].second - walk[2].second;
    const Vec2 cout = per.corner(out_idx);
    auto f = [&](double s) { return cross2(cout - c1, curve->point(s) - c1); };
    double a = sP, b = sQ, fa = f(a);
    if ((fa > 0) == (f(b) > 0)) fail(ErrorKind::RefineRequired, "cannot split three-corner cut cell");
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b), fm = f(m);
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    const double sM = 0.5 * (a + b);
    if (split_params) split_params->push_back(sM);
    tiles.push_back(make_tile(c2, c1, curve, sP, sM, q));
    tiles.push_back(make_tile(c1, c0, curve, sM, sQ, q));
  }
  return tiles;
}

TrimmedDomain classify_elements(const Grid& grid, const Region& region, int q) {
  if (q < 1) fail(ErrorKind::InvalidInput, "tile order must be at least 1");
  TrimmedDomain d;
  d.grid = grid;
  d.region = region;
  const int nc = grid.num_cells();
  d.kind.assign(nc, CellKind::Empty);
  d.tiles.assign(nc, {});
  d.curve_breaks.assign(region.curves.size(), {});
  const double scale = std::max(grid.u.back() - grid.u.front(), grid.v.back() - grid.v.front());
  const double ltol = 1e-12 * scale;
  std::vector<int> piece_of(nc, -1);
  for (size_t ci = 0; ci < region.curves.size(); ++ci) {
    const ParamCurve& c = *region.curves[ci];
    const double lo = c.s0(), hi = c.s1();
    std::vector<double> cr = grid_crossings(c, grid, lo, hi, &d.warnings);
    std::vector<std::pair<double, double>> arcs;
    if (c.closed()) {
      if (cr.empty()) fail(ErrorKind::RefineRequired, "closed trimming curve lies inside a single cell");
      for (size_t i = 0; i + 1 < cr.size(); ++i) arcs.emplace_back(cr[i], cr[i + 1]);
      arcs.emplace_back(cr.back(), cr.front() + (hi - lo));
    } else {
      std::vector<double> b{lo};
      b.insert(b.end(), cr.begin(), cr.end());
      b.push_back(hi);
      for (size_t i = 0; i + 1 < b.size(); ++i) arcs.emplace_back(b[i], b[i + 1]);
    }
    d.curve_breaks[ci] = cr;
    for (const auto& [sa, sb] : arcs) {
      const Vec2 pa = c.point(sa), pb = c.point(sb), pm = c.point(0.5 * (sa + sb));
      bool aligned = false;
      for (int k = 0; k < 2; ++k) {
        const auto& lines = k == 0 ? grid.u : grid.v;
        if (on_grid_line(lines, pm[k], ltol) && std::abs(pa[k] - pm[k]) <= ltol && std::abs(pb[k] - pm[k]) <= ltol)
          aligned = true;
      }
      if (aligned) continue;
      if (pm[0] < grid.u.front() || pm[0] > grid.u.back() || pm[1] < grid.v.front() || pm[1] > grid.v.back()) continue;
      const auto ij = grid.locate(pm);
      const int cell = grid.cell(ij[0], ij[1]);
      if (piece_of[cell] >= 0) fail(ErrorKind::RefineRequired, "cell crossed by more than one trimming arc");
      piece_of[cell] = static_cast<int>(d.pieces.size());
      d.pieces.push_back({static_cast<int>(ci), cell, sa, sb});
    }
  }
  for (int cell = 0; cell < nc; ++cell) {
    const auto b = grid.box(cell);
    const Vec2 center(0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3]));
    if (piece_of[cell] < 0) {
      d.kind[cell] = region.contains(center) ? CellKind::Entire : CellKind::Empty;
      continue;
    }
    const CutPiece& pc = d.pieces[piece_of[cell]];
    // The cell must be on the active side of every other curve.
    bool blocked = false;
    for (size_t ci = 0; ci < region.curves.size(); ++ci)
      if (static_cast<int>(ci) != pc.curve && region.curves[ci]->side(center) < 0) blocked = true;
    if (blocked) continue;
    std::vector<double> splits;
    d.tiles[cell] = tile_cut_element(b, region.curves[pc.curve], pc.sa, pc.sb, q, &splits);
    d.kind[cell] = CellKind::Partial;
    const ParamCurve& c = *region.curves[pc.curve];
    for (double s : splits) d.curve_breaks[pc.curve].push_back(c.wrap_param(s));
  }
  for (auto& br : d.curve_breaks) std::sort(br.begin(), br.end());
  return d;
}

std::vector<QuadPoint> cell_quadrature(const std::array<double, 4>& box, int n) {
  const GaussRule& g = gauss01(n);
  const double w = box[1] - box[0], h = box[3] - box[2];
  std::vector<QuadPoint> pts;
  pts.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pts.push_back({Vec2(box[0] + w * g.x[i], box[2] + h * g.x[j]), g.w[i] * g.w[j] * w * h});
  return pts;
}

std::vector<QuadPoint> tile_quadrature(const Tile& tile, int n) {
  const GaussRule& g = gauss01(n);
  std::vector<QuadPoint> pts;
  pts.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pts.push_back({tile.point(g.x[i], g.x[j]), g.w[i] * g.w[j] * tile.det(g.x[i], g.x[j])});
  return pts;
}

std::vector<CellRule> domain_quadrature(const TrimmedDomain& dom, int n_entire, int n_tile) {
  std::vector<CellRule> rules;
  for (int c = 0; c < dom.grid.num_cells(); ++c) {
    if (dom.kind[c] == CellKind::Entire) {
      rules.push_back({c, cell_quadrature(dom.grid.box(c), n_entire)});
    } else if (dom.kind[c] == CellKind::Partial) {
      CellRule r{c, {}};
      for (const Tile& t : dom.tiles[c]) {
        auto p = tile_quadrature(t, n_tile > 0 ? n_tile : t.q + 1);
        r.pts.insert(r.pts.end(), p.begin(), p.end());
      }
      rules.push_back(std::move(r));
    }
  }
  return rules;
}

RuledMap::RuledMap(CurvePtr c0, CurvePtr c1) : c0_(std::move(c0)), c1_(std::move(c1)) {
  if (std::abs(c0_->s0() - c1_->s0()) > 1e-14 || std::abs(c0_->s1() - c1_->s1()) > 1e-14)
    fail(ErrorKind::InvalidInput, "ruled map curves must share the parameter interval");
}

Jet2 RuledMap::eval(const Vec2& eta, int order) const {
  const CurveJet a = c0_->eval(eta[0]), b = c1_->eval(eta[0]);
  const double t = eta[1];
  Jet2 j;
  j.v = (1 - t) * a.p + t * b.p;
  if (order >= 1) j.d1 = {(1 - t) * a.d1 + t * b.d1, b.p - a.p};
  if (order >= 2) {
    j.d2[0] = (1 - t) * a.d2 + t * b.d2;
    j.d2[1] = b.d1 - a.d1;
  }
  if (order >= 3) {
    j.d3[0] = (1 - t) * a.d3 + t * b.d3;
    j.d3[1] = b.d2 - a.d2;
  }
  return j;
}

Vec2 RuledMap::inverse(const Vec2& xi, const Vec2& guess) const {
  Vec2 g = guess;
  // Coarse search when the guess is far from the point.
  if ((eval(g, 0).v - xi).norm() > 1e-3) {
    double best = std::numeric_limits<double>::infinity();
    const auto dom = domain();
    for (int i = 0; i < 256; ++i)
      for (int j = 0; j <= 8; ++j) {
        const Vec2 e(dom[0] + (dom[1] - dom[0]) * (i + 0.5) / 256, j / 8.0);
        const double d = (eval(e, 0).v - xi).norm();
        if (d < best) {
          best = d;
          g = e;
        }
      }
  }
  return PlanarMap::inverse(xi, g);
}

BoundaryLayer build_boundary_layer(const CurvePtr& boundary, double delta, int n1, int n2) {
  if (!(delta > 0)) fail(ErrorKind::InvalidOffset, "offset distance must be positive");
  return build_boundary_layer(boundary, make_offset(boundary, delta), n1, n2);
}

BoundaryLayer build_boundary_layer(const CurvePtr& boundary, const CurvePtr& offset, int n1, int n2) {
  if (n1 < 1 || n2 < 1) fail(ErrorKind::InvalidInput, "layer grid needs at least one element per direction");
  if (curve_self_intersects(*offset)) fail(ErrorKind::InvalidOffset, "offset curve intersects itself");
  if (curves_intersect(*boundary, *offset)) fail(ErrorKind::InvalidOffset, "offset curve intersects its boundary curve");
  BoundaryLayer l;
  l.boundary = boundary;
  l.offset = offset;
  auto map = std::make_shared<RuledMap>(boundary, offset);
  l.map = map;
  l.breaks1 = uniform_breaks(boundary->s0(), boundary->s1(), n1);
  l.breaks2 = uniform_breaks(0.0, 1.0, n2);
  const GaussRule& g = gauss01(4);
  for (int e = 0; e < n1; ++e)
    for (int f = 0; f < n2; ++f)
      for (double x : g.x)
        for (double y : g.x) {
          const Vec2 eta(l.breaks1[e] + x * (l.breaks1[e + 1] - l.breaks1[e]),
                         l.breaks2[f] + y * (l.breaks2[f + 1] - l.breaks2[f]));
          const Jet2 j = map->eval(eta, 1);
          if (!(cross2(j.d1[0], j.d1[1]) > 0))
            fail(ErrorKind::InvalidOffset, "boundary layer map has a non-positive Jacobian");
        }
  return l;
}

bool layers_overlap(const PlanarMap& a, const PlanarMap& b, int n) {
  const auto da = a.domain(), db = b.domain();
  const Vec2 cb(0.5 * (db[0] + db[1]), 0.5 * (db[2] + db[3]));
  const double m1 = 1e-9 * (db[1] - db[0]), m2 = 1e-9 * (db[3] - db[2]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 eta(da[0] + (da[1] - da[0]) * (i + 0.5) / n, da[2] + (da[3] - da[2]) * (j + 0.5) / n);
      const Vec2 x = a.eval(eta, 0).v;
      Vec2 e;
      try {
        e = b.inverse(x, cb);
      } catch (const Error&) {
        continue;
      }
      if ((b.eval(e, 0).v - x).norm() > 1e-9) continue;
      if (e[0] > db[0] + m1 && e[0] < db[1] - m1 && e[1] > db[2] + m2 && e[1] < db[3] - m2) return true;
    }
  return false;
}

std::vector<Segment> segment_curve(double lo, double hi, std::vector<double> breaks, double snap) {
  std::vector<double> b;
  for (double x : breaks)
    if (x > lo + snap && x < hi - snap) b.push_back(x);
  std::sort(b.begin(), b.end());
  std::vector<double> pts{lo};
  for (double x : b)
    if (x - pts.back() > snap) pts.push_back(x);
  if (hi - pts.back() <= snap) pts.back() = hi;
  else pts.push_back(hi);
  std::vector<Segment> segs;
  for (size_t i = 0; i + 1 < pts.size(); ++i) segs.push_back({pts[i], pts[i + 1], -1, -1, -1});
  return segs;
}

namespace {

// Cell and tile of dom owning the curve point at parameter s; the point is
// nudged toward the left (active) side of the curve.
std::pair<int, int> owner_on_curve(const TrimmedDomain& dom, const ParamCurve& c, double s) {
  const CurveJet j = c.eval(s);
  const Vec2 nl = Vec2(-j.d1[1], j.d1[0]).normalized();
  const double eps = 1e-9 * dom.grid.min_size();
  const Vec2 x = j.p + eps * nl;
  const auto ij = dom.grid.locate(x);
  const int cell = dom.grid.cell(ij[0], ij[1]);
  if (dom.kind[cell] == CellKind::Empty)
    fail(ErrorKind::SegmentationFailure, "interface segment has no owner on the trimmed side");
  int tile = -1;
  if (dom.kind[cell] == CellKind::Partial) {
    const double sw = c.wrap_param(s);
    const double per = c.s1() - c.s0();
    for (size_t t = 0; t < dom.tiles[cell].size(); ++t) {
      const Tile& tl = dom.tiles[cell][t];
      double a = std::min(tl.sa, tl.sb), b = std::max(tl.sa, tl.sb);
      for (double shift : {0.0, per, -per})
        if (sw + shift >= a - 1e-12 && sw + shift <= b + 1e-12) tile = static_cast<int>(t);
    }
    if (tile < 0) fail(ErrorKind::SegmentationFailure, "interface segment has no owning tile");
  }
  return {cell, tile};
}

}  // namespace

std::vector<Segment> segment_interface(const BoundaryLayer& layer, const TrimmedDomain& interior) {
  int ci = -1;
  for (size_t i = 0; i < interior.region.curves.size(); ++i)
    if (interior.region.curves[i] == layer.offset) ci = static_cast<int>(i);
  if (ci < 0) fail(ErrorKind::SegmentationFailure, "layer offset curve does not bound the interior region");
  const ParamCurve& c = *layer.offset;
  std::vector<double> br = layer.breaks1;
  br.insert(br.end(), interior.curve_breaks[ci].begin(), interior.curve_breaks[ci].end());
  auto segs = segment_curve(c.s0(), c.s1(), br);
  const int n1 = static_cast<int>(layer.breaks1.size()) - 1;
  const int n2 = static_cast<int>(layer.breaks2.size()) - 1;
  for (auto& sg : segs) {
    const double sm = 0.5 * (sg.s0 + sg.s1);
    sg.plus_cell = interval_of(layer.breaks1, sm) + n1 * (n2 - 1);
    const auto [cell, tile] = owner_on_curve(interior, c, sm);
    sg.minus_cell = cell;
    sg.minus_tile = tile;
  }
  return segs;
}

std::vector<Segment> segment_trim_curve(const TrimmedDomain& dom, int curve_index) {
  const ParamCurve& c = *dom.region.curves.at(curve_index);
  auto segs = segment_curve(c.s0(), c.s1(), dom.curve_breaks[curve_index]);
  for (auto& sg : segs) {
    const auto [cell, tile] = owner_on_curve(dom, c, 0.5 * (sg.s0 + sg.s1));
    sg.plus_cell = cell;
    sg.minus_tile = tile;
  }
  return segs;
}

}  // namespace ibcm
