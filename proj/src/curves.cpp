#include "ibcm/curves.hpp"

#include "ibcm/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ibcm {

namespace {

constexpr int kPolySamples = 1024;

double seg_distance(const Vec2& a, const Vec2& b, const Vec2& x) {
  const Vec2 d = b - a;
  const double l2 = d.squaredNorm();
  double t = l2 > 0 ? (x - a).dot(d) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * d - x).norm();
}

double cross2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

// Signed side for a closed curve from its sampled polygon: the left side of a
// counter-clockwise loop is its interior.
double polygon_side(const std::vector<Vec2>& poly, bool ccw, const Vec2& x) {
  const double d = polyline_distance(poly, x, true);
  const bool inside = point_in_polygon(poly, x);
  return (inside == ccw) ? d : -d;
}

// Polygon side refined near the curve: the polygon is only accurate to its
// chord height, so points within a few edge lengths are projected onto the
// curve and signed by the tangent. poly holds uniform parameter samples
// without the closing point.
double refined_side(const ParamCurve& c, const std::vector<Vec2>& poly, bool ccw, const Vec2& x) {
  const double coarse = polygon_side(poly, ccw, x);
  const int n = static_cast<int>(poly.size());
  int best = 0;
  double bd = std::numeric_limits<double>::infinity(), edge = 0;
  for (int i = 0; i < n; ++i) {
    const double d = (poly[i] - x).norm();
    if (d < bd) {
      bd = d;
      best = i;
    }
    edge = std::max(edge, (poly[(i + 1) % n] - poly[i]).norm());
  }
  if (std::abs(coarse) > 2 * edge) return coarse;
  const double ds = (c.s1() - c.s0()) / n;
  const double sa = c.s0() + ds * (best - 1), sb = c.s0() + ds * (best + 1);
  double s = c.s0() + ds * best;
  for (int it = 0; it < 30; ++it) {
    const CurveJet j = c.eval(s);
    const Vec2 r = j.p - x;
    const double f = r.dot(j.d1), df = j.d1.squaredNorm() + r.dot(j.d2);
    if (!(df > 0)) break;
    const double step = f / df;
    s = std::clamp(s - step, sa, sb);
    if (std::abs(step) < 1e-15 * (c.s1() - c.s0())) break;
  }
  const CurveJet j = c.eval(s);
  const double vn = j.d1.norm();
  if (!(vn > 0)) return coarse;
  return cross2(j.d1, x - j.p) / vn;
}

Series series_derivative(const Series& a) {
  Series d;
  for (int k = 0; k < 6; ++k) d.c[k] = (k + 1) * a.c[k + 1];
  return d;
}

bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2, double tol) {
  const double d1 = cross2(p2 - p1, q1 - p1), d2 = cross2(p2 - p1, q2 - p1);
  const double d3 = cross2(q2 - q1, p1 - q1), d4 = cross2(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return seg_distance(p1, p2, q1) < tol || seg_distance(p1, p2, q2) < tol || seg_distance(q1, q2, p1) < tol ||
         seg_distance(q1, q2, p2) < tol;
}

}  // namespace

double ParamCurve::wrap_param(double s) const {
  if (!closed() || (s >= s0() && s <= s1())) return s;
  const double per = s1() - s0();
  double r = std::fmod(s - s0(), per);
  if (r < 0) r += per;
  return s0() + r;
}

CurveJet ParamCurve::eval(double s) const {
  const SeriesPoint sp = series(wrap_param(s));
  CurveJet j;
  j.p = Vec2(sp[0].deriv(0), sp[1].deriv(0));
  j.d1 = Vec2(sp[0].deriv(1), sp[1].deriv(1));
  j.d2 = Vec2(sp[0].deriv(2), sp[1].deriv(2));
  j.d3 = Vec2(sp[0].deriv(3), sp[1].deriv(3));
  return j;
}

AnalyticCurve::AnalyticCurve(CurveFn f, double s0, double s1, bool closed, std::function<double(const Vec2&)> side_fn)
    : f_(std::move(f)), s0_(s0), s1_(s1), closed_(closed), side_fn_(std::move(side_fn)) {
  if (!(s1_ > s0_)) fail(ErrorKind::InvalidInput, "curve parameter interval is empty");
  if (closed_ && !side_fn_) {
    poly_ = sample_curve(*this, kPolySamples);
    poly_.pop_back();
    ccw_ = polygon_area(poly_) > 0;
  }
}

double AnalyticCurve::side(const Vec2& x) const {
  if (side_fn_) return side_fn_(x);
  if (closed_) return refined_side(*this, poly_, ccw_, x);
  fail(ErrorKind::Unsupported, "open analytic curve without a side function");
}

PolylineCurve::PolylineCurve(std::vector<Vec2> pts, bool closed) : pts_(std::move(pts)), closed_(closed) {
  if (pts_.size() < 2) fail(ErrorKind::InvalidInput, "polyline needs at least two points");
  if (closed_ && (pts_.front() - pts_.back()).norm() > 0) pts_.push_back(pts_.front());
  cum_.assign(1, 0.0);
  for (size_t i = 1; i < pts_.size(); ++i) {
    const double l = (pts_[i] - pts_[i - 1]).norm();
    if (!(l > 0)) fail(ErrorKind::SingularCurve, "polyline has a zero-length edge");
    cum_.push_back(cum_.back() + l);
  }
  if (closed_) {
    std::vector<Vec2> loop(pts_.begin(), pts_.end() - 1);
    ccw_ = polygon_area(loop) > 0;
  }
}

SeriesPoint PolylineCurve::series(double s) const {
  s = std::clamp(s, cum_.front(), cum_.back());
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  size_t i = std::min<size_t>(std::max<ptrdiff_t>(it - cum_.begin(), 1), cum_.size() - 1) - 1;
  const Vec2 d = (pts_[i + 1] - pts_[i]) / (cum_[i + 1] - cum_[i]);
  const Vec2 p = pts_[i] + (s - cum_[i]) * d;
  SeriesPoint r;
  for (int k = 0; k < 2; ++k) {
    r[k].c[0] = p[k];
    r[k].c[1] = d[k];
  }
  return r;
}

double PolylineCurve::side(const Vec2& x) const {
  if (closed_) {
    std::vector<Vec2> loop(pts_.begin(), pts_.end() - 1);
    return polygon_side(loop, ccw_, x);
  }
  // Open polyline: sign from the nearest edge.
  double best = std::numeric_limits<double>::infinity(), sgn = 1.0;
  for (size_t i = 0; i + 1 < pts_.size(); ++i) {
    const double d = seg_distance(pts_[i], pts_[i + 1], x);
    if (d < best) {
      best = d;
      sgn = cross2(pts_[i + 1] - pts_[i], x - pts_[i]) >= 0 ? 1.0 : -1.0;
    }
  }
  return sgn * best;
}

OffsetCurve::OffsetCurve(CurvePtr base, double delta) : base_(std::move(base)), delta_(delta) {
  if (!base_) fail(ErrorKind::InvalidInput, "offset of a null curve");
  if (base_->closed()) {
    poly_ = sample_curve(*this, kPolySamples);
    poly_.pop_back();
    ccw_ = polygon_area(poly_) > 0;
  }
}

SeriesPoint OffsetCurve::series(double s) const {
  // The differentiated base series loses its top coefficient; nested offsets
  // keep enough orders for third derivatives.
  const SeriesPoint b = base_->series(base_->wrap_param(s));
  const Series dx = series_derivative(b[0]), dy = series_derivative(b[1]);
  const Series inv = 1.0 / sqrt(dx * dx + dy * dy);
  return {b[0] - delta_ * dy * inv, b[1] + delta_ * dx * inv};
}

double OffsetCurve::side(const Vec2& x) const {
  if (base_->closed()) return refined_side(*this, poly_, ccw_, x);
  return base_->side(x) - delta_;
}

SeriesPoint ReversedCurve::series(double s) const {
  SeriesPoint b = base_->series(base_->wrap_param(base_->s0() + base_->s1() - s));
  for (auto& c : b)
    for (int k = 1; k < static_cast<int>(c.c.size()); k += 2) c.c[k] = -c.c[k];
  return b;
}

CurvePtr make_reversed(CurvePtr base) { return std::make_shared<ReversedCurve>(std::move(base)); }

CurvePtr make_circle(const Vec2& c, double r, bool clockwise, double s0, double s1) {
  if (!(r > 0)) fail(ErrorKind::InvalidInput, "circle radius must be positive");
  const double sg = clockwise ? -1.0 : 1.0;
  const bool closed = std::abs(s1 - s0 - 2.0 * kPi) < 1e-14;
  CurveFn f = [c, r, sg](const Series& s) -> SeriesPoint {
    Series sn, cs;
    sincos(s, sn, cs);
    return {c[0] + r * cs, c[1] + sg * r * sn};
  };
  auto side = [c, r, sg](const Vec2& x) { return sg * (r - (x - c).norm()); };
  return std::make_shared<AnalyticCurve>(f, s0, s1, closed, side);
}

CurvePtr make_ellipse(const Vec2& c, double a, double b, bool clockwise) {
  if (!(a > 0 && b > 0)) fail(ErrorKind::InvalidInput, "ellipse semi-axes must be positive");
  const double sg = clockwise ? -1.0 : 1.0;
  CurveFn f = [c, a, b, sg](const Series& s) -> SeriesPoint {
    Series sn, cs;
    sincos(s, sn, cs);
    return {c[0] + a * cs, c[1] + sg * b * sn};
  };
  return std::make_shared<AnalyticCurve>(f, 0.0, 2.0 * kPi, true);
}

CurvePtr make_segment(const Vec2& p0, const Vec2& p1, double s0, double s1) {
  if ((p1 - p0).norm() == 0) fail(ErrorKind::SingularCurve, "degenerate segment");
  const Vec2 d = (p1 - p0) / (s1 - s0);
  CurveFn f = [p0, d, s0](const Series& s) -> SeriesPoint {
    return {p0[0] + d[0] * (s - s0), p0[1] + d[1] * (s - s0)};
  };
  const Vec2 u = d.normalized();
  auto side = [p0, u](const Vec2& x) { return cross2(u, x - p0); };
  return std::make_shared<AnalyticCurve>(f, s0, s1, false, side);
}

CurvePtr make_spline_curve(const KnotVector& kv, std::vector<Vec2> control) {
  if (kv.degree() > 3) fail(ErrorKind::Unsupported, "spline curves are limited to degree 3");
  if (static_cast<int>(control.size()) != kv.num_functions())
    fail(ErrorKind::InvalidInput, "spline curve control count does not match the knot vector");
  CurveFn f = [kv, control](const Series& s) -> SeriesPoint {
    const double s0 = s.value();
    const BasisValues b = kv.eval(s0, 3);
    std::array<Vec2, 4> d{};
    for (auto& v : d) v.setZero();
    for (int k = 0; k <= 3; ++k)
      for (int j = 0; j <= b.p; ++j) d[k] += b.d[k][j] * control[kv.wrap(b.first + j)];
    // Exact for degree <= 3: Taylor polynomial in (s - s0).
    const Series ds = s - s0;
    SeriesPoint r{Series(0.0), Series(0.0)};
    Series pw(1.0);
    double fact = 1.0;
    for (int k = 0; k <= 3; ++k) {
      if (k > 0) {
        pw = pw * ds;
        fact *= k;
      }
      r[0] += pw * (d[k][0] / fact);
      r[1] += pw * (d[k][1] / fact);
    }
    return r;
  };
  return std::make_shared<AnalyticCurve>(f, kv.lower(), kv.upper(), kv.is_periodic());
}

CurvePtr make_bezier(std::vector<Vec2> control, double s0, double s1) {
  if (control.size() < 2) fail(ErrorKind::InvalidInput, "Bezier curve needs at least two control points");
  const int n = static_cast<int>(control.size()) - 1;
  CurveFn f = [control, n, s0, s1](const Series& s) -> SeriesPoint {
    const Series t = (s - s0) / (s1 - s0);
    const Series omt = 1.0 - t;
    SeriesPoint r{Series(0.0), Series(0.0)};
    double binom = 1.0;
    for (int i = 0; i <= n; ++i) {
      Series b(binom);
      for (int k = 0; k < i; ++k) b = b * t;
      for (int k = 0; k < n - i; ++k) b = b * omt;
      r[0] += control[i][0] * b;
      r[1] += control[i][1] * b;
      binom = binom * (n - i) / (i + 1);
    }
    return r;
  };
  const bool closed = (control.front() - control.back()).norm() < 1e-14;
  if (closed) return std::make_shared<AnalyticCurve>(f, s0, s1, true);
  // Open Bezier: nearest-sample sign.
  auto holder = std::make_shared<std::vector<Vec2>>();
  auto curve = std::make_shared<AnalyticCurve>(f, s0, s1, false, [holder](const Vec2& x) {
    const auto& p = *holder;
    double best = std::numeric_limits<double>::infinity(), sgn = 1.0;
    for (size_t i = 0; i + 1 < p.size(); ++i) {
      const double d = seg_distance(p[i], p[i + 1], x);
      if (d < best) {
        best = d;
        sgn = cross2(p[i + 1] - p[i], x - p[i]) >= 0 ? 1.0 : -1.0;
      }
    }
    return sgn * best;
  });
  *holder = sample_curve(*curve, kPolySamples);
  return curve;
}

CurvePtr make_graph(std::function<Series(const Series&)> g, double s0, double s1) {
  CurveFn f = [g](const Series& s) -> SeriesPoint { return {s, g(s)}; };
  auto side = [g](const Vec2& x) { return x[1] - g(Series(x[0])).value(); };
  return std::make_shared<AnalyticCurve>(f, s0, s1, false, side);
}

CurvePtr make_offset(CurvePtr base, double delta) { return std::make_shared<OffsetCurve>(std::move(base), delta); }

std::vector<Vec2> sample_curve(const ParamCurve& c, int n) {
  std::vector<Vec2> pts(n + 1);
  for (int i = 0; i <= n; ++i) pts[i] = c.point(c.s0() + (c.s1() - c.s0()) * i / n);
  return pts;
}

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& x) {
  int wn = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (a[1] <= x[1]) {
      if (b[1] > x[1] && cross2(b - a, x - a) > 0) ++wn;
    } else if (b[1] <= x[1] && cross2(b - a, x - a) < 0) {
      --wn;
    }
  }
  return wn != 0;
}

double polyline_distance(const std::vector<Vec2>& poly, const Vec2& x, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  const size_t m = closed ? n : n - 1;
  for (size_t i = 0; i < m; ++i) best = std::min(best, seg_distance(poly[i], poly[(i + 1) % n], x));
  return best;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0;
  for (size_t i = 0; i < poly.size(); ++i) a += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

bool curves_intersect(const ParamCurve& a, const ParamCurve& b, int n, double tol) {
  const auto pa = sample_curve(a, n), pb = sample_curve(b, n);
  // Bounding-box bucketing would help for large n; pairwise is fine at 2048.
  Eigen::AlignedBox2d bb;
  for (const auto& p : pb) bb.extend(p);
  bb.min().array() -= tol;
  bb.max().array() += tol;
  for (size_t i = 0; i + 1 < pa.size(); ++i) {
    Eigen::AlignedBox2d sa;
    sa.extend(pa[i]);
    sa.extend(pa[i + 1]);
    if (!sa.intersects(bb)) continue;
    for (size_t j = 0; j + 1 < pb.size(); ++j)
      if (segments_touch(pa[i], pa[i + 1], pb[j], pb[j + 1], tol)) return true;
  }
  return false;
}

bool curve_self_intersects(const ParamCurve& a, int n, double tol) {
  const auto p = sample_curve(a, n);
  const size_t m = p.size() - 1;
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = i + 2; j < m; ++j) {
      if (a.closed() && i == 0 && j == m - 1) continue;
      const double d1 = cross2(p[i + 1] - p[i], p[j] - p[i]), d2 = cross2(p[i + 1] - p[i], p[j + 1] - p[i]);
      const double d3 = cross2(p[j + 1] - p[j], p[i] - p[j]), d4 = cross2(p[j + 1] - p[j], p[i + 1] - p[j]);
      if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
        return true;
    }
  }
  return false;
}

}  // namespace ibcm
