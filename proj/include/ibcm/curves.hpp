#pragma once

#include "ibcm/common.hpp"
#include "ibcm/taylor.hpp"

#include <functional>
#include <memory>

namespace ibcm {

class KnotVector;

using Series = Taylor<6>;
using SeriesPoint = std::array<Series, 2>;
using CurveFn = std::function<SeriesPoint(const Series&)>;

/// Point and parameter derivatives of a planar curve.
struct CurveJet {
  Vec2 p, d1, d2, d3;
};

/// Curve in a parametric plane, s in [s0, s1]. The active region lies on the
/// left of the traversal direction.
class ParamCurve {
 public:
  virtual ~ParamCurve() = default;
  /// Taylor expansion of the curve at s; valid at least to fourth order.
  virtual SeriesPoint series(double s) const = 0;
  virtual double s0() const = 0;
  virtual double s1() const = 0;
  virtual bool closed() const = 0;
  /// Signed side indicator: positive on the active (left) side; for closed
  /// curves and segments the magnitude is the distance to the curve.
  virtual double side(const Vec2& x) const = 0;

  /// Closed curves accept any s; it is wrapped into [s0, s1).
  CurveJet eval(double s) const;
  Vec2 point(double s) const { return eval(s).p; }
  double wrap_param(double s) const;
};

using CurvePtr = std::shared_ptr<const ParamCurve>;

/// Curve given by a series-evaluable function.
class AnalyticCurve : public ParamCurve {
 public:
  /// side_fn may be empty; closed curves then use a sampled polygon for the side test.
  AnalyticCurve(CurveFn f, double s0, double s1, bool closed, std::function<double(const Vec2&)> side_fn = {});
  SeriesPoint series(double s) const override { return f_(Series::variable(s)); }
  double s0() const override { return s0_; }
  double s1() const override { return s1_; }
  bool closed() const override { return closed_; }
  double side(const Vec2& x) const override;

 private:
  CurveFn f_;
  double s0_, s1_;
  bool closed_;
  std::function<double(const Vec2&)> side_fn_;
  std::vector<Vec2> poly_;
  bool ccw_ = true;
};

/// Closed or open piecewise-linear curve parameterized by cumulative length.
class PolylineCurve : public ParamCurve {
 public:
  PolylineCurve(std::vector<Vec2> pts, bool closed);
  SeriesPoint series(double s) const override;
  double s0() const override { return 0.0; }
  double s1() const override { return cum_.back(); }
  bool closed() const override { return closed_; }
  double side(const Vec2& x) const override;
  const std::vector<Vec2>& vertices() const { return pts_; }

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
  bool closed_;
  bool ccw_ = true;
};

/// Normal offset of a base curve toward its left (active) side.
class OffsetCurve : public ParamCurve {
 public:
  OffsetCurve(CurvePtr base, double delta);
  SeriesPoint series(double s) const override;
  double s0() const override { return base_->s0(); }
  double s1() const override { return base_->s1(); }
  bool closed() const override { return base_->closed(); }
  double side(const Vec2& x) const override;

 private:
  CurvePtr base_;
  double delta_;
  std::vector<Vec2> poly_;
  bool ccw_ = true;
};

/// Base curve traversed backwards, s -> s0 + s1 - s; the active side flips.
class ReversedCurve : public ParamCurve {
 public:
  explicit ReversedCurve(CurvePtr base) : base_(std::move(base)) {}
  SeriesPoint series(double s) const override;
  double s0() const override { return base_->s0(); }
  double s1() const override { return base_->s1(); }
  bool closed() const override { return base_->closed(); }
  double side(const Vec2& x) const override { return -base_->side(x); }

 private:
  CurvePtr base_;
};

/// Circle; clockwise traversal keeps the exterior active (a hole).
CurvePtr make_circle(const Vec2& c, double r, bool clockwise, double s0 = 0.0, double s1 = 2.0 * kPi);
/// Axis-aligned ellipse c + (a cos s, +-b sin s).
CurvePtr make_ellipse(const Vec2& c, double a, double b, bool clockwise);
/// Segment p0 -> p1 over parameter [s0, s1].
CurvePtr make_segment(const Vec2& p0, const Vec2& p1, double s0 = 0.0, double s1 = 1.0);
/// Bezier curve over [s0, s1].
CurvePtr make_bezier(std::vector<Vec2> control, double s0 = 0.0, double s1 = 1.0);
/// B-spline curve of degree <= 3 with the given knot vector; periodic knot
/// vectors give closed curves.
CurvePtr make_spline_curve(const KnotVector& kv, std::vector<Vec2> control);
/// Graph xi2 = g(xi1) over [s0, s1]; the region above the graph is active.
CurvePtr make_graph(std::function<Series(const Series&)> g, double s0, double s1);
/// Normal offset toward the left side.
CurvePtr make_offset(CurvePtr base, double delta);

CurvePtr make_reversed(CurvePtr base);

/// Dense polyline samples of a curve (n segments).
std::vector<Vec2> sample_curve(const ParamCurve& c, int n);
/// Winding-number point test for a closed polygon.
bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& x);
/// Distance from x to a polyline (closed adds the last edge).
double polyline_distance(const std::vector<Vec2>& poly, const Vec2& x, bool closed);
/// Signed area of a closed polygon.
double polygon_area(const std::vector<Vec2>& poly);

/// True if the two sampled curves cross or touch within tol (n samples each).
bool curves_intersect(const ParamCurve& a, const ParamCurve& b, int n = 2048, double tol = 1e-9);
/// True if a sampled curve crosses itself (non-adjacent segments).
bool curve_self_intersects(const ParamCurve& a, int n = 2048, double tol = 1e-9);

}  // namespace ibcm
