#include "ibcm/problem.hpp"

#include <algorithm>
#include <cmath>

namespace ibcm {

std::array<double, 4> Patch::rect() const {
  return {space.dir(0).lower(), space.dir(0).upper(), space.dir(1).lower(), space.dir(1).upper()};
}

namespace {

// Periodic directions wrap into [lower, upper).
Vec2 wrap_periodic(const TensorSplineSpace& sp, Vec2 x) {
  for (int k = 0; k < 2; ++k) {
    const KnotVector& kv = sp.dir(k);
    if (!kv.is_periodic()) continue;
    const double lo = kv.lower(), len = kv.upper() - lo;
    x[k] = lo + std::fmod(std::fmod(x[k] - lo, len) + len, len);
  }
  return x;
}

}  // namespace

bool Patch::inside(const Vec2& eta_in) const {
  const auto r = rect();
  const Vec2 eta = wrap_periodic(space, eta_in);
  if (eta[0] < r[0] || eta[0] > r[1] || eta[1] < r[2] || eta[1] > r[3]) return false;
  return !trim || trim->region.side(eta) > 0;
}

std::array<int, 2> Patch::spans(const Vec2& eta_in) const {
  const Vec2 eta = wrap_periodic(space, eta_in);
  return {space.dir(0).find_span(eta[0]), space.dir(1).find_span(eta[1])};
}

std::array<int, 2> Patch::cell_spans(int cell) const {
  const int nu = space.dir(0).num_elements();
  return {space.dir(0).element_span(cell % nu), space.dir(1).element_span(cell / nu)};
}

SurfaceFrame patch_frame(const Patch& p, const Vec2& eta, int order) {
  if (const auto* cm = dynamic_cast<const ComposedMap*>(p.map.get())) {
    const Jet2 in = cm->inner().eval(eta, order);
    const Jet3 out = cm->outer().eval(in.v, std::max(order, 2));
    const Jet3 j = compose(out, in, order);
    const Vec3 ref = out.d1[0];
    std::array<Vec3, 2> dref;
    for (int a = 0; a < 2; ++a) dref[a] = out.d2[d2(0, 0)] * in.d1[a](0) + out.d2[d2(0, 1)] * in.d1[a](1);
    return surface_frame(j, order, &ref, &dref);
  }
  return surface_frame(p.map->eval(eta, order), order);
}

CurvePtr param_curve(std::function<SeriesPoint(const Series&)> f, double s0, double s1, bool closed) {
  // Interface locators are never used for trimming; the side test is inert.
  return std::make_shared<AnalyticCurve>(std::move(f), s0, s1, closed, [](const Vec2&) { return 0.0; });
}

CurvePtr edge_curve(const Patch& p, Side side) {
  const auto r = p.rect();
  switch (side) {
    case Side::ULo:
      return std::make_shared<AnalyticCurve>(
          [u = r[0]](const Series& s) { return SeriesPoint{Series(u), s}; }, r[2], r[3], false,
          [u = r[0]](const Vec2& x) { return u - x[0]; });
    case Side::UHi:
      return std::make_shared<AnalyticCurve>(
          [u = r[1]](const Series& s) { return SeriesPoint{Series(u), s}; }, r[2], r[3], false,
          [u = r[1]](const Vec2& x) { return u - x[0]; });
    case Side::VLo:
      return std::make_shared<AnalyticCurve>(
          [v = r[2]](const Series& s) { return SeriesPoint{s, Series(v)}; }, r[0], r[1], false,
          [v = r[2]](const Vec2& x) { return x[1] - v; });
    case Side::VHi:
      return std::make_shared<AnalyticCurve>(
          [v = r[3]](const Series& s) { return SeriesPoint{s, Series(v)}; }, r[0], r[1], false,
          [v = r[3]](const Vec2& x) { return x[1] - v; });
  }
  fail(ErrorKind::InvalidInput, "unknown patch side");
}

void Problem::validate() const {
  if (patches.empty()) fail(ErrorKind::InvalidInput, "problem has no patches");
  laminate.validate();
  if (!(nitsche.gamma1 == 1.0 || nitsche.gamma1 == 0.0 || nitsche.gamma1 == -1.0))
    fail(ErrorKind::InvalidInput, "gamma1 must be -1, 0 or +1");
  if (!(nitsche.gamma2 >= 0.0 && nitsche.gamma2 <= 1.0)) fail(ErrorKind::InvalidInput, "gamma2 must lie in [0, 1]");
  if (!(nitsche.beta > 0.0)) fail(ErrorKind::InvalidInput, "beta must be positive");
  for (const auto& p : patches) {
    if (!p.map) fail(ErrorKind::InvalidInput, "patch " + p.name + " has no map");
    if (p.theory == Theory::KL && (p.space.dir(0).degree() < 2 || p.space.dir(1).degree() < 2))
      fail(ErrorKind::InvalidInput, "Kirchhoff-Love patch " + p.name + " needs degree >= 2");
    if (p.trim) {
      const auto& g = p.trim->grid;
      const auto& bu = p.space.dir(0).breaks();
      const auto& bv = p.space.dir(1).breaks();
      bool same = g.u.size() == bu.size() && g.v.size() == bv.size();
      for (size_t i = 0; same && i < bu.size(); ++i) same = std::abs(g.u[i] - bu[i]) < 1e-12;
      for (size_t i = 0; same && i < bv.size(); ++i) same = std::abs(g.v[i] - bv[i]) < 1e-12;
      if (!same) fail(ErrorKind::InvalidInput, "trimmed grid of patch " + p.name + " differs from its knot breaks");
    }
  }
  const int np = static_cast<int>(patches.size());
  for (const auto& it : interfaces) {
    if (it.plus.patch < 0 || it.plus.patch >= np || !it.plus.curve)
      fail(ErrorKind::InvalidInput, "interface " + it.name + " has no plus side");
    if (it.minus.patch >= np) fail(ErrorKind::InvalidInput, "interface " + it.name + " has an invalid minus side");
    if (!(it.h > 0)) fail(ErrorKind::InvalidInput, "interface " + it.name + " needs a positive penalty length");
    const Theory tp = patches[it.plus.patch].theory;
    if (it.minus.patch >= 0) {
      const Theory tm = patches[it.minus.patch].theory;
      if (tp != tm && nitsche.gamma2 != 1.0)
        fail(ErrorKind::Unsupported, "mixed KL/RM interface " + it.name + " requires gamma2 = 1");
      if (it.rotation == RotationCoupling::Full && tm == Theory::KL && nitsche.gamma2 != 1.0)
        fail(ErrorKind::Unsupported, "full rotation coupling takes fluxes from RM sides only");
      if (tp != tm && tp != Theory::RM)
        fail(ErrorKind::Unsupported, "mixed interface " + it.name + " needs the RM patch on side +");
    }
    if (it.rotation == RotationCoupling::Full && tp == Theory::KL)
      fail(ErrorKind::Unsupported, "Kirchhoff-Love side + couples rotations through theta_n only");
  }
}

FieldJet unit_field(const TensorSplineSpace::Sample& s, int k, int comp) {
  FieldJet f;
  const int rows = static_cast<int>(s.d.rows());
  if (comp < 3) {
    for (int r = 0; r < rows; ++r) f.u[r][comp] = s.d(r, k);
  } else {
    const int a = comp - 3;
    f.th[0][a] = s.d(0, k);
    if (rows >= 3) {
      f.th[1][a] = s.d(1, k);
      f.th[2][a] = s.d(2, k);
    }
  }
  return f;
}

FieldJet exact_field(const Patch& p, const ExactSolution& ex, const Vec2& eta, const SurfaceFrame& f, int order) {
  Jet3 uj, tj;
  const bool has_theta = static_cast<bool>(ex.theta);
  if (const auto* cm = dynamic_cast<const ComposedMap*>(p.map.get())) {
    const Jet2 in = cm->inner().eval(eta, std::max(order, 1));
    uj = compose(ex.u(in.v, order), in, order);
    if (has_theta) tj = compose(ex.theta(in.v, 1), in, 1);
  } else {
    uj = ex.u(eta, order);
    if (has_theta) tj = ex.theta(eta, 1);
  }
  FieldJet r;
  r.u[0] = uj.v;
  for (int a = 0; a < 2; ++a) r.u[1 + a] = uj.d1[a];
  for (int k = 0; k < 3; ++k) r.u[3 + k] = uj.d2[k];
  for (int k = 0; k < 4; ++k) r.u[6 + k] = uj.d3[k];
  if (p.theory == Theory::RM) {
    if (has_theta) {
      for (int a = 0; a < 2; ++a) {
        r.th[0][a] = tj.v.dot(f.a[a]);
        for (int b = 0; b < 2; ++b) r.th[1 + b][a] = tj.d1[b].dot(f.a[a]) + tj.v.dot(f.da_ab(a, b));
      }
    } else {
      // Kirchhoff-consistent rotations.
      for (int a = 0; a < 2; ++a) {
        r.th[0][a] = -f.a3.dot(r.du(a));
        for (int b = 0; b < 2; ++b) r.th[1 + b][a] = -(f.da3[b].dot(r.du(a)) + f.a3.dot(r.ddu(a, b)));
      }
    }
  }
  return r;
}

bool domain_on_left(const Patch& p, const ParamCurve& c, double s) {
  const CurveJet j = c.eval(s);
  const double vn = j.d1.norm();
  if (!(vn > 0)) fail(ErrorKind::SingularCurve, "interface curve has zero velocity");
  const Vec2 nl(-j.d1[1] / vn, j.d1[0] / vn);
  const auto r = p.rect();
  const double eps = 1e-7 * std::max(r[1] - r[0], r[3] - r[2]);
  const bool in_l = p.inside(j.p + eps * nl);
  const bool in_r = p.inside(j.p - eps * nl);
  if (in_l == in_r)
    fail(ErrorKind::SegmentationFailure, "interface curve does not bound the active region of patch " + p.name);
  return in_l;
}

namespace {

Grid knot_grid(const Patch& p) { return Grid{p.space.dir(0).breaks(), p.space.dir(1).breaks()}; }

std::array<int, 2> owner_spans(const Patch& p, const ParamCurve& c, double s, bool left) {
  const CurveJet j = c.eval(s);
  const Vec2 nl = Vec2(-j.d1[1], j.d1[0]).normalized();
  const auto r = p.rect();
  const double eps = 1e-8 * std::max(r[1] - r[0], r[3] - r[2]);
  Vec2 x = j.p + (left ? eps : -eps) * nl;
  x[0] = std::clamp(x[0], r[0], r[1]);
  x[1] = std::clamp(x[1], r[2], r[3]);
  return p.spans(x);
}

}  // namespace

InterfaceLayout segment_nitsche_interface(const Problem& pb, const NitscheInterface& itf) {
  InterfaceLayout out;
  const Patch& pp = pb.patches[itf.plus.patch];
  std::vector<double> breaks = grid_crossings(*itf.plus.curve, knot_grid(pp), itf.s0, itf.s1);
  const Patch* pm = itf.minus.patch >= 0 ? &pb.patches[itf.minus.patch] : nullptr;
  if (pm) {
    const auto b2 = grid_crossings(*itf.minus.curve, knot_grid(*pm), itf.s0, itf.s1);
    breaks.insert(breaks.end(), b2.begin(), b2.end());
  }
  const double span = itf.s1 - itf.s0;
  const auto segs = segment_curve(itf.s0, itf.s1, breaks, 1e-10 * span);
  if (segs.empty()) fail(ErrorKind::SegmentationFailure, "interface " + itf.name + " has no segments");
  const double probe = 0.5 * (segs[0].s0 + segs[0].s1);
  out.plus_left = domain_on_left(pp, *itf.plus.curve, probe);
  if (pm) out.minus_left = domain_on_left(*pm, *itf.minus.curve, probe);
  for (const auto& sg : segs) {
    InterfaceSegment is;
    is.s0 = sg.s0;
    is.s1 = sg.s1;
    const double mid = 0.5 * (sg.s0 + sg.s1);
    if (domain_on_left(pp, *itf.plus.curve, mid) != out.plus_left)
      fail(ErrorKind::SegmentationFailure, "interface " + itf.name + " changes side on patch " + pp.name);
    is.plus_spans = owner_spans(pp, *itf.plus.curve, mid, out.plus_left);
    if (pm) {
      if (domain_on_left(*pm, *itf.minus.curve, mid) != out.minus_left)
        fail(ErrorKind::SegmentationFailure, "interface " + itf.name + " changes side on patch " + pm->name);
      is.minus_spans = owner_spans(*pm, *itf.minus.curve, mid, out.minus_left);
    }
    out.segments.push_back(is);
  }
  return out;
}

}  // namespace ibcm
