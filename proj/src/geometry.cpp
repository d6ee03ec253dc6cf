#include "ibcm/geometry.hpp"

#include <cmath>

namespace ibcm {

Vec2 PlanarMap::inverse(const Vec2& xi, const Vec2& guess) const {
  Vec2 eta = guess;
  for (int it = 0; it < 50; ++it) {
    const Jet2 j = eval(eta, 1);
    Mat2 J;
    J.col(0) = j.d1[0];
    J.col(1) = j.d1[1];
    const Vec2 r = j.v - xi;
    if (r.norm() < 1e-14 * (1.0 + xi.norm())) return eta;
    eta -= J.partialPivLu().solve(r);
  }
  const Jet2 j = eval(eta, 0);
  if ((j.v - xi).norm() > 1e-10 * (1.0 + xi.norm()))
    fail(ErrorKind::SingularGeometry, "inverse planar map did not converge");
  return eta;
}

Jet3 PlaneMap::eval(const Vec2& xi, int) const {
  Jet3 j;
  j.v = o_ + xi[0] * e1_ + xi[1] * e2_;
  j.d1 = {e1_, e2_};
  return j;
}

Mat3 CylinderMap::rotation_y(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3 q;
  q << c, 0, -s, 0, 1, 0, s, 0, c;
  return q;
}

Jet3 CylinderMap::eval(const Vec2& xi, int order) const {
  const double c = std::cos(xi[0]), s = std::sin(xi[0]), r = r_;
  Jet3 j;
  j.v = q_ * Vec3(-r * c, -r * s, xi[1]);
  if (order >= 1) j.d1 = {q_ * Vec3(r * s, -r * c, 0), q_ * Vec3(0, 0, 1)};
  if (order >= 2) j.d2[0] = q_ * Vec3(r * c, r * s, 0);
  if (order >= 3) j.d3[0] = q_ * Vec3(-r * s, r * c, 0);
  return j;
}

Jet3 ArcCylinderMap::eval(const Vec2& xi, int order) const {
  const double r = r_, phi = xi[0] / r;
  const double c = std::cos(phi), s = std::sin(phi);
  Jet3 j;
  j.v = Vec3(-r * s, r * c, xi[1]);
  if (order >= 1) j.d1 = {Vec3(-c, -s, 0), Vec3(0, 0, 1)};
  if (order >= 2) j.d2[0] = Vec3(s / r, -c / r, 0);
  if (order >= 3) j.d3[0] = Vec3(c / (r * r), s / (r * r), 0);
  return j;
}

SplineSurfaceMap::SplineSurfaceMap(TensorSplineSpace space, std::vector<Vec3> control)
    : space_(std::move(space)), cp_(std::move(control)) {
  if (static_cast<int>(cp_.size()) != space_.num_functions())
    fail(ErrorKind::InvalidInput, "control point count does not match the spline space");
}

std::array<double, 4> SplineSurfaceMap::domain() const {
  return {space_.dir(0).lower(), space_.dir(0).upper(), space_.dir(1).lower(), space_.dir(1).upper()};
}

Jet3 SplineSurfaceMap::eval(const Vec2& xi, int order) const {
  const auto s = space_.eval(xi, order);
  Jet3 j;
  for (size_t c = 0; c < s.fun.size(); ++c) {
    const Vec3& p = cp_[s.fun[c]];
    j.v += s.d(0, c) * p;
    if (order >= 1)
      for (int a = 0; a < 2; ++a) j.d1[a] += s.d(1 + a, c) * p;
    if (order >= 2)
      for (int k = 0; k < 3; ++k) j.d2[k] += s.d(3 + k, c) * p;
    if (order >= 3)
      for (int k = 0; k < 4; ++k) j.d3[k] += s.d(6 + k, c) * p;
  }
  return j;
}

Jet2 AffinePlanarMap::eval(const Vec2& eta, int) const {
  Jet2 j;
  j.v = a_ * eta + c_;
  j.d1 = {a_.col(0), a_.col(1)};
  return j;
}

Vec2 AffinePlanarMap::inverse(const Vec2& xi, const Vec2&) const { return a_.inverse() * (xi - c_); }

Jet3 ComposedMap::eval(const Vec2& eta, int order) const {
  const Jet2 in = inner_->eval(eta, order);
  const Jet3 out = outer_->eval(in.v, order);
  return compose(out, in, order);
}

SurfaceFrame surface_frame(const Jet3& jet, int order, const Vec3* ref, const std::array<Vec3, 2>* dref) {
  SurfaceFrame f;
  f.order = order;
  f.x = jet.v;
  f.a = jet.d1;
  const Vec3 cr = f.a[0].cross(f.a[1]);
  const double scale = f.a[0].squaredNorm() * f.a[1].squaredNorm();
  const double det_g = cr.squaredNorm();
  if (!(det_g > 1e-14 * scale) || !std::isfinite(det_g)) {
    fail(ErrorKind::SingularGeometry, "degenerate metric at x = (" + std::to_string(jet.v[0]) + ", " +
                                          std::to_string(jet.v[1]) + ", " + std::to_string(jet.v[2]) + ")");
  }
  f.sqrt_a = std::sqrt(det_g);
  f.a3 = cr / f.sqrt_a;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) f.g(i, k) = f.a[i].dot(f.a[k]);
  f.ginv = f.g.inverse();
  for (int i = 0; i < 2; ++i) f.acon[i] = f.ginv(i, 0) * f.a[0] + f.ginv(i, 1) * f.a[1];
  f.da = jet.d2;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) f.b(i, k) = f.a3.dot(f.da[d2(i, k)]);
  f.bmix = f.ginv * f.b;
  for (int i = 0; i < 2; ++i) f.da3[i] = -(f.bmix(0, i) * f.a[0] + f.bmix(1, i) * f.a[1]);
  for (int g = 0; g < 2; ++g)
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) f.gam[g](i, k) = f.acon[g].dot(f.da[d2(i, k)]);
  if (order >= 3) {
    f.dda = jet.d3;
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
          f.db[c](i, k) = f.da3[c].dot(f.da[d2(i, k)]) + f.a3.dot(f.dda[d3(i, k, c)]);
    for (int g = 0; g < 2; ++g)
      for (int c = 0; c < 2; ++c)
        f.dacon[g][c] = -(f.gam[g](c, 0) * f.acon[0] + f.gam[g](c, 1) * f.acon[1]) + f.bmix(g, c) * f.a3;
    for (int g = 0; g < 2; ++g)
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 2; ++i)
          for (int k = 0; k < 2; ++k)
            f.dgam[g][c](i, k) = f.dacon[g][c].dot(f.da[d2(i, k)]) + f.acon[g].dot(f.dda[d3(i, k, c)]);
  }
  if (ref) {
    f.ref = *ref;
    if (dref) f.dref = *dref;
  } else {
    f.ref = f.a[0];
    f.dref = {f.da[d2(0, 0)], f.da[d2(0, 1)]};
  }
  return f;
}

CurveFrame curve_frame(const SurfaceFrame& f, const Vec2& vel, const Vec2& acc, bool domain_on_left) {
  CurveFrame c;
  const Vec3 xt = f.a[0] * vel[0] + f.a[1] * vel[1];
  c.jac = xt.norm();
  if (!(c.jac > 1e-300) || !std::isfinite(c.jac)) fail(ErrorKind::SingularCurve, "zero curve velocity");
  const Vec3 tc = xt / c.jac;
  if (domain_on_left) {
    c.n = tc.cross(f.a3);
    c.t = tc;
  } else {
    c.n = f.a3.cross(tc);
    c.t = -tc;
  }
  for (int a = 0; a < 2; ++a) {
    c.n_cov[a] = c.n.dot(f.a[a]);
    c.t_cov[a] = c.t.dot(f.a[a]);
    c.n_con[a] = c.n.dot(f.acon[a]);
    c.t_con[a] = c.t.dot(f.acon[a]);
  }
  c.deta_ds = vel / c.jac;
  Vec3 xtt = f.a[0] * acc[0] + f.a[1] * acc[1];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) xtt += f.da[d2(a, b)] * (vel[a] * vel[b]);
  const Vec3 dtc = (xtt - tc * tc.dot(xtt)) / (c.jac * c.jac);
  const Vec3 a3s = f.da3[0] * c.deta_ds[0] + f.da3[1] * c.deta_ds[1];
  if (domain_on_left) {
    c.dt_ds = dtc;
    c.dn_ds = dtc.cross(f.a3) + tc.cross(a3s);
  } else {
    c.dt_ds = -dtc;
    c.dn_ds = a3s.cross(tc) + f.a3.cross(dtc);
  }
  for (int a = 0; a < 2; ++a) {
    const Vec3 das = f.da[d2(a, 0)] * c.deta_ds[0] + f.da[d2(a, 1)] * c.deta_ds[1];
    c.dn_cov_ds[a] = c.dn_ds.dot(f.a[a]) + c.n.dot(das);
    c.dt_cov_ds[a] = c.dt_ds.dot(f.a[a]) + c.t.dot(das);
  }
  return c;
}

}  // namespace ibcm
