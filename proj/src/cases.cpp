#include "ibcm/cases.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace ibcm {

namespace {

constexpr int kTileOrder = 3;

Laminate plate_laminate(double tau) {
  return Laminate::orthotropic(25e9, 1e9, 0.25, 0.4e9, {0.0, kPi / 2, kPi / 2, 0.0}, tau);
}

NitscheParams nitsche_from(const CaseOptions& o, double beta_default) {
  NitscheParams n;
  n.gamma1 = o.gamma1;
  n.gamma2 = o.gamma2;
  n.beta = o.beta > 0 ? o.beta : beta_default;
  return n;
}

std::vector<int> all_comps(Theory t) { return t == Theory::RM ? std::vector<int>{0, 1, 2, 3, 4} : std::vector<int>{0, 1, 2}; }

RotationCoupling natural_coupling(Theory plus, Theory minus) {
  return (plus == Theory::KL && minus == Theory::KL) ? RotationCoupling::Normal : RotationCoupling::Full;
}

Patch make_patch(std::string name, std::shared_ptr<const SurfaceMap> map, TensorSplineSpace space, Theory t,
                 std::shared_ptr<const TrimmedDomain> trim = nullptr) {
  Patch p;
  p.name = std::move(name);
  p.map = std::move(map);
  p.space = std::move(space);
  p.theory = t;
  p.trim = std::move(trim);
  return p;
}

// Cells fully inside or outside the region; used when trimming curves run on grid lines.
std::shared_ptr<TrimmedDomain> aligned_domain(const Grid& grid, const Region& region) {
  auto d = std::make_shared<TrimmedDomain>();
  d->grid = grid;
  d->region = region;
  d->kind.assign(grid.num_cells(), CellKind::Empty);
  d->tiles.assign(grid.num_cells(), {});
  d->curve_breaks.assign(region.curves.size(), {});
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto b = grid.box(c);
    if (region.contains(Vec2(0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3])))) d->kind[c] = CellKind::Entire;
  }
  return d;
}

NitscheInterface make_interface(std::string name, PatchCurve plus, PatchCurve minus, double s0, double s1,
                                RotationCoupling rot, double h, bool couple_u = true) {
  NitscheInterface i;
  i.name = std::move(name);
  i.plus = std::move(plus);
  i.minus = std::move(minus);
  i.s0 = s0;
  i.s1 = s1;
  i.rotation = rot;
  i.h = h;
  i.couple_u = couple_u;
  return i;
}

// Power-of-two layer count with delta / n2 <= 1.5 h.
int layer_divisions(double delta, double h) {
  int n2 = 1;
  while (delta / n2 > 1.5 * h) n2 *= 2;
  return n2;
}

}  // namespace

const char* to_string(Mode m) { return m == Mode::IBCM ? "ibcm" : "trimmed"; }

std::vector<double> breaks_between(double lo, double hi, int n) {
  if (n < 1) fail(ErrorKind::InvalidInput, "need at least one element");
  std::vector<double> b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = lo + (hi - lo) * i / n;
  b.back() = hi;
  return b;
}

TensorSplineSpace open_space(const std::vector<double>& bu, const std::vector<double>& bv, int p) {
  return TensorSplineSpace(KnotVector::open(bu, p, p - 1), KnotVector::open(bv, p, p - 1));
}

std::function<Jet3(const Vec2&, int)> sine_field(const Vec3& amp, double n1, double n2) {
  const double k1 = kPi * n1, k2 = kPi * n2;
  return [amp, k1, k2](const Vec2& x, int) {
    const double s1 = std::sin(k1 * x[0]), c1 = std::cos(k1 * x[0]);
    const double s2 = std::sin(k2 * x[1]), c2 = std::cos(k2 * x[1]);
    const std::array<double, 4> A{s1, k1 * c1, -k1 * k1 * s1, -k1 * k1 * k1 * c1};
    const std::array<double, 4> B{s2, k2 * c2, -k2 * k2 * s2, -k2 * k2 * k2 * c2};
    Jet3 j;
    j.v = amp * (A[0] * B[0]);
    j.d1 = {amp * (A[1] * B[0]), amp * (A[0] * B[1])};
    j.d2 = {amp * (A[2] * B[0]), amp * (A[1] * B[1]), amp * (A[0] * B[2])};
    j.d3 = {amp * (A[3] * B[0]), amp * (A[2] * B[1]), amp * (A[1] * B[2]), amp * (A[0] * B[3])};
    return j;
  };
}

std::function<Jet3(const Vec2&, int)> polynomial_field(std::vector<Monomial> terms) {
  // k-th derivative of x^m.
  auto dpow = [](double x, int m, int k) {
    if (k > m) return 0.0;
    double f = 1;
    for (int i = 0; i < k; ++i) f *= (m - i);
    return f * std::pow(x, m - k);
  };
  return [terms = std::move(terms), dpow](const Vec2& x, int) {
    Jet3 j;
    for (const auto& t : terms) {
      auto P = [&](int a, int b) { return dpow(x[0], t.m, a) * dpow(x[1], t.n, b); };
      j.v += t.coef * P(0, 0);
      j.d1[0] += t.coef * P(1, 0);
      j.d1[1] += t.coef * P(0, 1);
      j.d2[0] += t.coef * P(2, 0);
      j.d2[1] += t.coef * P(1, 1);
      j.d2[2] += t.coef * P(0, 2);
      j.d3[0] += t.coef * P(3, 0);
      j.d3[1] += t.coef * P(2, 1);
      j.d3[2] += t.coef * P(1, 2);
      j.d3[3] += t.coef * P(0, 3);
    }
    return j;
  };
}

StrongDirichlet exact_dirichlet(const Problem& pb, int patch, Side side, std::vector<int> comps,
                                const ExactSolution& ex) {
  StrongDirichlet d;
  d.patch = patch;
  d.side = side;
  d.comps = std::move(comps);
  const Patch p = pb.patches[patch];
  d.value = [p, ex](int c, const Vec2& eta) {
    const SurfaceFrame f = patch_frame(p, eta, 2);
    const FieldJet j = exact_field(p, ex, eta, f, 1);
    return c < 3 ? j.u[0][c] : j.th[0][c - 3];
  };
  return d;
}

ExactSolution plate_exact_solution(Theory t) {
  ExactSolution ex;
  ex.u = sine_field(Vec3(0.1, 0.1, 0.1), 2, 2);
  if (t == Theory::RM) ex.theta = sine_field(Vec3(0.1, 0.1, 0.0), 2, 2);
  return ex;
}

// ---------------------------------------------------------------- plates

namespace {

struct PlateGeometry {
  int interior = 0;
  int layer = -1;
  double h = 0, hpen = 0;
};

// Interior and layer patches for a plate whose hole boundary and offset are given.
PlateGeometry add_plate_patches(Problem& pb, const CurvePtr& hole, const CurvePtr& offset, int level, int p,
                                Theory interior_theory, Theory layer_theory, double delta, Mode mode, int n1) {
  PlateGeometry g;
  const int n = 1 << level;
  g.h = 1.0 / n;
  auto plane = std::make_shared<PlaneMap>(std::array<double, 4>{0, 1, 0, 1});
  const Grid grid{breaks_between(0, 1, n), breaks_between(0, 1, n)};
  const CurvePtr trim_curve = mode == Mode::IBCM ? offset : hole;
  auto dom = std::make_shared<TrimmedDomain>(classify_elements(grid, Region{{0, 1, 0, 1}, {trim_curve}}, kTileOrder));
  pb.patches.push_back(make_patch("interior", plane, open_space(grid.u, grid.v, p), interior_theory, dom));
  g.interior = 0;
  if (mode == Mode::Trimmed) {
    g.hpen = g.h;
    pb.interfaces.push_back(make_interface("hole", {0, hole}, {}, hole->s0(), hole->s1(),
                                           interior_theory == Theory::RM ? RotationCoupling::Full
                                                                         : RotationCoupling::Normal,
                                           g.hpen));
    return g;
  }
  const int n2 = layer_divisions(delta, g.h);
  const BoundaryLayer bl = build_boundary_layer(hole, offset, n1, n2);
  auto lmap = std::make_shared<ComposedMap>(plane, bl.map);
  pb.patches.push_back(make_patch("layer", lmap,
                                  TensorSplineSpace(KnotVector::periodic(bl.breaks1, p),
                                                    KnotVector::open(bl.breaks2, p, p - 1)),
                                  layer_theory));
  g.layer = 1;
  g.hpen = std::min(g.h, delta);
  pb.interfaces.push_back(make_interface("layer-interior", {1, edge_curve(pb.patches[1], Side::VHi)}, {0, offset},
                                         hole->s0(), hole->s1(), natural_coupling(layer_theory, interior_theory),
                                         g.hpen));
  return g;
}

// Hole conditions on the layer's inner edge: strong u, strong (RM) or weak (KL) rotations.
void hole_conditions(Problem& pb, const PlateGeometry& g, const ExactSolution* ex, double hpen) {
  const Patch& L = pb.patches[g.layer];
  const std::vector<int> comps = L.theory == Theory::RM ? std::vector<int>{0, 1, 2, 3, 4} : std::vector<int>{0, 1, 2};
  if (ex) {
    pb.dirichlet.push_back(exact_dirichlet(pb, g.layer, Side::VLo, comps, *ex));
  } else {
    StrongDirichlet d;
    d.patch = g.layer;
    d.side = Side::VLo;
    d.comps = comps;
    pb.dirichlet.push_back(d);
  }
  if (L.theory == Theory::KL) {
    const double s0 = L.space.dir(0).lower(), s1 = L.space.dir(0).upper();
    pb.interfaces.push_back(make_interface("hole-rotation", {g.layer, edge_curve(L, Side::VLo)}, {}, s0, s1,
                                           RotationCoupling::Normal, hpen, false));
  }
}

constexpr Side kSides[4] = {Side::ULo, Side::UHi, Side::VLo, Side::VHi};

}  // namespace

Case plate_with_hole(const CaseOptions& o) {
  if (o.theory == Theory::KL && o.p < 2) fail(ErrorKind::Unsupported, "Kirchhoff-Love patches need p >= 2");
  Case c;
  c.name = std::string("plate-") + to_string(o.theory) + "-" + to_string(o.mode);
  Problem& pb = c.problem;
  const double tau = o.tau > 0 ? o.tau : 0.01;
  pb.laminate = plate_laminate(tau);
  pb.nitsche = nitsche_from(o, 10.0);
  const ExactSolution ex = plate_exact_solution(o.theory);
  pb.exact = ex;
  const Vec2 ctr(0.5, 0.5);
  const double R = 0.2, delta = 0.1;
  const auto hole = make_circle(ctr, R, true);
  const auto offset = make_circle(ctr, R + delta, true);
  const PlateGeometry g =
      add_plate_patches(pb, hole, offset, o.level, o.p, o.theory, o.theory, delta, o.mode, 1 << (o.level + 1));
  c.h = g.h;
  c.main = g.interior;
  if (g.layer >= 0) {
    c.layers.push_back(g.layer);
    hole_conditions(pb, g, &ex, g.hpen);
  }
  for (Side s : kSides) pb.dirichlet.push_back(exact_dirichlet(pb, g.interior, s, all_comps(o.theory), ex));
  c.info = {{"L", 1.0}, {"R", R}, {"delta", delta}, {"tau", tau}, {"beta", pb.nitsche.beta}};
  return c;
}

Case spline_hole_plate(const CaseOptions& o, const ExactSolution& ex) {
  if (o.p < 1 || o.p > 3) fail(ErrorKind::Unsupported, "spline holes support degrees 1 to 3");
  if (o.theory == Theory::KL && o.p < 2) fail(ErrorKind::Unsupported, "Kirchhoff-Love patches need p >= 2");
  Case c;
  c.name = std::string("spline-hole-") + to_string(o.theory);
  Problem& pb = c.problem;
  const double tau = o.tau > 0 ? o.tau : 0.01;
  pb.laminate = plate_laminate(tau);
  pb.nitsche = nitsche_from(o, 10.0);
  pb.exact = ex;
  // Manufactured loads use the stiffness rule, so fields in the space are reproduced exactly.
  pb.quadrature.rhs = o.p + 1;
  const int n1 = 1 << (o.level + 1);
  const KnotVector kv = KnotVector::periodic(breaks_between(0, 2 * kPi, n1), o.p);
  std::vector<Vec2> in, out;
  const Vec2 ctr(0.5, 0.5);
  for (int i = 0; i < kv.num_functions(); ++i) {
    const double phi = 2 * kPi * (i + 0.5) / kv.num_functions();
    // Slightly elliptic control polygon, traversed clockwise.
    const Vec2 d(std::cos(phi), -0.8 * std::sin(phi));
    in.push_back(ctr + 0.22 * d);
    out.push_back(ctr + 0.34 * d);
  }
  const auto hole = make_spline_curve(kv, in);
  const auto offset = make_spline_curve(kv, out);
  const PlateGeometry g = add_plate_patches(pb, hole, offset, o.level, o.p, o.theory, o.theory, 0.1, Mode::IBCM, n1);
  c.h = g.h;
  c.main = g.interior;
  c.layers.push_back(g.layer);
  hole_conditions(pb, g, &ex, g.hpen);
  for (Side s : kSides) pb.dirichlet.push_back(exact_dirichlet(pb, g.interior, s, all_comps(o.theory), ex));
  return c;
}

Case split_square(const CaseOptions& o, bool split, const ExactSolution& ex) {
  if (o.theory == Theory::KL && o.p < 2) fail(ErrorKind::Unsupported, "Kirchhoff-Love patches need p >= 2");
  Case c;
  c.name = split ? "square-split" : "square";
  Problem& pb = c.problem;
  const double tau = o.tau > 0 ? o.tau : 0.01;
  pb.laminate = plate_laminate(tau);
  pb.nitsche = nitsche_from(o, 10.0);
  pb.exact = ex;
  const int n = 1 << o.level;
  c.h = 1.0 / n;
  const auto comps = all_comps(o.theory);
  if (!split) {
    auto map = std::make_shared<PlaneMap>(std::array<double, 4>{0, 1, 0, 1});
    pb.patches.push_back(
        make_patch("square", map, open_space(breaks_between(0, 1, n), breaks_between(0, 1, n), o.p), o.theory));
    for (Side s : kSides) pb.dirichlet.push_back(exact_dirichlet(pb, 0, s, comps, ex));
    return c;
  }
  if (n < 2) fail(ErrorKind::InvalidInput, "the split needs at least two elements across");
  auto ma = std::make_shared<PlaneMap>(std::array<double, 4>{0, 0.5, 0, 1});
  auto mb = std::make_shared<PlaneMap>(std::array<double, 4>{0.5, 1, 0, 1});
  pb.patches.push_back(
      make_patch("left", ma, open_space(breaks_between(0, 0.5, n / 2), breaks_between(0, 1, n), o.p), o.theory));
  pb.patches.push_back(
      make_patch("right", mb, open_space(breaks_between(0.5, 1, n / 2), breaks_between(0, 1, n), o.p), o.theory));
  for (Side s : {Side::ULo, Side::VLo, Side::VHi}) pb.dirichlet.push_back(exact_dirichlet(pb, 0, s, comps, ex));
  for (Side s : {Side::UHi, Side::VLo, Side::VHi}) pb.dirichlet.push_back(exact_dirichlet(pb, 1, s, comps, ex));
  auto cut = param_curve([](const Series& s) { return SeriesPoint{Series(0.5), s}; }, 0, 1);
  pb.interfaces.push_back(make_interface("split", {0, edge_curve(pb.patches[0], Side::UHi)}, {1, cut}, 0, 1,
                                         natural_coupling(o.theory, o.theory), c.h));
  return c;
}

Case clamped_plate(const CaseOptions& o, bool mixed, double load) {
  const Theory interior = mixed ? Theory::KL : o.theory;
  const Theory layer = mixed ? Theory::RM : o.theory;
  if ((interior == Theory::KL || layer == Theory::KL) && o.p < 2)
    fail(ErrorKind::Unsupported, "Kirchhoff-Love patches need p >= 2");
  Case c;
  c.name = mixed ? "clamped-plate-mixed" : std::string("clamped-plate-") + to_string(o.theory);
  Problem& pb = c.problem;
  const double tau = o.tau > 0 ? o.tau : 0.001;
  pb.laminate = plate_laminate(tau);
  pb.nitsche = nitsche_from(o, 10.0);
  if (mixed) pb.nitsche.gamma2 = 1.0;
  const Vec2 ctr(0.5, 0.5);
  const double R = 0.2, delta = 0.1;
  const PlateGeometry g = add_plate_patches(pb, make_circle(ctr, R, true), make_circle(ctr, R + delta, true), o.level,
                                            o.p, interior, layer, delta, Mode::IBCM, 1 << (o.level + 1));
  c.h = g.h;
  c.main = g.interior;
  c.layers.push_back(g.layer);
  hole_conditions(pb, g, nullptr, g.hpen);
  for (Side s : kSides) {
    StrongDirichlet d;
    d.patch = g.interior;
    d.side = s;
    d.comps = all_comps(interior);
    pb.dirichlet.push_back(d);
    if (interior == Theory::KL) {
      const Patch& P = pb.patches[g.interior];
      const KnotVector& kv = edge_knots(P, s);
      pb.interfaces.push_back(make_interface("clamp", {g.interior, edge_curve(P, s)}, {}, kv.lower(), kv.upper(),
                                             RotationCoupling::Normal, g.h, false));
    }
  }
  SurfaceLoad f;
  f.force = [load](const Vec3&, const SurfaceFrame&) { return Vec3(0, 0, load); };
  pb.surface_loads.push_back(f);
  c.info = {{"tau", tau}, {"load", load}};
  return c;
}

// ---------------------------------------------------------------- crack

Case cracked_cylinder(const CaseOptions& o, double p0, double radius) {
  if (o.theory == Theory::KL && o.p < 2) fail(ErrorKind::Unsupported, "Kirchhoff-Love patches need p >= 2");
  if (o.level < 1) fail(ErrorKind::InvalidInput, "the cracked cylinder needs level >= 1");
  Case c;
  c.name = std::string("crack-") + to_string(o.theory);
  Problem& pb = c.problem;
  if (!(radius > 0)) fail(ErrorKind::InvalidInput, "cylinder radius must be positive");
  // The hoop half-width stays 10 pi whatever the radius.
  const double R = radius, Rt = 10 * kPi, theta = Rt / R, L = 100, a = 5, nu = 1.0 / 3.0, E = 1000.0;
  const double tau = o.tau > 0 ? o.tau : 1.0;
  const double w = 5, d = 5;
  pb.laminate = Laminate::isotropic(E, nu, tau);
  pb.nitsche = nitsche_from(o, 100.0);
  const int p = o.p;
  const double hI = 5.0 / (1 << (o.level - 1));
  const double hF = 0.5 * hI;

  // Interior breaks with lines on the frame rectangle. The middle count keeps
  // n_el + p odd so a symmetric function sits on the axis.
  const int nout = static_cast<int>(std::ceil((Rt - w) / hI));
  int nmid = static_cast<int>(std::lround(2 * w / hI));
  if ((nmid + p) % 2 == 0) ++nmid;
  std::vector<double> bu = breaks_between(-Rt, -w, nout);
  for (double x : breaks_between(-w, w, nmid)) if (x > bu.back()) bu.push_back(x);
  for (double x : breaks_between(w, Rt, nout)) if (x > bu.back()) bu.push_back(x);
  const int nax = static_cast<int>(std::ceil((L / 2 - a - d) / hI));
  const int nmv = static_cast<int>(std::lround(2 * (a + d) / hI));
  std::vector<double> bv = breaks_between(-L / 2, -a - d, nax);
  for (double x : breaks_between(-a - d, a + d, nmv)) if (x > bv.back()) bv.push_back(x);
  for (double x : breaks_between(a + d, L / 2, nax)) if (x > bv.back()) bv.push_back(x);

  const std::array<double, 4> rect{-Rt, Rt, -L / 2, L / 2};
  auto frame_curve = std::make_shared<PolylineCurve>(
      std::vector<Vec2>{{-w, -a - d}, {-w, a + d}, {w, a + d}, {w, -a - d}}, true);  // clockwise: hole
  auto dom = aligned_domain(Grid{bu, bv}, Region{rect, {frame_curve}});
  auto map = [&](std::array<double, 4> r) { return std::make_shared<ArcCylinderMap>(R, r); };
  pb.patches.push_back(make_patch("interior", map(rect), open_space(bu, bv, p), o.theory, dom));
  auto frame_patch = [&](std::string name, double u0, double u1, double v0, double v1) {
    const int nu = static_cast<int>(std::lround((u1 - u0) / hF)), nv = static_cast<int>(std::lround((v1 - v0) / hF));
    pb.patches.push_back(make_patch(std::move(name), map({u0, u1, v0, v1}),
                                    open_space(breaks_between(u0, u1, nu), breaks_between(v0, v1, nv), p), o.theory));
  };
  frame_patch("top", -w, w, a, a + d);      // 1
  frame_patch("bottom", -w, w, -a - d, -a);  // 2
  frame_patch("left", -w, 0, -a, a);         // 3
  frame_patch("right", 0, w, -a, a);         // 4

  const RotationCoupling rot = natural_coupling(o.theory, o.theory);
  auto line_u = [](double u) { return param_curve([u](const Series& s) { return SeriesPoint{Series(u), s}; }, 0, 1); };
  auto line_v = [](double v) { return param_curve([v](const Series& s) { return SeriesPoint{s, Series(v)}; }, 0, 1); };
  auto edge = [&](int ip, Side s) { return PatchCurve{ip, edge_curve(pb.patches[ip], s)}; };
  auto add = [&](std::string name, PatchCurve plus, PatchCurve minus, double s0, double s1) {
    pb.interfaces.push_back(make_interface(std::move(name), std::move(plus), std::move(minus), s0, s1, rot, hF));
  };
  // Strips against the tip patches.
  add("left-top", edge(3, Side::VHi), {1, line_v(a)}, -w, 0);
  add("right-top", edge(4, Side::VHi), {1, line_v(a)}, 0, w);
  add("left-bottom", edge(3, Side::VLo), {2, line_v(-a)}, -w, 0);
  add("right-bottom", edge(4, Side::VLo), {2, line_v(-a)}, 0, w);
  // Frame against the trimmed interior.
  add("left-interior", edge(3, Side::ULo), {0, line_u(-w)}, -a, a);
  add("right-interior", edge(4, Side::UHi), {0, line_u(w)}, -a, a);
  add("top-interior-l", edge(1, Side::ULo), {0, line_u(-w)}, a, a + d);
  add("top-interior-r", edge(1, Side::UHi), {0, line_u(w)}, a, a + d);
  add("top-interior-t", edge(1, Side::VHi), {0, line_v(a + d)}, -w, w);
  add("bottom-interior-l", edge(2, Side::ULo), {0, line_u(-w)}, -a - d, -a);
  add("bottom-interior-r", edge(2, Side::UHi), {0, line_u(w)}, -a - d, -a);
  add("bottom-interior-b", edge(2, Side::VLo), {0, line_v(-a - d)}, -w, w);

  // Symmetry edges: u_y = 0 and theta_1 = 0; axial ends: theta_2 = 0.
  const bool rm = o.theory == Theory::RM;
  for (Side s : {Side::ULo, Side::UHi}) pb.dirichlet.push_back({0, s, rm ? std::vector<int>{1, 3} : std::vector<int>{1}, {}});
  if (rm)
    for (Side s : {Side::VLo, Side::VHi}) pb.dirichlet.push_back({0, s, {4}, {}});
  const double F0 = p0 * R / 2;
  for (Side s : {Side::VLo, Side::VHi}) {
    EdgeLoad el;
    el.where = edge(0, s);
    el.s0 = -Rt;
    el.s1 = Rt;
    const double sg = s == Side::VHi ? 1.0 : -1.0;
    el.force = [F0, sg](double, const Vec3&) { return Vec3(0, 0, sg * F0); };
    pb.edge_loads.push_back(el);
  }
  SurfaceLoad pr;
  pr.force = [p0](const Vec3&, const SurfaceFrame& f) { return Vec3(p0 * f.a3); };
  pb.surface_loads.push_back(pr);
  // Axial translation and the x translation left free by the symmetry conditions.
  const auto bottom = edge_functions(pb.patches[0], Side::VLo);
  pb.pins.push_back({0, 2, bottom.front(), 0.0});
  pb.pins.push_back({0, 2, bottom.back(), 0.0});
  pb.pins.push_back({0, 0, bottom[(bottom.size() - 1) / 2], 0.0});

  c.h = hI;
  c.main = 0;
  c.layers = {1, 2, 3, 4};
  c.info = {{"R", R}, {"a", a}, {"tau", tau}, {"p0", p0}, {"nu", nu}, {"E", E}, {"L", L}, {"theta", theta}};
  return c;
}

Stress stress_at(const Problem& pb, const FieldSolution& u, int ip, const Vec2& eta) {
  const Patch& p = pb.patches[ip];
  const SurfaceFrame f = patch_frame(p, eta, 2);
  const FieldJet j = u.eval(pb, ip, eta, p.theory == Theory::RM ? 1 : 2);
  const Strain e = p.theory == Theory::RM ? rm_strains(j, f) : kl_strains(j, f);
  return generalized_stress(e, to_covariant(laminate_abds(pb.laminate), f), p.theory);
}

double crack_tip_ratio(const Case& c, const FieldSolution& u, double r) {
  const double a = c.info.at("a");
  const Stress s = stress_at(c.problem, u, 1, Vec2(0.0, a + r));
  return s.N[0] / (c.info.at("p0") * c.info.at("tau"));
}

double crack_opening(const Case& c, const FieldSolution& u) {
  const Problem& pb = c.problem;
  const Vec2 mid(0.0, 0.0);
  const SurfaceFrame f = patch_frame(pb.patches[4], mid, 1);
  const Vec3 d = u.eval(pb, 4, mid, 0).u[0] - u.eval(pb, 3, mid, 0).u[0];
  return d.dot(f.a[0].normalized());
}

// ---------------------------------------------------------------- cylinders

Case intersecting_cylinders(const CaseOptions& o) {
  if (o.theory == Theory::KL && o.p < 2) fail(ErrorKind::Unsupported, "Kirchhoff-Love patches need p >= 2");
  Case c;
  c.name = std::string("cylinders-") + to_string(o.theory);
  Problem& pb = c.problem;
  const double Ra = 1.0, Rb = 0.6, L = 4.0, th = -kPi / 3;
  const double tau = o.tau > 0 ? o.tau : 0.01;
  const double delta = 0.1;
  pb.laminate = Laminate::isotropic(100e9, 0.3, tau);
  pb.nitsche = nitsche_from(o, 100.0);
  const int p = o.p;
  const int k = 1 << std::max(0, o.level);
  const Mat3 Q = CylinderMap::rotation_y(th);
  auto mapA = std::make_shared<CylinderMap>(Ra, std::array<double, 4>{0, 2 * kPi, -L / 2, L / 2});
  auto mapB = std::make_shared<CylinderMap>(Rb, std::array<double, 4>{0, 2 * kPi, 0, L}, Q);
  const double ct = std::cos(th), st = std::sin(th);
  if (Rb >= Ra) fail(ErrorKind::GeometryFailure, "branch radius must be below the main radius");

  // Intersection locus on b as the graph xi2 = g(xi1).
  auto g = [=](const Series& s) {
    const Series sn = sin(s), cs = cos(s);
    return (sqrt(Ra * Ra - Rb * Rb * sn * sn) + ct * Rb * cs) / (-st);
  };
  const auto Cb = make_graph(g, 0, 2 * kPi);
  const auto Cb_off = make_graph([=](const Series& s) { return g(s) + delta; }, 0, 2 * kPi);
  // Same locus in the parameters of a.
  CurveFn fa = [=](const Series& s) -> SeriesPoint {
    const Series gs = g(s);
    const Series x = ct * (-Rb * cos(s)) - st * gs;
    const Series y = -Rb * sin(s);
    const Series z = st * (-Rb * cos(s)) + ct * gs;
    return {kPi + atan2(y, x), z};
  };
  const auto Ca0 = std::make_shared<AnalyticCurve>(fa, 0.0, 2 * kPi, true);
  double resid = 0;
  for (int i = 0; i < 512; ++i) {
    const double s = 2 * kPi * i / 512;
    const Vec3 xb = mapB->eval(Cb->point(s), 0).v;
    const Vec3 xa = mapA->eval(Ca0->point(s), 0).v;
    resid = std::max(resid, (xa - xb).norm());
  }
  if (!(resid <= 1e-9)) fail(ErrorKind::GeometryFailure, "intersection locus fit residual " + std::to_string(resid));
  // The hole on a must run clockwise so that its exterior is active.
  const bool reverse = polygon_area(sample_curve(*Ca0, 512)) > 0;
  const CurvePtr Ca = reverse ? make_reversed(Ca0) : CurvePtr(Ca0);
  const CurvePtr Ca_off = make_offset(Ca, delta);

  const int nA1 = 12 * k, nA2 = 8 * k, nB1 = 8 * k, nB2 = 8 * k, n1 = 16 * k, n2 = 2;
  const Grid gA{breaks_between(0, 2 * kPi, nA1), breaks_between(-L / 2, L / 2, nA2)};
  const Grid gB{breaks_between(0, 2 * kPi, nB1), breaks_between(0, L, nB2)};
  auto periodic_space = [p](const Grid& gr) {
    return TensorSplineSpace(KnotVector::periodic(gr.u, p), KnotVector::open(gr.v, p, p - 1));
  };
  auto domA = std::make_shared<TrimmedDomain>(classify_elements(gA, Region{{0, 2 * kPi, -L / 2, L / 2}, {Ca_off}}, kTileOrder));
  auto domB = std::make_shared<TrimmedDomain>(classify_elements(gB, Region{{0, 2 * kPi, 0, L}, {Cb_off}}, kTileOrder));
  const BoundaryLayer la = build_boundary_layer(Ca, Ca_off, n1, n2);
  const BoundaryLayer lb = build_boundary_layer(Cb, Cb_off, n1, n2);
  auto layer_space = [p](const BoundaryLayer& l) {
    return TensorSplineSpace(KnotVector::periodic(l.breaks1, p), KnotVector::open(l.breaks2, p, p - 1));
  };
  pb.patches.push_back(make_patch("a-interior", mapA, periodic_space(gA), o.theory, domA));                   // 0
  pb.patches.push_back(make_patch("a-layer", std::make_shared<ComposedMap>(mapA, la.map), layer_space(la), o.theory));  // 1
  pb.patches.push_back(make_patch("b-interior", mapB, periodic_space(gB), o.theory, domB));                   // 2
  pb.patches.push_back(make_patch("b-layer", std::make_shared<ComposedMap>(mapB, lb.map), layer_space(lb), o.theory));  // 3

  const double hA = L / nA2, hB = L / nB2;
  const RotationCoupling rot = natural_coupling(o.theory, o.theory);
  pb.interfaces.push_back(make_interface("a-layer-interior", {1, edge_curve(pb.patches[1], Side::VHi)}, {0, Ca_off}, 0,
                                         2 * kPi, rot, std::min(hA, delta)));
  pb.interfaces.push_back(make_interface("b-layer-interior", {3, edge_curve(pb.patches[3], Side::VHi)}, {2, Cb_off}, 0,
                                         2 * kPi, rot, std::min(hB, delta)));
  // Displacements along the junction are identified; rotations are coupled
  // weakly through the component about the common tangent.
  std::function<double(double)> tmap = [reverse](double t) { return reverse ? 2 * kPi - t : t; };
  StrongCoupling sc;
  sc.patch_a = 1;
  sc.patch_b = 3;
  sc.side_a = Side::VLo;
  sc.side_b = Side::VLo;
  sc.map = tmap;
  pb.couplings.push_back(sc);
  auto on_a = param_curve(
      [reverse](const Series& s) { return SeriesPoint{reverse ? 2 * kPi - s : s, Series(0.0)}; }, 0, 2 * kPi, true);
  pb.interfaces.push_back(make_interface("junction-rotation", {3, edge_curve(pb.patches[3], Side::VLo)}, {1, on_a}, 0,
                                         2 * kPi, RotationCoupling::Normal, delta / n2, false));

  for (Side s : {Side::VLo, Side::VHi}) pb.dirichlet.push_back({0, s, {0, 1, 2}, {}});
  pb.dirichlet.push_back({2, Side::VHi, {0, 1, 2}, {}});
  SurfaceLoad f;
  f.force = [](const Vec3&, const SurfaceFrame&) { return Vec3(1e6, 1e6, 1e6); };
  pb.surface_loads.push_back(f);

  c.h = hA;
  c.main = 0;
  c.layers = {1, 3};
  c.info = {{"Ra", Ra}, {"Rb", Rb}, {"L", L}, {"theta", th}, {"tau", tau}, {"locus_residual", resid},
            {"reversed", reverse ? 1.0 : 0.0}};
  return c;
}

double coupled_edge_mismatch(const Case& c, const FieldSolution& u, int samples) {
  const Problem& pb = c.problem;
  double umax = 0, dmax = 0;
  for (const auto& sc : pb.couplings) {
    const Patch& pa = pb.patches[sc.patch_a];
    const Patch& pbb = pb.patches[sc.patch_b];
    const KnotVector& ka = edge_knots(pa, sc.side_a);
    const KnotVector& kb = edge_knots(pbb, sc.side_b);
    for (int i = 0; i <= samples; ++i) {
      const double t = ka.lower() + (ka.upper() - ka.lower()) * (i + 0.37) / (samples + 1);
      double tb = sc.map(t);
      if (kb.is_periodic()) {
        const double len = kb.upper() - kb.lower();
        tb = kb.lower() + std::fmod(std::fmod(tb - kb.lower(), len) + len, len);
      }
      const Vec3 ua = u.eval(pb, sc.patch_a, edge_point(pa, sc.side_a, t), 0).u[0];
      const Vec3 ub = u.eval(pb, sc.patch_b, edge_point(pbb, sc.side_b, tb), 0).u[0];
      umax = std::max({umax, ua.norm(), ub.norm()});
      dmax = std::max(dmax, (ua - ub).norm());
    }
  }
  return umax > 0 ? dmax / umax : dmax;
}

FieldSolution fit_exact(const Problem& pb, const ExactSolution& ex) {
  FieldSolution out;
  for (const auto& p : pb.patches) {
    const int nf = p.nfun();
    const int n = p.degree() + 1;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::array<double, 5>> vals;
    const auto& bu = p.space.dir(0).breaks();
    const auto& bv = p.space.dir(1).breaks();
    int row = 0;
    for (size_t j = 0; j + 1 < bv.size(); ++j)
      for (size_t i = 0; i + 1 < bu.size(); ++i)
        for (const auto& q : cell_quadrature({bu[i], bu[i + 1], bv[j], bv[j + 1]}, n)) {
          const auto smp = p.space.eval(q.x, 0, p.space.dir(0).element_span(static_cast<int>(i)),
                                        p.space.dir(1).element_span(static_cast<int>(j)));
          for (size_t k = 0; k < smp.fun.size(); ++k) trip.emplace_back(row, smp.fun[k], smp.d(0, k));
          const FieldJet e = exact_field(p, ex, q.x, patch_frame(p, q.x, 2), 1);
          vals.push_back({e.u[0][0], e.u[0][1], e.u[0][2], e.th[0][0], e.th[0][1]});
          ++row;
        }
    Eigen::SparseMatrix<double> N(row, nf);
    N.setFromTriplets(trip.begin(), trip.end());
    const Eigen::SparseMatrix<double> G = N.transpose() * N;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(G);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "least-squares fit failed on " + p.name);
    Eigen::VectorXd coef(p.num_dofs());
    for (int c = 0; c < p.ncomp(); ++c) {
      Eigen::VectorXd y(row);
      for (int r = 0; r < row; ++r) y[r] = vals[r][c];
      coef.segment(c * nf, nf) = ldlt.solve(N.transpose() * y);
    }
    out.coef.push_back(std::move(coef));
  }
  return out;
}

Eigen::VectorXd gather_free(const Problem& pb, const DofMap& dofs, const FieldSolution& u) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dofs.num_free());
  std::vector<char> set(dofs.num_free(), 0);
  for (size_t ip = 0; ip < pb.patches.size(); ++ip)
    for (int d = 0; d < pb.patches[ip].num_dofs(); ++d) {
      const int g = dofs.global(static_cast<int>(ip), d);
      if (g < 0 || set[g]) continue;
      x[g] = u.coef[ip][d];
      set[g] = 1;
    }
  return x;
}

}  // namespace ibcm
