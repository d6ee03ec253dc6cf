#include "ibcm/verify.hpp"

#include <cmath>

namespace ibcm {

namespace {

std::vector<CellRule> norm_rules(const Patch& p, int n) {
  if (p.trim) return domain_quadrature(*p.trim, n, n);
  std::vector<CellRule> out;
  const auto& bu = p.space.dir(0).breaks();
  const auto& bv = p.space.dir(1).breaks();
  const int nu = static_cast<int>(bu.size()) - 1, nv = static_cast<int>(bv.size()) - 1;
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) out.push_back({i + nu * j, cell_quadrature({bu[i], bu[i + 1], bv[j], bv[j + 1]}, n)});
  return out;
}

FieldJet jet_eval(const Problem& pb, const FieldSolution& uh, int patch, const Vec2& eta, const std::array<int, 2>& sp,
                  int order) {
  const Patch& p = pb.patches[patch];
  const auto smp = p.space.eval(eta, order, sp[0], sp[1]);
  const Eigen::VectorXd& c = uh.coef[patch];
  FieldJet f;
  const int nb = static_cast<int>(smp.fun.size());
  for (int k = 0; k < nb; ++k) {
    const int fn = smp.fun[k];
    const Vec3 u(c[p.dof(0, fn)], c[p.dof(1, fn)], c[p.dof(2, fn)]);
    for (int r = 0; r < smp.d.rows(); ++r) f.u[r] += smp.d(r, k) * u;
  }
  return f;
}

}  // namespace

NormSet integrate_norms(const Problem& pb, const JetField& g, bool with_h2, int npts) {
  double l2 = 0, h1 = 0, h2 = 0;
  const int order = with_h2 ? 2 : 1;
  for (size_t ip = 0; ip < pb.patches.size(); ++ip) {
    const Patch& p = pb.patches[ip];
    const int n = npts > 0 ? npts : p.degree() + 3;
    for (const auto& cr : norm_rules(p, n))
      for (const auto& q : cr.pts) {
        const SurfaceFrame f = patch_frame(p, q.x, 2);
        const FieldJet e = g(static_cast<int>(ip), q.x, f, order);
        const double w = q.w * f.sqrt_a;
        l2 += w * e.u[0].squaredNorm();
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) h1 += w * f.ginv(a, b) * e.du(a).dot(e.du(b));
        if (with_h2) {
          std::array<Vec3, 3> H;
          for (int a = 0; a < 2; ++a)
            for (int b = a; b < 2; ++b) {
              Vec3 v = e.ddu(a, b);
              for (int l = 0; l < 2; ++l) v -= f.gam[l](a, b) * e.du(l);
              H[d2(a, b)] = v;
            }
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                  h2 += w * f.ginv(a, c) * f.ginv(b, d) * H[d2(a, b)].dot(H[d2(c, d)]);
        }
      }
  }
  NormSet r;
  r.l2 = std::sqrt(std::max(0.0, l2));
  r.h1 = std::sqrt(std::max(0.0, h1));
  r.h2 = std::sqrt(std::max(0.0, h2));
  r.has_h2 = with_h2;
  return r;
}

NormSet error_norms(const Problem& pb, const FieldSolution& uh, const ExactSolution& ex, bool with_h2, int npts) {
  return integrate_norms(
      pb,
      [&](int ip, const Vec2& eta, const SurfaceFrame& f, int order) {
        const Patch& p = pb.patches[ip];
        FieldJet e = jet_eval(pb, uh, ip, eta, p.spans(eta), order);
        const FieldJet x = exact_field(p, ex, eta, f, order);
        for (int r = 0; r < deriv_rows(order); ++r) e.u[r] -= x.u[r];
        return e;
      },
      with_h2, npts);
}

NormSet difference_norms(const Problem& pa, const FieldSolution& ua, const Problem& pb, const FieldSolution& ub,
                         bool with_h2, int npts) {
  if (pa.patches.size() != pb.patches.size()) fail(ErrorKind::InvalidInput, "problems have different patch counts");
  for (size_t i = 0; i < pa.patches.size(); ++i)
    if (pa.patches[i].nfun() != pb.patches[i].nfun()) fail(ErrorKind::InvalidInput, "patch spaces differ");
  return integrate_norms(
      pa,
      [&](int ip, const Vec2& eta, const SurfaceFrame&, int order) {
        const auto sp = pa.patches[ip].spans(eta);
        FieldJet e = jet_eval(pa, ua, ip, eta, sp, order);
        const FieldJet o = jet_eval(pb, ub, ip, eta, sp, order);
        for (int r = 0; r < deriv_rows(order); ++r) e.u[r] -= o.u[r];
        return e;
      },
      with_h2, npts);
}

NormSet solution_norms(const Problem& pb, const FieldSolution& uh, bool with_h2, int npts) {
  return integrate_norms(
      pb,
      [&](int ip, const Vec2& eta, const SurfaceFrame&, int order) {
        return jet_eval(pb, uh, ip, eta, pb.patches[ip].spans(eta), order);
      },
      with_h2, npts);
}

double interface_jump_norm(const Problem& pb, const FieldSolution& uh, const NitscheInterface& itf) {
  const InterfaceLayout lay = segment_nitsche_interface(pb, itf);
  const Patch& pp = pb.patches[itf.plus.patch];
  const GaussRule& gr = gauss01(pp.degree() + 3);
  double acc = 0;
  for (const auto& sg : lay.segments) {
    const double len = sg.s1 - sg.s0;
    for (size_t q = 0; q < gr.x.size(); ++q) {
      const double s = sg.s0 + len * gr.x[q];
      const CurveJet cj = itf.plus.curve->eval(s);
      const SurfaceFrame f = patch_frame(pp, cj.p, 2);
      const double jac = (f.a[0] * cj.d1[0] + f.a[1] * cj.d1[1]).norm();
      Vec3 jump = jet_eval(pb, uh, itf.plus.patch, cj.p, sg.plus_spans, 0).u[0];
      if (itf.minus.patch >= 0)
        jump -= jet_eval(pb, uh, itf.minus.patch, itf.minus.curve->eval(s).p, sg.minus_spans, 0).u[0];
      else if (itf.u_data)
        jump -= itf.u_data(s, f.x);
      acc += gr.w[q] * len * jac * jump.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

std::optional<double> fit_rate(const std::vector<double>& h, const std::vector<double>& err, int window) {
  if (h.size() != err.size()) fail(ErrorKind::InvalidInput, "rate fit needs matching sequences");
  std::vector<double> x, y;
  const int n = static_cast<int>(h.size());
  for (int i = std::max(0, n - window); i < n; ++i) {
    if (!(h[i] > 0) || !(err[i] > 0)) continue;
    x.push_back(std::log(h[i]));
    y.push_back(std::log(err[i]));
  }
  if (x.size() < 2) return std::nullopt;
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = m * sxx - sx * sx;
  if (std::abs(den) < 1e-300) return std::nullopt;
  return (m * sxy - sx * sy) / den;
}

void ConvergenceStudy::fit(int p, int window) {
  std::vector<double> h, l2, h1, h2;
  for (const auto& r : levels) {
    if (!r.spd.spd) continue;
    h.push_back(r.h);
    l2.push_back(r.err.l2);
    h1.push_back(r.err.h1);
    h2.push_back(r.err.has_h2 ? r.err.h2 : 0.0);
  }
  rate_l2 = fit_rate(h, l2, window);
  rate_h1 = fit_rate(h, h1, window);
  rate_h2 = (!levels.empty() && levels.back().err.has_h2) ? fit_rate(h, h2, window) : std::nullopt;
  // Locking shows as a coarse pre-asymptotic plateau: the first-pair rate
  // sits well below the optimal p + 1.
  locking_flag = false;
  if (h.size() >= 2) {
    const double r0 = std::log(l2[1] / l2[0]) / std::log(h[1] / h[0]);
    locking_flag = r0 < p + 1 - 0.5;
  }
}

double folias_lambda(double a, double R, double tau, double nu) {
  if (!(a > 0) || !(R > 0) || !(tau > 0)) fail(ErrorKind::InvalidInput, "crack dimensions must be positive");
  return std::pow(12.0 * (1.0 - nu * nu) * std::pow(a, 4) / (R * R * tau * tau), 0.25);
}

double folias_reference(double r, double a, double R, double tau, double nu) {
  if (std::abs(nu - 1.0 / 3.0) > 1e-12) fail(ErrorKind::Unsupported, "the crack-tip correction is fitted for nu = 1/3");
  if (!(r > 0)) fail(ErrorKind::InvalidInput, "distance from the tip must be positive");
  const double lam = folias_lambda(a, R, tau, nu);
  return std::sqrt(a / (2.0 * r)) * (1.0 + (0.37 - 0.30 * std::log(lam)) * lam * lam) * R / tau;
}

}  // namespace ibcm
