#include "ibcm/shell.hpp"

namespace ibcm {

namespace {

// Voigt slot of the symmetric pair (a, b).
constexpr int vs(int a, int b) { return a == b ? a : 2; }
constexpr int kA[3] = {0, 1, 0}, kB[3] = {0, 1, 1};

double mat_comp(const Vec3& m, int a, int b) { return m[vs(a, b)]; }

}  // namespace

const char* to_string(Theory t) { return t == Theory::KL ? "kl" : "rm"; }

Strain rm_strains(const FieldJet& f, const SurfaceFrame& s) {
  Strain r;
  for (int I = 0; I < 3; ++I) {
    const int a = kA[I], b = kB[I];
    const double w = I == 2 ? 2.0 : 1.0;  // engineering shear
    r.e[I] = w * 0.5 * (s.a[a].dot(f.du(b)) + s.a[b].dot(f.du(a)));
    double k = 0.5 * (f.th[1 + b][a] + f.th[1 + a][b]);
    for (int l = 0; l < 2; ++l) k -= s.gam[l](a, b) * f.th[0][l];
    k += 0.5 * (s.da3[a].dot(f.du(b)) + s.da3[b].dot(f.du(a)));
    r.k[I] = w * k;
  }
  for (int a = 0; a < 2; ++a) r.g[a] = s.a3.dot(f.du(a)) + f.th[0][a];
  return r;
}

Strain kl_strains(const FieldJet& f, const SurfaceFrame& s) {
  Strain r;
  for (int I = 0; I < 3; ++I) {
    const int a = kA[I], b = kB[I];
    const double w = I == 2 ? 2.0 : 1.0;
    r.e[I] = w * 0.5 * (s.a[a].dot(f.du(b)) + s.a[b].dot(f.du(a)));
    Vec3 h = f.ddu(a, b);
    for (int l = 0; l < 2; ++l) h -= s.gam[l](a, b) * f.du(l);
    r.k[I] = -w * s.a3.dot(h);
  }
  return r;
}

std::array<Strain, 2> kl_strain_derivatives(const FieldJet& f, const SurfaceFrame& s) {
  if (s.order < 3) fail(ErrorKind::ContractViolation, "strain derivatives need a third-order frame");
  std::array<Strain, 2> r;
  for (int c = 0; c < 2; ++c) {
    for (int I = 0; I < 3; ++I) {
      const int a = kA[I], b = kB[I];
      const double w = I == 2 ? 2.0 : 1.0;
      r[c].e[I] = w * 0.5 *
                  (s.da_ab(a, c).dot(f.du(b)) + s.a[a].dot(f.ddu(b, c)) + s.da_ab(b, c).dot(f.du(a)) +
                   s.a[b].dot(f.ddu(a, c)));
      Vec3 h = f.ddu(a, b);
      Vec3 dh = f.dddu(a, b, c);
      for (int l = 0; l < 2; ++l) {
        h -= s.gam[l](a, b) * f.du(l);
        dh -= s.dgam[l][c](a, b) * f.du(l) + s.gam[l](a, b) * f.ddu(l, c);
      }
      r[c].k[I] = -w * (s.da3[c].dot(h) + s.a3.dot(dh));
    }
  }
  return r;
}

Stress generalized_stress(const Strain& e, const CovariantStiffness& c, Theory t) {
  Stress s;
  s.N = c.A * e.e + c.B * e.k;
  s.M = c.B * e.e + c.D * e.k;
  if (t == Theory::RM) s.Q = c.S * e.g;
  return s;
}

Vec2 kl_rotation(const FieldJet& f, const SurfaceFrame& s) {
  return Vec2(-s.a3.dot(f.du(0)), -s.a3.dot(f.du(1)));
}

Vec3 rotation_vector(const Vec2& th, const SurfaceFrame& s) { return th[0] * s.acon[0] + th[1] * s.acon[1]; }

RMFlux rm_flux(const Stress& st, const SurfaceFrame& s, const CurveFrame& c) {
  RMFlux r;
  for (int a = 0; a < 2; ++a) {
    double Na = 0;
    for (int b = 0; b < 2; ++b) {
      double v = mat_comp(st.N, a, b);
      for (int g = 0; g < 2; ++g) v -= s.bmix(a, g) * mat_comp(st.M, g, b);
      Na += v * c.n_cov[b];
    }
    r.Nn += Na * s.a[a];
  }
  r.Nn += st.Q.dot(c.n_cov) * s.a3;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      r.Mnn += mat_comp(st.M, a, b) * c.n_cov[a] * c.n_cov[b];
      r.Mnt += mat_comp(st.M, a, b) * c.n_cov[a] * c.t_cov[b];
    }
  r.Mn = r.Mnn * c.n + r.Mnt * c.t;
  return r;
}

double kl_T3(const Vec3& M, const std::array<Vec3, 2>& dM, const SurfaceFrame& s, const CurveFrame& c) {
  // Divergence M^{ab}_{|b} = M^{ab}_{,b} + Gamma^a_{gb} M^{gb} + Gamma^b_{gb} M^{ag}.
  double t3 = 0;
  for (int a = 0; a < 2; ++a) {
    double div = 0;
    for (int b = 0; b < 2; ++b) {
      div += mat_comp(dM[b], a, b);
      for (int g = 0; g < 2; ++g)
        div += s.gam[a](g, b) * mat_comp(M, g, b) + s.gam[b](g, b) * mat_comp(M, a, g);
    }
    t3 += div * c.n_cov[a];
  }
  // Arc-length derivative of M_nt. Frame derivatives follow the curve parameter;
  // the flux needs the derivative along t.
  const Vec3 tc = s.a[0] * c.deta_ds[0] + s.a[1] * c.deta_ds[1];
  const double dir = tc.dot(c.t) >= 0 ? 1.0 : -1.0;
  double dmnt = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double dMab = mat_comp(dM[0], a, b) * c.deta_ds[0] + mat_comp(dM[1], a, b) * c.deta_ds[1];
      dmnt += dMab * c.n_cov[a] * c.t_cov[b] +
              mat_comp(M, a, b) * (c.dn_cov_ds[a] * c.t_cov[b] + c.n_cov[a] * c.dt_cov_ds[b]);
    }
  return t3 + dir * dmnt;
}

KLFlux kl_flux(const FieldJet& f, const SurfaceFrame& s, const CurveFrame& c, const CovariantStiffness& C,
               const std::array<CovariantStiffness, 2>& dC) {
  if (s.order < 3) fail(ErrorKind::ContractViolation, "KL fluxes need a third-order frame");
  const Strain e = kl_strains(f, s);
  const auto de = kl_strain_derivatives(f, s);
  const Stress st = generalized_stress(e, C, Theory::KL);
  std::array<Vec3, 2> dM;
  for (int g = 0; g < 2; ++g) dM[g] = dC[g].B * e.e + C.B * de[g].e + dC[g].D * e.k + C.D * de[g].k;
  KLFlux r;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      r.Mnn += mat_comp(st.M, a, b) * c.n_cov[a] * c.n_cov[b];
      r.Mnt += mat_comp(st.M, a, b) * c.n_cov[a] * c.t_cov[b];
    }
  for (int a = 0; a < 2; ++a) {
    double Ta = 0;
    for (int b = 0; b < 2; ++b) {
      double v = mat_comp(st.N, a, b);
      for (int g = 0; g < 2; ++g) v -= s.bmix(a, g) * mat_comp(st.M, g, b);
      Ta += v * c.n_cov[b];
    }
    for (int g = 0; g < 2; ++g) Ta -= r.Mnt * s.bmix(a, g) * c.t_con[g];
    r.Tn += Ta * s.a[a];
  }
  r.T3 = kl_T3(st.M, dM, s, c);
  r.Tn += r.T3 * s.a3;
  return r;
}

Vec3 ersatz_load(const Vec3& F, double Mt, double dMt_ds, const SurfaceFrame& s, const CurveFrame& c) {
  Vec3 t = Vec3::Zero();
  for (int a = 0; a < 2; ++a) {
    double v = s.a[a].dot(F);
    for (int b = 0; b < 2; ++b) v -= Mt * s.b(a, b) * c.t_con[b];
    t += v * s.acon[a];
  }
  t += (s.a3.dot(F) + dMt_ds) * s.a3;
  return t;
}

double corner_force(double Mt_after, double Mt_before, bool neumann_corner) {
  if (!neumann_corner) fail(ErrorKind::NotApplicable, "corner force requested at a non-Neumann corner");
  return Mt_after - Mt_before;
}

}  // namespace ibcm
