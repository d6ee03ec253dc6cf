#include "ibcm/material.hpp"

#include <cmath>

namespace ibcm {

namespace {

constexpr int voigt(int a, int b) { return a == b ? a : 2; }

// C(I,J) from a 4-index tensor under the change of basis t (and its derivative dt
// in one factor at a time when dt is given).
Mat3 transform4(const Tensor4& bar, const Mat2& t) {
  // Contract one index at a time.
  Tensor4 r1{}, r2{}, r3{}, r4{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double s = 0;
          for (int k = 0; k < 2; ++k) s += t(a, k) * bar[k][b][c][d];
          r1[a][b][c][d] = s;
        }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double s = 0;
          for (int k = 0; k < 2; ++k) s += t(b, k) * r1[a][k][c][d];
          r2[a][b][c][d] = s;
        }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double s = 0;
          for (int k = 0; k < 2; ++k) s += t(c, k) * r2[a][b][k][d];
          r3[a][b][c][d] = s;
        }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double s = 0;
          for (int k = 0; k < 2; ++k) s += t(d, k) * r3[a][b][c][k];
          r4[a][b][c][d] = s;
        }
  Mat3 m;
  static const int ia[3] = {0, 1, 0}, ib[3] = {0, 1, 1};
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) m(I, J) = r4[ia[I]][ib[I]][ia[J]][ib[J]];
  return m;
}

// Derivative of the four-fold transformation: product rule over the factors.
Mat3 transform4_derivative(const Tensor4& bar, const Mat2& t, const Mat2& dt) {
  Mat3 m = Mat3::Zero();
  static const int ia[3] = {0, 1, 0}, ib[3] = {0, 1, 1};
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) {
      const int a = ia[I], b = ib[I], c = ia[J], d = ib[J];
      double s = 0;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q)
          for (int r = 0; r < 2; ++r)
            for (int u = 0; u < 2; ++u) {
              const double v = bar[p][q][r][u];
              if (v == 0) continue;
              s += v * (dt(a, p) * t(b, q) * t(c, r) * t(d, u) + t(a, p) * dt(b, q) * t(c, r) * t(d, u) +
                        t(a, p) * t(b, q) * dt(c, r) * t(d, u) + t(a, p) * t(b, q) * t(c, r) * dt(d, u));
            }
      m(I, J) = s;
    }
  return m;
}

}  // namespace

double Laminate::thickness() const {
  double t = 0;
  for (const auto& l : layers) t += l.thickness;
  return t;
}

double Laminate::max_modulus() const {
  double e = 0;
  for (const auto& l : layers) e = std::max({e, l.E1, l.E2});
  return e;
}

void Laminate::validate() const {
  if (layers.empty()) fail(ErrorKind::InvalidMaterial, "laminate has no layers");
  if (!(alpha_s > 0)) fail(ErrorKind::InvalidMaterial, "shear correction factor must be positive");
  for (const auto& l : layers) {
    if (!(l.E1 > 0 && l.E2 > 0 && l.G12 > 0 && l.G31 > 0 && l.G32 > 0))
      fail(ErrorKind::InvalidMaterial, "moduli must be positive");
    if (!(l.thickness > 0)) fail(ErrorKind::InvalidMaterial, "layer thickness must be positive");
    if (!(l.nu12 >= 0 && l.nu12 < std::sqrt(l.E1 / l.E2)))
      fail(ErrorKind::InvalidMaterial, "Poisson ratio outside the positive-definite range");
  }
}

Laminate Laminate::isotropic(double E, double nu, double thickness, double alpha_s) {
  const double G = E / (2.0 * (1.0 + nu));
  Laminate lam;
  lam.alpha_s = alpha_s;
  lam.layers.push_back({E, E, nu, G, G, G, 0.0, thickness});
  return lam;
}

Laminate Laminate::orthotropic(double E1, double E2, double nu12, double G, const std::vector<double>& angles,
                               double thickness, double alpha_s) {
  Laminate lam;
  lam.alpha_s = alpha_s;
  for (double a : angles) lam.layers.push_back({E1, E2, nu12, G, G, G, a, thickness / angles.size()});
  return lam;
}

Mat3 rotation_TL(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 t;
  t << c * c, s * s, -2 * s * c, s * s, c * c, 2 * s * c, s * c, -s * c, c * c - s * s;
  return t;
}

Mat2 rotation_TT(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat2 t;
  t << c, -s, s, c;
  return t;
}

LayerMatrices layer_matrices_local(const Layer& l, double alpha_s) {
  Mat3 comp;
  comp << 1 / l.E1, -l.nu12 / l.E1, 0, -l.nu21() / l.E2, 1 / l.E2, 0, 0, 0, 1 / l.G12;
  Eigen::FullPivLU<Mat3> lu(comp);
  if (!lu.isInvertible()) fail(ErrorKind::InvalidMaterial, "singular compliance matrix");
  LayerMatrices m;
  m.cL = lu.inverse();
  m.cT << alpha_s * l.G31, 0, 0, alpha_s * l.G32;
  return m;
}

LayerMatrices layer_matrices(const Layer& l, double alpha_s) {
  const LayerMatrices loc = layer_matrices_local(l, alpha_s);
  const Mat3 tl = rotation_TL(l.angle);
  const Mat2 tt = rotation_TT(l.angle);
  return {tl * loc.cL * tl.transpose(), tt * loc.cT * tt.transpose()};
}

GeneralizedStiffness laminate_abds(const Laminate& lam) {
  lam.validate();
  GeneralizedStiffness g;
  double z = -0.5 * lam.thickness();
  for (const auto& l : lam.layers) {
    const double zb = z, zt = z + l.thickness;
    const LayerMatrices m = layer_matrices(l, lam.alpha_s);
    g.A += m.cL * (zt - zb);
    g.B += m.cL * ((zt * zt - zb * zb) / 2.0);
    g.D += m.cL * ((zt * zt * zt - zb * zb * zb) / 3.0);
    g.S += m.cT * (zt - zb);
    z = zt;
  }
  return g;
}

Tensor4 voigt_to_tensor(const Mat3& m) {
  Tensor4 t{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) t[a][b][c][d] = m(voigt(a, b), voigt(c, d));
  return t;
}

Mat2 basis_change(const SurfaceFrame& f) {
  const Vec3 n1 = f.ref.normalized();
  const Vec3 n2 = f.a3.cross(n1);
  Mat2 t;
  for (int a = 0; a < 2; ++a) {
    t(a, 0) = n1.dot(f.acon[a]);
    t(a, 1) = n2.dot(f.acon[a]);
  }
  return t;
}

CovariantStiffness to_covariant(const GeneralizedStiffness& gs, const SurfaceFrame& f) {
  const Mat2 t = basis_change(f);
  CovariantStiffness c;
  c.A = transform4(voigt_to_tensor(gs.A), t);
  c.B = gs.B.isZero(0.0) ? Mat3::Zero() : transform4(voigt_to_tensor(gs.B), t);
  c.D = transform4(voigt_to_tensor(gs.D), t);
  c.S = t * gs.S * t.transpose();
  return c;
}

std::array<CovariantStiffness, 2> covariant_derivatives(const GeneralizedStiffness& gs, const SurfaceFrame& f) {
  if (f.order < 3) fail(ErrorKind::ContractViolation, "stiffness derivatives need a third-order frame");
  const Mat2 t = basis_change(f);
  const double rn = f.ref.norm();
  const Vec3 n1 = f.ref / rn;
  const Vec3 n2 = f.a3.cross(n1);
  const Tensor4 A = voigt_to_tensor(gs.A), B = voigt_to_tensor(gs.B), D = voigt_to_tensor(gs.D);
  const bool hasB = !gs.B.isZero(0.0);
  std::array<CovariantStiffness, 2> out;
  for (int g = 0; g < 2; ++g) {
    const Vec3 dn1 = (f.dref[g] - n1 * n1.dot(f.dref[g])) / rn;
    const Vec3 dn2 = f.da3[g].cross(n1) + f.a3.cross(dn1);
    Mat2 dt;
    for (int a = 0; a < 2; ++a) {
      dt(a, 0) = dn1.dot(f.acon[a]) + n1.dot(f.dacon[a][g]);
      dt(a, 1) = dn2.dot(f.acon[a]) + n2.dot(f.dacon[a][g]);
    }
    out[g].A = transform4_derivative(A, t, dt);
    out[g].B = hasB ? transform4_derivative(B, t, dt) : Mat3::Zero();
    out[g].D = transform4_derivative(D, t, dt);
    out[g].S = dt * gs.S * t.transpose() + t * gs.S * dt.transpose();
  }
  return out;
}

}  // namespace ibcm
