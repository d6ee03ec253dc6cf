#pragma once

#include "ibcm/bspline.hpp"
#include "ibcm/common.hpp"

#include <memory>

namespace ibcm {

/// Value and partial derivatives (to third order) of a map of two parameters
/// into R^D. Mixed derivatives use symmetric storage, see d2() and d3().
template <int D>
struct Jet {
  using V = Eigen::Matrix<double, D, 1>;
  V v = V::Zero();
  std::array<V, 2> d1{V::Zero(), V::Zero()};
  std::array<V, 3> d2{V::Zero(), V::Zero(), V::Zero()};
  std::array<V, 4> d3{V::Zero(), V::Zero(), V::Zero(), V::Zero()};
};
using Jet2 = Jet<2>;
using Jet3 = Jet<3>;

/// Chain rule for x(eta) = X(xi(eta)) up to the requested order (<= 3).
template <int D>
Jet<D> compose(const Jet<D>& outer, const Jet2& inner, int order) {
  Jet<D> r;
  r.v = outer.v;
  const auto& X1 = outer.d1;
  const auto& X2 = outer.d2;
  const auto& X3 = outer.d3;
  const auto& g1 = inner.d1;  // g1[a](l) = d xi_l / d eta_a
  const auto& g2 = inner.d2;
  const auto& g3 = inner.d3;
  if (order >= 1)
    for (int a = 0; a < 2; ++a) r.d1[a] = X1[0] * g1[a](0) + X1[1] * g1[a](1);
  if (order >= 2) {
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        auto& t = r.d2[d2(a, b)];
        t.setZero();
        for (int l = 0; l < 2; ++l) {
          t += X1[l] * g2[d2(a, b)](l);
          for (int m = 0; m < 2; ++m) t += X2[d2(l, m)] * (g1[a](l) * g1[b](m));
        }
      }
  }
  if (order >= 3) {
    static const int idx[4][3] = {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}};
    for (const auto& abc : idx) {
      const int a = abc[0], b = abc[1], c = abc[2];
      auto& t = r.d3[d3(a, b, c)];
      t.setZero();
      for (int l = 0; l < 2; ++l) {
        t += X1[l] * g3[d3(a, b, c)](l);
        for (int m = 0; m < 2; ++m) {
          const double s2 = g2[d2(a, c)](l) * g1[b](m) + g1[a](l) * g2[d2(b, c)](m) + g2[d2(a, b)](l) * g1[c](m);
          t += X2[d2(l, m)] * s2;
          for (int n = 0; n < 2; ++n) t += X3[d3(l, m, n)] * (g1[a](l) * g1[b](m) * g1[c](n));
        }
      }
    }
  }
  return r;
}

/// Map from a parametric rectangle into E^3.
class SurfaceMap {
 public:
  virtual ~SurfaceMap() = default;
  virtual Jet3 eval(const Vec2& xi, int order) const = 0;
  /// {xi1_lo, xi1_hi, xi2_lo, xi2_hi}
  virtual std::array<double, 4> domain() const = 0;
};

/// Planar map (eta1, eta2) -> xi used as inner map of a composition.
class PlanarMap {
 public:
  virtual ~PlanarMap() = default;
  virtual Jet2 eval(const Vec2& eta, int order) const = 0;
  virtual std::array<double, 4> domain() const = 0;
  /// Inverse by Newton iteration; fails with SingularGeometry if it does not converge.
  virtual Vec2 inverse(const Vec2& xi, const Vec2& guess) const;
};

/// x = origin + xi1 e1 + xi2 e2.
class PlaneMap : public SurfaceMap {
 public:
  PlaneMap(std::array<double, 4> dom, Vec3 origin = Vec3::Zero(), Vec3 e1 = Vec3::UnitX(), Vec3 e2 = Vec3::UnitY())
      : dom_(dom), o_(origin), e1_(e1), e2_(e2) {}
  Jet3 eval(const Vec2& xi, int order) const override;
  std::array<double, 4> domain() const override { return dom_; }

 private:
  std::array<double, 4> dom_;
  Vec3 o_, e1_, e2_;
};

/// x = Q (-R cos xi1, -R sin xi1, xi2): circular cylinder with angular first
/// parameter, rotated by Q.
class CylinderMap : public SurfaceMap {
 public:
  CylinderMap(double radius, std::array<double, 4> dom, Mat3 rotation = Mat3::Identity())
      : r_(radius), dom_(dom), q_(rotation) {}
  Jet3 eval(const Vec2& xi, int order) const override;
  std::array<double, 4> domain() const override { return dom_; }
  double radius() const { return r_; }
  const Mat3& rotation() const { return q_; }
  /// Rotation about e2 by angle theta as [[c,0,-s],[0,1,0],[s,0,c]].
  static Mat3 rotation_y(double theta);

 private:
  double r_;
  std::array<double, 4> dom_;
  Mat3 q_;
};

/// x = (-R sin(xi1/R), R cos(xi1/R), xi2): arc-length parameterized cylinder.
class ArcCylinderMap : public SurfaceMap {
 public:
  ArcCylinderMap(double radius, std::array<double, 4> dom) : r_(radius), dom_(dom) {}
  Jet3 eval(const Vec2& xi, int order) const override;
  std::array<double, 4> domain() const override { return dom_; }
  double radius() const { return r_; }

 private:
  double r_;
  std::array<double, 4> dom_;
};

/// Tensor-product B-spline surface with control points in E^3.
class SplineSurfaceMap : public SurfaceMap {
 public:
  SplineSurfaceMap(TensorSplineSpace space, std::vector<Vec3> control);
  Jet3 eval(const Vec2& xi, int order) const override;
  std::array<double, 4> domain() const override;

 private:
  TensorSplineSpace space_;
  std::vector<Vec3> cp_;
};

/// xi = A eta + c.
class AffinePlanarMap : public PlanarMap {
 public:
  AffinePlanarMap(Mat2 a, Vec2 c, std::array<double, 4> dom) : a_(a), c_(c), dom_(dom) {}
  Jet2 eval(const Vec2& eta, int order) const override;
  std::array<double, 4> domain() const override { return dom_; }
  Vec2 inverse(const Vec2& xi, const Vec2& guess) const override;

 private:
  Mat2 a_;
  Vec2 c_;
  std::array<double, 4> dom_;
};

/// Composition F_hat o F_tilde; derivatives by the chain rule only.
class ComposedMap : public SurfaceMap {
 public:
  ComposedMap(std::shared_ptr<const SurfaceMap> outer, std::shared_ptr<const PlanarMap> inner)
      : outer_(std::move(outer)), inner_(std::move(inner)) {}
  Jet3 eval(const Vec2& eta, int order) const override;
  std::array<double, 4> domain() const override { return inner_->domain(); }
  const SurfaceMap& outer() const { return *outer_; }
  const PlanarMap& inner() const { return *inner_; }

 private:
  std::shared_ptr<const SurfaceMap> outer_;
  std::shared_ptr<const PlanarMap> inner_;
};

/// Differential-geometry bundle at one surface point.
struct SurfaceFrame {
  int order = 2;
  Vec3 x;
  std::array<Vec3, 2> a;     ///< covariant basis a_alpha
  Vec3 a3;                   ///< unit normal
  Mat2 g;                    ///< a_{alpha beta}
  Mat2 ginv;                 ///< a^{alpha beta}
  double sqrt_a = 0;         ///< area measure
  std::array<Vec3, 2> acon;  ///< contravariant basis a^alpha
  Mat2 b;                    ///< b_{alpha beta}
  Mat2 bmix;                 ///< b^alpha_beta (row alpha, column beta)
  std::array<Vec3, 3> da;    ///< a_{alpha,beta} in symmetric storage d2(alpha,beta)
  std::array<Vec3, 2> da3;   ///< a_{3,alpha}
  /// Christoffel symbols Gamma^g_{ab} = a^g . a_{a,b}: gam[g](a,b).
  std::array<Mat2, 2> gam;
  // Third-order data (order == 3).
  std::array<Vec3, 4> dda;  ///< a_{alpha,beta gamma} = x_{,alpha beta gamma}
  /// b_{ab,c}: db[c](a,b)
  std::array<Mat2, 2> db;
  /// Gamma^g_{ab,c}: dgam[g][c](a,b)
  std::array<std::array<Mat2, 2>, 2> dgam;
  /// a^g_{,c} = -Gamma^g_{cm} a^m + b^g_c a_3: dacon[g][c]
  std::array<std::array<Vec3, 2>, 2> dacon;
  /// Reference in-plane direction for material axes and its derivatives.
  Vec3 ref = Vec3::Zero();
  std::array<Vec3, 2> dref{Vec3::Zero(), Vec3::Zero()};

  const Vec3& da_ab(int a, int b) const { return da[d2(a, b)]; }
};

/// Builds the frame from a jet; order 3 requires third derivatives in the jet.
/// When ref is null, the material reference direction is a_1.
SurfaceFrame surface_frame(const Jet3& jet, int order, const Vec3* ref = nullptr, const std::array<Vec3, 2>* dref = nullptr);

/// Frame on a curve lying on the surface.
struct CurveFrame {
  Vec3 t, n;           ///< unit tangent and outward in-plane normal, t = a3 x n
  Vec2 n_cov, t_cov;   ///< n_alpha, t_alpha
  Vec2 n_con, t_con;   ///< n^alpha, t^alpha
  double jac = 0;      ///< |dx/ds| for the curve parameter s
  Vec2 deta_ds;        ///< parametric velocity per unit arc length
  /// Derivatives per unit arc length in the direction of increasing curve parameter.
  Vec3 dt_ds = Vec3::Zero(), dn_ds = Vec3::Zero();
  std::array<double, 2> dn_cov_ds{0, 0}, dt_cov_ds{0, 0};
};

/// Curve frame from the surface frame, parametric velocity (and acceleration) of
/// the curve, and the side on which the domain lies relative to the traversal.
CurveFrame curve_frame(const SurfaceFrame& f, const Vec2& vel, const Vec2& acc, bool domain_on_left);

}  // namespace ibcm
