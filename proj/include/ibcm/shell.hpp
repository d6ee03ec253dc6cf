#pragma once

#include "ibcm/material.hpp"

namespace ibcm {

enum class Theory { KL, RM };

const char* to_string(Theory t);

/// Local values and parameter derivatives of a displacement/rotation field.
/// u rows follow the tensor-sample layout: 0, 1, 2, 11, 12, 22, 111, 112, 122, 222.
/// th holds the covariant rotation components theta_alpha and their first derivatives.
struct FieldJet {
  std::array<Vec3, 10> u{};
  std::array<Vec2, 3> th{};

  FieldJet() {
    for (auto& x : u) x.setZero();
    for (auto& x : th) x.setZero();
  }
  const Vec3& du(int a) const { return u[1 + a]; }
  const Vec3& ddu(int a, int b) const { return u[3 + d2(a, b)]; }
  const Vec3& dddu(int a, int b, int c) const { return u[6 + d3(a, b, c)]; }
};

/// Generalized strains with engineering shear: (11, 22, 2*12).
struct Strain {
  Vec3 e = Vec3::Zero();
  Vec3 k = Vec3::Zero();
  Vec2 g = Vec2::Zero();
};

/// Contravariant generalized stresses (11, 22, 12) and shear forces.
struct Stress {
  Vec3 N = Vec3::Zero();
  Vec3 M = Vec3::Zero();
  Vec2 Q = Vec2::Zero();
};

Strain rm_strains(const FieldJet& f, const SurfaceFrame& s);
/// Bending strain with theta_alpha = -a_3 . u_{,alpha} substituted:
/// kappa_{ab} = -a_3 . (u_{,ab} - Gamma^l_{ab} u_{,l}).
Strain kl_strains(const FieldJet& f, const SurfaceFrame& s);
/// Parameter derivatives of the KL strains; needs third-order frame and field data.
std::array<Strain, 2> kl_strain_derivatives(const FieldJet& f, const SurfaceFrame& s);

Stress generalized_stress(const Strain& e, const CovariantStiffness& c, Theory t);

/// KL rotation components theta_alpha = -a_3 . u_{,alpha}.
Vec2 kl_rotation(const FieldJet& f, const SurfaceFrame& s);
/// theta = theta_alpha a^alpha.
Vec3 rotation_vector(const Vec2& theta_cov, const SurfaceFrame& s);

struct RMFlux {
  Vec3 Nn = Vec3::Zero();  ///< N^alpha a_alpha + Q a_3
  Vec3 Mn = Vec3::Zero();  ///< M_nn n + M_nt t
  double Mnn = 0, Mnt = 0;
};
RMFlux rm_flux(const Stress& st, const SurfaceFrame& s, const CurveFrame& c);

struct KLFlux {
  Vec3 Tn = Vec3::Zero();  ///< ersatz force T^alpha a_alpha + T^3 a_3
  double Mnn = 0, Mnt = 0;
  double T3 = 0;
};
/// Ersatz force and bending moment; the arc-length derivative of M_nt uses the
/// curve frame's derivative data.
KLFlux kl_flux(const FieldJet& f, const SurfaceFrame& s, const CurveFrame& c, const CovariantStiffness& C,
               const std::array<CovariantStiffness, 2>& dC);

/// Flux from a given moment field and its parameter derivatives (used by tests
/// and by kl_flux).
double kl_T3(const Vec3& M, const std::array<Vec3, 2>& dM, const SurfaceFrame& s, const CurveFrame& c);

/// Applied ersatz edge traction from an edge force F and twisting moment M_t with
/// arc-length derivative dMt_ds.
Vec3 ersatz_load(const Vec3& F, double Mt, double dMt_ds, const SurfaceFrame& s, const CurveFrame& c);

/// Corner force R = M_t(after) - M_t(before); fails with NotApplicable when the
/// corner is not a Neumann corner.
double corner_force(double Mt_after, double Mt_before, bool neumann_corner);

}  // namespace ibcm
