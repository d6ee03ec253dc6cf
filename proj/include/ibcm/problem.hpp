#pragma once

#include "ibcm/domain.hpp"
#include "ibcm/shell.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace ibcm {

/// Analysis patch: a map onto the mid-surface, a spline space over the map's
/// parameter rectangle, a shell theory, and an optional trimmed active region
/// whose grid must coincide with the space's breaks.
struct Patch {
  std::string name;
  std::shared_ptr<const SurfaceMap> map;
  TensorSplineSpace space;
  Theory theory = Theory::RM;
  std::shared_ptr<const TrimmedDomain> trim;

  int ncomp() const { return theory == Theory::RM ? 5 : 3; }
  int nfun() const { return space.num_functions(); }
  int num_dofs() const { return ncomp() * nfun(); }
  int dof(int comp, int fun) const { return comp * nfun() + fun; }
  int degree() const { return std::max(space.dir(0).degree(), space.dir(1).degree()); }
  std::array<double, 4> rect() const;
  bool inside(const Vec2& eta) const;
  /// Knot spans of the element containing eta.
  std::array<int, 2> spans(const Vec2& eta) const;
  /// Knot spans of element cell (row-major over the element grid, u fastest).
  std::array<int, 2> cell_spans(int cell) const;
  int num_cells() const { return space.dir(0).num_elements() * space.dir(1).num_elements(); }
};

/// Surface frame at eta. Composed maps take the material reference direction
/// from the first tangent of the outer map, so layers share the interior axes.
SurfaceFrame patch_frame(const Patch& p, const Vec2& eta, int order);

/// Rectangle edges of a patch.
enum class Side { ULo, UHi, VLo, VHi };

/// A curve located in the parameter plane of one patch, parameterized by the
/// interface coordinate.
struct PatchCurve {
  int patch = -1;
  CurvePtr curve;
};

/// Curve along a patch edge with the edge parameter as coordinate.
CurvePtr edge_curve(const Patch& p, Side side);
/// Curve eta(s) given by a series map of the interface coordinate.
CurvePtr param_curve(std::function<SeriesPoint(const Series&)> f, double s0, double s1, bool closed = false);

enum class RotationCoupling { None, Full, Normal };

/// Nitsche coupling of two patches, or weak Dirichlet conditions when
/// minus.patch < 0. Side + provides the outward normal.
struct NitscheInterface {
  std::string name;
  PatchCurve plus, minus;
  double s0 = 0, s1 = 1;
  bool couple_u = true;
  RotationCoupling rotation = RotationCoupling::Full;
  double h = 1.0;  ///< penalty length
  /// Weak Dirichlet data as functions of (s, x); empty means homogeneous.
  std::function<Vec3(double, const Vec3&)> u_data;
  /// Prescribed rotation vector; the Normal mode uses its normal component.
  std::function<Vec3(double, const Vec3&)> theta_data;
};

struct NitscheParams {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double beta = 10.0;
};

/// Strong Dirichlet values on the functions supported on a patch edge,
/// obtained by L2 projection of value(comp, eta) onto the edge space.
struct StrongDirichlet {
  int patch = 0;
  Side side = Side::ULo;
  std::vector<int> comps;
  std::function<double(int, const Vec2&)> value;  ///< empty: homogeneous
};

/// Identification of displacement DOFs of two conformal patch edges;
/// map sends the edge parameter of a to that of b.
struct StrongCoupling {
  int patch_a = 0, patch_b = 0;
  Side side_a = Side::ULo, side_b = Side::ULo;
  std::function<double(double)> map;
  std::vector<int> comps{0, 1, 2};
};

/// Single fixed DOF.
struct FixedDof {
  int patch = 0, comp = 0, fun = 0;
  double value = 0;
};

/// Distributed loads per unit area; moment must be tangent.
struct SurfaceLoad {
  int patch = -1;  ///< -1: every patch
  std::function<Vec3(const Vec3&, const SurfaceFrame&)> force;
  std::function<Vec3(const Vec3&, const SurfaceFrame&)> moment;
};

/// Edge loads per unit length on a patch boundary curve.
struct EdgeLoad {
  PatchCurve where;
  double s0 = 0, s1 = 1;
  std::function<Vec3(double, const Vec3&)> force;
  std::function<Vec3(double, const Vec3&)> moment;
};

/// Point force, used for KL corner forces.
struct PointLoad {
  int patch = 0;
  Vec2 eta = Vec2::Zero();
  Vec3 force = Vec3::Zero();
};

/// Exact fields in the parameters of the outer (base) map: displacement and
/// rotation vector jets.
struct ExactSolution {
  std::function<Jet3(const Vec2&, int)> u;
  std::function<Jet3(const Vec2&, int)> theta;
};

struct QuadratureOptions {
  int interior = 0;   ///< points per direction on cells and tiles; <= 0 uses p+1
  int rhs = 0;        ///< manufactured right-hand side; <= 0 uses p+3
  int interface = 0;  ///< points per segment; <= 0 uses p+2
};

struct Problem {
  std::vector<Patch> patches;
  Laminate laminate;
  NitscheParams nitsche;
  QuadratureOptions quadrature;
  std::vector<NitscheInterface> interfaces;
  std::vector<StrongDirichlet> dirichlet;
  std::vector<StrongCoupling> couplings;
  std::vector<FixedDof> pins;
  std::vector<SurfaceLoad> surface_loads;
  std::vector<EdgeLoad> edge_loads;
  std::vector<PointLoad> point_loads;
  /// Manufactured mode: the right-hand side reproduces this solution.
  std::optional<ExactSolution> exact;

  /// Checks patch/grid consistency and theory requirements.
  void validate() const;
};

/// Exact-solution jet on a patch: displacement rows to the given order and
/// covariant rotations with first derivatives.
FieldJet exact_field(const Patch& p, const ExactSolution& ex, const Vec2& eta, const SurfaceFrame& f, int order);

/// Unit field of local basis column k and component comp of a sample.
FieldJet unit_field(const TensorSplineSpace::Sample& s, int k, int comp);

/// Interface pieces with the owning element of each side.
struct InterfaceSegment {
  double s0 = 0, s1 = 0;
  std::array<int, 2> plus_spans{-1, -1};
  std::array<int, 2> minus_spans{-1, -1};
};
struct InterfaceLayout {
  std::vector<InterfaceSegment> segments;
  bool plus_left = true;   ///< active region of side + lies left of the curve
  bool minus_left = true;
};
/// Splits the interface at every element boundary crossed on either side and
/// locates the owning elements by nudging the midpoint into each active region.
InterfaceLayout segment_nitsche_interface(const Problem& pb, const NitscheInterface& itf);
/// True if the active region of the patch lies to the left of the curve at s.
bool domain_on_left(const Patch& p, const ParamCurve& c, double s);

}  // namespace ibcm
