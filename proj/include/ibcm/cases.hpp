#pragma once

#include "ibcm/verify.hpp"

#include <map>
#include <string>

namespace ibcm {

enum class Mode { IBCM, Trimmed };
const char* to_string(Mode m);

/// Knobs shared by the catalog. Negative values select the case default.
struct CaseOptions {
  Theory theory = Theory::RM;
  int p = 3;
  int level = 2;      ///< refinement exponent; its meaning is case specific
  double tau = -1;    ///< thickness
  double beta = -1;
  double gamma1 = 1.0, gamma2 = 1.0;
  Mode mode = Mode::IBCM;
};

struct Case {
  std::string name;
  Problem problem;
  double h = 0;  ///< edge length of an untrimmed element of the main patch
  std::vector<int> layers;  ///< indices of boundary-layer patches
  int main = 0;             ///< index of the main (interior) patch
  /// Case-specific scalars (geometry, loads), reported by the front end.
  std::map<std::string, double> info;
};

/// Open C^{p-1} tensor space over the given breaks.
TensorSplineSpace open_space(const std::vector<double>& bu, const std::vector<double>& bv, int p);
std::vector<double> breaks_between(double lo, double hi, int n);

/// u = amp sin(pi n1 xi1) sin(pi n2 xi2) per component.
std::function<Jet3(const Vec2&, int)> sine_field(const Vec3& amp, double n1, double n2);
/// Sum of monomials coef xi1^m xi2^n.
struct Monomial {
  Vec3 coef = Vec3::Zero();
  int m = 0, n = 0;
};
std::function<Jet3(const Vec2&, int)> polynomial_field(std::vector<Monomial> terms);

/// Strong Dirichlet data on a patch side taken from an exact solution:
/// displacement components and covariant rotations theta_alpha.
StrongDirichlet exact_dirichlet(const Problem& pb, int patch, Side side, std::vector<int> comps,
                                const ExactSolution& ex);

/// Manufactured solution of the laminated plate.
ExactSolution plate_exact_solution(Theory t);

/// Laminated square plate with a central hole. IBCM: trimmed interior plus a
/// ruled boundary layer of width 0.1 around the hole with strong hole data.
/// Trimmed: a single trimmed patch with weak Nitsche data on the hole.
/// Interior grid 2^level per side.
Case plate_with_hole(const CaseOptions& o);

/// Plate whose hole is a periodic spline curve sharing the layer's eta_1
/// space, with an offset curve of the same kind. Fields linear in the plate
/// coordinates lie in every patch space, which makes patch tests exact.
Case spline_hole_plate(const CaseOptions& o, const ExactSolution& ex);

/// Unit square, either one patch or two patches split at xi_1 = 1/2 and
/// coupled by Nitsche. All edges carry strong data from ex.
Case split_square(const CaseOptions& o, bool split, const ExactSolution& ex);

/// Plate geometry with clamped edges and a uniform normal load. mixed: RM
/// layer with a KL interior; otherwise every patch uses o.theory.
Case clamped_plate(const CaseOptions& o, bool mixed, double load);

/// Pressurized cylinder with a central axial crack, modeled by four
/// conformal patches around it. The hoop extent is fixed in arc length, so a
/// large radius approaches a flat cracked sheet.
Case cracked_cylinder(const CaseOptions& o, double p0 = 1.0, double radius = 20.0);

/// Generalized stresses of a solution at a parameter point of a patch.
Stress stress_at(const Problem& pb, const FieldSolution& u, int patch, const Vec2& eta);

/// Crack-tip membrane force ratio N^11/(p0 tau) on the axial line ahead of the
/// tip at distance r, and the crack opening at mid-length.
double crack_tip_ratio(const Case& c, const FieldSolution& u, double r);
double crack_opening(const Case& c, const FieldSolution& u);

/// Two intersecting cylinders joined through conformal boundary layers with
/// strong displacement coupling and weak rotation coupling.
Case intersecting_cylinders(const CaseOptions& o);

/// Largest distance between the two sides of the strongly coupled edges,
/// sampled in space, relative to the largest displacement.
double coupled_edge_mismatch(const Case& c, const FieldSolution& u, int samples = 200);

/// Least-squares fit of an exact solution in every patch space (p+1 points
/// per element and direction). Exact when the fields lie in the spaces.
FieldSolution fit_exact(const Problem& pb, const ExactSolution& ex);
/// Free-DOF vector of a field; shared entries take the value of the first member.
Eigen::VectorXd gather_free(const Problem& pb, const DofMap& dofs, const FieldSolution& u);

}  // namespace ibcm
