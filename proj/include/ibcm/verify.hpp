#pragma once

#include "ibcm/assembly.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ibcm {

/// Displacement error norms. H1 and H2 are seminorms built from the surface
/// metric: |e|_1^2 = int a^{ab} e_{,a}.e_{,b} and |e|_2^2 = int a^{ac} a^{bd}
/// H_{ab}.H_{cd} with H_{ab} = e_{,ab} - Gamma^l_{ab} e_{,l}.
struct NormSet {
  double l2 = 0, h1 = 0, h2 = 0;
  bool has_h2 = false;
};

/// Field to be measured, as a jet in the parameters of patch `patch`.
using JetField = std::function<FieldJet(int patch, const Vec2& eta, const SurfaceFrame& f, int order)>;

/// Integrates the norms of g over the active region of every patch with npts
/// points per direction (<= 0: p+3), tiles included.
NormSet integrate_norms(const Problem& pb, const JetField& g, bool with_h2, int npts = 0);

/// Norms of u_h - u_ex. H2 needs second derivatives of both fields.
NormSet error_norms(const Problem& pb, const FieldSolution& uh, const ExactSolution& ex, bool with_h2, int npts = 0);

/// Norms of u_a - u_b for two solutions on problems with identical patch maps
/// and spaces (theories may differ).
NormSet difference_norms(const Problem& pa, const FieldSolution& ua, const Problem& pb, const FieldSolution& ub,
                         bool with_h2, int npts = 0);

/// Norms of the field itself (u_h against zero).
NormSet solution_norms(const Problem& pb, const FieldSolution& uh, bool with_h2, int npts = 0);

/// L2 norm of the displacement jump across a Nitsche interface.
double interface_jump_norm(const Problem& pb, const FieldSolution& uh, const NitscheInterface& itf);

struct ErrorReport {
  int level = 0;
  double h = 0;
  int dofs = 0;
  NormSet err;
  SPDReport spd;
};

/// Least-squares slope of log(err) against log(h) over the last `window`
/// entries; nullopt when fewer than two usable points remain.
std::optional<double> fit_rate(const std::vector<double>& h, const std::vector<double>& err, int window = 3);

struct ConvergenceStudy {
  std::vector<ErrorReport> levels;
  std::optional<double> rate_l2, rate_h1, rate_h2;
  /// First-pair L2 rate below p + 0.5. An indicator only, never asserted.
  bool locking_flag = false;

  /// Fits the rates over SPD-successful levels only.
  void fit(int p, int window = 3);
};

/// lambda from lambda^4 = 12 (1 - nu^2) a^4 / (R^2 tau^2).
double folias_lambda(double a, double R, double tau, double nu);
/// N^11 / (p0 tau) at distance r ahead of the tip, with c = a. Only nu = 1/3
/// is accepted since the correction coefficients are fitted for it.
double folias_reference(double r, double a, double R, double tau, double nu = 1.0 / 3.0);

}  // namespace ibcm
