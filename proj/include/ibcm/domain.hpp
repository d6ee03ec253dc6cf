#pragma once

#include "ibcm/curves.hpp"
#include "ibcm/geometry.hpp"

#include <memory>
#include <string>

namespace ibcm {

/// Rectangular background grid given by its break values in each direction.
struct Grid {
  std::vector<double> u, v;

  int nu() const { return static_cast<int>(u.size()) - 1; }
  int nv() const { return static_cast<int>(v.size()) - 1; }
  int num_cells() const { return nu() * nv(); }
  int cell(int i, int j) const { return i + nu() * j; }
  /// {u0, u1, v0, v1}
  std::array<double, 4> box(int c) const;
  /// Cell indices (i, j) containing x; points on the upper boundary map to the last cell.
  std::array<int, 2> locate(const Vec2& x) const;
  double min_size() const;
};

Grid uniform_grid(const std::array<double, 4>& rect, int nu, int nv);

/// Active set: a rectangle intersected with the left sides of its trimming curves.
struct Region {
  std::array<double, 4> rect{0, 1, 0, 1};
  std::vector<CurvePtr> curves;

  /// Signed indicator, positive inside; magnitude approximates the distance to the boundary.
  double side(const Vec2& x) const;
  bool contains(const Vec2& x, double tol = 0.0) const { return side(x) > -tol; }
};

enum class CellKind { Entire, Partial, Empty };

/// Ruled integration tile between a straight segment l0 -> l1 and the curve arc
/// sa -> sb. T(s,t) = (1-t) L(s) + t A(s) on the unit square; the flip flag
/// reverses s so that the Jacobian is positive. l0 == l1 gives a collapsed tile.
struct Tile {
  Vec2 l0 = Vec2::Zero(), l1 = Vec2::Zero();
  CurvePtr curve;
  double sa = 0, sb = 0;
  bool flip = false;
  int q = 3;  ///< quadrature order: q+1 Gauss points per direction

  Vec2 point(double s, double t) const;
  /// Columns: dT/ds, dT/dt.
  Mat2 jacobian(double s, double t) const;
  double det(double s, double t) const { return jacobian(s, t).determinant(); }
};

/// Arc of a trimming curve inside one cell.
struct CutPiece {
  int curve = 0;
  int cell = 0;
  double sa = 0, sb = 0;
};

/// Classified background grid of a trimmed patch.
struct TrimmedDomain {
  Grid grid;
  Region region;
  std::vector<CellKind> kind;
  std::vector<std::vector<Tile>> tiles;  ///< per cell; empty unless Partial
  std::vector<CutPiece> pieces;
  /// Per curve: sorted parameters where it crosses grid lines or tile boundaries.
  std::vector<std::vector<double>> curve_breaks;
  std::vector<std::string> warnings;

  int count(CellKind k) const;
};

/// Classifies the cells of grid against region and tiles the cut ones with order q.
/// Unsupported cut topologies raise RefineRequired.
TrimmedDomain classify_elements(const Grid& grid, const Region& region, int q = 3);

/// Tiles the active part of a cell whose boundary is crossed once by the arc
/// sP -> sQ of curve (active region on the left of the arc).
std::vector<Tile> tile_cut_element(const std::array<double, 4>& box, const CurvePtr& curve, double sP, double sQ, int q,
                                   std::vector<double>* split_params = nullptr);

/// Point of a quadrature rule in patch parameters; w includes the reference
/// Jacobian (cell size or tile determinant) but not the surface measure.
struct QuadPoint {
  Vec2 x;
  double w = 0;
};

std::vector<QuadPoint> cell_quadrature(const std::array<double, 4>& box, int n);
std::vector<QuadPoint> tile_quadrature(const Tile& tile, int n);

/// Quadrature points grouped by owning cell.
struct CellRule {
  int cell = 0;
  std::vector<QuadPoint> pts;
};
/// Active-region rules: n_entire points per direction on Entire cells and
/// n_tile per direction on each tile (n_tile <= 0 uses each tile's q+1).
std::vector<CellRule> domain_quadrature(const TrimmedDomain& dom, int n_entire, int n_tile);

/// Ruled map F(eta1, eta2) = (1 - eta2) C(eta1) + eta2 C'(eta1) on [s0, s1] x [0, 1].
class RuledMap : public PlanarMap {
 public:
  RuledMap(CurvePtr c0, CurvePtr c1);
  Jet2 eval(const Vec2& eta, int order) const override;
  std::array<double, 4> domain() const override { return {c0_->s0(), c0_->s1(), 0.0, 1.0}; }
  Vec2 inverse(const Vec2& xi, const Vec2& guess) const override;
  const ParamCurve& inner_curve() const { return *c0_; }
  const ParamCurve& outer_curve() const { return *c1_; }

 private:
  CurvePtr c0_, c1_;
};

/// Conformal strip along a boundary curve.
struct BoundaryLayer {
  CurvePtr boundary;  ///< eta2 = 0
  CurvePtr offset;    ///< eta2 = 1
  std::shared_ptr<const RuledMap> map;
  std::vector<double> breaks1, breaks2;
};

/// Layer between boundary and its normal offset by delta toward the active side.
BoundaryLayer build_boundary_layer(const CurvePtr& boundary, double delta, int n1, int n2);
/// Layer between boundary and an explicit offset curve with the same parameter interval.
BoundaryLayer build_boundary_layer(const CurvePtr& boundary, const CurvePtr& offset, int n1, int n2);

/// True if sampled interior points of a fall inside b (open parameter domain).
bool layers_overlap(const PlanarMap& a, const PlanarMap& b, int n = 24);

/// Interface piece with one owner cell per side.
struct Segment {
  double s0 = 0, s1 = 0;
  int plus_cell = -1;   ///< cell index in the side-+ grid
  int minus_cell = -1;  ///< cell index in the side-- grid (-1 for one-sided curves)
  int minus_tile = -1;  ///< tile index inside a Partial minus cell
};

/// Parameters in (lo, hi) where curve crosses the grid lines; tangential touches are skipped.
std::vector<double> grid_crossings(const ParamCurve& curve, const Grid& grid, double lo, double hi,
                                   std::vector<std::string>* warnings = nullptr);

/// Splits [lo, hi] at the union of breaks; breaks closer than snap are merged.
std::vector<Segment> segment_curve(double lo, double hi, std::vector<double> breaks, double snap = 1e-10);

/// Segments the offset curve of layer against the trimmed interior that is bounded by it.
/// The layer's eta1 breaks and all interior crossings and tile splits become breakpoints.
std::vector<Segment> segment_interface(const BoundaryLayer& layer, const TrimmedDomain& interior);

/// One-sided segmentation of a trimming curve of dom; plus_cell is the active cell owning each segment.
std::vector<Segment> segment_trim_curve(const TrimmedDomain& dom, int curve_index);

}  // namespace ibcm
