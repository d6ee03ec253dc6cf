#pragma once

#include "ibcm/common.hpp"

#include <functional>

namespace ibcm {

constexpr int kMaxDegree = 8;

/// Basis values of the p+1 functions that are nonzero on one knot span.
struct BasisValues {
  int first = 0;  ///< raw index of the first nonzero function
  int p = 0;
  int nder = 0;
  std::array<std::array<double, kMaxDegree + 1>, 4> d{};  ///< d[k][j]: k-th derivative of function first+j
};

/// Univariate knot vector. Open (clamped) by default; periodic vectors wrap the
/// first p functions onto the last p and are used for closed rings.
class KnotVector {
 public:
  KnotVector() = default;

  /// Open knot vector over sorted distinct breaks with C^continuity interior joins.
  static KnotVector open(const std::vector<double>& breaks, int p, int continuity);
  /// Validates an explicit open knot vector.
  static KnotVector from_knots(std::vector<double> knots, int p);
  /// Periodic C^{p-1} knot vector over breaks; breaks.back() is identified with breaks.front().
  static KnotVector periodic(const std::vector<double>& breaks, int p);

  int degree() const { return p_; }
  bool is_periodic() const { return periodic_; }
  const std::vector<double>& knots() const { return knots_; }
  /// Number of raw functions n = len(knots) - p - 1.
  int num_raw() const { return static_cast<int>(knots_.size()) - p_ - 1; }
  /// Number of distinct functions after periodic wrapping.
  int num_functions() const { return periodic_ ? num_raw() - p_ : num_raw(); }
  int wrap(int raw) const { return periodic_ ? raw % num_functions() : raw; }

  double lower() const { return knots_[p_]; }
  double upper() const { return knots_[num_raw()]; }
  /// Distinct knot values inside [lower, upper].
  const std::vector<double>& breaks() const { return breaks_; }
  /// Multiplicity of every entry of breaks() (open vectors: ends report p+1).
  std::vector<int> multiplicities() const;
  int num_elements() const { return static_cast<int>(breaks_.size()) - 1; }

  /// Knot index i with t_i <= x < t_{i+1}; x == upper maps to the last nonempty span.
  int find_span(double x) const;
  /// Span index of element e (0-based over nonempty spans).
  int element_span(int e) const { return elem_span_[e]; }
  /// Element containing x (same end convention as find_span).
  int element_of(double x) const;

  /// Nonzero basis functions and derivatives up to nder (<= 3) at x.
  /// span_hint >= 0 selects the span explicitly (one-sided evaluation at breaks).
  BasisValues eval(double x, int nder, int span_hint = -1) const;

 private:
  void finalize();

  int p_ = 0;
  bool periodic_ = false;
  std::vector<double> knots_;
  std::vector<double> breaks_;
  std::vector<int> elem_span_;
};

/// Number of derivative rows stored by a tensor sample for a given order.
constexpr int deriv_rows(int order) { return order == 0 ? 1 : order == 1 ? 3 : order == 2 ? 6 : 10; }

/// Tensor-product space N_i(u) N_j(v) with an activity mask.
class TensorSplineSpace {
 public:
  TensorSplineSpace() = default;
  TensorSplineSpace(KnotVector u, KnotVector v);

  const KnotVector& dir(int k) const { return kv_[k]; }
  int n(int k) const { return kv_[k].num_functions(); }
  int num_functions() const { return n(0) * n(1); }
  /// Lexicographic flat index, i fastest.
  int index(int i, int j) const { return i + n(0) * j; }

  void set_active(std::vector<char> mask);
  bool active(int f) const { return active_.empty() || active_[f] != 0; }
  int num_active() const;

  /// Functions with nonzero values on the span pair and their derivatives.
  /// Rows: 0, u, v, uu, uv, vv, uuu, uuv, uvv, vvv (truncated to the order).
  struct Sample {
    std::vector<int> fun;
    Eigen::MatrixXd d;
  };
  Sample eval(const Vec2& uv, int order, int span_u = -1, int span_v = -1) const;

 private:
  std::array<KnotVector, 2> kv_;
  std::vector<char> active_;
};

/// L2 projection of g onto the univariate space of kv. The Gram matrix uses
/// p+1 Gauss points per span; the right-hand side uses rhs_points per span.
Eigen::VectorXd l2_project(const KnotVector& kv, const std::function<double(double)>& g, int rhs_points = 0);

/// Evaluates sum_i c_i N_i at x.
double eval_spline(const KnotVector& kv, const Eigen::VectorXd& coef, double x, int deriv = 0);

}  // namespace ibcm
