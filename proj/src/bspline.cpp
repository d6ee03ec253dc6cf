#include "ibcm/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace ibcm {

KnotVector KnotVector::open(const std::vector<double>& breaks, int p, int continuity) {
  if (breaks.size() < 2) fail(ErrorKind::InvalidInput, "at least two breaks required");
  if (p < 0 || p > kMaxDegree) fail(ErrorKind::InvalidInput, "degree out of range");
  for (size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) fail(ErrorKind::InvalidInput, "breaks must be sorted and distinct");
  if (p > 0 && (continuity < 0 || continuity > p - 1))
    fail(ErrorKind::InvalidInput, "interior continuity must lie in [0, p-1]");
  const int mult = p > 0 ? p - continuity : 1;
  std::vector<double> k;
  k.insert(k.end(), p + 1, breaks.front());
  for (size_t i = 1; i + 1 < breaks.size(); ++i) k.insert(k.end(), mult, breaks[i]);
  k.insert(k.end(), p + 1, breaks.back());
  KnotVector kv;
  kv.p_ = p;
  kv.knots_ = std::move(k);
  kv.finalize();
  return kv;
}

KnotVector KnotVector::from_knots(std::vector<double> knots, int p) {
  if (p < 0 || p > kMaxDegree) fail(ErrorKind::InvalidInput, "degree out of range");
  const int n = static_cast<int>(knots.size()) - p - 1;
  if (n < p + 1) fail(ErrorKind::InvalidInput, "too few knots for degree");
  for (size_t i = 1; i < knots.size(); ++i)
    if (knots[i] < knots[i - 1]) fail(ErrorKind::InvalidInput, "knots must be non-decreasing");
  for (int i = 0; i <= p; ++i) {
    if (knots[i] != knots[0] || knots[knots.size() - 1 - i] != knots.back())
      fail(ErrorKind::InvalidInput, "end knots must be repeated p+1 times");
  }
  if (knots[p + 1] == knots[0] || knots[knots.size() - p - 2] == knots.back())
    fail(ErrorKind::InvalidInput, "end knot multiplicity exceeds p+1");
  size_t i = p + 1;
  while (i < knots.size() - p - 1) {
    size_t j = i;
    while (j < knots.size() - p - 1 && knots[j] == knots[i]) ++j;
    if (static_cast<int>(j - i) > p) fail(ErrorKind::InvalidInput, "interior multiplicity exceeds p");
    i = j;
  }
  KnotVector kv;
  kv.p_ = p;
  kv.knots_ = std::move(knots);
  kv.finalize();
  return kv;
}

KnotVector KnotVector::periodic(const std::vector<double>& breaks, int p) {
  if (p < 0 || p > kMaxDegree) fail(ErrorKind::InvalidInput, "degree out of range");
  for (size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1])) fail(ErrorKind::InvalidInput, "breaks must be sorted and distinct");
  const int n_el = static_cast<int>(breaks.size()) - 1;
  if (n_el < p + 1) fail(ErrorKind::InvalidInput, "periodic space needs at least p+1 elements");
  const double period = breaks.back() - breaks.front();
  std::vector<double> k;
  for (int j = -p; j <= n_el + p; ++j) {
    const int q = static_cast<int>(std::floor(static_cast<double>(j) / n_el));
    const int r = j - q * n_el;
    k.push_back(breaks[r] + q * period);
  }
  KnotVector kv;
  kv.p_ = p;
  kv.periodic_ = true;
  kv.knots_ = std::move(k);
  kv.finalize();
  return kv;
}

void KnotVector::finalize() {
  breaks_.clear();
  elem_span_.clear();
  const int n = num_raw();
  for (int i = p_; i < n; ++i) {
    if (knots_[i + 1] > knots_[i]) {
      if (breaks_.empty()) breaks_.push_back(knots_[i]);
      breaks_.push_back(knots_[i + 1]);
      elem_span_.push_back(i);
    }
  }
}

std::vector<int> KnotVector::multiplicities() const {
  std::vector<int> m;
  for (double b : breaks_) m.push_back(static_cast<int>(std::count(knots_.begin(), knots_.end(), b)));
  return m;
}

int KnotVector::find_span(double x) const {
  const double lo = lower(), hi = upper();
  const double tol = 1e-12 * std::max(1.0, hi - lo);
  if (x < lo - tol || x > hi + tol || std::isnan(x))
    fail(ErrorKind::OutOfDomain, "parameter " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]");
  if (x >= hi) return elem_span_.back();
  if (x <= lo) return elem_span_.front();
  const int n = num_raw();
  auto it = std::upper_bound(knots_.begin() + p_, knots_.begin() + n + 1, x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int KnotVector::element_of(double x) const {
  const int span = find_span(x);
  auto it = std::lower_bound(elem_span_.begin(), elem_span_.end(), span);
  return static_cast<int>(it - elem_span_.begin());
}

BasisValues KnotVector::eval(double x, int nder, int span_hint) const {
  if (nder < 0 || nder > 3) fail(ErrorKind::InvalidInput, "derivative order must be in [0,3]");
  const int span = span_hint >= 0 ? span_hint : find_span(x);
  const int p = p_;
  BasisValues out;
  out.first = span - p;
  out.p = p;
  out.nder = nder;
  // Cox-de Boor triangle with derivatives (inverted-triangle scheme).
  double ndu[kMaxDegree + 1][kMaxDegree + 1];
  double left[kMaxDegree + 1], right[kMaxDegree + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) out.d[0][j] = ndu[j][p];
  for (int k = 1; k <= nder; ++k)
    for (int j = 0; j <= p; ++j) out.d[k][j] = 0.0;
  if (nder == 0 || p == 0) return out;
  double a[2][kMaxDegree + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= std::min(nder, p); ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      out.d[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= std::min(nder, p); ++k) {
    for (int j = 0; j <= p; ++j) out.d[k][j] *= fac;
    fac *= (p - k);
  }
  return out;
}

TensorSplineSpace::TensorSplineSpace(KnotVector u, KnotVector v) : kv_{std::move(u), std::move(v)} {}

void TensorSplineSpace::set_active(std::vector<char> mask) {
  if (static_cast<int>(mask.size()) != num_functions()) fail(ErrorKind::InvalidInput, "mask size mismatch");
  active_ = std::move(mask);
}

int TensorSplineSpace::num_active() const {
  if (active_.empty()) return num_functions();
  return static_cast<int>(std::count(active_.begin(), active_.end(), char(1)));
}

TensorSplineSpace::Sample TensorSplineSpace::eval(const Vec2& uv, int order, int span_u, int span_v) const {
  const BasisValues bu = kv_[0].eval(uv[0], std::min(order, 3), span_u);
  const BasisValues bv = kv_[1].eval(uv[1], std::min(order, 3), span_v);
  const int pu = bu.p, pv = bv.p;
  const int rows = deriv_rows(order);
  Sample s;
  s.fun.resize((pu + 1) * (pv + 1));
  s.d.resize(rows, (pu + 1) * (pv + 1));
  // (du order, dv order) for each row.
  static const int du[10] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
  static const int dv[10] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};
  int c = 0;
  for (int j = 0; j <= pv; ++j) {
    for (int i = 0; i <= pu; ++i, ++c) {
      s.fun[c] = index(kv_[0].wrap(bu.first + i), kv_[1].wrap(bv.first + j));
      for (int r = 0; r < rows; ++r) s.d(r, c) = bu.d[du[r]][i] * bv.d[dv[r]][j];
    }
  }
  return s;
}

Eigen::VectorXd l2_project(const KnotVector& kv, const std::function<double(double)>& g, int rhs_points) {
  const int n = kv.num_functions();
  const int p = kv.degree();
  const int nq_gram = p + 1;
  const int nq_rhs = std::max(nq_gram, rhs_points);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const auto& br = kv.breaks();
  for (int e = 0; e < kv.num_elements(); ++e) {
    const double a = br[e], len = br[e + 1] - br[e];
    const int span = kv.element_span(e);
    const GaussRule& gq = gauss01(nq_gram);
    for (size_t q = 0; q < gq.x.size(); ++q) {
      const double x = a + len * gq.x[q];
      const BasisValues bv = kv.eval(x, 0, span);
      for (int i = 0; i <= p; ++i)
        for (int j = 0; j <= p; ++j)
          G(kv.wrap(bv.first + i), kv.wrap(bv.first + j)) += gq.w[q] * len * bv.d[0][i] * bv.d[0][j];
    }
    const GaussRule& rq = gauss01(nq_rhs);
    for (size_t q = 0; q < rq.x.size(); ++q) {
      const double x = a + len * rq.x[q];
      const BasisValues bv = kv.eval(x, 0, span);
      const double gx = g(x);
      for (int i = 0; i <= p; ++i) b(kv.wrap(bv.first + i)) += rq.w[q] * len * bv.d[0][i] * gx;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "singular Gram matrix");
  Eigen::VectorXd c = llt.solve(b);
  // One step of iterative refinement keeps the Gram solve at machine precision.
  c += llt.solve(b - G * c);
  return c;
}

double eval_spline(const KnotVector& kv, const Eigen::VectorXd& coef, double x, int deriv) {
  const BasisValues bv = kv.eval(x, deriv);
  double s = 0.0;
  for (int i = 0; i <= kv.degree(); ++i) s += coef(kv.wrap(bv.first + i)) * bv.d[deriv][i];
  return s;
}

}  // namespace ibcm
