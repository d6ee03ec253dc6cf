#pragma once

#include <array>
#include <cmath>

namespace ibcm {

/// Truncated Taylor series in one variable: c[k] = f^(k)(s0) / k!.
/// Used to differentiate analytic parametric curves exactly.
template <int N>
struct Taylor {
  std::array<double, N + 1> c{};

  Taylor() = default;
  Taylor(double v) { c[0] = v; }  // NOLINT(google-explicit-constructor)
  static Taylor variable(double s) {
    Taylor t(s);
    if (N >= 1) t.c[1] = 1.0;
    return t;
  }
  double value() const { return c[0]; }
  /// k-th derivative.
  double deriv(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }

  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
};

template <int N>
Taylor<N> operator+(Taylor<N> a, const Taylor<N>& b) { return a += b; }
template <int N>
Taylor<N> operator-(Taylor<N> a, const Taylor<N>& b) { return a -= b; }
template <int N>
Taylor<N> operator-(Taylor<N> a) {
  for (auto& x : a.c) x = -x;
  return a;
}
template <int N>
Taylor<N> operator+(Taylor<N> a, double b) { a.c[0] += b; return a; }
template <int N>
Taylor<N> operator+(double b, Taylor<N> a) { a.c[0] += b; return a; }
template <int N>
Taylor<N> operator-(Taylor<N> a, double b) { a.c[0] -= b; return a; }
template <int N>
Taylor<N> operator-(double b, const Taylor<N>& a) { return -a + b; }
template <int N>
Taylor<N> operator*(Taylor<N> a, double b) {
  for (auto& x : a.c) x *= b;
  return a;
}
template <int N>
Taylor<N> operator*(double b, Taylor<N> a) { return a * b; }
template <int N>
Taylor<N> operator/(Taylor<N> a, double b) { return a * (1.0 / b); }

template <int N>
Taylor<N> operator*(const Taylor<N>& a, const Taylor<N>& b) {
  Taylor<N> r;
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j <= k; ++j) r.c[k] += a.c[j] * b.c[k - j];
  return r;
}

template <int N>
Taylor<N> operator/(const Taylor<N>& a, const Taylor<N>& b) {
  Taylor<N> r;
  for (int k = 0; k <= N; ++k) {
    double s = a.c[k];
    for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
    r.c[k] = s / b.c[0];
  }
  return r;
}
template <int N>
Taylor<N> operator/(double a, const Taylor<N>& b) { return Taylor<N>(a) / b; }

template <int N>
Taylor<N> sqrt(const Taylor<N>& a) {
  Taylor<N> r;
  r.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    double s = a.c[k];
    for (int j = 1; j < k; ++j) s -= r.c[j] * r.c[k - j];
    r.c[k] = s / (2.0 * r.c[0]);
  }
  return r;
}

/// sin and cos together via k s_k = sum j x_j c_{k-j}, k c_k = -sum j x_j s_{k-j}.
template <int N>
void sincos(const Taylor<N>& x, Taylor<N>& s, Taylor<N>& c) {
  s = Taylor<N>();
  c = Taylor<N>();
  s.c[0] = std::sin(x.c[0]);
  c.c[0] = std::cos(x.c[0]);
  for (int k = 1; k <= N; ++k) {
    double ss = 0, cc = 0;
    for (int j = 1; j <= k; ++j) {
      ss += j * x.c[j] * c.c[k - j];
      cc -= j * x.c[j] * s.c[k - j];
    }
    s.c[k] = ss / k;
    c.c[k] = cc / k;
  }
}
template <int N>
Taylor<N> sin(const Taylor<N>& x) {
  Taylor<N> s, c;
  sincos(x, s, c);
  return s;
}
template <int N>
Taylor<N> cos(const Taylor<N>& x) {
  Taylor<N> s, c;
  sincos(x, s, c);
  return c;
}

/// atan2 through its derivative (x y' - y x') / (x^2 + y^2), integrated term by term.
template <int N>
Taylor<N> atan2(const Taylor<N>& y, const Taylor<N>& x) {
  auto der = [](const Taylor<N>& a) {
    Taylor<N> d;
    for (int k = 0; k < N; ++k) d.c[k] = (k + 1) * a.c[k + 1];
    return d;
  };
  const Taylor<N> w = (x * der(y) - y * der(x)) / (x * x + y * y);
  Taylor<N> r;
  r.c[0] = std::atan2(y.c[0], x.c[0]);
  for (int k = 1; k <= N; ++k) r.c[k] = w.c[k - 1] / k;
  return r;
}

// Plain-double overloads so curve functors can be instantiated with double.
inline void sincos(double x, double& s, double& c) {
  s = std::sin(x);
  c = std::cos(x);
}

}  // namespace ibcm
