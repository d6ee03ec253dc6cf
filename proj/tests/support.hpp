#pragma once

// Shared helpers for the test programs: seeded generators and tolerances.
#include "ibcm/cases.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

namespace ibcm::test {

/// Seeded generator; every property test draws from its own fixed seed.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Vec2 point(const std::array<double, 4>& r) { return {uniform(r[0], r[1]), uniform(r[2], r[3])}; }
  Vec3 vec3(double a) { return {uniform(-a, a), uniform(-a, a), uniform(-a, a)}; }
  /// Sorted distinct breaks on [lo, hi] with n elements and a minimum gap.
  std::vector<double> breaks(double lo, double hi, int n) {
    std::vector<double> b{lo};
    std::vector<double> w(n);
    double s = 0;
    for (auto& x : w) s += (x = uniform(0.3, 1.0));
    for (int i = 0; i < n; ++i) b.push_back(b.back() + (hi - lo) * w[i] / s);
    b.back() = hi;
    return b;
  }
};

constexpr int d2_index(int a, int b) { return ibcm::d2(a, b); }
constexpr int d3_index(int a, int b, int c) { return ibcm::d3(a, b, c); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace ibcm::test
