#include "ibcm/common.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

namespace ibcm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::SingularGeometry: return "singular-geometry";
    case ErrorKind::SingularCurve: return "singular-curve";
    case ErrorKind::RefineRequired: return "refine-required";
    case ErrorKind::InvalidOffset: return "invalid-offset";
    case ErrorKind::InvalidMaterial: return "invalid-material";
    case ErrorKind::InvalidLoad: return "invalid-load";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::SegmentationFailure: return "segmentation-failure";
    case ErrorKind::AssemblyFailure: return "assembly-failure";
    case ErrorKind::CannotCoupleStrongly: return "cannot-couple-strongly";
    case ErrorKind::GeometryFailure: return "geometry-failure";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::NotApplicable: return "not-applicable";
    case ErrorKind::ConfigError: return "config-error";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

namespace {

GaussRule make_gauss(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x[n - 1 - i] = 0.5 * (x + 1.0);
    r.w[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss01(int n) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> v(41);
    for (int k = 1; k <= 40; ++k) v[k] = make_gauss(k);
    return v;
  }();
  if (n < 1 || n > 40) fail(ErrorKind::InvalidInput, "Gauss rule size " + std::to_string(n));
  return rules[n];
}

int worker_threads() {
  const char* env = std::getenv("IBCM_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

}  // namespace ibcm
