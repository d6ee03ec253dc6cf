#pragma once

// Reference fields shared by the unit tests and the acceptance program.
#include "ibcm/cases.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ibcm::test {

/// Affine displacement with zero rotation data; it lies in every patch space
/// of the spline-hole plate.
inline ExactSolution linear_field(Theory t) {
  ExactSolution ex;
  ex.u = polynomial_field({{Vec3(0.01, -0.02, 0.03), 0, 0}, {Vec3(0.1, 0.2, -0.3), 1, 0}, {Vec3(-0.2, 0.05, 0.4), 0, 1}});
  if (t == Theory::RM) ex.theta = polynomial_field({});
  return ex;
}

/// Rigid motions of a flat plate u = c + w x X with the matching rotations.
inline std::vector<std::pair<std::string, ExactSolution>> plate_rigid_modes(Theory t) {
  std::vector<std::pair<std::string, ExactSolution>> modes;
  auto add = [&](std::string name, std::vector<Monomial> u, std::vector<Monomial> th) {
    ExactSolution m;
    m.u = polynomial_field(std::move(u));
    if (t == Theory::RM) m.theta = polynomial_field(std::move(th));
    modes.emplace_back(std::move(name), std::move(m));
  };
  add("Tx", {{Vec3(1, 0, 0), 0, 0}}, {});
  add("Ty", {{Vec3(0, 1, 0), 0, 0}}, {});
  add("Tz", {{Vec3(0, 0, 1), 0, 0}}, {});
  // Rotation about e1: u3 = y, theta_2 = -1.
  add("Rx", {{Vec3(0, 0, 1), 0, 1}}, {{Vec3(0, -1, 0), 0, 0}});
  // Rotation about e2: u3 = -x, theta_1 = 1.
  add("Ry", {{Vec3(0, 0, -1), 1, 0}}, {{Vec3(1, 0, 0), 0, 0}});
  add("Rz", {{Vec3(-1, 0, 0), 0, 1}, {Vec3(0, 1, 0), 1, 0}}, {});
  return modes;
}

/// Problem without boundary data: strong conditions, weak data interfaces and
/// the manufactured load are removed so only the coupled energy remains.
inline Problem without_data(Problem pb) {
  pb.dirichlet.clear();
  pb.pins.clear();
  pb.exact.reset();
  std::erase_if(pb.interfaces, [](const NitscheInterface& i) { return i.minus.patch < 0; });
  return pb;
}

/// x^T K x relative to sum K_ii x_i^2 for the spline fit of a field.
inline double relative_energy(const Problem& pb, const DofMap& dofs, const Eigen::SparseMatrix<double>& K,
                              const ExactSolution& mode) {
  const Eigen::VectorXd x = gather_free(pb, dofs, fit_exact(pb, mode));
  double scale = 0;
  for (int i = 0; i < x.size(); ++i) scale += K.coeff(i, i) * x[i] * x[i];
  return std::abs(x.dot(K * x)) / scale;
}

}  // namespace ibcm::test
