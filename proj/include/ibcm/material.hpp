#pragma once

#include "ibcm/geometry.hpp"

namespace ibcm {

/// Orthotropic lamina. The lamination angle is measured from the local
/// direction n_1 about n_3 (radians).
struct Layer {
  double E1 = 0, E2 = 0, nu12 = 0, G12 = 0, G31 = 0, G32 = 0;
  double angle = 0;
  double thickness = 0;

  double nu21() const { return nu12 * E2 / E1; }
};

struct Laminate {
  std::vector<Layer> layers;
  double alpha_s = 5.0 / 6.0;  ///< shear correction factor

  double thickness() const;
  /// Largest Young modulus over all layers and directions.
  double max_modulus() const;
  /// Throws InvalidMaterial if any layer violates positivity.
  void validate() const;

  static Laminate isotropic(double E, double nu, double thickness, double alpha_s = 5.0 / 6.0);
  /// Equal-thickness plies with the given angles (radians).
  static Laminate orthotropic(double E1, double E2, double nu12, double G, const std::vector<double>& angles,
                              double thickness, double alpha_s = 5.0 / 6.0);
};

/// In-plane rotation acting on (11, 22, 12) stress components.
Mat3 rotation_TL(double angle);
/// Transverse-shear rotation acting on (31, 32) components.
Mat2 rotation_TT(double angle);

struct LayerMatrices {
  Mat3 cL;  ///< in-plane stiffness, engineering shear strain
  Mat2 cT;  ///< transverse-shear stiffness including alpha_s
};
/// Stiffness in the orthotropic axes.
LayerMatrices layer_matrices_local(const Layer& layer, double alpha_s);
/// Stiffness rotated into the local basis n_1 n_2: c_bar = T c_tilde T^T.
LayerMatrices layer_matrices(const Layer& layer, double alpha_s);

/// Thickness-integrated stiffness in the local orthonormal basis (Voigt,
/// engineering strains).
struct GeneralizedStiffness {
  Mat3 A = Mat3::Zero(), B = Mat3::Zero(), D = Mat3::Zero();
  Mat2 S = Mat2::Zero();
};

GeneralizedStiffness laminate_abds(const Laminate& lam);

/// Contravariant stiffness components stored as C(I, J) = C^{alpha beta gamma delta}
/// with I, J in {11, 22, 12}. Acting on (e11, e22, 2 e12) gives (N^11, N^22, N^12).
struct CovariantStiffness {
  Mat3 A = Mat3::Zero(), B = Mat3::Zero(), D = Mat3::Zero();
  Mat2 S = Mat2::Zero();
};

/// Local basis n_1 = ref/|ref|, n_2 = a_3 x n_1 and the change of basis
/// T(alpha1, alpha2) = n_{alpha2} . a^{alpha1}.
Mat2 basis_change(const SurfaceFrame& f);

CovariantStiffness to_covariant(const GeneralizedStiffness& gs, const SurfaceFrame& f);
/// Parameter derivatives of the covariant tensors; needs a third-order frame.
std::array<CovariantStiffness, 2> covariant_derivatives(const GeneralizedStiffness& gs, const SurfaceFrame& f);

/// Expands a Voigt matrix to a 4-index tensor (index 2 stands for 12 and 21).
using Tensor4 = std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2>;
Tensor4 voigt_to_tensor(const Mat3& m);

}  // namespace ibcm
