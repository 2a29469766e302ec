#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "esp/em.hpp"

namespace esp::dof {

/// Radiating aperture in unbounded space: a segment, a rectangle or a box.
struct ApertureGeometry {
  enum class Kind { segment, rectangle, box };
  Kind kind;
  double lx = 0.0;
  double ly = 0.0;
  double lz = 0.0;

  static ApertureGeometry segment(double length);
  static ApertureGeometry rectangle(double lx, double ly);
  static ApertureGeometry box(double lx, double ly, double lz);

  /// Closed forms exist for segments, squares and cubes only.
  bool formula_supported() const;
  /// The asymptotic formulas assume edges >> lambda; flags edges below 4*lambda.
  bool below_asymptotic_regime(const Medium& medium) const;
};

/// Paraxial transmit/receive pair: two parallel segments or two square plates.
struct LinkGeometry {
  enum class Kind { segments, squares };
  Kind kind;
  double lt = 0.0;       // segment lengths (m)
  double lr = 0.0;
  double at = 0.0;       // plate areas (m^2)
  double ar = 0.0;
  double distance = 0.0; // center-to-center (m)
  bool paraxial = true;  // assumption recorded, not enforced

  static LinkGeometry segments(double lt, double lr, double distance);
  static LinkGeometry squares(double at, double ar, double distance);
};

enum class DofMethod { formula, lattice };
enum class LinkDofModel { classic, corrected };

struct DofResult {
  double value = 0.0;                     // formula result, may be fractional
  std::optional<long long> lattice_count; // exact enumeration when available
  DofMethod method = DofMethod::formula;
};

/// Degrees of freedom of the radiated field of an aperture in unbounded space.
/// Formula method: 2L/lambda (1D), pi L^2/lambda^2 (square),
/// pi/3 + 4 pi L^2/lambda^2 (cube, exact shell expression). Lattice method
/// enumerates the Fourier modes inside the visible region / spherical shell.
DofResult dof_unbounded(const ApertureGeometry& geometry, const Medium& medium,
                        DofMethod method);

/// Link DoF: classic Lt*Lr/(lambda*d) resp. At*Ar/(lambda*d)^2, or the
/// saturation-corrected forms (2Lt/lambda)*zeta and (4At/lambda^2)*zeta*atan(zeta)
/// with zeta = Lr/sqrt(4 d^2 + Lr^2).
DofResult dof_link(const LinkGeometry& geometry, const Medium& medium,
                   LinkDofModel model);

struct DftCodebook {
  Eigen::MatrixXcd matrix;        // unitary N x N, column n = beam n
  std::vector<int> beam_index;    // n = -floor(N/2) .. floor(N/2)
  std::vector<double> beam_angle; // gamma_n = asin(2n/N), radians
};

/// Classical DFT beamforming codebook for a half-wavelength ULA.
DftCodebook dft_codebook(int n);

} // namespace esp::dof
