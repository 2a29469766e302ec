#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "esp/em.hpp"

namespace esp::ris {

/// Propagation direction in the front hemisphere of the panel.
struct Angle {
  double elevation = 0.0; // theta in [0, pi/2], from the panel normal
  double azimuth = 0.0;   // phi in [0, 2 pi)

  double ux() const { return std::sin(elevation) * std::cos(azimuth); }
  double uy() const { return std::sin(elevation) * std::sin(azimuth); }
  Vec3 unit() const;
};

/// Square reflecting surface of phase-only cells on a lambda/2 lattice.
struct RisPanel {
  int side = 0;
  double cell_spacing = 0.0;
  Eigen::MatrixXd phases; // side x side, radians

  int cells() const { return side * side; }
  static RisPanel half_wavelength(int side, const Medium& medium);
};

/// Anomalous-reflection phase law for lambda/2 cells (pi of phase per index):
/// theta_ij = -pi i (ux_inc + ux_ref) - pi j (uy_inc + uy_ref), i, j = 1..side,
/// wrapped to [0, 2 pi).
Eigen::MatrixXd anomalous_phase_profile(const Angle& incident, const Angle& desired,
                                        int side);

/// Applies the phase law to the panel; rejects spacings other than lambda/2,
/// for which the printed law does not hold.
void configure_anomalous(RisPanel& panel, const Angle& incident, const Angle& desired,
                         const Medium& medium);

/// Array-factor magnitude of the reflected field over a direction grid.
std::vector<double> reflected_pattern(const RisPanel& panel, const Angle& incident,
                                      std::span<const Angle> directions,
                                      const Medium& medium);

enum class RisStructure { diagonal, nondiagonal_reciprocal, nondiagonal_nonreciprocal };

/// Reconfigurable degrees of freedom of the reflection matrix:
/// K (diagonal), K(K-1)/2 (reciprocal non-diagonal), K^2 (non-reciprocal).
long long ris_dof(int cells, RisStructure structure);

} // namespace esp::ris
