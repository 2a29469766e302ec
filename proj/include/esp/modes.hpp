#pragma once

#include <Eigen/Dense>
#include <vector>

#include "esp/em.hpp"

namespace esp::modes {

/// Point-dipole sampling of a continuous source/receiver space.
struct SampledSpace {
  std::vector<CurrentElement> elements; // unit-amplitude templates
  double pitch = 0.0;

  /// Sampling coarser than lambda/2 under-resolves the radiating current.
  bool undersampled(const Medium& medium) const;

  static SampledSpace segment(double length, double pitch, const Vec3& center,
                              const Vec3& axis, const Vec3& polarization,
                              double element_length);
  static SampledSpace square(double side, double pitch, const Vec3& center,
                             const Vec3& axis_u, const Vec3& axis_v,
                             const Vec3& polarization, double element_length);
};

/// Discretized Green coupling: entry (m, n) = l_m l_n p_m . G(r_m - r_n) . p_n
/// for destination element m and source element n.
Eigen::MatrixXcd coupling_matrix(const SampledSpace& src, const SampledSpace& dst,
                                 const Medium& medium);

struct ModeDecomposition {
  Eigen::MatrixXcd left_basis;     // columns: receive modes
  Eigen::VectorXd singular_values; // descending
  Eigen::MatrixXcd right_basis;    // columns: transmit modes
};

/// SVD with a deterministic phase convention: the largest-magnitude entry of
/// each right singular vector is made real and positive.
ModeDecomposition mode_decomposition(const Eigen::MatrixXcd& coupling);

struct DofCriterion {
  enum class Kind { threshold_db, energy_fraction };
  Kind kind;
  double value;

  static DofCriterion threshold_db(double db) { return {Kind::threshold_db, db}; }
  static DofCriterion energy_fraction(double f) { return {Kind::energy_fraction, f}; }
};

int count_dof(const ModeDecomposition& decomposition, DofCriterion criterion);

struct PowerAllocation {
  Eigen::VectorXd powers;
  double water_level = 0.0;
};

/// Water-filling over channel gains sigma_n^2: p_n = max(mu - noise/gain, 0)
/// with mu found by bisection of the monotone total-power function.
PowerAllocation water_filling(const Eigen::VectorXd& gains, double noise_power,
                              double total_power);

double link_capacity(const Eigen::VectorXd& gains, double noise_power,
                     double total_power);

/// Transmitter -> device -> receiver cascade under the Born approximation.
struct CascadeLink {
  Eigen::MatrixXcd h_t; // transmitter-to-device factor
  Eigen::MatrixXcd h_r; // device-to-receiver factor
  Eigen::VectorXd coupling_t; // singular values of h_t (diag of Gamma_T analog)
  Eigen::VectorXd coupling_r; // singular values of h_r
  int usable_in = 0;  // N: usable modes into the device
  int usable_out = 0; // M: usable modes out of the device

  int max_modes() const { return std::min(usable_in, usable_out); } // N_c

  static CascadeLink from_matrices(const Eigen::MatrixXcd& h_t,
                                   const Eigen::MatrixXcd& h_r,
                                   int usable_in = -1, int usable_out = -1);
};

/// Capacity over the ordered products of the two-hop singular values; powers
/// beyond the first min(N, M) modes are forced to zero.
double cascade_capacity(const CascadeLink& link, double noise_power,
                        double total_power);

struct ScatterDesign {
  Eigen::MatrixXcd matrix; // unitary R = V_R U_T^H
  bool degenerate = false; // repeated singular values: basis not unique
};

/// Capacity-optimal device matrix R = V_R U_T^H aligning the two hops.
ScatterDesign optimal_scatter_matrix(const Eigen::MatrixXcd& h_t,
                                     const Eigen::MatrixXcd& h_r);

} // namespace esp::modes
