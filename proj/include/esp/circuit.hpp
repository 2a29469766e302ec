#pragma once

#include <Eigen/Dense>
#include <vector>

#include "esp/em.hpp"

namespace esp::circuit {

/// Port-loaded array of Hertzian dipoles; doubles as the hardware model of a
/// dynamic scattering array (DSA).
struct DipoleArray {
  struct Element {
    Vec3 position;
    Vec3 orientation;
  };
  std::vector<Element> elements;
  double element_length = 1e-3;
  double self_reactance = 0.0; // ohm, added to every diagonal entry

  int ports() const { return static_cast<int>(elements.size()); }
  /// Point-dipole formulas degrade for l > lambda/10.
  bool electrically_long(const Medium& medium) const;

  /// Concentric rings in the xy-plane (z-polarized): one center element plus
  /// rings at radii spacing, 2*spacing, ..., each filled at approximately the
  /// given arc spacing.
  static DipoleArray concentric_rings(int rings, double spacing, double element_length);
};

struct ImpedanceMatrix {
  Eigen::MatrixXcd z;
  int ports() const { return static_cast<int>(z.rows()); }
};

/// Radiation resistance of a Hertzian dipole, (2 pi eta / 3) (l / lambda)^2.
double radiation_resistance(double element_length, const Medium& medium);

/// Mutual impedances from the Green's function in the induced-EMF convention,
/// Z_nk = -l^2 p_n . G(r_n - r_k) . p_k; diagonals carry the analytic
/// radiation resistance plus the caller's self reactance. Re{Z} is then the
/// exact radiated-power quadratic form and stays positive semi-definite.
ImpedanceMatrix impedance_matrix(const DipoleArray& array, const Medium& medium);

/// Reconfigurable port loads z_k = r_k + j theta_k (purely reactive when all
/// resistances are zero).
struct LoadVector {
  Eigen::VectorXd reactance;
  Eigen::VectorXd resistance; // empty means zero everywhere

  static LoadVector reactive(const Eigen::VectorXd& theta);
  bool purely_reactive() const;
  Eigen::VectorXcd impedance() const;
  int ports() const { return static_cast<int>(reactance.size()); }
};

/// Reflection matrix R(theta) = -Z (Z_L + Z)^{-1}, computed through an LU
/// solve. Throws with a condition-number report near load resonance.
Eigen::MatrixXcd reflection_matrix(const ImpedanceMatrix& z, const LoadVector& loads);

/// P = i^H Re{Z} i; tiny negative rounding is clipped, a significantly
/// negative value signals a broken diagonal model and throws.
double radiated_power(const ImpedanceMatrix& z, const Eigen::VectorXcd& currents);

struct CharacteristicLoads {
  LoadVector loads;
  /// Largest |imaginary part| of the resonance ratio [Im{Z} i]_k / i_k,
  /// relative to its magnitude; nonzero means the target current cannot be
  /// resonated exactly by reactive loads.
  double max_ratio_imag = 0.0;
};

/// Reactive loads that resonate a target current: theta_k cancels the
/// reactive part of the port equation, theta_k = -[Im{Z} i]_k / i_k.
CharacteristicLoads characteristic_mode_loads(const ImpedanceMatrix& z,
                                              const Eigen::VectorXcd& target_current);

/// Active/passive port split: the first `active_ports` ports are driven,
/// the rest carry reconfigurable loads.
struct DsaConfig {
  int total_ports = 0;
  int active_ports = 0;

  Eigen::MatrixXd selection() const; // K x N_a identity pattern Q
};

/// Noiseless end-to-end response y = -F (Z_L + Z)^{-1} Q v_a for a receive
/// coupling F (rows: receiver samples, cols: DSA ports).
Eigen::VectorXcd dsa_forward(const ImpedanceMatrix& z, const LoadVector& loads,
                             const DsaConfig& config, const Eigen::VectorXcd& v_active,
                             const Eigen::MatrixXcd& receive_coupling);

struct DsaOptions {
  int restarts = 8;             // plus the theta = 0 start
  int max_iterations = 300;     // per restart, per penalty stage
  double power_tolerance = 0.01; // relative constraint violation accepted
  std::uint64_t seed = 1;
};

struct DsaResult {
  LoadVector loads;
  Eigen::MatrixXcd achieved;     // -F (Z_L + Z)^{-1} Q at the optimum
  double residual = 0.0;         // Frobenius misfit against the target
  double radiated_power = 0.0;   // at unit port drives
  double offdiag_leakage_db = 0.0; // off- vs on-diagonal power, mode basis
  Eigen::VectorXd gain_loss_db;    // per column, against the matched bound
  int best_restart = -1;
  bool converged = false;
};

/// Matched-filter-bound target for channel diagonalization: column n is
/// sqrt(P_T / N_a) sigma_n u_n from the SVD of F Re{Z}^{-1/2}.
Eigen::MatrixXcd dsa_diagonalizing_target(const ImpedanceMatrix& z,
                                          const DsaConfig& config,
                                          const Eigen::MatrixXcd& receive_coupling,
                                          double power_target);

/// Reactance synthesis minimizing || -F (Z_L+theta)^{-1} Q - H_o ||_F under a
/// radiated-power penalty; analytic adjoint gradients, L-BFGS restarts.
DsaResult dsa_optimize(const ImpedanceMatrix& z, const DsaConfig& config,
                       const Eigen::MatrixXcd& receive_coupling,
                       const Eigen::MatrixXcd& target, double power_target,
                       const DsaOptions& options = {});

namespace detail {
/// Objective pieces exposed for the finite-difference cross-check.
double dsa_objective(const ImpedanceMatrix& z, const DsaConfig& config,
                     const Eigen::MatrixXcd& receive_coupling,
                     const Eigen::MatrixXcd& target, double power_target,
                     double penalty_weight, const Eigen::VectorXd& theta_passive,
                     Eigen::VectorXd* gradient);
} // namespace detail

} // namespace esp::circuit
