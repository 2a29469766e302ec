#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "esp/em.hpp"
#include "esp/rng.hpp"

namespace esp::sim {

/// Stacked metasurface: L phase-mask layers on isomorphic square lattices,
/// read out by a small antenna array behind the last layer.
struct SimStack {
  int layers = 1;
  int atoms_per_layer = 1; // perfect square, side sqrt(M)
  double atom_pitch = 0.0;
  double layer_spacing = 0.0;
  double atom_area = 0.0;
  double readout_distance = 0.0; // 0: one layer spacing behind the last layer
  Eigen::MatrixXcd readout;      // H_R, N_a x M

  int side() const;
  int antennas() const { return static_cast<int>(readout.rows()); }
  void validate() const;
  /// M > N_a is desirable (more wave-domain variables than readouts).
  bool undersized() const { return atoms_per_layer <= antennas(); }
};

/// Trainable phases theta_m^(l), wrapped to [0, 2*pi). Row l-1 holds layer l.
struct PhaseTensor {
  Eigen::MatrixXd theta; // L x M

  void wrap();
  static PhaseTensor zeros(int layers, int atoms);
  static PhaseTensor random(int layers, int atoms, RandomStream& rng);
};

/// Rayleigh-Sommerfeld coefficient between lattices one layer spacing apart:
/// w = (A d_layer / d^2) (1/(2 pi d) - j/lambda) e^{j k0 d}.
Eigen::MatrixXcd layer_propagation(const SimStack& stack, int layer,
                                   const Medium& medium);

/// Readout coupling H_R for a centered sqrt(N_a) x sqrt(N_a), lambda/2-pitch
/// antenna lattice one layer spacing behind the last layer (same RS kernel
/// with the atom-antenna distance).
Eigen::MatrixXcd readout_matrix(const SimStack& stack, int n_antennas,
                                const Medium& medium);

/// Precomputed forward model; all layers share one propagation matrix since
/// the lattices are isomorphic and equally spaced.
struct SimModel {
  SimStack stack;
  Eigen::MatrixXcd propagation; // W, M x M

  static SimModel make(const SimStack& stack, const Medium& medium);
};

/// Stack response Phi^(L) W ... Phi^(2) W Phi^(1) (no input-plane hop).
Eigen::MatrixXcd response(const SimModel& model, const PhaseTensor& phases);
Eigen::MatrixXcd sim_response(const SimStack& stack, const PhaseTensor& phases,
                              const Medium& medium);

/// Full trained chain H_R * response * W, mapping a wavefront sampled on the
/// input aperture lattice to the antenna outputs.
Eigen::MatrixXcd end_to_end(const SimModel& model, const PhaseTensor& phases);

/// Loss || H_R R(theta) W - H_o ||_F^2. An optional input dictionary X
/// (M x P) restricts the fit to the excitations that matter:
/// || H_R R(theta) W X - H_o ||_F^2 with H_o sized N_a x P.
double sim_loss(const SimModel& model, const PhaseTensor& phases,
                const Eigen::MatrixXcd& target,
                const Eigen::MatrixXcd* input = nullptr);

std::pair<double, Eigen::MatrixXd> sim_loss_gradient(
    const SimModel& model, const PhaseTensor& phases,
    const Eigen::MatrixXcd& target, const Eigen::MatrixXcd* input = nullptr);

struct TrainSchedule {
  double learning_rate = 0.1;
  double decay = 0.99;
  int max_iterations = 10000;
  double stop_decrement_rel = 1e-6; // of the initial loss
};

struct TrainResult {
  PhaseTensor phases;
  std::vector<double> loss_history; // initial loss plus every accepted step
  int iterations = 0;
  bool converged = false;
};

/// Backpropagation-style gradient descent: random init, analytic partials,
/// per-layer Linf normalization (largest component scaled to pi), step,
/// multiplicative learning-rate decay. Rejected steps halve the rate instead
/// of moving, so the recorded loss history never increases.
TrainResult sim_train(const SimModel& model, const Eigen::MatrixXcd& target,
                      const TrainSchedule& schedule, std::uint64_t seed,
                      const Eigen::MatrixXcd* input = nullptr);

/// Dictionary of the on-grid plane waves (columns), M x N_a.
Eigen::MatrixXcd grid_wave_dictionary(int n_antennas, int atoms);

/// Unitary 2D DFT (Kronecker of two 1D DFTs); N_a must be a perfect square.
Eigen::MatrixXcd dft_target(int n_antennas);

/// N_a x M angle-grid matched filter: row (kx, ky) samples the conjugate
/// plane wave at electrical angles 2 pi k / sqrt(N_a) on the atom lattice.
/// Coincides with the conjugate 2D DFT when M = N_a.
Eigen::MatrixXcd doa_steering_target(int n_antennas, int atoms);

/// Plane wave z_m = e^{-j (psi_x u_m + psi_y v_m)} on integer lattice coords.
Eigen::VectorXcd plane_wave(int atoms, double psi_x, double psi_y);

/// Electrical angle of DFT bin k out of s, wrapped to [-pi, pi).
double grid_angle(int bin, int side);

struct DoaEstimate {
  double psi_x = 0.0;
  double psi_y = 0.0;
  int bin_x = 0;
  int bin_y = 0;
  Eigen::VectorXd energy; // accumulated per antenna
};

/// Energy-detection DoA: accumulate |H_R R W z + n|^2 over T snapshots and
/// pick the grid angles of the argmax antenna.
DoaEstimate doa_estimate(const SimModel& model, const PhaseTensor& phases,
                         const Eigen::VectorXcd& wavefront, double noise_power,
                         int snapshots, RandomStream& rng);

} // namespace esp::sim
