#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "esp/em.hpp"
#include "esp/rng.hpp"

namespace esp::scm {

/// Rank-controlled synthetic MIMO channel H = sum_i sigma_i u_i v_i^H.
struct MimoChannel {
  Eigen::MatrixXcd h;              // M x N (cells x AP antennas)
  Eigen::VectorXd singular_values; // the requested sigma_i, descending
  Eigen::VectorXcd top_right;      // v_1, the optimal beamforming direction
  std::uint64_t seed = 0;
};

MimoChannel make_channel(int ap_antennas, int cells, int rank,
                         const Eigen::VectorXd& singular_values, std::uint64_t seed);

/// Phase constellation for the data riding on the retransmitted wave.
struct Modulation {
  int order = 2;

  static Modulation bpsk() { return {2}; }
  static Modulation qpsk() { return {4}; }
  static Modulation mpsk(int order);
  double symbol_phase(int index) const;
  /// Nearest constellation point; ties resolve to the smaller index.
  int detect(double phase) const;
};

struct ScmParams {
  int ap_antennas = 0;
  int cells = 0;
  double tx_power = 1.0;
  double gain = 1.0;         // g <= 1 for a passive surface
  double sensor_noise = 0.0; // variance of eta[k] entries
  double ap_noise = 1e-3;    // variance of n[k] entries
  Modulation modulation = Modulation::bpsk();

  void validate() const;
};

struct ScmState {
  Eigen::VectorXcd beam; // x[k], unit norm
  int iteration = 0;
};

struct StepResult {
  Eigen::VectorXcd sensor_rx;     // z[k]
  Eigen::VectorXcd retransmitted; // r[k]
  Eigen::VectorXcd ap_rx;         // y[k]
  std::complex<double> decision;  // u[k]
  double detected_phase = 0.0;
  int detected_symbol = 0;
};

/// One iteration of the modified power method: retrodirected interrogation,
/// beam update x[k] = y*[k]/||y[k]||, correlation decision and detection.
StepResult scm_step(ScmState& state, const MimoChannel& channel,
                    const ScmParams& params, double data_phase, RandomStream& rng);

struct LinkTrajectory {
  std::vector<double> snr_db;        // matched-filter SNR along x[k]
  std::vector<double> alignment;     // |v_1^H x[k]|
  std::vector<std::complex<double>> decision;
  std::vector<double> detected_phase;
  std::vector<int> detected_symbol;
  std::vector<int> sent_symbol;
  int symbol_errors = 0;
  Eigen::VectorXcd final_beam;
};

/// Runs the full loop over a packet of data phases with a random unit-norm
/// starting beam drawn from the seed.
LinkTrajectory run_link(const MimoChannel& channel, const ScmParams& params,
                        std::span<const double> packet, std::uint64_t seed);

/// SNR along the current beam after matched combining at the AP; equals
/// P_tx g^2 sigma_1^4 / ap_noise at perfect alignment.
double beam_snr(const MimoChannel& channel, const ScmParams& params,
                const Eigen::VectorXcd& beam);

/// Bootstrap SNR threshold: snr_max_db - 10 log10(N).
double bootstrap_snr_db(double snr_max_db, int ap_antennas);

} // namespace esp::scm
