#include "esp/scm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace esp::scm {

namespace {
constexpr Complex kJ{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_pi(double v) {
  double w = std::fmod(v + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - std::numbers::pi;
}

Eigen::MatrixXcd orthonormal_columns(int rows, int cols, RandomStream& rng) {
  const Eigen::MatrixXcd gaussian = rng.complex_normal_matrix(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(rows, cols);
}

} // namespace

MimoChannel make_channel(int ap_antennas, int cells, int rank,
                         const Eigen::VectorXd& singular_values, std::uint64_t seed) {
  if (ap_antennas < 1 || cells < 1)
    throw std::invalid_argument("make_channel: antenna counts must be positive");
  if (rank < 1 || rank > std::min(ap_antennas, cells))
    throw std::invalid_argument("make_channel: rank must lie in [1, min(N, M)]");
  if (singular_values.size() != rank)
    throw std::invalid_argument("make_channel: need one singular value per rank");
  for (int i = 0; i < rank; ++i) {
    if (!(singular_values(i) > 0.0))
      throw std::invalid_argument("make_channel: singular values must be positive");
    if (i > 0 && singular_values(i) > singular_values(i - 1))
      throw std::invalid_argument("make_channel: singular values must be descending");
  }

  RandomStream rng("scm-channel", seed);
  const Eigen::MatrixXcd left = orthonormal_columns(cells, rank, rng);
  const Eigen::MatrixXcd right = orthonormal_columns(ap_antennas, rank, rng);

  MimoChannel channel;
  channel.h = left * singular_values.asDiagonal() * right.adjoint();
  channel.singular_values = singular_values;
  channel.top_right = right.col(0);
  channel.seed = seed;
  return channel;
}

Modulation Modulation::mpsk(int order) {
  if (order < 2) throw std::invalid_argument("Modulation: order must be >= 2");
  return {order};
}

double Modulation::symbol_phase(int index) const {
  return kTwoPi * index / order;
}

int Modulation::detect(double phase) const {
  int best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int m = 0; m < order; ++m) {
    const double distance = std::abs(wrap_pi(phase - symbol_phase(m)));
    if (distance < best_distance - 1e-15) {
      best_distance = distance;
      best = m;
    }
  }
  return best;
}

void ScmParams::validate() const {
  if (ap_antennas < 1 || cells < 1)
    throw std::invalid_argument("ScmParams: antenna counts must be positive");
  if (!(tx_power > 0.0)) throw std::invalid_argument("ScmParams: tx power must be positive");
  if (!(gain > 0.0) || gain > 1.0)
    throw std::invalid_argument("ScmParams: gain must lie in (0, 1]");
  if (sensor_noise < 0.0 || ap_noise < 0.0)
    throw std::invalid_argument("ScmParams: noise powers must be nonnegative");
}

StepResult scm_step(ScmState& state, const MimoChannel& channel,
                    const ScmParams& params, double data_phase, RandomStream& rng) {
  params.validate();
  if (state.beam.size() != channel.h.cols())
    throw std::invalid_argument("scm_step: beam size does not match the channel");
  if (std::abs(state.beam.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("scm_step: beam must have unit norm");

  const double sqrt_p = std::sqrt(params.tx_power);
  const Complex data = std::exp(kJ * data_phase);

  StepResult result;
  // Lines 3-4: downlink to the sensor and conjugate retransmission.
  const Eigen::VectorXcd hx = channel.h * state.beam;
  result.sensor_rx = sqrt_p * hx;
  if (params.sensor_noise > 0.0)
    result.sensor_rx += std::sqrt(params.sensor_noise) *
                        rng.complex_normal_vector(static_cast<int>(hx.size()));
  result.retransmitted = params.gain * data * result.sensor_rx.conjugate();

  // Line 5 is the effective end-to-end model: y = e^{j theta} A* x* + n* with
  // A = sqrt(P) g H^H H; the sensor-side noise does not reappear here.
  const Eigen::VectorXcd a_x = sqrt_p * params.gain * (channel.h.adjoint() * hx);
  Eigen::VectorXcd y = data * a_x.conjugate();
  if (params.ap_noise > 0.0)
    y += std::sqrt(params.ap_noise) *
         rng.complex_normal_vector(static_cast<int>(y.size())).conjugate();
  result.ap_rx = y;

  const double norm = y.norm();
  Eigen::VectorXcd beam_next = state.beam;
  if (norm > 0.0) beam_next = y.conjugate() / norm;

  result.decision = state.beam.dot(beam_next); // x[k-1]^H x[k]
  result.detected_phase = -std::arg(result.decision);
  result.detected_symbol = params.modulation.detect(result.detected_phase);

  state.beam = std::move(beam_next);
  ++state.iteration;
  return result;
}

double beam_snr(const MimoChannel& channel, const ScmParams& params,
                const Eigen::VectorXcd& beam) {
  if (!(params.ap_noise > 0.0)) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXcd combined = channel.h.adjoint() * (channel.h * beam);
  const double signal = params.tx_power * params.gain * params.gain *
                        combined.squaredNorm();
  return signal / params.ap_noise;
}

LinkTrajectory run_link(const MimoChannel& channel, const ScmParams& params,
                        std::span<const double> packet, std::uint64_t seed) {
  params.validate();
  if (packet.empty()) throw std::invalid_argument("run_link: packet must be non-empty");
  if (channel.h.rows() != params.cells || channel.h.cols() != params.ap_antennas)
    throw std::invalid_argument("run_link: channel does not match the parameters");

  RandomStream rng("scm-link", seed);
  ScmState state;
  state.beam = rng.unit_vector(params.ap_antennas);

  LinkTrajectory trajectory;
  trajectory.snr_db.reserve(packet.size());
  for (double phase : packet) {
    const StepResult step = scm_step(state, channel, params, phase, rng);
    const double snr = beam_snr(channel, params, state.beam);
    trajectory.snr_db.push_back(10.0 * std::log10(std::max(snr, 1e-300)));
    trajectory.alignment.push_back(std::abs(channel.top_right.dot(state.beam)));
    trajectory.decision.push_back(step.decision);
    trajectory.detected_phase.push_back(step.detected_phase);
    trajectory.detected_symbol.push_back(step.detected_symbol);
    const int sent = params.modulation.detect(phase);
    trajectory.sent_symbol.push_back(sent);
    if (step.detected_symbol != sent) ++trajectory.symbol_errors;
  }
  trajectory.final_beam = state.beam;
  return trajectory;
}

double bootstrap_snr_db(double snr_max_db, int ap_antennas) {
  if (ap_antennas < 1) throw std::invalid_argument("bootstrap_snr_db: N must be >= 1");
  return snr_max_db - 10.0 * std::log10(static_cast<double>(ap_antennas));
}

} // namespace esp::scm
