#include "esp/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace esp::sim {

namespace {
constexpr Complex kJ{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int integer_sqrt(int n) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return root * root == n ? root : -1;
}

// Centered lattice coordinate of index i on a side-s grid with given pitch.
double lattice_coord(int i, int s, double pitch) {
  return (i - 0.5 * (s - 1)) * pitch;
}

Complex rs_coefficient(double distance, double layer_spacing, double area,
                       const Medium& medium) {
  const double k0 = medium.wavenumber();
  return (area * layer_spacing / (distance * distance)) *
         Complex(1.0 / (kTwoPi * distance), -1.0 / medium.wavelength) *
         std::exp(kJ * k0 * distance);
}

} // namespace

int SimStack::side() const {
  const int s = integer_sqrt(atoms_per_layer);
  if (s < 0)
    throw std::invalid_argument("SimStack: atoms per layer must be a perfect square");
  return s;
}

void SimStack::validate() const {
  if (layers < 1) throw std::invalid_argument("SimStack: need at least one layer");
  (void)side();
  if (!(atom_pitch > 0.0) || !(atom_area > 0.0))
    throw std::invalid_argument("SimStack: atom pitch and area must be positive");
  if (!(layer_spacing > 0.0))
    throw std::invalid_argument("SimStack: layer spacing must be positive");
}

void PhaseTensor::wrap() {
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double v = std::fmod(theta.data()[i], kTwoPi);
    if (v < 0.0) v += kTwoPi;
    theta.data()[i] = v;
  }
}

PhaseTensor PhaseTensor::zeros(int layers, int atoms) {
  return {Eigen::MatrixXd::Zero(layers, atoms)};
}

PhaseTensor PhaseTensor::random(int layers, int atoms, RandomStream& rng) {
  PhaseTensor phases;
  phases.theta.resize(layers, atoms);
  for (int l = 0; l < layers; ++l)
    for (int m = 0; m < atoms; ++m) phases.theta(l, m) = rng.uniform(0.0, kTwoPi);
  return phases;
}

Eigen::MatrixXcd layer_propagation(const SimStack& stack, int layer,
                                   const Medium& medium) {
  stack.validate();
  if (layer < 1 || layer > stack.layers)
    throw std::invalid_argument("layer_propagation: layer index out of range");

  const int s = stack.side();
  const int m = stack.atoms_per_layer;
  Eigen::MatrixXcd w(m, m);
  for (int dst = 0; dst < m; ++dst) {
    const double xd = lattice_coord(dst % s, s, stack.atom_pitch);
    const double yd = lattice_coord(dst / s, s, stack.atom_pitch);
    for (int src = 0; src < m; ++src) {
      const double xs = lattice_coord(src % s, s, stack.atom_pitch);
      const double ys = lattice_coord(src / s, s, stack.atom_pitch);
      const double dx = xd - xs;
      const double dy = yd - ys;
      const double d = std::sqrt(dx * dx + dy * dy +
                                 stack.layer_spacing * stack.layer_spacing);
      w(dst, src) = rs_coefficient(d, stack.layer_spacing, stack.atom_area, medium);
    }
  }
  return w;
}

Eigen::MatrixXcd readout_matrix(const SimStack& stack, int n_antennas,
                                const Medium& medium) {
  stack.validate();
  const int sa = integer_sqrt(n_antennas);
  if (sa < 0)
    throw std::invalid_argument("readout_matrix: antenna count must be a perfect square");

  const int s = stack.side();
  const double antenna_pitch = medium.wavelength / 2.0;
  const double standoff =
      stack.readout_distance > 0.0 ? stack.readout_distance : stack.layer_spacing;
  Eigen::MatrixXcd h(n_antennas, stack.atoms_per_layer);
  for (int a = 0; a < n_antennas; ++a) {
    const double xa = lattice_coord(a % sa, sa, antenna_pitch);
    const double ya = lattice_coord(a / sa, sa, antenna_pitch);
    for (int m = 0; m < stack.atoms_per_layer; ++m) {
      const double xm = lattice_coord(m % s, s, stack.atom_pitch);
      const double ym = lattice_coord(m / s, s, stack.atom_pitch);
      const double dx = xa - xm;
      const double dy = ya - ym;
      const double r = std::sqrt(dx * dx + dy * dy + standoff * standoff);
      h(a, m) = rs_coefficient(r, standoff, stack.atom_area, medium);
    }
  }
  return h;
}

SimModel SimModel::make(const SimStack& stack, const Medium& medium) {
  SimModel model;
  model.stack = stack;
  model.propagation = layer_propagation(stack, 1, medium);
  if (stack.readout.size() > 0 && stack.readout.cols() != stack.atoms_per_layer)
    throw std::invalid_argument("SimModel: readout column count must equal M");
  return model;
}

namespace {

void check_phases(const SimModel& model, const PhaseTensor& phases) {
  if (phases.theta.rows() != model.stack.layers ||
      phases.theta.cols() != model.stack.atoms_per_layer)
    throw std::invalid_argument("phase tensor does not match the stack dimensions");
}

Eigen::VectorXcd phase_row(const PhaseTensor& phases, int layer) {
  const Eigen::ArrayXcd angles =
      phases.theta.row(layer).transpose().array().cast<Complex>();
  return (kJ * angles).exp().matrix();
}

} // namespace

Eigen::MatrixXcd response(const SimModel& model, const PhaseTensor& phases) {
  check_phases(model, phases);
  Eigen::MatrixXcd r = phase_row(phases, 0).asDiagonal();
  for (int l = 1; l < model.stack.layers; ++l)
    r = phase_row(phases, l).asDiagonal() * (model.propagation * r);
  return r;
}

Eigen::MatrixXcd sim_response(const SimStack& stack, const PhaseTensor& phases,
                              const Medium& medium) {
  return response(SimModel::make(stack, medium), phases);
}

Eigen::MatrixXcd end_to_end(const SimModel& model, const PhaseTensor& phases) {
  if (model.stack.readout.size() == 0)
    throw std::invalid_argument("end_to_end: stack has no readout matrix");
  return model.stack.readout * response(model, phases) * model.propagation;
}

double sim_loss(const SimModel& model, const PhaseTensor& phases,
                const Eigen::MatrixXcd& target, const Eigen::MatrixXcd* input) {
  const Eigen::MatrixXcd chain = end_to_end(model, phases);
  if (!input) return (chain - target).squaredNorm();
  return (chain * (*input) - target).squaredNorm();
}

std::pair<double, Eigen::MatrixXd> sim_loss_gradient(
    const SimModel& model, const PhaseTensor& phases,
    const Eigen::MatrixXcd& target, const Eigen::MatrixXcd* input) {
  check_phases(model, phases);
  const int layers = model.stack.layers;
  const int atoms = model.stack.atoms_per_layer;
  const Eigen::MatrixXcd& w = model.propagation;
  // The fixed rightmost factor: W alone, or W restricted to the dictionary.
  const Eigen::MatrixXcd base = input ? Eigen::MatrixXcd(w * (*input)) : w;

  // Forward prefixes F_l = Phi_l W ... Phi_1 (W X).
  std::vector<Eigen::MatrixXcd> prefix(layers);
  std::vector<Eigen::VectorXcd> phi(layers);
  for (int l = 0; l < layers; ++l) {
    phi[l] = phase_row(phases, l);
    const Eigen::MatrixXcd below = (l == 0) ? base : Eigen::MatrixXcd(w * prefix[l - 1]);
    prefix[l] = phi[l].asDiagonal() * below;
  }

  const Eigen::MatrixXcd err = model.stack.readout * prefix[layers - 1] - target;
  const double loss = err.squaredNorm();

  // Backward suffixes G_l = H_R Phi_L W ... Phi_{l+1} W, so that the chain is
  // G_l diag(phi_l) B_l with B_l = W F_{l-1}.
  Eigen::MatrixXcd suffix = model.stack.readout;
  Eigen::MatrixXd gradient(layers, atoms);
  for (int l = layers - 1; l >= 0; --l) {
    const Eigen::MatrixXcd below = (l == 0) ? base : Eigen::MatrixXcd(w * prefix[l - 1]);
    // d loss / d theta_m = -2 Im{ phi_m (B_l E^H G_l)_mm }
    const Eigen::MatrixXcd mixed = err.adjoint() * suffix; // M x M
    for (int m = 0; m < atoms; ++m) {
      const Complex diag_entry = (below.row(m) * mixed.col(m)).value();
      gradient(l, m) = -2.0 * (phi[l](m) * diag_entry).imag();
    }
    suffix = suffix * phi[l].asDiagonal() * w;
  }
  return {loss, gradient};
}

TrainResult sim_train(const SimModel& model, const Eigen::MatrixXcd& target,
                      const TrainSchedule& schedule, std::uint64_t seed,
                      const Eigen::MatrixXcd* input) {
  if (!(schedule.learning_rate > 0.0) || !(schedule.decay > 0.0) ||
      schedule.decay >= 1.0 || schedule.max_iterations < 1 ||
      !(schedule.stop_decrement_rel > 0.0))
    throw std::invalid_argument("sim_train: invalid schedule");

  RandomStream rng("sim-train", seed);
  TrainResult result;
  result.phases = PhaseTensor::random(model.stack.layers,
                                      model.stack.atoms_per_layer, rng);

  auto [loss, gradient] = sim_loss_gradient(model, result.phases, target, input);
  const double initial_loss = loss;
  result.loss_history.push_back(loss);

  // The decrement stop is checked over a window of iterations: a single
  // accepted step can land symmetrically around a minimum with near-zero
  // decrement while the schedule still has plenty of progress left.
  constexpr int kWindow = 64;
  double checkpoint_loss = loss;

  double rate = schedule.learning_rate;
  for (int iter = 0; iter < schedule.max_iterations; ++iter, rate *= schedule.decay) {
    // Per-layer Linf normalization: the largest component steps by rate*pi.
    Eigen::MatrixXd step = gradient;
    for (int l = 0; l < step.rows(); ++l) {
      const double peak = step.row(l).cwiseAbs().maxCoeff();
      if (peak > 0.0) step.row(l) *= kPi / peak;
    }

    PhaseTensor candidate{result.phases.theta - rate * step};
    candidate.wrap();
    auto [candidate_loss, candidate_gradient] =
        sim_loss_gradient(model, candidate, target, input);

    ++result.iterations;
    if (candidate_loss > 10.0 * initial_loss)
      throw std::runtime_error("sim_train: diverged (loss exceeded 10x initial)");
    if (candidate_loss < loss) {
      result.phases = std::move(candidate);
      loss = candidate_loss;
      gradient = std::move(candidate_gradient);
      result.loss_history.push_back(loss);
    } else {
      // Rejected: the normalized step overshot, so halve the rate on top of
      // the schedule to keep the rejection plateau short.
      rate *= 0.5;
    }

    if ((iter + 1) % kWindow == 0) {
      if (checkpoint_loss - loss < schedule.stop_decrement_rel * initial_loss) {
        result.converged = true;
        break;
      }
      checkpoint_loss = loss;
    }
  }
  return result;
}

Eigen::MatrixXcd dft_target(int n_antennas) {
  const int s = integer_sqrt(n_antennas);
  if (s < 0)
    throw std::invalid_argument("dft_target: N_a must be a perfect square");

  Eigen::MatrixXcd one_d(s, s);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s));
  for (int m = 0; m < s; ++m)
    for (int n = 0; n < s; ++n)
      one_d(m, n) = scale * std::exp(Complex(0.0, -kTwoPi * m * n / s));

  Eigen::MatrixXcd target(n_antennas, n_antennas);
  for (int a = 0; a < n_antennas; ++a)
    for (int b = 0; b < n_antennas; ++b)
      target(a, b) = one_d(a % s, b % s) * one_d(a / s, b / s);
  return target;
}

double grid_angle(int bin, int side) {
  double psi = kTwoPi * bin / side;
  if (psi >= kPi) psi -= kTwoPi;
  return psi;
}

Eigen::MatrixXcd doa_steering_target(int n_antennas, int atoms) {
  const int sa = integer_sqrt(n_antennas);
  const int sm = integer_sqrt(atoms);
  if (sa < 0 || sm < 0)
    throw std::invalid_argument("doa_steering_target: sizes must be perfect squares");

  Eigen::MatrixXcd target(n_antennas, atoms);
  const double scale = 1.0 / std::sqrt(static_cast<double>(atoms));
  for (int a = 0; a < n_antennas; ++a) {
    const double psi_x = grid_angle(a % sa, sa);
    const double psi_y = grid_angle(a / sa, sa);
    for (int m = 0; m < atoms; ++m) {
      const double u = m % sm;
      const double v = m / sm;
      target(a, m) = scale * std::exp(Complex(0.0, psi_x * u + psi_y * v));
    }
  }
  return target;
}

Eigen::MatrixXcd grid_wave_dictionary(int n_antennas, int atoms) {
  const int sa = integer_sqrt(n_antennas);
  if (sa < 0)
    throw std::invalid_argument("grid_wave_dictionary: N_a must be a perfect square");
  Eigen::MatrixXcd dictionary(atoms, n_antennas);
  for (int bin = 0; bin < n_antennas; ++bin)
    dictionary.col(bin) =
        plane_wave(atoms, grid_angle(bin % sa, sa), grid_angle(bin / sa, sa));
  return dictionary;
}

Eigen::VectorXcd plane_wave(int atoms, double psi_x, double psi_y) {
  const int sm = integer_sqrt(atoms);
  if (sm < 0)
    throw std::invalid_argument("plane_wave: atom count must be a perfect square");
  Eigen::VectorXcd z(atoms);
  for (int m = 0; m < atoms; ++m)
    z(m) = std::exp(Complex(0.0, -(psi_x * (m % sm) + psi_y * (m / sm))));
  return z;
}

DoaEstimate doa_estimate(const SimModel& model, const PhaseTensor& phases,
                         const Eigen::VectorXcd& wavefront, double noise_power,
                         int snapshots, RandomStream& rng) {
  if (snapshots < 1)
    throw std::invalid_argument("doa_estimate: need at least one snapshot");
  const Eigen::MatrixXcd chain = end_to_end(model, phases);
  if (wavefront.size() != chain.cols())
    throw std::invalid_argument("doa_estimate: wavefront size mismatch");

  const Eigen::VectorXcd signal = chain * wavefront;
  const int n_a = static_cast<int>(signal.size());
  const double sigma = std::sqrt(std::max(noise_power, 0.0));

  DoaEstimate estimate;
  estimate.energy = Eigen::VectorXd::Zero(n_a);
  for (int t = 0; t < snapshots; ++t)
    for (int a = 0; a < n_a; ++a)
      estimate.energy(a) += std::norm(signal(a) + sigma * rng.complex_normal());

  Eigen::Index peak = 0;
  estimate.energy.maxCoeff(&peak);
  const int sa = integer_sqrt(n_a);
  estimate.bin_x = static_cast<int>(peak) % sa;
  estimate.bin_y = static_cast<int>(peak) / sa;
  estimate.psi_x = grid_angle(estimate.bin_x, sa);
  estimate.psi_y = grid_angle(estimate.bin_y, sa);
  return estimate;
}

} // namespace esp::sim
