#include "esp/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "esp/circuit.hpp"
#include "esp/dof.hpp"
#include "esp/em.hpp"
#include "esp/modes.hpp"
#include "esp/ris.hpp"
#include "esp/rng.hpp"
#include "esp/scm.hpp"
#include "esp/sim.hpp"
#include "esp/version.hpp"

namespace esp::scenario {

namespace {

using nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Config access with strict unknown-key rejection.

class ConfigReader {
 public:
  ConfigReader(const ordered_json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object())
      throw ValidationError("expected an object at " + path_, path_);
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const ordered_json& require(const std::string& key) {
    if (!node_.contains(key))
      throw ValidationError("missing required key " + join(key), join(key));
    visited_.insert(key);
    return node_.at(key);
  }

  const ordered_json* optional(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    visited_.insert(key);
    return &node_.at(key);
  }

  double number(const std::string& key) { return to_number(require(key), join(key)); }

  double number_or(const std::string& key, double fallback) {
    const ordered_json* v = optional(key);
    return v ? to_number(*v, join(key)) : fallback;
  }

  long long integer(const std::string& key) { return to_integer(require(key), join(key)); }

  long long integer_or(const std::string& key, long long fallback) {
    const ordered_json* v = optional(key);
    return v ? to_integer(*v, join(key)) : fallback;
  }

  std::string text(const std::string& key) { return to_text(require(key), join(key)); }

  std::string text_or(const std::string& key, const std::string& fallback) {
    const ordered_json* v = optional(key);
    return v ? to_text(*v, join(key)) : fallback;
  }

  std::vector<double> number_list(const std::string& key) {
    return to_number_list(require(key), join(key));
  }

  std::vector<double> number_list_or(const std::string& key,
                                     std::vector<double> fallback) {
    const ordered_json* v = optional(key);
    return v ? to_number_list(*v, join(key)) : std::move(fallback);
  }

  ConfigReader object(const std::string& key) {
    return ConfigReader(require(key), join(key));
  }

  /// A sweep is either an explicit array or {"from", "to", "step"}.
  std::vector<double> sweep(const std::string& key) {
    const ordered_json& v = require(key);
    if (v.is_array()) return to_number_list(v, join(key));
    ConfigReader range(v, join(key));
    const double from = range.number("from");
    const double to = range.number("to");
    const double step = range.number("step");
    range.finish();
    if (!(step > 0.0) || to < from)
      throw ValidationError("invalid sweep range at " + join(key), join(key));
    std::vector<double> values;
    for (double x = from; x <= to + 1e-12 * step; x += step) values.push_back(x);
    return values;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!visited_.count(it.key()))
        throw ValidationError("unknown key " + join(it.key()), join(it.key()));
  }

  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  static double to_number(const ordered_json& v, const std::string& path) {
    if (!v.is_number())
      throw ValidationError("expected a number at " + path, path);
    return v.get<double>();
  }
  static long long to_integer(const ordered_json& v, const std::string& path) {
    if (!v.is_number_integer())
      throw ValidationError("expected an integer at " + path, path);
    return v.get<long long>();
  }
  static std::string to_text(const ordered_json& v, const std::string& path) {
    if (!v.is_string())
      throw ValidationError("expected a string at " + path, path);
    return v.get<std::string>();
  }
  static std::vector<double> to_number_list(const ordered_json& v,
                                            const std::string& path) {
    if (!v.is_array() || v.empty())
      throw ValidationError("expected a non-empty array at " + path, path);
    std::vector<double> out;
    for (const auto& e : v) out.push_back(to_number(e, path));
    return out;
  }

  const ordered_json& node_;
  std::string path_;
  std::set<std::string> visited_;
};

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0))
    throw ValidationError("value at " + field + " must be positive", field);
}

// ---------------------------------------------------------------------------
// Deterministic worker pool: unit i writes slot i regardless of scheduling.

void parallel_units(int count, int workers,
                    const std::function<void(int)>& unit) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) unit(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          unit(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Shared scenario context.

struct Context {
  std::string kind;
  Medium medium;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
};

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------
// dof-table

void run_dof_table(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  const std::string aperture = cfg.text("aperture");
  const std::vector<double> sweep = cfg.sweep("l_over_lambda");

  Series table;
  table.name = "dof_table";
  table.columns = {"l_over_lambda", "formula_dof", "lattice_dof"};
  for (double lol : sweep) {
    require_positive(lol, "l_over_lambda");
    const double l = lol * ctx.medium.wavelength;
    dof::ApertureGeometry geom = [&] {
      if (aperture == "segment") return dof::ApertureGeometry::segment(l);
      if (aperture == "square") return dof::ApertureGeometry::rectangle(l, l);
      if (aperture == "cube") return dof::ApertureGeometry::box(l, l, l);
      throw ValidationError("aperture must be segment, square or cube", "aperture");
    }();
    if (geom.below_asymptotic_regime(ctx.medium))
      std::fprintf(stderr, "warning: L = %.3g lambda is below the 4-lambda "
                           "asymptotic regime of the closed forms\n", lol);
    const auto formula = dof::dof_unbounded(geom, ctx.medium, dof::DofMethod::formula);
    const auto lattice = dof::dof_unbounded(geom, ctx.medium, dof::DofMethod::lattice);
    table.rows.push_back({lol, formula.value, static_cast<double>(*lattice.lattice_count)});
  }

  RunRecord record;
  record.seed = ctx.seeds.front();
  record.metrics.emplace_back("points", static_cast<double>(table.rows.size()));
  record.series.push_back(std::move(table));
  out.records.push_back(std::move(record));
}

// ---------------------------------------------------------------------------
// modes: link-DoF saturation sweep plus the closed-form link formulas.

void run_modes(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  const double lt = cfg.number("lt_over_lambda") * ctx.medium.wavelength;
  const double d = cfg.number("distance_over_lambda") * ctx.medium.wavelength;
  const double pitch = cfg.number_or("pitch_over_lambda", 0.25) * ctx.medium.wavelength;
  const double el = cfg.number_or("element_length_over_lambda", 0.01) * ctx.medium.wavelength;
  const double threshold_db = cfg.number_or("threshold_db", 10.0);
  const std::vector<double> lr_sweep = cfg.sweep("lr_over_lambda");
  require_positive(lt, "lt_over_lambda");
  require_positive(d, "distance_over_lambda");
  require_positive(pitch, "pitch_over_lambda");

  Series table;
  table.name = "link_dof";
  table.columns = {"lr_over_lambda", "mode_count", "classic_formula", "corrected_formula"};

  const auto tx = modes::SampledSpace::segment(lt, pitch, {0, 0, 0}, Vec3::UnitX(),
                                               Vec3::UnitZ(), el);
  if (tx.undersampled(ctx.medium))
    std::fprintf(stderr, "warning: pitch %.3g exceeds lambda/2; the sampled "
                         "current is under-resolved\n", pitch);
  for (double lrol : lr_sweep) {
    require_positive(lrol, "lr_over_lambda");
    const double lr = lrol * ctx.medium.wavelength;
    const auto rx = modes::SampledSpace::segment(lr, pitch, {0, d, 0}, Vec3::UnitX(),
                                                 Vec3::UnitZ(), el);
    const auto coupling = modes::coupling_matrix(tx, rx, ctx.medium);
    const auto decomposition = modes::mode_decomposition(coupling);
    const int count =
        modes::count_dof(decomposition, modes::DofCriterion::threshold_db(threshold_db));
    const auto geom = dof::LinkGeometry::segments(lt, lr, d);
    table.rows.push_back(
        {lrol, static_cast<double>(count),
         dof::dof_link(geom, ctx.medium, dof::LinkDofModel::classic).value,
         dof::dof_link(geom, ctx.medium, dof::LinkDofModel::corrected).value});
  }

  RunRecord record;
  record.seed = ctx.seeds.front();
  record.metrics.emplace_back("unbounded_limit", 2.0 * lt / ctx.medium.wavelength);
  record.metrics.emplace_back("final_mode_count", table.rows.back()[1]);
  record.series.push_back(std::move(table));
  out.records.push_back(std::move(record));
}

// ---------------------------------------------------------------------------
// dsa-precoder

void run_dsa(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  const int rings = static_cast<int>(cfg.integer_or("rings", 3));
  const double spacing =
      cfg.number_or("ring_spacing_over_lambda", 0.25) * ctx.medium.wavelength;
  const double el =
      cfg.number_or("element_length_over_lambda", 0.02) * ctx.medium.wavelength;
  const int active = static_cast<int>(cfg.integer_or("active_ports", 2));
  const int rank = static_cast<int>(cfg.integer_or("rank", 2));
  const double power_target = cfg.number_or("power_target", 1.0);
  circuit::DsaOptions options;
  options.restarts = static_cast<int>(cfg.integer_or("restarts", 8));
  options.max_iterations = static_cast<int>(cfg.integer_or("max_iterations", 300));

  ConfigReader rx = cfg.object("receiver");
  const int rx_elements = static_cast<int>(rx.integer("elements"));
  const double rx_spacing =
      rx.number_or("spacing_over_lambda", 0.5) * ctx.medium.wavelength;
  const double rx_distance = rx.number("distance_over_lambda") * ctx.medium.wavelength;
  rx.finish();
  require_positive(power_target, "power_target");
  require_positive(rx_distance, "receiver.distance_over_lambda");

  std::vector<double> spread;
  if (cfg.has("singular_values_rel")) {
    spread = cfg.number_list("singular_values_rel");
  } else {
    for (int k = 0; k < rank; ++k) spread.push_back(std::pow(0.5, k));
  }
  if (static_cast<int>(spread.size()) != rank)
    throw ValidationError("singular_values_rel must list one value per rank",
                          "singular_values_rel");

  const auto array = circuit::DipoleArray::concentric_rings(rings, spacing, el);
  if (array.electrically_long(ctx.medium))
    std::fprintf(stderr, "warning: element length %.3g exceeds lambda/10; the "
                         "point-dipole model degrades\n", el);
  const auto z = circuit::impedance_matrix(array, ctx.medium);
  const circuit::DsaConfig config{array.ports(), active};

  // Synthetic rank-r channel: physical mode shapes toward the receiver ULA
  // carrying a prescribed singular-value spread.
  modes::SampledSpace dsa_space{{}, spacing};
  for (const auto& e : array.elements)
    dsa_space.elements.push_back({e.position, e.orientation, el, {1.0, 0.0}});
  const auto rx_space = modes::SampledSpace::segment(
      rx_spacing * (rx_elements - 1), rx_spacing, {0, rx_distance, 0}, Vec3::UnitX(),
      Vec3::UnitZ(), el);
  const Eigen::MatrixXcd full_coupling =
      modes::coupling_matrix(dsa_space, rx_space, ctx.medium);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(full_coupling,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (rank < 1 || rank > svd.singularValues().size())
    throw ValidationError("rank exceeds the physical coupling rank", "rank");
  Eigen::MatrixXcd coupling = Eigen::MatrixXcd::Zero(full_coupling.rows(),
                                                     full_coupling.cols());
  for (int k = 0; k < rank; ++k)
    coupling += svd.singularValues()(0) * spread[k] * svd.matrixU().col(k) *
                svd.matrixV().col(k).adjoint();

  const Eigen::MatrixXcd target =
      circuit::dsa_diagonalizing_target(z, config, coupling, power_target);

  out.records.resize(ctx.seeds.size());
  std::atomic<bool> all_converged{true};
  parallel_units(static_cast<int>(ctx.seeds.size()), ctx.workers, [&](int i) {
    circuit::DsaOptions seeded = options;
    seeded.seed = ctx.seeds[i];
    const auto result =
        circuit::dsa_optimize(z, config, coupling, target, power_target, seeded);
    if (!result.converged) all_converged = false;

    RunRecord record;
    record.seed = ctx.seeds[i];
    record.metrics.emplace_back("residual", result.residual);
    record.metrics.emplace_back("radiated_power", result.radiated_power);
    record.metrics.emplace_back("offdiag_leakage_db", result.offdiag_leakage_db);
    for (int n = 0; n < result.gain_loss_db.size(); ++n)
      record.metrics.emplace_back("gain_loss_db_" + std::to_string(n + 1),
                                  result.gain_loss_db(n));
    record.metrics.emplace_back("best_restart", result.best_restart);
    record.metrics.emplace_back("converged", result.converged ? 1.0 : 0.0);
    out.records[i] = std::move(record);
  });
  if (!all_converged) out.converged = false;
}

// ---------------------------------------------------------------------------
// sim shared setup

sim::SimModel sim_model_from(ConfigReader& cfg, const Context& ctx, int* antennas_out) {
  sim::SimStack stack;
  stack.layers = static_cast<int>(cfg.integer_or("layers", 3));
  stack.atoms_per_layer = static_cast<int>(cfg.integer("atoms"));
  const int antennas = static_cast<int>(cfg.integer("antennas"));
  stack.atom_pitch = cfg.number_or("atom_pitch_over_lambda", 0.5) * ctx.medium.wavelength;
  stack.layer_spacing =
      cfg.number_or("layer_spacing_over_lambda", 1.0) * ctx.medium.wavelength;
  stack.atom_area = stack.atom_pitch * stack.atom_pitch;
  stack.readout = sim::readout_matrix(stack, antennas, ctx.medium);
  if (antennas_out) *antennas_out = antennas;
  return sim::SimModel::make(stack, ctx.medium);
}

sim::TrainSchedule schedule_from(ConfigReader& cfg) {
  sim::TrainSchedule schedule;
  if (cfg.has("schedule")) {
    ConfigReader s = cfg.object("schedule");
    schedule.learning_rate = s.number_or("learning_rate", schedule.learning_rate);
    schedule.decay = s.number_or("decay", schedule.decay);
    schedule.max_iterations =
        static_cast<int>(s.integer_or("max_iterations", schedule.max_iterations));
    schedule.stop_decrement_rel =
        s.number_or("stop_decrement_rel", schedule.stop_decrement_rel);
    s.finish();
  }
  return schedule;
}

/// DFT-grid target scaled to the reachable chain magnitude at the seed phases.
Eigen::MatrixXcd scaled_doa_target(const sim::SimModel& model, int antennas,
                                   std::uint64_t seed) {
  Eigen::MatrixXcd target =
      sim::doa_steering_target(antennas, model.stack.atoms_per_layer);
  RandomStream rng("sim-train", seed);
  const sim::PhaseTensor probe =
      sim::PhaseTensor::random(model.stack.layers, model.stack.atoms_per_layer, rng);
  const double reachable = sim::end_to_end(model, probe).norm();
  return target * (reachable / target.norm());
}

void run_sim_train(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  int antennas = 0;
  const sim::SimModel model = sim_model_from(cfg, ctx, &antennas);
  const sim::TrainSchedule schedule = schedule_from(cfg);

  out.records.resize(ctx.seeds.size());
  parallel_units(static_cast<int>(ctx.seeds.size()), ctx.workers, [&](int i) {
    const Eigen::MatrixXcd target = scaled_doa_target(model, antennas, ctx.seeds[i]);
    const auto result = sim::sim_train(model, target, schedule, ctx.seeds[i]);

    RunRecord record;
    record.seed = ctx.seeds[i];
    record.metrics.emplace_back("final_loss", result.loss_history.back());
    record.metrics.emplace_back("normalized_loss",
                                result.loss_history.back() / target.squaredNorm());
    record.metrics.emplace_back("iterations", result.iterations);
    record.metrics.emplace_back("converged", result.converged ? 1.0 : 0.0);
    Series loss;
    loss.name = "training_loss";
    loss.columns = {"step", "loss"};
    for (std::size_t s = 0; s < result.loss_history.size(); ++s)
      loss.rows.push_back({static_cast<double>(s), result.loss_history[s]});
    record.series.push_back(std::move(loss));
    out.records[i] = std::move(record);
  });
}

// ---------------------------------------------------------------------------
// sim-doa

void run_sim_doa(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  int antennas = 0;
  const sim::SimModel model = sim_model_from(cfg, ctx, &antennas);
  const sim::TrainSchedule schedule = schedule_from(cfg);
  const std::uint64_t train_seed = cfg.integer_or("train_seed", 1);
  const std::vector<double> snr_points = cfg.number_list("snr_db");
  const int trials = static_cast<int>(cfg.integer_or("trials", 500));
  const int snapshots = static_cast<int>(cfg.integer_or("snapshots", 64));
  if (trials < 1 || snapshots < 1)
    throw ValidationError("trials and snapshots must be positive", "trials");

  // Train the grid response on the on-grid wave dictionary; the target is
  // what an ideal 2D-DFT processor would output for those waves, scaled to
  // the chain magnitude at the (seeded) initial phases.
  const Eigen::MatrixXcd dictionary =
      sim::grid_wave_dictionary(antennas, model.stack.atoms_per_layer);
  const Eigen::MatrixXcd ideal =
      sim::doa_steering_target(antennas, model.stack.atoms_per_layer) * dictionary;
  RandomStream probe("sim-train", train_seed);
  const sim::PhaseTensor init = sim::PhaseTensor::random(
      model.stack.layers, model.stack.atoms_per_layer, probe);
  const double scale =
      (sim::end_to_end(model, init) * dictionary).norm() / ideal.norm();
  const Eigen::MatrixXcd target = ideal * scale;
  const auto trained = sim::sim_train(model, target, schedule, train_seed, &dictionary);

  const int side = static_cast<int>(std::lround(std::sqrt(antennas)));
  const std::uint64_t campaign_seed = ctx.seeds.front();

  // Noiseless on-grid recovery over every grid angle.
  int recovered = 0;
  {
    RandomStream quiet("sim-doa-noiseless", campaign_seed);
    for (int bin = 0; bin < antennas; ++bin) {
      const double px = sim::grid_angle(bin % side, side);
      const double py = sim::grid_angle(bin / side, side);
      const auto est = sim::doa_estimate(
          model, trained.phases, sim::plane_wave(model.stack.atoms_per_layer, px, py),
          0.0, 1, quiet);
      if (est.bin_x == bin % side && est.bin_y == bin / side) ++recovered;
    }
  }

  // Common random numbers across SNR points: trial t reuses its angle and
  // noise stream so the error curve is comparable point to point.
  const Eigen::MatrixXcd chain = sim::end_to_end(model, trained.phases);
  std::vector<std::vector<double>> sq_err_x(snr_points.size()),
      sq_err_y(snr_points.size());
  for (auto& v : sq_err_x) v.resize(trials);
  for (auto& v : sq_err_y) v.resize(trials);

  parallel_units(trials, ctx.workers, [&](int t) {
    RandomStream pick("sim-doa-angle", campaign_seed, t);
    const int bx = static_cast<int>(pick.next_u32() % side);
    const int by = static_cast<int>(pick.next_u32() % side);
    const double px = sim::grid_angle(bx, side);
    const double py = sim::grid_angle(by, side);
    const Eigen::VectorXcd wavefront =
        sim::plane_wave(model.stack.atoms_per_layer, px, py);
    const Eigen::VectorXcd signal = chain * wavefront;
    const double signal_power = signal.squaredNorm() / signal.size();

    for (std::size_t p = 0; p < snr_points.size(); ++p) {
      const double noise = signal_power / std::pow(10.0, snr_points[p] / 10.0);
      RandomStream rng("sim-doa-noise", campaign_seed, t);
      const auto est = sim::doa_estimate(model, trained.phases, wavefront, noise,
                                         snapshots, rng);
      const auto wrap = [](double v) {
        double w = std::fmod(v + kPi, 2.0 * kPi);
        if (w < 0.0) w += 2.0 * kPi;
        return w - kPi;
      };
      sq_err_x[p][t] = std::pow(wrap(est.psi_x - px), 2);
      sq_err_y[p][t] = std::pow(wrap(est.psi_y - py), 2);
    }
  });

  RunRecord record;
  record.seed = campaign_seed;
  record.metrics.emplace_back("noiseless_recovery_rate",
                              static_cast<double>(recovered) / antennas);
  record.metrics.emplace_back("final_training_loss", trained.loss_history.back());

  Series curve;
  curve.name = "mse_vs_snr";
  curve.columns = {"snr_db", "mse_psi_x", "mse_psi_y"};
  for (std::size_t p = 0; p < snr_points.size(); ++p) {
    const double mx =
        std::accumulate(sq_err_x[p].begin(), sq_err_x[p].end(), 0.0) / trials;
    const double my =
        std::accumulate(sq_err_y[p].begin(), sq_err_y[p].end(), 0.0) / trials;
    curve.rows.push_back({snr_points[p], mx, my});
  }
  record.series.push_back(std::move(curve));
  out.records.push_back(std::move(record));
}

// ---------------------------------------------------------------------------
// ris-pattern

void run_ris(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  const int side = static_cast<int>(cfg.integer_or("side", 16));
  const double grid_step = cfg.number_or("grid_step_deg", 1.0);
  require_positive(grid_step, "grid_step_deg");

  const auto read_angle = [&](const std::string& key) {
    ConfigReader a = cfg.object(key);
    ris::Angle angle{a.number("elevation_deg") * kPi / 180.0,
                     a.number("azimuth_deg") * kPi / 180.0};
    a.finish();
    return angle;
  };
  const ris::Angle incident = read_angle("incident");
  const ris::Angle desired = read_angle("desired");

  ris::RisPanel panel = ris::RisPanel::half_wavelength(side, ctx.medium);
  ris::configure_anomalous(panel, incident, desired, ctx.medium);

  std::vector<ris::Angle> grid;
  for (double el = 0.0; el <= 90.0 + 1e-9; el += grid_step)
    for (double az = 0.0; az < 360.0; az += grid_step)
      grid.push_back({el * kPi / 180.0, az * kPi / 180.0});
  const auto pattern = ris::reflected_pattern(panel, incident, grid, ctx.medium);

  std::size_t peak = 0;
  for (std::size_t i = 1; i < pattern.size(); ++i)
    if (pattern[i] > pattern[peak]) peak = i;
  const double error_rad =
      std::acos(std::clamp(grid[peak].unit().dot(desired.unit()), -1.0, 1.0));

  RunRecord record;
  record.seed = ctx.seeds.front();
  record.metrics.emplace_back("peak_elevation_deg", grid[peak].elevation * 180.0 / kPi);
  record.metrics.emplace_back("peak_azimuth_deg", grid[peak].azimuth * 180.0 / kPi);
  record.metrics.emplace_back("peak_magnitude", pattern[peak]);
  record.metrics.emplace_back("pointing_error_deg", error_rad * 180.0 / kPi);

  Series table;
  table.name = "pattern";
  table.columns = {"elevation_deg", "azimuth_deg", "magnitude"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.rows.push_back({grid[i].elevation * 180.0 / kPi,
                          grid[i].azimuth * 180.0 / kPi, pattern[i]});
  record.series.push_back(std::move(table));
  out.records.push_back(std::move(record));
}

// ---------------------------------------------------------------------------
// scm-link

void run_scm(ConfigReader& cfg, const Context& ctx, ResultSet& out) {
  const int ap = static_cast<int>(cfg.integer("ap_antennas"));
  const int cells = static_cast<int>(cfg.integer("cells"));
  const int rank = static_cast<int>(cfg.integer_or("rank", 1));
  const std::vector<double> sv = cfg.number_list_or("singular_values", {1.0});
  const std::vector<double> snr_max_list = cfg.number_list("snr_max_db");
  const int iterations = static_cast<int>(cfg.integer_or("iterations", 12));
  const std::string packet_kind = cfg.text_or("packet", "random");
  const std::string modulation_name = cfg.text_or("modulation", "bpsk");
  const double gain = cfg.number_or("gain", 1.0);
  const double tx_power = cfg.number_or("tx_power", 1.0);
  if (iterations < 1)
    throw ValidationError("iterations must be >= 1", "iterations");
  if (packet_kind != "random" && packet_kind != "zeros")
    throw ValidationError("packet must be random or zeros", "packet");

  scm::Modulation modulation = scm::Modulation::bpsk();
  if (modulation_name == "qpsk") modulation = scm::Modulation::qpsk();
  else if (modulation_name != "bpsk")
    throw ValidationError("modulation must be bpsk or qpsk", "modulation");

  Eigen::VectorXd sigma(sv.size());
  for (std::size_t i = 0; i < sv.size(); ++i) sigma(i) = sv[i];

  const int units = static_cast<int>(snr_max_list.size() * ctx.seeds.size());
  out.records.resize(units);
  parallel_units(units, ctx.workers, [&](int u) {
    const std::size_t snr_idx = u / ctx.seeds.size();
    const std::size_t seed_idx = u % ctx.seeds.size();
    const double snr_max_db = snr_max_list[snr_idx];
    const std::uint64_t seed = ctx.seeds[seed_idx];

    const auto channel = scm::make_channel(ap, cells, rank, sigma, seed);
    scm::ScmParams params;
    params.ap_antennas = ap;
    params.cells = cells;
    params.tx_power = tx_power;
    params.gain = gain;
    params.modulation = modulation;
    const double sigma1 = sigma(0);
    params.ap_noise = tx_power * gain * gain * std::pow(sigma1, 4) /
                      std::pow(10.0, snr_max_db / 10.0);

    std::vector<double> packet(iterations, 0.0);
    if (packet_kind == "random") {
      RandomStream symbols("scm-packet", seed);
      for (double& phase : packet)
        phase = modulation.symbol_phase(
            static_cast<int>(symbols.next_u32() % modulation.order));
    }

    const auto trajectory = scm::run_link(channel, params, packet, seed);

    RunRecord record;
    record.seed = seed;
    record.metrics.emplace_back("snr_max_db", snr_max_db);
    record.metrics.emplace_back("snr_final_db", trajectory.snr_db.back());
    const int probe = std::min(iterations, 10) - 1;
    record.metrics.emplace_back("snr_at_10_db", trajectory.snr_db[probe]);
    record.metrics.emplace_back("alignment_final", trajectory.alignment.back());
    record.metrics.emplace_back("symbol_errors", trajectory.symbol_errors);

    Series series;
    series.name = "snr_trajectory";
    series.columns = {"snr_max_db", "iteration", "snr_db", "alignment"};
    for (int k = 0; k < iterations; ++k)
      series.rows.push_back({snr_max_db, static_cast<double>(k + 1),
                             trajectory.snr_db[k], trajectory.alignment[k]});
    record.series.push_back(std::move(series));
    out.records[u] = std::move(record);
  });

  Series medians;
  medians.name = "snr_median";
  medians.columns = {"snr_max_db", "iteration", "median_snr_db"};
  for (std::size_t s = 0; s < snr_max_list.size(); ++s) {
    for (int k = 0; k < iterations; ++k) {
      std::vector<double> values;
      for (std::size_t j = 0; j < ctx.seeds.size(); ++j)
        values.push_back(
            out.records[s * ctx.seeds.size() + j].series[0].rows[k][2]);
      medians.rows.push_back({snr_max_list[s], static_cast<double>(k + 1),
                              median(std::move(values))});
    }
  }
  out.aggregate_series.push_back(std::move(medians));
}

// ---------------------------------------------------------------------------
// Emission helpers

std::string format_double(double v) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, ptr);
}

void atomic_write(const std::filesystem::path& path, const std::string& payload) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.parent_path() /
                                    (".tmp." + path.filename().string());
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw IoError("cannot open " + tmp.string() + " for writing");
    stream << payload;
    if (!stream.good()) throw IoError("failed while writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("failed to move " + tmp.string() + " into place: " + ec.message());
}

std::string csv_of(const Series& series, bool with_seed,
                   const std::vector<std::pair<std::uint64_t, const Series*>>& parts) {
  std::ostringstream text;
  if (with_seed) text << "seed,";
  for (std::size_t c = 0; c < series.columns.size(); ++c)
    text << series.columns[c] << (c + 1 < series.columns.size() ? "," : "\n");
  for (const auto& [seed, part] : parts) {
    for (const auto& row : part->rows) {
      if (with_seed) text << seed << ",";
      for (std::size_t c = 0; c < row.size(); ++c)
        text << format_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
  }
  return text.str();
}

ordered_json json_of(const ResultSet& results) {
  ordered_json root;
  root["kind"] = results.kind;
  root["version"] = results.version;
  root["schema_version"] = results.schema_version;
  root["converged"] = results.converged;
  root["scenario"] = results.scenario;

  const auto series_json = [](const Series& s) {
    ordered_json j;
    j["columns"] = s.columns;
    j["rows"] = s.rows;
    return j;
  };

  root["records"] = ordered_json::array();
  for (const auto& record : results.records) {
    ordered_json r;
    r["seed"] = record.seed;
    r["version"] = results.version;
    ordered_json metrics;
    for (const auto& [k, v] : record.metrics) metrics[k] = v;
    r["metrics"] = metrics;
    ordered_json series;
    for (const auto& s : record.series) series[s.name] = series_json(s);
    r["series"] = series;
    root["records"].push_back(std::move(r));
  }

  ordered_json aggregates;
  for (const auto& [k, v] : results.aggregates) aggregates[k] = v;
  root["aggregates"] = aggregates;
  ordered_json aggregate_series;
  for (const auto& s : results.aggregate_series) aggregate_series[s.name] = series_json(s);
  root["aggregate_series"] = aggregate_series;
  return root;
}

void append_campaign_aggregates(ResultSet& results) {
  // Median/mean/percentiles of every shared per-record metric.
  if (results.records.empty()) return;
  std::vector<std::string> keys;
  for (const auto& [k, v] : results.records.front().metrics) keys.push_back(k);
  for (const auto& key : keys) {
    std::vector<double> values;
    for (const auto& record : results.records) {
      for (const auto& [k, v] : record.metrics)
        if (k == key) values.push_back(v);
    }
    if (values.size() != results.records.size()) continue;
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double q) {
      const double pos = q * (values.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, values.size() - 1);
      return values[lo] + (pos - lo) * (values[hi] - values[lo]);
    };
    results.aggregates.emplace_back(key + "_median", quantile(0.5));
    results.aggregates.emplace_back(
        key + "_mean",
        std::accumulate(values.begin(), values.end(), 0.0) / values.size());
    results.aggregates.emplace_back(key + "_p10", quantile(0.1));
    results.aggregates.emplace_back(key + "_p90", quantile(0.9));
  }
}

} // namespace

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds = {
      "dof-table", "modes", "dsa-precoder", "sim-train",
      "sim-doa",   "ris-pattern", "scm-link"};
  return kinds;
}

ResultSet run_scenario(const std::filesystem::path& config_path,
                       const RunOverrides& overrides) {
  std::ifstream stream(config_path, std::ios::binary);
  if (!stream) throw IoError("cannot read config file " + config_path.string());
  const std::string text((std::istreambuf_iterator<char>(stream)),
                         std::istreambuf_iterator<char>());

  ordered_json config;
  try {
    config = ordered_json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover line/column from the byte offset of the parse error.
    int line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 <= stop && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(e.what(), line, column);
  }

  ConfigReader cfg(config, "");
  const long long schema = cfg.integer("schema_version");
  if (schema != kSchemaVersion)
    throw ValidationError("unsupported schema_version", "schema_version");
  const std::string kind = cfg.text("kind");
  if (std::find(scenario_kinds().begin(), scenario_kinds().end(), kind) ==
      scenario_kinds().end())
    throw ValidationError("unknown scenario kind " + kind, "kind");
  cfg.text_or("output", "results"); // reserved for the CLI

  Context ctx{kind, Medium(cfg.number_or("wavelength", 1.0)), {}, overrides.workers};
  if (const ordered_json* seeds = cfg.optional("seeds")) {
    if (!seeds->is_array() || seeds->empty())
      throw ValidationError("seeds must be a non-empty array", "seeds");
    for (const auto& s : *seeds) {
      if (!s.is_number_integer() || s.get<long long>() < 0)
        throw ValidationError("seeds must be nonnegative integers", "seeds");
      ctx.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    ctx.seeds = {1};
  }
  if (overrides.seed) ctx.seeds = {*overrides.seed};

  ResultSet results;
  results.kind = kind;
  results.version = kVersion;
  results.schema_version = static_cast<int>(schema);

  if (kind == "dof-table") run_dof_table(cfg, ctx, results);
  else if (kind == "modes") run_modes(cfg, ctx, results);
  else if (kind == "dsa-precoder") run_dsa(cfg, ctx, results);
  else if (kind == "sim-train") run_sim_train(cfg, ctx, results);
  else if (kind == "sim-doa") run_sim_doa(cfg, ctx, results);
  else if (kind == "ris-pattern") run_ris(cfg, ctx, results);
  else if (kind == "scm-link") run_scm(cfg, ctx, results);
  cfg.finish();

  // Echo the validated configuration (with any seed override applied) so a
  // rerun of the same inputs is byte-identical.
  ordered_json echo = config;
  if (overrides.seed) echo["seeds"] = {*overrides.seed};
  results.scenario = std::move(echo);
  append_campaign_aggregates(results);
  return results;
}

std::string declared_output(const ResultSet& results) {
  if (results.scenario.contains("output"))
    return results.scenario.at("output").get<std::string>();
  return "results";
}

void emit_results(const ResultSet& results, EmitFormat format,
                  const std::filesystem::path& out_dir) {
  bool any_content = !results.aggregates.empty() || !results.aggregate_series.empty();
  for (const auto& record : results.records)
    if (!record.metrics.empty() || !record.series.empty()) any_content = true;
  if (results.records.empty() || !any_content)
    throw std::invalid_argument("emit_results: refusing to write an empty result set");

  if (format == EmitFormat::structured) {
    atomic_write(out_dir / "summary.json", json_of(results).dump(2) + "\n");
    return;
  }

  // Group record series by name, keeping record order.
  std::vector<std::string> names;
  for (const auto& record : results.records)
    for (const auto& series : record.series)
      if (std::find(names.begin(), names.end(), series.name) == names.end())
        names.push_back(series.name);
  for (const auto& name : names) {
    std::vector<std::pair<std::uint64_t, const Series*>> parts;
    const Series* prototype = nullptr;
    for (const auto& record : results.records) {
      for (const auto& series : record.series) {
        if (series.name != name) continue;
        parts.emplace_back(record.seed, &series);
        if (!prototype) prototype = &series;
      }
    }
    atomic_write(out_dir / (name + ".csv"), csv_of(*prototype, true, parts));
  }
  for (const auto& series : results.aggregate_series)
    atomic_write(out_dir / (series.name + ".csv"),
                 csv_of(series, false, {{0, &series}}));
}

} // namespace esp::scenario
