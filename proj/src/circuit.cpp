#include "esp/circuit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "esp/optim.hpp"
#include "esp/rng.hpp"

namespace esp::circuit {

namespace {
constexpr Complex kJ{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
} // namespace

bool DipoleArray::electrically_long(const Medium& medium) const {
  return element_length > medium.wavelength / 10.0 + 1e-15;
}

DipoleArray DipoleArray::concentric_rings(int rings, double spacing,
                                          double element_length) {
  if (rings < 0 || !(spacing > 0.0))
    throw std::invalid_argument("concentric_rings: invalid geometry");
  DipoleArray array;
  array.element_length = element_length;
  array.elements.push_back({Vec3::Zero(), Vec3::UnitZ()});
  for (int ring = 1; ring <= rings; ++ring) {
    const double radius = ring * spacing;
    const int count = static_cast<int>(std::floor(2.0 * kPi * radius / spacing));
    for (int i = 0; i < count; ++i) {
      const double phi = 2.0 * kPi * i / count;
      array.elements.push_back(
          {Vec3(radius * std::cos(phi), radius * std::sin(phi), 0.0), Vec3::UnitZ()});
    }
  }
  return array;
}

double radiation_resistance(double element_length, const Medium& medium) {
  const double ratio = element_length / medium.wavelength;
  return (2.0 * kPi * medium.impedance / 3.0) * ratio * ratio;
}

ImpedanceMatrix impedance_matrix(const DipoleArray& array, const Medium& medium) {
  const int k = array.ports();
  const double l2 = array.element_length * array.element_length;
  ImpedanceMatrix zm;
  zm.z.resize(k, k);
  for (int n = 0; n < k; ++n) {
    for (int m = 0; m < k; ++m) {
      if (n == m) {
        zm.z(n, n) = Complex(radiation_resistance(array.element_length, medium),
                             array.self_reactance);
        continue;
      }
      const Vec3 offset = array.elements[n].position - array.elements[m].position;
      if (offset.norm() <= 0.0)
        throw std::domain_error("impedance_matrix: duplicate element positions");
      const Dyadic green = green_dyadic(offset, medium);
      const CVec3 pn = array.elements[n].orientation.cast<Complex>();
      const CVec3 pm = array.elements[m].orientation.cast<Complex>();
      // Induced-EMF convention: the minus keeps Re{Z} the radiated-power form.
      zm.z(n, m) = -l2 * pn.dot(green * pm);
    }
  }
  return zm;
}

LoadVector LoadVector::reactive(const Eigen::VectorXd& theta) {
  LoadVector loads;
  loads.reactance = theta;
  return loads;
}

bool LoadVector::purely_reactive() const {
  return resistance.size() == 0 || (resistance.array() == 0.0).all();
}

Eigen::VectorXcd LoadVector::impedance() const {
  Eigen::VectorXcd z(reactance.size());
  for (Eigen::Index i = 0; i < reactance.size(); ++i)
    z(i) = Complex(resistance.size() > 0 ? resistance(i) : 0.0, reactance(i));
  return z;
}

namespace {

Eigen::MatrixXcd loaded_system(const ImpedanceMatrix& z, const LoadVector& loads) {
  if (loads.ports() != z.ports())
    throw std::invalid_argument("load vector size does not match the port count");
  Eigen::MatrixXcd s = z.z;
  s.diagonal() += loads.impedance();
  return s;
}

Eigen::PartialPivLU<Eigen::MatrixXcd> factor_or_throw(const Eigen::MatrixXcd& s,
                                                      const char* where) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(s);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << where << ": loaded system is numerically singular near resonance "
        << "(reciprocal condition number " << rcond << ")";
    throw std::runtime_error(msg.str());
  }
  return lu;
}

} // namespace

Eigen::MatrixXcd reflection_matrix(const ImpedanceMatrix& z, const LoadVector& loads) {
  const Eigen::MatrixXcd s = loaded_system(z, loads);
  auto lu = factor_or_throw(s, "reflection_matrix");
  // R = -Z (Z_L + Z)^{-1}; both Z and the loaded system are symmetric, so
  // R^T solves (Z_L + Z) X = -Z.
  return lu.solve(-z.z).transpose();
}

double radiated_power(const ImpedanceMatrix& z, const Eigen::VectorXcd& currents) {
  if (currents.size() != z.z.rows())
    throw std::invalid_argument("radiated_power: current vector size mismatch");
  const Eigen::MatrixXd re = z.z.real();
  const double power = (currents.adjoint() * (re * currents)).value().real();
  if (power >= 0.0) return power;
  const double scale =
      std::max(1e-300, currents.squaredNorm() * re.cwiseAbs().maxCoeff());
  if (power > -1e-12 * scale) return 0.0;
  throw std::domain_error("radiated_power: negative power, passivity violated "
                          "(check the diagonal impedance model)");
}

CharacteristicLoads characteristic_mode_loads(const ImpedanceMatrix& z,
                                              const Eigen::VectorXcd& target_current) {
  if (target_current.size() != z.z.rows())
    throw std::invalid_argument("characteristic_mode_loads: current size mismatch");
  if ((target_current.array().abs() == 0.0).any())
    throw std::domain_error("characteristic_mode_loads: target current has zero entries");

  const Eigen::MatrixXd im = z.z.imag();
  const Eigen::VectorXcd reactive_drive = im * target_current;

  CharacteristicLoads result;
  result.loads.reactance.resize(target_current.size());
  for (Eigen::Index k = 0; k < target_current.size(); ++k) {
    const Complex ratio = reactive_drive(k) / target_current(k);
    result.loads.reactance(k) = -ratio.real();
    const double rel = std::abs(ratio.imag()) / std::max(std::abs(ratio), 1e-300);
    result.max_ratio_imag = std::max(result.max_ratio_imag, rel);
  }
  return result;
}

Eigen::MatrixXd DsaConfig::selection() const {
  if (active_ports < 1 || active_ports > total_ports)
    throw std::invalid_argument("DsaConfig: need 1 <= active ports <= total ports");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(total_ports, active_ports);
  for (int n = 0; n < active_ports; ++n) q(n, n) = 1.0;
  return q;
}

Eigen::VectorXcd dsa_forward(const ImpedanceMatrix& z, const LoadVector& loads,
                             const DsaConfig& config, const Eigen::VectorXcd& v_active,
                             const Eigen::MatrixXcd& receive_coupling) {
  if (v_active.size() != config.active_ports)
    throw std::invalid_argument("dsa_forward: drive vector size mismatch");
  if (receive_coupling.cols() != z.z.rows())
    throw std::invalid_argument("dsa_forward: receive coupling column mismatch");
  const Eigen::MatrixXcd s = loaded_system(z, loads);
  auto lu = factor_or_throw(s, "dsa_forward");
  const Eigen::VectorXcd vi = config.selection() * v_active;
  return -receive_coupling * lu.solve(vi);
}

namespace {

struct DsaWork {
  const ImpedanceMatrix& z;
  const DsaConfig& config;
  const Eigen::MatrixXcd& coupling;
  const Eigen::MatrixXcd& target;
  Eigen::MatrixXd re_z;
  Eigen::MatrixXd q;
  double power_target;

  Eigen::VectorXd expand(const Eigen::VectorXd& theta_passive) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(config.total_ports);
    full.tail(config.total_ports - config.active_ports) = theta_passive;
    return full;
  }

  // Misfit + power and their gradients w.r.t. the passive reactances.
  double evaluate(const Eigen::VectorXd& theta_passive, double weight,
                  Eigen::VectorXd* gradient, double* power_out,
                  Eigen::MatrixXcd* achieved_out) const {
    const int k = config.total_ports;
    const Eigen::VectorXd theta = expand(theta_passive);
    Eigen::MatrixXcd s = z.z;
    for (int i = 0; i < k; ++i) s(i, i) += kJ * theta(i);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(s);
    if (!(lu.rcond() > 1e-14)) {
      if (gradient) gradient->setZero(theta_passive.size());
      return std::numeric_limits<double>::infinity();
    }

    const Eigen::MatrixXcd b = lu.solve(q.cast<Complex>());   // S^{-1} Q
    const Eigen::MatrixXcd achieved = -coupling * b;
    const Eigen::MatrixXcd err = achieved - target;
    const double misfit = err.squaredNorm();
    const double power = (b.adjoint() * (re_z * b)).trace().real();
    const double violation = power - power_target;
    const double value = misfit + weight * violation * violation;
    if (power_out) *power_out = power;
    if (achieved_out) *achieved_out = achieved;
    if (!gradient) return value;

    // X = F S^{-1} and W = B^H Re{Z} S^{-1} via the shared factorization.
    const Eigen::MatrixXcd x = lu.solve(coupling.transpose()).transpose();
    const Eigen::MatrixXcd t = err.adjoint() * x;                       // N_a x K
    const Eigen::MatrixXcd w2 =
        lu.solve(re_z * b.conjugate()).transpose();                     // N_a x K

    gradient->resize(theta_passive.size());
    const int passive0 = config.active_ports;
    for (int kk = passive0; kk < k; ++kk) {
      const Complex misfit_term = (b.row(kk) * t.col(kk)).value();
      const Complex power_term = (b.row(kk) * w2.col(kk)).value();
      const double g_misfit = -2.0 * misfit_term.imag();
      const double g_power = 2.0 * power_term.imag();
      (*gradient)(kk - passive0) = g_misfit + 2.0 * weight * violation * g_power;
    }
    return value;
  }
};

} // namespace

namespace detail {

double dsa_objective(const ImpedanceMatrix& z, const DsaConfig& config,
                     const Eigen::MatrixXcd& receive_coupling,
                     const Eigen::MatrixXcd& target, double power_target,
                     double penalty_weight, const Eigen::VectorXd& theta_passive,
                     Eigen::VectorXd* gradient) {
  DsaWork work{z, config, receive_coupling, target,
               Eigen::MatrixXd(z.z.real()), config.selection(), power_target};
  return work.evaluate(theta_passive, penalty_weight, gradient, nullptr, nullptr);
}

} // namespace detail

Eigen::MatrixXcd dsa_diagonalizing_target(const ImpedanceMatrix& z,
                                          const DsaConfig& config,
                                          const Eigen::MatrixXcd& receive_coupling,
                                          double power_target) {
  // Whitened channel F Re{Z}^{-1/2}: its singular pairs give the best field
  // per unit radiated power an ideal (fully driven) array could deliver.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z.z.real());
  const double floor = std::max(eig.eigenvalues().maxCoeff(), 0.0) * 1e-12;
  Eigen::VectorXd inv_sqrt(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i)
    inv_sqrt(i) = eig.eigenvalues()(i) > floor ? 1.0 / std::sqrt(eig.eigenvalues()(i)) : 0.0;
  const Eigen::MatrixXd white =
      eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(receive_coupling * white, Eigen::ComputeThinU);
  const int n_a = config.active_ports;
  Eigen::MatrixXcd target(receive_coupling.rows(), n_a);
  const double per_port = std::sqrt(power_target / n_a);
  for (int n = 0; n < n_a; ++n)
    target.col(n) = per_port * svd.singularValues()(n) * svd.matrixU().col(n);
  return target;
}

DsaResult dsa_optimize(const ImpedanceMatrix& z, const DsaConfig& config,
                       const Eigen::MatrixXcd& receive_coupling,
                       const Eigen::MatrixXcd& target, double power_target,
                       const DsaOptions& options) {
  if (receive_coupling.rows() != target.rows() || target.cols() != config.active_ports)
    throw std::invalid_argument("dsa_optimize: target must be (receiver samples) x N_a");
  if (!(power_target > 0.0))
    throw std::invalid_argument("dsa_optimize: power target must be positive");

  DsaWork work{z, config, receive_coupling, target,
               Eigen::MatrixXd(z.z.real()), config.selection(), power_target};
  const int passive = config.total_ports - config.active_ports;
  const double reactance_scale = z.z.imag().cwiseAbs().maxCoeff() +
                                 z.z.real().cwiseAbs().maxCoeff();

  struct Candidate {
    Eigen::VectorXd theta;
    double residual = std::numeric_limits<double>::infinity();
    double power = 0.0;
    bool feasible = false;
    int restart = -1;
  };
  Candidate best;

  for (int restart = 0; restart <= options.restarts; ++restart) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(passive);
    if (restart > 0) {
      RandomStream rng("dsa-restart", options.seed, static_cast<std::uint64_t>(restart));
      for (int i = 0; i < passive; ++i)
        theta(i) = rng.uniform(-5.0 * reactance_scale, 5.0 * reactance_scale);
    }

    double power = 0.0;
    work.evaluate(theta, 0.0, nullptr, &power, nullptr);
    double misfit0 = work.evaluate(theta, 0.0, nullptr, nullptr, nullptr);
    double weight = std::max(misfit0, 1e-9) / std::max(power_target * power_target, 1e-12);

    bool feasible = false;
    const auto minimize = [&](int iterations) {
      optim::LbfgsOptions lopt;
      lopt.max_iterations = iterations;
      const auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
        return work.evaluate(th, weight, &grad, nullptr, nullptr);
      };
      theta = optim::lbfgs_minimize(objective, theta, lopt).x;
      work.evaluate(theta, weight, nullptr, &power, nullptr);
    };
    for (int stage = 0; stage < 24; ++stage) {
      minimize(options.max_iterations);
      if (std::abs(power - power_target) <= options.power_tolerance * power_target) {
        feasible = true;
        break;
      }
      weight *= 2.0;
    }
    // Polish at the final weight; the penalty loop stops on feasibility, not
    // on stationarity of the misfit.
    if (feasible) minimize(4 * options.max_iterations);

    double power_final = 0.0;
    const double residual =
        std::sqrt(work.evaluate(theta, 0.0, nullptr, &power_final, nullptr));
    const bool better = (feasible && !best.feasible) ||
                        (feasible == best.feasible && residual < best.residual);
    if (better) best = {theta, residual, power_final, feasible, restart};
  }

  DsaResult result;
  result.loads.reactance = work.expand(best.theta);
  result.residual = best.residual;
  result.radiated_power = best.power;
  result.best_restart = best.restart;
  result.converged = best.feasible;
  work.evaluate(best.theta, 0.0, nullptr, nullptr, &result.achieved);

  // Mode-basis diagnostics against the matched-filter bound.
  const Eigen::MatrixXcd bound =
      dsa_diagonalizing_target(z, config, receive_coupling, power_target);
  Eigen::MatrixXcd basis(bound.rows(), config.active_ports);
  Eigen::VectorXd ideal(config.active_ports);
  for (int n = 0; n < config.active_ports; ++n) {
    ideal(n) = bound.col(n).norm();
    basis.col(n) = bound.col(n) / std::max(ideal(n), 1e-300);
  }
  const Eigen::MatrixXcd projected = basis.adjoint() * result.achieved;
  double diag_power = 0.0;
  double offdiag_power = 0.0;
  result.gain_loss_db.resize(config.active_ports);
  for (int n = 0; n < config.active_ports; ++n) {
    for (int m = 0; m < config.active_ports; ++m) {
      const double p = std::norm(projected(m, n));
      if (m == n)
        diag_power += p;
      else
        offdiag_power += p;
    }
    result.gain_loss_db(n) =
        20.0 * std::log10(ideal(n) / std::max(std::abs(projected(n, n)), 1e-300));
  }
  result.offdiag_leakage_db =
      10.0 * std::log10(std::max(offdiag_power, 1e-300) / std::max(diag_power, 1e-300));
  return result;
}

} // namespace esp::circuit
