#include "esp/ris.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace esp::ris {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_angle(const Angle& a) {
  if (!(a.elevation >= 0.0) || a.elevation > kPi / 2.0 + 1e-12)
    throw std::invalid_argument("Angle: elevation must lie in [0, pi/2]");
}

double wrap_2pi(double v) {
  double w = std::fmod(v, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}
} // namespace

Vec3 Angle::unit() const {
  return {std::sin(elevation) * std::cos(azimuth),
          std::sin(elevation) * std::sin(azimuth), std::cos(elevation)};
}

RisPanel RisPanel::half_wavelength(int side, const Medium& medium) {
  if (side < 1) throw std::invalid_argument("RisPanel: side must be >= 1");
  RisPanel panel;
  panel.side = side;
  panel.cell_spacing = medium.wavelength / 2.0;
  panel.phases = Eigen::MatrixXd::Zero(side, side);
  return panel;
}

Eigen::MatrixXd anomalous_phase_profile(const Angle& incident, const Angle& desired,
                                        int side) {
  check_angle(incident);
  check_angle(desired);
  if (side < 1) throw std::invalid_argument("anomalous_phase_profile: side must be >= 1");

  const double sx = incident.ux() + desired.ux();
  const double sy = incident.uy() + desired.uy();
  Eigen::MatrixXd profile(side, side);
  for (int i = 1; i <= side; ++i)
    for (int j = 1; j <= side; ++j)
      profile(i - 1, j - 1) = wrap_2pi(-kPi * i * sx - kPi * j * sy);
  return profile;
}

void configure_anomalous(RisPanel& panel, const Angle& incident, const Angle& desired,
                         const Medium& medium) {
  if (std::abs(panel.cell_spacing - medium.wavelength / 2.0) >
      1e-9 * medium.wavelength)
    throw std::invalid_argument("configure_anomalous: the printed phase law assumes "
                                "lambda/2 cell spacing");
  panel.phases = anomalous_phase_profile(incident, desired, panel.side);
}

std::vector<double> reflected_pattern(const RisPanel& panel, const Angle& incident,
                                      std::span<const Angle> directions,
                                      const Medium& medium) {
  check_angle(incident);
  if (panel.phases.rows() != panel.side || panel.phases.cols() != panel.side)
    throw std::invalid_argument("reflected_pattern: panel phases not configured");
  if (std::abs(panel.cell_spacing - medium.wavelength / 2.0) >
      1e-9 * medium.wavelength)
    throw std::invalid_argument("reflected_pattern: lambda/2 cell spacing assumed");

  const int side = panel.side;
  const Eigen::MatrixXcd rho =
      panel.phases.unaryExpr([](double t) { return std::exp(Complex(0.0, t)); });

  std::vector<double> pattern;
  pattern.reserve(directions.size());
  Eigen::VectorXcd row_factor(side), col_factor(side);
  for (const Angle& dir : directions) {
    const double sx = incident.ux() + dir.ux();
    const double sy = incident.uy() + dir.uy();
    for (int i = 1; i <= side; ++i)
      row_factor(i - 1) = std::exp(Complex(0.0, kPi * i * sx));
    for (int j = 1; j <= side; ++j)
      col_factor(j - 1) = std::exp(Complex(0.0, kPi * j * sy));
    // AF = sum_ij rho_ij e^{j pi i sx} e^{j pi j sy}, evaluated separably.
    pattern.push_back(std::abs((row_factor.transpose() * rho * col_factor).value()));
  }
  return pattern;
}

long long ris_dof(int cells, RisStructure structure) {
  if (cells < 1) throw std::invalid_argument("ris_dof: K must be >= 1");
  const long long k = cells;
  switch (structure) {
    case RisStructure::diagonal: return k;
    case RisStructure::nondiagonal_reciprocal: return k * (k - 1) / 2;
    case RisStructure::nondiagonal_nonreciprocal: return k * k;
  }
  throw std::invalid_argument("ris_dof: unknown structure");
}

} // namespace esp::ris
