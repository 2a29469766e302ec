#include "esp/em.hpp"

#include <numbers>
#include <stdexcept>

namespace esp {

namespace {
constexpr Complex kJ{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

Medium::Medium(double wavelength_m, double impedance_ohm)
    : wavelength(wavelength_m), impedance(impedance_ohm) {
  if (!(wavelength > 0.0))
    throw std::invalid_argument("Medium: wavelength must be positive");
  if (!(impedance > 0.0))
    throw std::invalid_argument("Medium: impedance must be positive");
}

double Medium::wavenumber() const { return kTwoPi / wavelength; }

GreenTerms green_dyadic_terms(const Vec3& r, const Medium& medium) {
  const double dist = r.norm();
  if (dist <= 0.0)
    throw std::domain_error("green_dyadic: singular at r = 0 (self terms are "
                            "regularized in the circuit model)");

  const double lambda = medium.wavelength;
  const double k0 = medium.wavenumber();
  const Vec3 rhat = r / dist;

  const Eigen::Matrix3d transverse = Eigen::Matrix3d::Identity() - rhat * rhat.transpose();
  const Eigen::Matrix3d near = Eigen::Matrix3d::Identity() - 3.0 * rhat * rhat.transpose();

  const Complex prefactor =
      -kJ * medium.impedance * std::exp(-kJ * k0 * dist) / (2.0 * lambda * dist);
  const double inv_kr = lambda / (kTwoPi * dist); // 1/(k0*r)

  GreenTerms terms;
  terms.radiative = prefactor * transverse;
  terms.intermediate = prefactor * (-kJ * inv_kr) * near;
  terms.reactive = prefactor * (-inv_kr * inv_kr) * near;
  return terms;
}

Dyadic green_dyadic(const Vec3& r, const Medium& medium) {
  return green_dyadic_terms(r, medium).total();
}

namespace {

void check_element(const CurrentElement& e) {
  if (std::abs(e.orientation.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("CurrentElement: orientation must be a unit vector");
  if (!(e.length > 0.0))
    throw std::invalid_argument("CurrentElement: length must be positive");
}

} // namespace

CVec3 field_from_currents(std::span<const CurrentElement> elements, const Vec3& r,
                          const Medium& medium) {
  CVec3 field = CVec3::Zero();
  for (const auto& e : elements) {
    check_element(e);
    const Vec3 offset = r - e.position;
    if (offset.norm() <= 0.0)
      throw std::domain_error("field_from_currents: observation point coincides "
                              "with an element position");
    field += green_dyadic(offset, medium) * (e.orientation * (e.length)) * e.amplitude;
  }
  return field;
}

CVec3 far_field(std::span<const CurrentElement> elements, const Vec3& direction,
                const Medium& medium) {
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("far_field: direction must be a unit vector");

  const double k0 = medium.wavenumber();

  // Current-moment spectrum at k0*rhat; the exp(+j...) phase matches the
  // outgoing exp(-j*k0*|r - r_k|) expansion of the Green's function.
  CVec3 spectrum = CVec3::Zero();
  for (const auto& e : elements) {
    check_element(e);
    const Complex phase = std::exp(kJ * k0 * direction.dot(e.position));
    spectrum += e.orientation.cast<Complex>() * (e.length * e.amplitude * phase);
  }

  const CVec3 dir = direction.cast<Complex>();
  const CVec3 transverse = dir.cross(dir.cross(spectrum));
  return kJ * k0 * medium.impedance * transverse;
}

bool is_radiating(const Vec3& k, const Medium& medium, double tolerance) {
  const double k0sq = medium.wavenumber() * medium.wavenumber();
  return std::abs(k.squaredNorm() - k0sq) <= tolerance * k0sq;
}

bool in_visible_region(double kx, double ky, const Medium& medium) {
  const double k0 = medium.wavenumber();
  return kx * kx + ky * ky <= k0 * k0;
}

} // namespace esp
