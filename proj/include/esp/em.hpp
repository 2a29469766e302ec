#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace esp {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Dyadic = Eigen::Matrix3cd;
using Complex = std::complex<double>;

inline constexpr double kFreeSpaceImpedance = 376.730313668; // ohm

/// Narrowband propagation medium: wavelength plus wave impedance.
/// The wavenumber kappa0 = 2*pi/lambda is always derived, never stored.
struct Medium {
  double wavelength;
  double impedance;

  explicit Medium(double wavelength_m, double impedance_ohm = kFreeSpaceImpedance);
  double wavenumber() const;
};

/// Point current element (Hertzian dipole): position, unit polarization,
/// electrical length l << lambda and a complex drive amplitude.
struct CurrentElement {
  Vec3 position{0.0, 0.0, 0.0};
  Vec3 orientation{0.0, 0.0, 1.0};
  double length = 1e-3;
  Complex amplitude{1.0, 0.0};
};

/// The three distance regimes of the free-space dyadic Green's function,
/// already scaled by the common prefactor -j*eta*exp(-j*k0*r)/(2*lambda*r).
struct GreenTerms {
  Dyadic radiative;    // ~ 1/r
  Dyadic intermediate; // ~ 1/r^2
  Dyadic reactive;     // ~ 1/r^3
  Dyadic total() const { return radiative + intermediate + reactive; }
};

GreenTerms green_dyadic_terms(const Vec3& r, const Medium& medium);

/// Free-space dyadic Green's function (field per unit current moment, V/m per A*m).
/// Time convention exp(+j*w*t) with exp(-j*k0*r) outgoing.
Dyadic green_dyadic(const Vec3& r, const Medium& medium);

/// Superposed field of discrete current elements at observation point r.
CVec3 field_from_currents(std::span<const CurrentElement> elements, const Vec3& r,
                          const Medium& medium);

/// Radiation pattern factor j*k0*eta*rhat x (rhat x Jt(k0*rhat)) for a unit
/// direction rhat; multiply by exp(-j*k0*R)/(4*pi*R) to recover the far field.
CVec3 far_field(std::span<const CurrentElement> elements, const Vec3& direction,
                const Medium& medium);

/// Membership of a wavenumber vector on the radiation sphere |k| = k0,
/// within a relative tolerance on |k|^2.
bool is_radiating(const Vec3& k, const Medium& medium, double tolerance = 1e-9);

/// 2D lattice companion predicate: kx^2 + ky^2 <= k0^2 (visible region).
bool in_visible_region(double kx, double ky, const Medium& medium);

} // namespace esp
