#include "esp/dof.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace esp::dof {

namespace {
constexpr double kPi = std::numbers::pi;

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}
} // namespace

ApertureGeometry ApertureGeometry::segment(double length) {
  check_positive(length, "segment length");
  return {Kind::segment, length, 0.0, 0.0};
}

ApertureGeometry ApertureGeometry::rectangle(double lx, double ly) {
  check_positive(lx, "rectangle side");
  check_positive(ly, "rectangle side");
  return {Kind::rectangle, lx, ly, 0.0};
}

ApertureGeometry ApertureGeometry::box(double lx, double ly, double lz) {
  check_positive(lx, "box side");
  check_positive(ly, "box side");
  check_positive(lz, "box side");
  return {Kind::box, lx, ly, lz};
}

bool ApertureGeometry::formula_supported() const {
  switch (kind) {
    case Kind::segment: return true;
    case Kind::rectangle: return lx == ly;
    case Kind::box: return lx == ly && ly == lz;
  }
  return false;
}

bool ApertureGeometry::below_asymptotic_regime(const Medium& medium) const {
  const double floor = 4.0 * medium.wavelength;
  switch (kind) {
    case Kind::segment: return lx < floor;
    case Kind::rectangle: return lx < floor || ly < floor;
    case Kind::box: return lx < floor || ly < floor || lz < floor;
  }
  return false;
}

LinkGeometry LinkGeometry::segments(double lt, double lr, double distance) {
  check_positive(lt, "Lt");
  check_positive(lr, "Lr");
  check_positive(distance, "distance");
  LinkGeometry g;
  g.kind = Kind::segments;
  g.lt = lt;
  g.lr = lr;
  g.distance = distance;
  return g;
}

LinkGeometry LinkGeometry::squares(double at, double ar, double distance) {
  check_positive(at, "At");
  check_positive(ar, "Ar");
  check_positive(distance, "distance");
  LinkGeometry g;
  g.kind = Kind::squares;
  g.at = at;
  g.ar = ar;
  g.distance = distance;
  return g;
}

namespace {

long long lattice_count_1d(double l, double lambda) {
  // Fourier modes k_n = 2 pi n / L inside [-k0, k0]  <=>  |n| <= L/lambda.
  const long long nmax = static_cast<long long>(std::floor(l / lambda + 1e-12));
  return 2 * nmax + 1;
}

long long lattice_count_2d(double lx, double ly, double lambda) {
  const long long nx_max = static_cast<long long>(std::floor(lx / lambda + 1e-12));
  const long long ny_max = static_cast<long long>(std::floor(ly / lambda + 1e-12));
  long long count = 0;
  for (long long nx = -nx_max; nx <= nx_max; ++nx) {
    for (long long ny = -ny_max; ny <= ny_max; ++ny) {
      const double ex = nx * lambda / lx;
      const double ey = ny * lambda / ly;
      if (ex * ex + ey * ey <= 1.0 + 1e-12) ++count;
    }
  }
  return count;
}

long long lattice_count_3d_shell(double l, double lambda) {
  // Points k_n = 2 pi n / L within the shell |k| in [k0 - d/2, k0 + d/2],
  // with shell thickness d = 2 pi / L (first sinc lobe).
  const double k0 = 2.0 * kPi / lambda;
  const double step = 2.0 * kPi / l;
  const double half = step / 2.0;
  const long long nmax = static_cast<long long>(std::ceil((k0 + half) / step)) + 1;
  long long count = 0;
  for (long long nx = -nmax; nx <= nmax; ++nx) {
    for (long long ny = -nmax; ny <= nmax; ++ny) {
      for (long long nz = -nmax; nz <= nmax; ++nz) {
        const double kx = nx * step;
        const double ky = ny * step;
        const double kz = nz * step;
        const double knorm = std::sqrt(kx * kx + ky * ky + kz * kz);
        if (std::abs(knorm - k0) <= half) ++count;
      }
    }
  }
  return count;
}

} // namespace

DofResult dof_unbounded(const ApertureGeometry& geometry, const Medium& medium,
                        DofMethod method) {
  const double lambda = medium.wavelength;
  DofResult result;
  result.method = method;

  if (method == DofMethod::formula) {
    if (!geometry.formula_supported())
      throw std::invalid_argument(
          "dof_unbounded: closed forms cover segments, squares and cubes only; "
          "use the lattice method for unequal sides");
    switch (geometry.kind) {
      case ApertureGeometry::Kind::segment:
        result.value = 2.0 * geometry.lx / lambda;
        break;
      case ApertureGeometry::Kind::rectangle:
        result.value = kPi * geometry.lx * geometry.lx / (lambda * lambda);
        break;
      case ApertureGeometry::Kind::box:
        // Exact shell expression; the pi^2 L^2/lambda^2 simplification quoted
        // elsewhere replaces 4*pi by pi^2 and is not used here.
        result.value = kPi / 3.0 + 4.0 * kPi * geometry.lx * geometry.lx / (lambda * lambda);
        break;
    }
    return result;
  }

  long long count = 0;
  switch (geometry.kind) {
    case ApertureGeometry::Kind::segment:
      count = lattice_count_1d(geometry.lx, lambda);
      break;
    case ApertureGeometry::Kind::rectangle:
      count = lattice_count_2d(geometry.lx, geometry.ly, lambda);
      break;
    case ApertureGeometry::Kind::box:
      if (!(geometry.lx == geometry.ly && geometry.ly == geometry.lz))
        throw std::invalid_argument("dof_unbounded: 3D lattice enumeration is "
                                    "implemented for cubes");
      count = lattice_count_3d_shell(geometry.lx, lambda);
      break;
  }
  result.lattice_count = count;
  result.value = static_cast<double>(count);
  return result;
}

DofResult dof_link(const LinkGeometry& geometry, const Medium& medium,
                   LinkDofModel model) {
  const double lambda = medium.wavelength;
  const double d = geometry.distance;
  DofResult result;
  result.method = DofMethod::formula;

  if (geometry.kind == LinkGeometry::Kind::segments) {
    if (model == LinkDofModel::classic) {
      result.value = geometry.lt * geometry.lr / (lambda * d);
    } else {
      const double zeta = geometry.lr / std::sqrt(4.0 * d * d + geometry.lr * geometry.lr);
      result.value = (2.0 * geometry.lt / lambda) * zeta;
    }
    return result;
  }

  if (model == LinkDofModel::classic) {
    result.value = geometry.at * geometry.ar / (lambda * lambda * d * d);
    return result;
  }
  // Derived for At <= Ar; at equality both role assignments coincide.
  if (geometry.at > geometry.ar)
    throw std::invalid_argument("dof_link: the corrected 2D expression requires "
                                "At <= Ar; swap transmit and receive roles");
  const double lr = std::sqrt(geometry.ar);
  const double zeta = lr / std::sqrt(4.0 * d * d + lr * lr);
  result.value = (4.0 * geometry.at / (lambda * lambda)) * zeta * std::atan(zeta);
  return result;
}

DftCodebook dft_codebook(int n) {
  if (n < 1) throw std::invalid_argument("dft_codebook: N must be >= 1");

  DftCodebook cb;
  cb.matrix.resize(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m) {
    for (int col = 0; col < n; ++col) {
      const double phase = -2.0 * kPi * static_cast<double>(m) * col / n;
      cb.matrix(m, col) = scale * std::exp(Complex(0.0, phase));
    }
  }

  const int half = n / 2;
  for (int idx = -half; idx <= half; ++idx) {
    cb.beam_index.push_back(idx);
    cb.beam_angle.push_back(std::asin(2.0 * idx / static_cast<double>(n)));
  }
  return cb;
}

} // namespace esp::dof
