#include "esp/modes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esp::modes {

bool SampledSpace::undersampled(const Medium& medium) const {
  return pitch > medium.wavelength / 2.0 + 1e-12;
}

SampledSpace SampledSpace::segment(double length, double pitch, const Vec3& center,
                                   const Vec3& axis, const Vec3& polarization,
                                   double element_length) {
  if (!(length > 0.0) || !(pitch > 0.0))
    throw std::invalid_argument("SampledSpace::segment: length and pitch must be positive");
  const Vec3 u = axis.normalized();
  const Vec3 p = polarization.normalized();
  const int count = static_cast<int>(std::floor(length / pitch + 1e-9)) + 1;

  SampledSpace space;
  space.pitch = pitch;
  space.elements.reserve(count);
  const double start = -0.5 * pitch * (count - 1);
  for (int i = 0; i < count; ++i)
    space.elements.push_back({center + (start + i * pitch) * u, p, element_length, {1.0, 0.0}});
  return space;
}

SampledSpace SampledSpace::square(double side, double pitch, const Vec3& center,
                                  const Vec3& axis_u, const Vec3& axis_v,
                                  const Vec3& polarization, double element_length) {
  if (!(side > 0.0) || !(pitch > 0.0))
    throw std::invalid_argument("SampledSpace::square: side and pitch must be positive");
  const Vec3 u = axis_u.normalized();
  const Vec3 v = axis_v.normalized();
  const Vec3 p = polarization.normalized();
  const int count = static_cast<int>(std::floor(side / pitch + 1e-9)) + 1;

  SampledSpace space;
  space.pitch = pitch;
  space.elements.reserve(static_cast<std::size_t>(count) * count);
  const double start = -0.5 * pitch * (count - 1);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j)
      space.elements.push_back({center + (start + i * pitch) * u + (start + j * pitch) * v,
                                p, element_length, {1.0, 0.0}});
  return space;
}

Eigen::MatrixXcd coupling_matrix(const SampledSpace& src, const SampledSpace& dst,
                                 const Medium& medium) {
  const auto rows = static_cast<Eigen::Index>(dst.elements.size());
  const auto cols = static_cast<Eigen::Index>(src.elements.size());
  Eigen::MatrixXcd g(rows, cols);
  for (Eigen::Index m = 0; m < rows; ++m) {
    const auto& d = dst.elements[m];
    for (Eigen::Index n = 0; n < cols; ++n) {
      const auto& s = src.elements[n];
      const Vec3 offset = d.position - s.position;
      if (offset.norm() <= 0.0)
        throw std::domain_error("coupling_matrix: source and destination elements coincide");
      const Dyadic green = green_dyadic(offset, medium);
      g(m, n) = d.length * s.length *
                (d.orientation.cast<Complex>().dot(green * s.orientation.cast<Complex>()));
    }
  }
  return g;
}

ModeDecomposition mode_decomposition(const Eigen::MatrixXcd& coupling) {
  if (!coupling.allFinite())
    throw std::invalid_argument("mode_decomposition: coupling matrix has non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(coupling, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ModeDecomposition dec;
  dec.left_basis = svd.matrixU();
  dec.right_basis = svd.matrixV();
  dec.singular_values = svd.singularValues();

  // Phase convention: rotate each pair so the largest entry of the right
  // vector is real positive; U picks up the conjugate rotation.
  for (Eigen::Index i = 0; i < dec.right_basis.cols(); ++i) {
    Eigen::Index peak = 0;
    dec.right_basis.col(i).cwiseAbs().maxCoeff(&peak);
    const Complex entry = dec.right_basis(peak, i);
    if (std::abs(entry) > 0.0) {
      const Complex rotation = std::conj(entry) / std::abs(entry);
      dec.right_basis.col(i) *= rotation;
      dec.left_basis.col(i) *= rotation;
    }
  }
  return dec;
}

int count_dof(const ModeDecomposition& decomposition, DofCriterion criterion) {
  const auto& sv = decomposition.singular_values;
  if (sv.size() == 0)
    throw std::invalid_argument("count_dof: empty decomposition");

  if (criterion.kind == DofCriterion::Kind::threshold_db) {
    const double floor = sv(0) * sv(0) * std::pow(10.0, -criterion.value / 10.0);
    int n = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) * sv(i) >= floor) n = static_cast<int>(i) + 1;
    return n;
  }

  const double f = criterion.value;
  if (!(f > 0.0) || f > 1.0)
    throw std::invalid_argument("count_dof: energy fraction must lie in (0, 1]");
  const double total = sv.squaredNorm();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    cumulative += sv(i) * sv(i);
    if (cumulative >= f * total) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(sv.size());
}

PowerAllocation water_filling(const Eigen::VectorXd& gains, double noise_power,
                              double total_power) {
  if (gains.size() == 0)
    throw std::invalid_argument("water_filling: no channel gains given");
  if (!(noise_power > 0.0) || !(total_power > 0.0))
    throw std::invalid_argument("water_filling: noise and total power must be positive");
  if ((gains.array() <= 0.0).any())
    throw std::invalid_argument("water_filling: gains must be positive");

  const Eigen::VectorXd floors = noise_power / gains.array(); // noise/sigma_n^2
  const auto allocated = [&](double mu) {
    return (mu - floors.array()).max(0.0).sum();
  };

  // allocated(mu) is continuous, nondecreasing and 0 at min(floors);
  // the bracket upper end over-fills by construction.
  double lo = floors.minCoeff();
  double hi = floors.maxCoeff() + total_power;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (allocated(mid) < total_power)
      lo = mid;
    else
      hi = mid;
  }

  PowerAllocation allocation;
  allocation.water_level = 0.5 * (lo + hi);
  allocation.powers = (allocation.water_level - floors.array()).max(0.0);
  return allocation;
}

double link_capacity(const Eigen::VectorXd& gains, double noise_power,
                     double total_power) {
  const PowerAllocation allocation = water_filling(gains, noise_power, total_power);
  double capacity = 0.0;
  for (Eigen::Index n = 0; n < gains.size(); ++n)
    capacity += std::log2(1.0 + allocation.powers(n) * gains(n) / noise_power);
  return capacity;
}

CascadeLink CascadeLink::from_matrices(const Eigen::MatrixXcd& h_t,
                                       const Eigen::MatrixXcd& h_r,
                                       int usable_in, int usable_out) {
  if (h_r.cols() != h_t.rows())
    throw std::invalid_argument("CascadeLink: h_r columns must match h_t rows");

  CascadeLink link;
  link.h_t = h_t;
  link.h_r = h_r;
  link.coupling_t = Eigen::BDCSVD<Eigen::MatrixXcd>(h_t).singularValues();
  link.coupling_r = Eigen::BDCSVD<Eigen::MatrixXcd>(h_r).singularValues();
  link.usable_in = usable_in >= 0 ? usable_in : static_cast<int>(link.coupling_t.size());
  link.usable_out = usable_out >= 0 ? usable_out : static_cast<int>(link.coupling_r.size());
  if (link.usable_in > link.coupling_t.size() || link.usable_out > link.coupling_r.size())
    throw std::invalid_argument("CascadeLink: usable mode counts exceed factor ranks");
  return link;
}

double cascade_capacity(const CascadeLink& link, double noise_power,
                        double total_power) {
  const int n_c = link.max_modes();
  const int pairs = static_cast<int>(
      std::min(link.coupling_t.size(), link.coupling_r.size()));
  const int active = std::min(n_c, pairs);
  if (active < 1)
    throw std::invalid_argument("cascade_capacity: no usable end-to-end modes");

  Eigen::VectorXd gains(active);
  for (int k = 0; k < active; ++k) {
    const double product = link.coupling_t(k) * link.coupling_r(k);
    gains(k) = product * product;
  }
  // Degenerate all-zero cascade carries no information.
  if ((gains.array() <= 0.0).all()) return 0.0;
  int positive = 0;
  for (int k = 0; k < active; ++k)
    if (gains(k) > 0.0) positive = k + 1;
  return link_capacity(gains.head(positive), noise_power, total_power);
}

ScatterDesign optimal_scatter_matrix(const Eigen::MatrixXcd& h_t,
                                     const Eigen::MatrixXcd& h_r) {
  if (h_r.cols() != h_t.rows())
    throw std::invalid_argument("optimal_scatter_matrix: h_r columns must match h_t rows");

  Eigen::BDCSVD<Eigen::MatrixXcd> svd_t(h_t, Eigen::ComputeFullU);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd_r(h_r, Eigen::ComputeFullV);

  ScatterDesign design;
  design.matrix = svd_r.matrixV() * svd_t.matrixU().adjoint();

  const auto repeated = [](const Eigen::VectorXd& sv) {
    for (Eigen::Index i = 0; i + 1 < sv.size(); ++i)
      if (std::abs(sv(i) - sv(i + 1)) <= 1e-8 * std::max(1.0, sv(i))) return true;
    return false;
  };
  design.degenerate = repeated(svd_t.singularValues()) || repeated(svd_r.singularValues());
  return design;
}

} // namespace esp::modes
