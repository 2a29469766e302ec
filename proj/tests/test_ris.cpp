#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "esp/ris.hpp"
#include "esp/rng.hpp"

using namespace esp;
using namespace esp::ris;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<Angle> degree_grid(double step_deg) {
  std::vector<Angle> grid;
  for (double el = 0.0; el <= 90.0 + 1e-9; el += step_deg)
    for (double az = 0.0; az < 360.0; az += step_deg)
      grid.push_back({el * kPi / 180.0, az * kPi / 180.0});
  return grid;
}
} // namespace

TEST_SUITE_BEGIN("ris");

TEST_CASE("normal incidence and normal reflection need no phase gradient") {
  const auto profile = anomalous_phase_profile({0.0, 0.0}, {0.0, 0.0}, 8);
  CHECK(profile.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("specular pairs need no phase gradient") {
  const Angle incident{0.6, 1.1};
  const Angle specular{0.6, 1.1 + kPi};
  const auto profile = anomalous_phase_profile(incident, specular, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double wrapped = std::remainder(profile(i, j), 2.0 * kPi);
      CHECK(std::abs(wrapped) < 1e-9);
    }
}

TEST_CASE("retroreflection phase slope is -2 pi ux per row index") {
  const Angle incident{0.5, 0.3};
  const auto profile = anomalous_phase_profile(incident, incident, 6);
  for (int i = 0; i + 1 < 6; ++i) {
    const double slope =
        std::remainder(profile(i + 1, 0) - profile(i, 0), 2.0 * kPi);
    CHECK(slope ==
          doctest::Approx(std::remainder(-2.0 * kPi * incident.ux(), 2.0 * kPi))
              .epsilon(1e-9));
  }
}

TEST_CASE("profile gradient is constant across the panel") {
  const Angle incident{0.7, 2.0};
  const Angle desired{0.3, 4.5};
  const auto profile = anomalous_phase_profile(incident, desired, 10);
  const double row_step = std::remainder(profile(1, 0) - profile(0, 0), 2.0 * kPi);
  const double col_step = std::remainder(profile(0, 1) - profile(0, 0), 2.0 * kPi);
  for (int i = 0; i + 1 < 10; ++i)
    for (int j = 0; j + 1 < 10; ++j) {
      CHECK(std::abs(std::remainder(profile(i + 1, j) - profile(i, j) - row_step,
                                    2.0 * kPi)) < 1e-9);
      CHECK(std::abs(std::remainder(profile(i, j + 1) - profile(i, j) - col_step,
                                    2.0 * kPi)) < 1e-9);
    }
}

TEST_CASE("uniform panel under normal incidence peaks at broadside") {
  const Medium medium(1.0);
  auto panel = RisPanel::half_wavelength(8, medium);
  const auto grid = degree_grid(1.0);
  const auto pattern = reflected_pattern(panel, {0.0, 0.0}, grid, medium);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < pattern.size(); ++i)
    if (pattern[i] > pattern[peak]) peak = i;
  CHECK(grid[peak].elevation == doctest::Approx(0.0));
  CHECK(pattern[peak] == doctest::Approx(64.0)); // K coherent cells
}

TEST_CASE("matched profile gives |AF| = K toward the design direction") {
  const Medium medium(1.0);
  auto panel = RisPanel::half_wavelength(16, medium);
  const Angle incident{0.4, 0.9};
  const Angle desired{0.8, 3.9};
  configure_anomalous(panel, incident, desired, medium);
  const std::vector<Angle> probe = {desired};
  const auto pattern = reflected_pattern(panel, incident, probe, medium);
  CHECK(pattern[0] == doctest::Approx(256.0).epsilon(1e-9));
}

TEST_CASE("pattern peak lands on the designed direction for random pairs") {
  const Medium medium(1.0);
  RandomStream rng("ris-pairs", 17);
  const auto grid = degree_grid(1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Angle incident{rng.uniform(0.1, 1.2), rng.uniform(0.0, 2.0 * kPi)};
    const Angle desired{rng.uniform(0.1, 1.2), rng.uniform(0.0, 2.0 * kPi)};
    auto panel = RisPanel::half_wavelength(16, medium);
    configure_anomalous(panel, incident, desired, medium);
    const auto pattern = reflected_pattern(panel, incident, grid, medium);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < pattern.size(); ++i)
      if (pattern[i] > pattern[peak]) peak = i;
    const double error =
        std::acos(std::clamp(grid[peak].unit().dot(desired.unit()), -1.0, 1.0));
    CHECK(error <= 1.0 * kPi / 180.0 + 1e-9);
  }
}

TEST_CASE("argmax is invariant to a global phase constant") {
  const Medium medium(1.0);
  auto panel = RisPanel::half_wavelength(12, medium);
  const Angle incident{0.3, 0.0};
  const Angle desired{0.7, 1.2};
  configure_anomalous(panel, incident, desired, medium);
  const auto grid = degree_grid(2.0);
  const auto base = reflected_pattern(panel, incident, grid, medium);
  panel.phases.array() += 1.234;
  const auto shifted = reflected_pattern(panel, incident, grid, medium);
  const auto argmax = [](const std::vector<double>& p) {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[peak]) peak = i;
    return peak;
  };
  CHECK(argmax(base) == argmax(shifted));
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i] == doctest::Approx(shifted[i]).epsilon(1e-9));
}

TEST_CASE("non-half-wavelength spacing is rejected by the printed law") {
  const Medium medium(1.0);
  RisPanel panel;
  panel.side = 4;
  panel.cell_spacing = 0.3; // not lambda/2
  panel.phases = Eigen::MatrixXd::Zero(4, 4);
  CHECK_THROWS_AS(configure_anomalous(panel, {0, 0}, {0.5, 0.5}, medium),
                  std::invalid_argument);
}

TEST_CASE("reconfigurable DoF counts") {
  CHECK(ris_dof(4, RisStructure::diagonal) == 4);
  CHECK(ris_dof(4, RisStructure::nondiagonal_reciprocal) == 6);
  CHECK(ris_dof(4, RisStructure::nondiagonal_nonreciprocal) == 16);
  CHECK(ris_dof(256, RisStructure::nondiagonal_reciprocal) == 256 * 255 / 2);
}

TEST_SUITE_END();
