#include "esp/rng.hpp"

#include <cmath>
#include <numbers>

namespace esp {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_stream_key(std::string_view label, std::uint64_t seed,
                                std::uint64_t trial) {
  std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a offset basis
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  std::uint64_t state = h;
  state ^= splitmix64(state) + seed;
  state ^= splitmix64(state) + trial;
  return splitmix64(state);
}

RandomStream::RandomStream(std::uint64_t key) {
  key_[0] = static_cast<std::uint32_t>(key);
  key_[1] = static_cast<std::uint32_t>(key >> 32);
}

RandomStream::RandomStream(std::string_view label, std::uint64_t seed, std::uint64_t trial)
    : RandomStream(derive_stream_key(label, seed, trial)) {}

void RandomStream::refill() {
  std::array<std::uint32_t, 4> x = counter_;
  std::array<std::uint32_t, 2> k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, x[0], hi0, lo0);
    mulhilo(kPhiloxM1, x[2], hi1, lo1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  block_ = x;
  cursor_ = 0;
  if (++counter_[0] == 0)
    if (++counter_[1] == 0)
      if (++counter_[2] == 0) ++counter_[3];
}

std::uint32_t RandomStream::next_u32() {
  if (cursor_ >= 4) refill();
  return block_[cursor_++];
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::normal() {
  // Box-Muller; u clamped away from 0 so log stays finite.
  double u = uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

std::complex<double> RandomStream::complex_normal() {
  double u = uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  const double v = uniform();
  const double radius = std::sqrt(-std::log(u)); // variance 1/2 per component
  return {radius * std::cos(2.0 * std::numbers::pi * v),
          radius * std::sin(2.0 * std::numbers::pi * v)};
}

Eigen::VectorXcd RandomStream::complex_normal_vector(int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_normal();
  return v;
}

Eigen::MatrixXcd RandomStream::complex_normal_matrix(int rows, int cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = complex_normal();
  return m;
}

Eigen::VectorXcd RandomStream::unit_vector(int n) {
  Eigen::VectorXcd v = complex_normal_vector(n);
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

} // namespace esp
