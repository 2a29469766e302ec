#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

namespace esp {

/// Philox4x32-10 counter-based generator. Streams keyed by (label, seed,
/// trial) are independent, order-free and reproducible across platforms,
/// which keeps Monte-Carlo campaigns bit-stable under any worker count.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key);
  RandomStream(std::string_view label, std::uint64_t seed, std::uint64_t trial = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (both branches consumed, no caching).
  double normal();
  std::complex<double> complex_normal(); // CN(0, 1): variance 1/2 per part

  Eigen::VectorXcd complex_normal_vector(int n);
  Eigen::MatrixXcd complex_normal_matrix(int rows, int cols);
  Eigen::VectorXcd unit_vector(int n); // uniform on the complex unit sphere

 private:
  void refill();

  std::array<std::uint32_t, 4> counter_{0, 0, 0, 0};
  std::array<std::uint32_t, 2> key_{0, 0};
  std::array<std::uint32_t, 4> block_{0, 0, 0, 0};
  int cursor_ = 4; // force refill on first draw
};

/// FNV-1a over the label, mixed with seed and trial through splitmix64.
std::uint64_t derive_stream_key(std::string_view label, std::uint64_t seed,
                                std::uint64_t trial);

} // namespace esp
