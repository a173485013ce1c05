#pragma once

#include <cstdint>
#include <random>

#include "precopt/types.hpp"

namespace precopt {

/**
 * Stream "cn-boxmuller-v1": mt19937_64 with splitmix64 seed mixing, 53-bit
 * uniforms, and an explicit Box-Muller map to circularly symmetric unit
 * variance complex Gaussians. std::normal_distribution is deliberately
 * avoided; its algorithm is implementation-defined and would break bitwise
 * reproducibility across standard libraries.
 *
 * Stream id conventions: channel matrices for user i draw from stream i;
 * initial precoder blocks draw from stream kInitStreamBase + i.
 */
inline constexpr char kRngStreamName[] = "cn-boxmuller-v1";
inline constexpr std::uint64_t kInitStreamBase = std::uint64_t{1} << 32;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix_seed(seed, stream)) {}

  // CN(0,1): modulus squared is Exp(1), mean |z|^2 = 1.
  complex_t cnormal();

 private:
  double uniform_open();    // (0, 1]
  double uniform_closed();  // [0, 1)

  std::mt19937_64 engine_;
};

// Row-major fill so the entry stream order is shape-stable.
CMatrix random_cn_matrix(int rows, int cols, std::uint64_t seed, std::uint64_t stream);

}  // namespace precopt
