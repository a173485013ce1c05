#include "precopt/random.hpp"

#include <cmath>
#include <numbers>

namespace precopt {

namespace {
std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64_next(state);
  state ^= stream * 0x9e3779b97f4a7c15ULL;
  mixed ^= splitmix64_next(state);
  return mixed;
}

double GaussianStream::uniform_open() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double GaussianStream::uniform_closed() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

complex_t GaussianStream::cnormal() {
  const double u1 = uniform_open();
  const double u2 = uniform_closed();
  const double radius = std::sqrt(-std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

CMatrix random_cn_matrix(int rows, int cols, std::uint64_t seed, std::uint64_t stream) {
  GaussianStream gen(seed, stream);
  CMatrix out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = gen.cnormal();
  }
  return out;
}

}  // namespace precopt
