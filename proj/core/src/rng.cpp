#include "crpd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace crpd {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  state_ = mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ (stream + 0xd1b54a32d192ed03ULL));
}

std::uint64_t RngStream::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = next_uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

double RngStream::next_gamma(double shape) {
  if (!(shape >= 1.0)) throw std::invalid_argument("gamma draw needs shape >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::next_chi_square(double df) {
  return 2.0 * next_gamma(df / 2.0);
}

double RngStream::next_student_t(double df) {
  const double z = next_normal();
  const double c = next_chi_square(df);
  return z / std::sqrt(c / df);
}

}  // namespace crpd
