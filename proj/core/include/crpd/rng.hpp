#pragma once

#include <cstdint>

namespace crpd {

// Deterministic pseudo-random stream keyed by (seed, stream). Streams are
// derived by hashing the key, so stream k can be created and consumed
// independently of every other stream; replication-level parallelism gets
// schedule-independent draws. All draws are generated from explicit
// constructions (no library distributions), so sequences are reproducible
// across standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // uniform on [0, 1), 53-bit resolution
  double next_uniform();

  // standard normal via the Box-Muller transform (pairs are cached)
  double next_normal();

  // gamma(shape, 1) with shape >= 1, squeeze-accept construction
  double next_gamma(double shape);

  // chi-square, df > 0 with df/2 >= 1
  double next_chi_square(double df);

  // Student t via the ratio construction normal / sqrt(chi2(df) / df)
  double next_student_t(double df);

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// 64-bit finalizer used for stream keying.
std::uint64_t mix64(std::uint64_t x);

}  // namespace crpd
