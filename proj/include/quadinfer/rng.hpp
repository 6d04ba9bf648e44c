#pragma once

#include <array>
#include <cstdint>

namespace quadinfer {

// Counter-based random stream (Philox4x32-10).  A stream is addressed by
// (seed, rep_index, substream); draws within a stream advance only a local
// 64-bit counter, so streams never overlap and any replication can be
// generated independently of execution order.  Identical addressing yields
// bitwise-identical sequences on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t rep_index, std::uint32_t substream);

  // Raw 64-bit draw.
  std::uint64_t next_u64();

  // Uniform on the open interval (0,1): ((u64 >> 11) + 0.5) * 2^-53.
  double next_uniform();

  // Uniform on [lo, hi).
  double next_uniform(double lo, double hi);

  // Standard normal via inverse-CDF (monotone coupling with next_uniform).
  double next_normal();

  // Gamma(shape, 1), shape > 0 (Marsaglia–Tsang squeeze; shape < 1 boosted).
  double next_gamma(double shape);

  // Chi-squared with df > 0 degrees of freedom.
  double next_chi2(double df);

  // Student t with df degrees of freedom, divided by `scale`
  // (scale = sqrt(df/(df-2)) standardizes the variance to 1).
  double next_student_t(double df, double scale = 1.0);

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> prefix_; // rep_index low/high mixed with substream
  std::uint64_t counter_ = 0;           // draw counter -> block counter words 0,1
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 2;                   // 2 u64s per block; 2 == empty
};

} // namespace quadinfer
