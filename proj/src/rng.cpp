#include "quadinfer/rng.hpp"

#include <cmath>

#include "quadinfer/errors.hpp"
#include "quadinfer/normal.hpp"

namespace quadinfer {

namespace {

constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr std::uint64_t kMul0 = 0xD2511F53ull;
constexpr std::uint64_t kMul1 = 0xCD9E8D57ull;

std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> c,
                                      std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    const std::uint64_t p0 = kMul0 * c[0];
    const std::uint64_t p1 = kMul1 * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
         static_cast<std::uint32_t>(p0)};
  }
  return c;
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t rep_index,
                     std::uint32_t substream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      prefix_{static_cast<std::uint32_t>(rep_index),
              substream + kWeyl0 * static_cast<std::uint32_t>(rep_index >> 32)} {}

std::uint64_t RngStream::next_u64() {
  if (block_pos_ == 2) {
    block_ = philox10({static_cast<std::uint32_t>(counter_),
                       static_cast<std::uint32_t>(counter_ >> 32), prefix_[0],
                       prefix_[1]},
                      key_[0], key_[1]);
    ++counter_;
    block_pos_ = 0;
  }
  const int base = 2 * block_pos_++;
  return (static_cast<std::uint64_t>(block_[base + 1]) << 32) | block_[base];
}

double RngStream::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_uniform();
}

double RngStream::next_normal() { return normal_quantile(next_uniform()); }

double RngStream::next_gamma(double shape) {
  if (!(shape > 0.0)) {
    throw DomainError("next_gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost through Gamma(shape+1) * U^{1/shape}.
    const double u = next_uniform();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = next_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::next_chi2(double df) {
  if (!(df > 0.0)) {
    throw DomainError("next_chi2: df must be positive");
  }
  return 2.0 * next_gamma(0.5 * df);
}

double RngStream::next_student_t(double df, double scale) {
  if (!(df > 0.0)) {
    throw DomainError("next_student_t: df must be positive");
  }
  if (!(scale > 0.0)) {
    throw DomainError("next_student_t: scale must be positive");
  }
  const double z = next_normal();
  const double w = next_chi2(df);
  return z / std::sqrt(w / df) / scale;
}

} // namespace quadinfer
