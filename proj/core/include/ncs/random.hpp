#pragma once

#include <cstdint>
#include <limits>

namespace ncs {

/// xoshiro256** generator addressed by (master_seed, stream_id).
///
/// The 256-bit state is filled by SplitMix64 starting from
/// master_seed ^ (stream_id * 0x9E3779B97F4A7C15), so every worker or trial can
/// own an independent stream derived from one master seed. Normal variates use
/// the Box-Muller transform on uniform() so the whole pipeline is reproducible
/// bit-for-bit with this header, independent of the standard library.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ncs
