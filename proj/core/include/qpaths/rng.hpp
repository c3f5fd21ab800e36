#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qpaths {

/// SplitMix64 finalizer; used to derive stream ids from structured keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Order-sensitive hash of a key tuple, e.g. (q index, T index, seed, chain).
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) noexcept;

/// A reproducible random stream identified by (seed, stream_id).
///
/// The same pair always yields the same sequence within one build; distinct
/// pairs seed the underlying engine through different seed sequences.
/// Satisfies UniformRandomBitGenerator so <random> distributions accept it.
class RngStream {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream with the same seed and stream id derive_stream_id({stream_id, index}).
  [[nodiscard]] RngStream substream(std::uint64_t index) const;

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace qpaths
