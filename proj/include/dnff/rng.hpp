#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dnff {

std::uint64_t splitmix64(std::uint64_t x);

// Folds a list of integers into one stream id (order-sensitive).
std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts);

// Deterministic random stream keyed by (seed, stream id). Distinct stream ids
// seed the engine through independent splitmix64 outputs, so logical tasks
// (sampler, noising, initialization, shuffles) never share a sequence.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }  // [0, 1)
  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Well-known stream ids for the tasks that draw from a master seed.
namespace streams {
inline constexpr std::uint64_t kSampler = 0x5A4D;
inline constexpr std::uint64_t kNoise = 0x4E01;
inline constexpr std::uint64_t kInit = 0x1417;
inline constexpr std::uint64_t kShuffle = 0x5F1E;
inline constexpr std::uint64_t kSplit = 0x5B17;
inline constexpr std::uint64_t kMetropolis = 0x3E7A;
inline constexpr std::uint64_t kBootstrap = 0xB007;
}  // namespace streams

}  // namespace dnff
