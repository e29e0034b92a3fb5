#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace bcev {

/// Counter-based 64-bit generator. The output at position i is a
/// SplitMix64 finalizer applied to key + (i + 1) * golden-gamma, so a
/// generator is fully described by (key, counter) and never shares state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  std::int64_t poisson(double rate) {
    std::poisson_distribution<std::int64_t> dist(rate);
    return dist(*this);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// A position in the tree of random streams: a base seed plus a path of
/// indices (experiment, time, chain, phase, draw, ...). Streams with
/// different paths are keyed independently; the same (seed, path) always
/// yields the same sequence.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t base_seed) : base_seed_(base_seed) {}
  RngStream(std::uint64_t base_seed, std::vector<std::uint64_t> path)
      : base_seed_(base_seed), path_(std::move(path)) {}

  RngStream child(std::uint64_t index) const {
    RngStream out = *this;
    out.path_.push_back(index);
    return out;
  }

  RngStream child(std::initializer_list<std::uint64_t> indices) const {
    RngStream out = *this;
    out.path_.insert(out.path_.end(), indices);
    return out;
  }

  std::uint64_t base_seed() const { return base_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t key() const {
    std::uint64_t h = Rng::mix(base_seed_ ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t index : path_) {
      h = Rng::mix(h + Rng::kGamma + Rng::mix(index + 0x3c6ef372fe94f82bULL));
    }
    return h;
  }

  Rng engine() const { return Rng(key()); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t base_seed_ = 0;
  std::vector<std::uint64_t> path_;
};

}  // namespace bcev
