#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bcev/kernels.hpp"
#include "bcev/model.hpp"
#include "bcev/rng.hpp"

namespace bcev {

/// Output of the parallel method: J backward steps from x to the anchor,
/// then M independent J-step forward runs from the anchor.
struct ExchangeableFan {
  StateVector anchor;
  std::vector<StateVector> draws;
  StateVector x;
  std::size_t J = 0;
  std::size_t M = 0;
  /// Root of the chain's stream; the backward run uses child(kBackwardPhase),
  /// draw m uses child({kForwardPhase, m}).
  RngStream seed_record;
};

inline constexpr std::uint64_t kBackwardPhase = 0;
inline constexpr std::uint64_t kForwardPhase = 1;

/// Single chain. Equivalent to multi_fan(..., S = 1, rng)[0].
ExchangeableFan parallel_fan(const ReversibleKernel& kernel, const StateVector& x, std::size_t J,
                             std::size_t M, const RngStream& rng, unsigned threads = 1);

/// S chains, chain s rooted at rng.child(s), each with its own backward run.
std::vector<ExchangeableFan> multi_fan(const ReversibleKernel& kernel, const StateVector& x,
                                       std::size_t J, std::size_t M, std::size_t S,
                                       const RngStream& rng, unsigned threads = 1);

/// Statistic values of a fan, without the states.
struct FanStatistics {
  double log_tx = 0.0;
  std::vector<double> log_ty;
  StateVector anchor;
};

FanStatistics evaluate_fan(const TestStatistic& stat, const ExchangeableFan& fan);

/// Fused fan-and-evaluate: identical values to evaluate_fan(stat,
/// parallel_fan(...)) without materializing the M draws.
FanStatistics fan_statistics(const ReversibleKernel& kernel, const TestStatistic& stat,
                             const StateVector& x, std::size_t J, std::size_t M,
                             const RngStream& rng, unsigned threads = 1);

std::vector<FanStatistics> multi_fan_statistics(const ReversibleKernel& kernel,
                                                const TestStatistic& stat, const StateVector& x,
                                                std::size_t J, std::size_t M, std::size_t S,
                                                const RngStream& rng, unsigned threads = 1);

}  // namespace bcev
