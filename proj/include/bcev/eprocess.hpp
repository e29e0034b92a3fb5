#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bcev/exchangeable.hpp"
#include "bcev/kernels.hpp"
#include "bcev/model.hpp"
#include "bcev/rng.hpp"

namespace bcev {

/// Linear per-time e-values are clipped here before they enter the betting
/// objective; wealth itself is tracked in log space.
inline constexpr double kMaxLinearU = 1e300;
inline constexpr double kDefaultGrapaInitialLambda = 0.5;

struct BettingStrategy {
  enum class Kind { kFixed, kGrapa };
  Kind kind = Kind::kFixed;
  /// Fixed bet, or the initial bet for GRAPA.
  double lambda = 1.0;

  static BettingStrategy fixed(double lambda);
  static BettingStrategy grapa(double initial_lambda = kDefaultGrapaInitialLambda);
};

/// Running state of a Besag-Clifford e-process. Passed by value between steps.
struct EProcessState {
  std::size_t t = 0;
  double log_wealth = 0.0;
  std::vector<double> u_history;
  std::vector<double> log_u_history;
  std::vector<double> lambda_history;
  /// log wealth after each step, index i holding time i + 1.
  std::vector<double> log_wealth_trace;
};

/// argmax over [0,1] of mean_i log(1 - lambda + lambda U_i); lambda0 when
/// the history is empty.
double grapa_lambda(std::span<const double> u_history, double lambda0 = kDefaultGrapaInitialLambda);

/// Mean of log(1 - lambda + lambda U_i).
double grapa_objective(std::span<const double> u_history, double lambda);

/// Next bet, a function of past U values only.
double next_lambda(const BettingStrategy& strategy, std::span<const double> u_history);

/// Multiply wealth by (1 - lambda + lambda U) for the given log U.
EProcessState bet(const EProcessState& state, double log_u, const BettingStrategy& strategy);

/// Record a time step at which no bet is placed (wealth unchanged, nothing
/// added to the betting history).
EProcessState skip(const EProcessState& state);

struct FanConfig {
  std::size_t J = 1;
  std::size_t M = 100;
  std::size_t S = 1;
};

/// One time step: U_t from a fresh fan rooted at process_rng.child(t), then
/// a bet. Distinct t always use disjoint streams.
EProcessState step(const EProcessState& state, const StateVector& x_t, const TestStatistic& stat_t,
                   const ReversibleKernel& kernel, const FanConfig& fan,
                   const BettingStrategy& strategy, const RngStream& process_rng,
                   unsigned threads = 1);

/// First t (1-based) with log wealth >= log(1/alpha).
std::optional<std::size_t> stopping_time(std::span<const double> log_wealth_trace, double alpha);

struct RunningAverageResult {
  std::optional<std::size_t> stop_chain;
  std::vector<double> chain_log_e;
  /// log of the running mean after each chain.
  std::vector<double> log_mean_trace;
};

/// Running-average test over precomputed per-chain log e-values.
RunningAverageResult running_average_stop(std::span<const double> chain_log_e, double alpha);

/// Grows the number of chains one at a time (chain s rooted at rng.child(s))
/// and stops at the first S whose averaged e-value reaches 1/alpha.
RunningAverageResult running_average_lrt(const StateVector& x, const TestStatistic& stat,
                                         const ReversibleKernel& kernel, std::size_t J,
                                         std::size_t M, double alpha, std::size_t max_S,
                                         const RngStream& rng, unsigned threads = 1);

}  // namespace bcev
