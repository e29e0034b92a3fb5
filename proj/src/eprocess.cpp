#include "bcev/eprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bcev/evalues.hpp"
#include "bcev/golden.hpp"

namespace bcev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGrapaTolerance = 1e-6;

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::domain_error("bet size must lie in [0,1]");
}

double log_bet_factor(double lambda, double log_u, double u) {
  if (lambda == 0.0) return 0.0;
  if (lambda == 1.0) return log_u;
  return std::log(1.0 - lambda + lambda * u);
}

}  // namespace

BettingStrategy BettingStrategy::fixed(double lambda) {
  check_lambda(lambda);
  return {Kind::kFixed, lambda};
}

BettingStrategy BettingStrategy::grapa(double initial_lambda) {
  check_lambda(initial_lambda);
  return {Kind::kGrapa, initial_lambda};
}

double grapa_objective(std::span<const double> u_history, double lambda) {
  double acc = 0.0;
  for (double u : u_history) {
    const double factor = 1.0 - lambda + lambda * u;
    if (factor <= 0.0) return kNegInf;
    acc += std::log(factor);
  }
  return acc / static_cast<double>(u_history.size());
}

double grapa_lambda(std::span<const double> u_history, double lambda0) {
  check_lambda(lambda0);
  if (u_history.empty()) return lambda0;
  for (double u : u_history) {
    if (u < 0.0 || std::isnan(u)) throw std::domain_error("grapa_lambda: e-values must be nonnegative");
  }
  // The objective is concave; its one-sided derivatives at the endpoints
  // decide boundary optima exactly.
  double slope_at_zero = 0.0;
  double slope_at_one = 0.0;
  for (double u : u_history) {
    slope_at_zero += u - 1.0;
    slope_at_one += u > 0.0 ? 1.0 - 1.0 / u : kNegInf;
  }
  if (slope_at_zero <= 0.0) return 0.0;
  if (slope_at_one >= 0.0) return 1.0;
  return golden_section_maximize(
             [&](double lambda) { return grapa_objective(u_history, lambda); }, 0.0, 1.0,
             kGrapaTolerance)
      .argmax;
}

double next_lambda(const BettingStrategy& strategy, std::span<const double> u_history) {
  switch (strategy.kind) {
    case BettingStrategy::Kind::kFixed:
      return strategy.lambda;
    case BettingStrategy::Kind::kGrapa:
      return grapa_lambda(u_history, strategy.lambda);
  }
  return strategy.lambda;
}

EProcessState bet(const EProcessState& state, double log_u, const BettingStrategy& strategy) {
  if (std::isnan(log_u) || log_u == std::numeric_limits<double>::infinity()) {
    throw std::domain_error("bet: log e-value must be finite or -inf");
  }
  const double lambda = next_lambda(strategy, state.u_history);
  check_lambda(lambda);
  const double u = std::min(std::exp(log_u), kMaxLinearU);
  EProcessState next = state;
  next.t = state.t + 1;
  next.log_wealth = state.log_wealth + log_bet_factor(lambda, log_u, u);
  next.u_history.push_back(u);
  next.log_u_history.push_back(log_u);
  next.lambda_history.push_back(lambda);
  next.log_wealth_trace.push_back(next.log_wealth);
  return next;
}

EProcessState skip(const EProcessState& state) {
  EProcessState next = state;
  next.t = state.t + 1;
  next.log_wealth_trace.push_back(next.log_wealth);
  return next;
}

EProcessState step(const EProcessState& state, const StateVector& x_t, const TestStatistic& stat_t,
                   const ReversibleKernel& kernel, const FanConfig& fan,
                   const BettingStrategy& strategy, const RngStream& process_rng,
                   unsigned threads) {
  const RngStream time_rng = process_rng.child(state.t + 1);
  const auto chains = multi_fan_statistics(kernel, stat_t, x_t, fan.J, fan.M, fan.S, time_rng, threads);
  const EValueResult u = bc_evalue_multichain(stat_t.id(), chains);
  return bet(state, u.log_e, strategy);
}

std::optional<std::size_t> stopping_time(std::span<const double> log_wealth_trace, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("stopping_time: alpha must lie in (0,1)");
  const double threshold = -std::log(alpha);
  for (std::size_t i = 0; i < log_wealth_trace.size(); ++i) {
    if (log_wealth_trace[i] >= threshold) return i + 1;
  }
  return std::nullopt;
}

RunningAverageResult running_average_stop(std::span<const double> chain_log_e, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("running average: alpha must lie in (0,1)");
  const double threshold = -std::log(alpha);
  RunningAverageResult out;
  for (double log_e : chain_log_e) {
    out.chain_log_e.push_back(log_e);
    out.log_mean_trace.push_back(log_mean_exp(out.chain_log_e));
    if (out.log_mean_trace.back() >= threshold) {
      out.stop_chain = out.chain_log_e.size();
      break;
    }
  }
  return out;
}

RunningAverageResult running_average_lrt(const StateVector& x, const TestStatistic& stat,
                                         const ReversibleKernel& kernel, std::size_t J,
                                         std::size_t M, double alpha, std::size_t max_S,
                                         const RngStream& rng, unsigned threads) {
  if (max_S == 0) throw std::domain_error("running_average_lrt: max_S must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("running_average_lrt: alpha must lie in (0,1)");
  const double threshold = -std::log(alpha);
  RunningAverageResult out;
  for (std::size_t s = 0; s < max_S; ++s) {
    const FanStatistics chain = fan_statistics(kernel, stat, x, J, M, rng.child(s), threads);
    out.chain_log_e.push_back(log_bc_evalue(chain.log_tx, chain.log_ty));
    out.log_mean_trace.push_back(log_mean_exp(out.chain_log_e));
    if (out.log_mean_trace.back() >= threshold) {
      out.stop_chain = s + 1;
      break;
    }
  }
  return out;
}

}  // namespace bcev
