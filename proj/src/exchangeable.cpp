#include "bcev/exchangeable.hpp"

#include <stdexcept>

#include "bcev/parallel.hpp"

namespace bcev {

namespace {

void check_sizes(const ReversibleKernel& kernel, const StateVector& x, std::size_t J, std::size_t M) {
  if (J == 0) throw std::domain_error("fan: J must be at least 1");
  if (M == 0) throw std::domain_error("fan: M must be at least 1");
  if (x.size() != kernel.dimension()) {
    throw std::invalid_argument("fan: data dimension does not match the kernel target");
  }
}

std::vector<double> backward_anchor(const ReversibleKernel& kernel, const StateVector& x,
                                    std::size_t J, const RngStream& chain) {
  std::vector<double> anchor = x.vector();
  Rng engine = chain.child(kBackwardPhase).engine();
  run_steps_inplace(kernel, anchor, J, engine, Direction::kBackward);
  return anchor;
}

template <typename PerDraw>
void forward_draws(const ReversibleKernel& kernel, const std::vector<double>& anchor, std::size_t J,
                   std::size_t M, const RngStream& chain, unsigned threads, PerDraw&& per_draw) {
  parallel_for(M, threads, [&](std::size_t m) {
    thread_local std::vector<double> state;
    state = anchor;
    Rng engine = chain.child({kForwardPhase, m}).engine();
    run_steps_inplace(kernel, state, J, engine, Direction::kForward);
    per_draw(m, state);
  });
}

ExchangeableFan chain_fan(const ReversibleKernel& kernel, const StateVector& x, std::size_t J,
                          std::size_t M, const RngStream& chain, unsigned threads) {
  std::vector<double> anchor = backward_anchor(kernel, x, J, chain);
  std::vector<std::vector<double>> draws(M);
  forward_draws(kernel, anchor, J, M, chain, threads,
                [&](std::size_t m, const std::vector<double>& state) { draws[m] = state; });
  ExchangeableFan fan;
  fan.anchor = StateVector(std::move(anchor));
  fan.draws.reserve(M);
  for (auto& d : draws) fan.draws.emplace_back(std::move(d));
  fan.x = x;
  fan.J = J;
  fan.M = M;
  fan.seed_record = chain;
  return fan;
}

FanStatistics chain_statistics(const ReversibleKernel& kernel, const TestStatistic& stat,
                               const StateVector& x, std::size_t J, std::size_t M,
                               const RngStream& chain, unsigned threads) {
  std::vector<double> anchor = backward_anchor(kernel, x, J, chain);
  FanStatistics out;
  out.log_tx = stat.log_t(x);
  out.log_ty.resize(M);
  forward_draws(kernel, anchor, J, M, chain, threads,
                [&](std::size_t m, const std::vector<double>& state) {
                  out.log_ty[m] = stat.log_t(state);
                });
  out.anchor = StateVector(std::move(anchor));
  return out;
}

}  // namespace

ExchangeableFan parallel_fan(const ReversibleKernel& kernel, const StateVector& x, std::size_t J,
                             std::size_t M, const RngStream& rng, unsigned threads) {
  check_sizes(kernel, x, J, M);
  return chain_fan(kernel, x, J, M, rng.child(0), threads);
}

std::vector<ExchangeableFan> multi_fan(const ReversibleKernel& kernel, const StateVector& x,
                                       std::size_t J, std::size_t M, std::size_t S,
                                       const RngStream& rng, unsigned threads) {
  check_sizes(kernel, x, J, M);
  if (S == 0) throw std::domain_error("multi_fan: S must be at least 1");
  std::vector<ExchangeableFan> fans;
  fans.reserve(S);
  for (std::size_t s = 0; s < S; ++s) fans.push_back(chain_fan(kernel, x, J, M, rng.child(s), threads));
  return fans;
}

FanStatistics evaluate_fan(const TestStatistic& stat, const ExchangeableFan& fan) {
  FanStatistics out;
  out.log_tx = stat.log_t(fan.x);
  out.log_ty.reserve(fan.draws.size());
  for (const auto& d : fan.draws) out.log_ty.push_back(stat.log_t(d));
  out.anchor = fan.anchor;
  return out;
}

FanStatistics fan_statistics(const ReversibleKernel& kernel, const TestStatistic& stat,
                             const StateVector& x, std::size_t J, std::size_t M,
                             const RngStream& rng, unsigned threads) {
  check_sizes(kernel, x, J, M);
  return chain_statistics(kernel, stat, x, J, M, rng.child(0), threads);
}

std::vector<FanStatistics> multi_fan_statistics(const ReversibleKernel& kernel,
                                                const TestStatistic& stat, const StateVector& x,
                                                std::size_t J, std::size_t M, std::size_t S,
                                                const RngStream& rng, unsigned threads) {
  check_sizes(kernel, x, J, M);
  if (S == 0) throw std::domain_error("multi_fan_statistics: S must be at least 1");
  std::vector<FanStatistics> out;
  out.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    out.push_back(chain_statistics(kernel, stat, x, J, M, rng.child(s), threads));
  }
  return out;
}

}  // namespace bcev
