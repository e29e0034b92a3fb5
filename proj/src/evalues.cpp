#include "bcev/evalues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "bcev/parallel.hpp"

namespace bcev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool strictly_in_unit(double alpha) { return alpha > 0.0 && alpha < 1.0; }

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double max = kNegInf;
  for (double v : values) max = std::max(max, v);
  if (std::isinf(max)) return max;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - max);
  return max + std::log(acc);
}

double log_sum_exp(double first, std::span<const double> rest) {
  double max = first;
  for (double v : rest) max = std::max(max, v);
  if (std::isinf(max)) return max;
  double acc = std::exp(first - max);
  for (double v : rest) acc += std::exp(v - max);
  return max + std::log(acc);
}

double EValueResult::e() const { return std::exp(log_e); }

double log_bc_evalue(double log_tx, std::span<const double> log_ty) {
  if (log_tx == kNegInf) return kNegInf;
  const double log_m1 = std::log(static_cast<double>(log_ty.size() + 1));
  const double value = log_m1 + log_tx - log_sum_exp(log_tx, log_ty);
  // Rounding in the shifted sum can push the largest attainable value a few
  // ulps above log(M+1).
  return std::min(value, log_m1);
}

double gof_pvalue(double log_tx, std::span<const double> log_ty) {
  std::size_t at_least = 0;
  for (double v : log_ty) {
    if (v >= log_tx) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(log_ty.size() + 1);
}

EValueResult bc_evalue(const std::string& statistic_id, const FanStatistics& values) {
  EValueResult r;
  r.log_e = log_bc_evalue(values.log_tx, values.log_ty);
  r.M = values.log_ty.size();
  r.S = 1;
  r.statistic_id = statistic_id;
  return r;
}

EValueResult bc_evalue(const TestStatistic& stat, const ExchangeableFan& fan) {
  return bc_evalue(stat.id(), evaluate_fan(stat, fan));
}

double gof_pvalue(const TestStatistic& stat, const ExchangeableFan& fan) {
  const FanStatistics v = evaluate_fan(stat, fan);
  return gof_pvalue(v.log_tx, v.log_ty);
}

double log_mean_exp(std::span<const double> log_es) {
  if (log_es.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  return log_sum_exp(log_es) - std::log(static_cast<double>(log_es.size()));
}

EValueResult bc_evalue_multichain(const std::string& statistic_id,
                                  std::span<const FanStatistics> chains) {
  if (chains.empty()) throw ConfigError("bc_evalue_multichain: no chains");
  EValueResult r;
  r.statistic_id = statistic_id;
  r.S = chains.size();
  r.M = chains.front().log_ty.size();
  r.components.reserve(chains.size());
  for (const auto& c : chains) r.components.push_back(log_bc_evalue(c.log_tx, c.log_ty));
  r.log_e = chains.size() == 1 ? r.components.front() : log_mean_exp(r.components);
  return r;
}

EValueResult bc_evalue_multichain(const TestStatistic& stat, std::span<const ExchangeableFan> fans) {
  if (fans.empty()) throw ConfigError("bc_evalue_multichain: no fans");
  std::vector<FanStatistics> chains;
  chains.reserve(fans.size());
  for (const auto& f : fans) chains.push_back(evaluate_fan(stat, f));
  return bc_evalue_multichain(stat.id(), chains);
}

EValueResult composite_null_evalue(std::span<const EValueResult> per_null) {
  if (per_null.empty()) throw ConfigError("composite_null_evalue: empty null family");
  EValueResult r;
  r.M = per_null.front().M;
  r.S = per_null.front().S;
  r.statistic_id = "composite_min";
  r.log_e = std::numeric_limits<double>::infinity();
  for (const auto& e : per_null) {
    r.components.push_back(e.log_e);
    r.log_e = std::min(r.log_e, e.log_e);
  }
  return r;
}

EValueResult composite_null_evalue(std::span<const TestStatistic> stats,
                                   std::span<const ExchangeableFan> fans,
                                   std::span<const std::size_t> pairing) {
  if (stats.empty()) throw ConfigError("composite_null_evalue: empty null family");
  if (pairing.empty() && stats.size() != fans.size()) {
    throw ConfigError("composite_null_evalue: one fan per null member required");
  }
  if (!pairing.empty() && pairing.size() != stats.size()) {
    throw ConfigError("composite_null_evalue: pairing length must match the statistics");
  }
  std::vector<EValueResult> per_null;
  per_null.reserve(stats.size());
  for (std::size_t r = 0; r < stats.size(); ++r) {
    const std::size_t f = pairing.empty() ? r : pairing[r];
    if (f >= fans.size()) throw ConfigError("composite_null_evalue: pairing index out of range");
    per_null.push_back(bc_evalue(stats[r], fans[f]));
  }
  return composite_null_evalue(per_null);
}

std::vector<double> ConfidenceRegion::region() const {
  std::vector<double> out;
  for (const auto& m : members) {
    if (m.in_region) out.push_back(m.theta);
  }
  return out;
}

ConfidenceRegion ConfidenceRegion::at_level(double level) const {
  if (!strictly_in_unit(level)) throw std::domain_error("confidence region: alpha must lie in (0,1)");
  ConfidenceRegion out = *this;
  out.alpha = level;
  const double threshold = -std::log(level);
  for (auto& m : out.members) m.in_region = m.evalue.log_e < threshold;
  return out;
}

ConfidenceRegion confidence_region(std::span<const double> theta_grid, const RegionBuilder& builder,
                                   const StateVector& x, std::size_t J, std::size_t M, double alpha,
                                   const RngStream& rng, unsigned threads, std::size_t S) {
  if (theta_grid.empty()) throw ConfigError("confidence_region: empty parameter grid");
  if (!strictly_in_unit(alpha)) throw std::domain_error("confidence_region: alpha must lie in (0,1)");
  if (!builder) throw ConfigError("confidence_region: missing builder");
  std::vector<std::optional<RegionMember>> members(theta_grid.size());
  parallel_for(theta_grid.size(), threads, [&](std::size_t g) {
    const double theta = theta_grid[g];
    auto [stat, kernel] = builder(theta);
    const auto chains = multi_fan_statistics(kernel, stat, x, J, M, S, rng.child(g));
    EValueResult e = bc_evalue_multichain(stat.id(), chains);
    members[g] = RegionMember{theta, std::move(e), false};
  });
  ConfidenceRegion out;
  out.alpha = alpha;
  for (auto& m : members) out.members.push_back(std::move(*m));
  return out.at_level(alpha);
}

}  // namespace bcev
