#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcev/exchangeable.hpp"
#include "bcev/kernels.hpp"
#include "bcev/model.hpp"

namespace bcev {

/// Max-shifted log(sum exp(v)). Returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);
double log_sum_exp(double first, std::span<const double> rest);

struct EValueResult {
  double log_e = 0.0;
  std::size_t M = 0;
  std::size_t S = 1;
  std::string statistic_id;
  /// Per-chain (multichain) or per-null (composite) log e-values.
  std::vector<double> components;

  double e() const;
};

/// log of (M+1) T(x) / (T(x) + sum_m T(y_m)), computed from log statistics.
/// All -inf gives -inf (0/0 = 0).
double log_bc_evalue(double log_tx, std::span<const double> log_ty);

/// (1 + #{m : T(y_m) >= T(x)}) / (M + 1), exact comparison of log values.
double gof_pvalue(double log_tx, std::span<const double> log_ty);

EValueResult bc_evalue(const TestStatistic& stat, const ExchangeableFan& fan);
EValueResult bc_evalue(const std::string& statistic_id, const FanStatistics& values);
double gof_pvalue(const TestStatistic& stat, const ExchangeableFan& fan);

/// log of the arithmetic mean of exp(log_es).
double log_mean_exp(std::span<const double> log_es);

EValueResult bc_evalue_multichain(const TestStatistic& stat, std::span<const ExchangeableFan> fans);
EValueResult bc_evalue_multichain(const std::string& statistic_id,
                                  std::span<const FanStatistics> chains);

/// Minimum over null members r of the e-value of stats[r] on fans[pairing[r]].
/// An empty pairing means the identity.
EValueResult composite_null_evalue(std::span<const TestStatistic> stats,
                                   std::span<const ExchangeableFan> fans,
                                   std::span<const std::size_t> pairing = {});
EValueResult composite_null_evalue(std::span<const EValueResult> per_null);

struct RegionMember {
  double theta;
  EValueResult evalue;
  bool in_region;
};

struct ConfidenceRegion {
  double alpha = 0.1;
  std::vector<RegionMember> members;

  /// Parameter points with e-value < 1/alpha.
  std::vector<double> region() const;
  /// Re-threshold the stored e-values at another level.
  ConfidenceRegion at_level(double alpha) const;
};

/// Statistic and a kernel stationary for P_theta.
using RegionBuilder = std::function<std::pair<TestStatistic, ReversibleKernel>(double theta)>;

/// Runs the parallel method once per grid point (grid point g rooted at
/// rng.child(g)) and keeps theta iff its e-value is below 1/alpha.
ConfidenceRegion confidence_region(std::span<const double> theta_grid, const RegionBuilder& builder,
                                   const StateVector& x, std::size_t J, std::size_t M, double alpha,
                                   const RngStream& rng, unsigned threads = 1, std::size_t S = 1);

}  // namespace bcev
