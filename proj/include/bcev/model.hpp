#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcev/rng.hpp"

namespace bcev {

/// Raised when a component is asked to do something its configuration does
/// not support (missing sampler, mismatched lengths, empty grid, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point in the sample space. Entries are always finite.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<double> values);
  StateVector(std::initializer_list<double> values) : StateVector(std::vector<double>(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<double> values_;
};

/// log(x) with log(0) mapped to -inf and +inf rejected.
using LogDensityFn = std::function<double(std::span<const double>)>;
using LogGradientFn = std::function<void(std::span<const double>, std::span<double>)>;
using SamplerFn = std::function<void(std::span<double>, Rng&)>;

/// An (optionally unnormalized) log-density over R^n. Immutable; share via
/// std::shared_ptr<const LogModel>.
class LogModel {
 public:
  LogModel(std::string id, std::size_t dimension, bool normalized, LogDensityFn log_density,
           LogGradientFn log_gradient = {}, SamplerFn sampler = {});

  const std::string& id() const { return id_; }
  std::size_t dimension() const { return dimension_; }
  bool normalized() const { return normalized_; }
  bool has_gradient() const { return static_cast<bool>(log_gradient_); }
  bool has_sampler() const { return static_cast<bool>(sampler_); }

  double log_density(std::span<const double> x) const;
  double log_density(const StateVector& x) const { return log_density(x.values()); }

  void log_gradient(std::span<const double> x, std::span<double> out) const;
  std::vector<double> log_gradient(const StateVector& x) const;

  void sample(std::span<double> out, Rng& rng) const;
  StateVector sample(Rng& rng) const;

 private:
  std::string id_;
  std::size_t dimension_;
  bool normalized_;
  LogDensityFn log_density_;
  LogGradientFn log_gradient_;
  SamplerFn sampler_;
};

using ModelPtr = std::shared_ptr<const LogModel>;

/// A nonnegative test statistic, evaluated as log T(x).
class TestStatistic {
 public:
  TestStatistic(std::string id, LogDensityFn log_t);

  const std::string& id() const { return id_; }
  double log_t(std::span<const double> x) const;
  double log_t(const StateVector& x) const { return log_t(x.values()); }

  /// The same statistic shifted by a constant in log space.
  TestStatistic shifted(double log_offset) const;

 private:
  std::string id_;
  LogDensityFn log_t_;
};

/// Finite sentinel used when the denominator density vanishes but the
/// numerator does not.
inline constexpr double kLogRatioCap = 700.0;

struct Expert {
  double center;
  double scale;
  double dof;
};

ModelPtr gaussian_model(double mean, double variance, std::size_t n);
ModelPtr poisson_model(double rate, std::size_t n);
ModelPtr poe_student_t_model(std::vector<Expert> experts, std::size_t n);

/// log(numerator / denominator) with 0/0 = 0 and x/0 capped at kLogRatioCap.
double log_ratio(double log_numerator, double log_denominator);

TestStatistic ulr_statistic(ModelPtr numerator, ModelPtr denominator);
TestStatistic power_ulr_statistic(ModelPtr numerator, ModelPtr denominator, double eta);

/// N(x; mean, var) / N(x; 0, 1) with mean and (1/t)-variance fitted on the
/// history together with the evaluated point itself.
TestStatistic plug_in_gaussian_statistic(std::vector<StateVector> history);

/// Same ratio but fitted on the history only (a predictable plug-in, which
/// is already an e-value under N(0,1)). Degenerate fits give -inf.
TestStatistic predictable_plug_in_gaussian_statistic(std::vector<StateVector> history);

/// Full-data plug-in for a Gaussian mean with known variance:
/// prod N(x_i; mean(x), var) / prod N(x_i; theta, var) = exp(n (xbar - theta)^2 / (2 var)).
TestStatistic gaussian_mean_mle_statistic(double theta, double variance);

}  // namespace bcev
