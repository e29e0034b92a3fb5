#include "bcev/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace bcev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxRejectionAttempts = 10'000'000;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_dimension(std::span<const double> x, std::size_t n, const std::string& id) {
  if (x.size() != n) {
    std::ostringstream msg;
    msg << id << ": expected state of dimension " << n << ", got " << x.size();
    throw std::invalid_argument(msg.str());
  }
}

std::string format_param(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

StateVector::StateVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::domain_error("StateVector entries must be finite");
  }
}

LogModel::LogModel(std::string id, std::size_t dimension, bool normalized, LogDensityFn log_density,
                   LogGradientFn log_gradient, SamplerFn sampler)
    : id_(std::move(id)),
      dimension_(dimension),
      normalized_(normalized),
      log_density_(std::move(log_density)),
      log_gradient_(std::move(log_gradient)),
      sampler_(std::move(sampler)) {
  if (dimension_ == 0) throw std::domain_error("LogModel dimension must be at least 1");
  if (!log_density_) throw std::invalid_argument("LogModel requires a log-density");
}

double LogModel::log_density(std::span<const double> x) const {
  check_dimension(x, dimension_, id_);
  const double v = log_density_(x);
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    throw std::logic_error(id_ + ": log-density returned NaN or +inf");
  }
  return v;
}

void LogModel::log_gradient(std::span<const double> x, std::span<double> out) const {
  if (!log_gradient_) throw ConfigError(id_ + ": model has no gradient");
  check_dimension(x, dimension_, id_);
  check_dimension(out, dimension_, id_);
  log_gradient_(x, out);
}

std::vector<double> LogModel::log_gradient(const StateVector& x) const {
  std::vector<double> out(dimension_);
  log_gradient(x.values(), out);
  return out;
}

void LogModel::sample(std::span<double> out, Rng& rng) const {
  if (!sampler_) throw ConfigError(id_ + ": model has no exact sampler");
  check_dimension(out, dimension_, id_);
  sampler_(out, rng);
}

StateVector LogModel::sample(Rng& rng) const {
  std::vector<double> out(dimension_);
  sample(out, rng);
  return StateVector(std::move(out));
}

TestStatistic::TestStatistic(std::string id, LogDensityFn log_t)
    : id_(std::move(id)), log_t_(std::move(log_t)) {
  if (!log_t_) throw std::invalid_argument("TestStatistic requires a function");
}

double TestStatistic::log_t(std::span<const double> x) const {
  const double v = log_t_(x);
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    throw std::logic_error(id_ + ": log statistic returned NaN or +inf");
  }
  return v;
}

TestStatistic TestStatistic::shifted(double log_offset) const {
  auto base = log_t_;
  return TestStatistic(id_ + "+" + format_param(log_offset),
                       [base, log_offset](std::span<const double> x) { return base(x) + log_offset; });
}

ModelPtr gaussian_model(double mean, double variance, std::size_t n) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::domain_error("gaussian_model: variance must be positive");
  }
  if (!std::isfinite(mean)) throw std::domain_error("gaussian_model: mean must be finite");
  const double sd = std::sqrt(variance);
  const double log_norm = -kLogSqrt2Pi - 0.5 * std::log(variance);
  auto density = [mean, variance, log_norm](std::span<const double> x) {
    double acc = 0.0;
    for (double xi : x) {
      const double d = xi - mean;
      acc += log_norm - 0.5 * d * d / variance;
    }
    return acc;
  };
  auto gradient = [mean, variance](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - mean) / variance;
  };
  auto sampler = [mean, sd](std::span<double> out, Rng& rng) {
    for (double& v : out) v = mean + sd * rng.normal();
  };
  return std::make_shared<const LogModel>(
      "gaussian(" + format_param(mean) + "," + format_param(variance) + ")", n, true, density,
      gradient, sampler);
}

ModelPtr poisson_model(double rate, std::size_t n) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::domain_error("poisson_model: rate must be positive");
  }
  const double log_rate = std::log(rate);
  auto density = [rate, log_rate](std::span<const double> x) {
    double acc = 0.0;
    for (double xi : x) {
      if (xi < 0.0 || xi != std::floor(xi)) return kNegInf;
      acc += xi * log_rate - rate - std::lgamma(xi + 1.0);
    }
    return acc;
  };
  auto sampler = [rate](std::span<double> out, Rng& rng) {
    for (double& v : out) v = static_cast<double>(rng.poisson(rate));
  };
  return std::make_shared<const LogModel>("poisson(" + format_param(rate) + ")", n, true, density,
                                          LogGradientFn{}, sampler);
}

ModelPtr poe_student_t_model(std::vector<Expert> experts, std::size_t n) {
  if (experts.empty()) throw std::domain_error("poe_student_t_model: at least one expert required");
  for (const Expert& e : experts) {
    if (!(e.scale > 0.0) || !(e.dof > 0.0) || !std::isfinite(e.center)) {
      throw std::domain_error("poe_student_t_model: scale and dof must be positive");
    }
  }
  auto density = [experts](std::span<const double> x) {
    double acc = 0.0;
    for (double xi : x) {
      for (const Expert& e : experts) {
        const double z = (xi - e.center) / e.scale;
        acc -= 0.5 * (e.dof + 1.0) * std::log1p(z * z / e.dof);
      }
    }
    return acc;
  };
  auto gradient = [experts](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double g = 0.0;
      for (const Expert& e : experts) {
        const double d = x[i] - e.center;
        g -= (e.dof + 1.0) * d / (e.scale * e.scale * e.dof + d * d);
      }
      out[i] = g;
    }
  };
  // Each expert kernel is bounded by 1, so a draw from expert 0's Student-t
  // law accepted with probability prod_{w>0} g_w(x) is an exact draw.
  auto sampler = [experts](std::span<double> out, Rng& rng) {
    const Expert& lead = experts.front();
    std::student_t_distribution<double> proposal(lead.dof);
    for (double& v : out) {
      for (std::size_t attempt = 0;; ++attempt) {
        if (attempt == kMaxRejectionAttempts) {
          throw std::runtime_error("poe_student_t_model: rejection sampler did not accept");
        }
        const double x = lead.center + lead.scale * proposal(rng);
        double log_accept = 0.0;
        for (std::size_t w = 1; w < experts.size(); ++w) {
          const double z = (x - experts[w].center) / experts[w].scale;
          log_accept -= 0.5 * (experts[w].dof + 1.0) * std::log1p(z * z / experts[w].dof);
        }
        if (std::log(rng.uniform()) < log_accept) {
          v = x;
          break;
        }
      }
    }
  };
  std::ostringstream id;
  id << "poe_t(";
  for (std::size_t w = 0; w < experts.size(); ++w) {
    if (w) id << ";";
    id << experts[w].center << ":" << experts[w].scale << ":" << experts[w].dof;
  }
  id << ")";
  return std::make_shared<const LogModel>(id.str(), n, false, density, gradient, sampler);
}

double log_ratio(double log_numerator, double log_denominator) {
  if (log_denominator == kNegInf) {
    return log_numerator == kNegInf ? kNegInf : kLogRatioCap;
  }
  return log_numerator - log_denominator;
}

TestStatistic ulr_statistic(ModelPtr numerator, ModelPtr denominator) {
  if (!numerator || !denominator) throw std::invalid_argument("ulr_statistic: null model");
  std::string id = "ulr(" + numerator->id() + "/" + denominator->id() + ")";
  return TestStatistic(std::move(id), [numerator, denominator](std::span<const double> x) {
    return log_ratio(numerator->log_density(x), denominator->log_density(x));
  });
}

TestStatistic power_ulr_statistic(ModelPtr numerator, ModelPtr denominator, double eta) {
  if (!numerator || !denominator) throw std::invalid_argument("power_ulr_statistic: null model");
  if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("power_ulr_statistic: eta must lie in (0,1)");
  std::string id = "power_ulr(" + numerator->id() + "/" + denominator->id() + "," +
                   format_param(eta) + ")";
  return TestStatistic(std::move(id), [numerator, denominator, eta](std::span<const double> x) {
    const double r = log_ratio(numerator->log_density(x), denominator->log_density(x));
    if (r == kLogRatioCap) return kLogRatioCap;
    return eta * r;
  });
}

namespace {

// Running count, mean and sum of squared deviations (Welford).
struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
};

Moments history_moments(const std::vector<StateVector>& history) {
  Moments m;
  for (const auto& h : history) {
    for (double v : h.values()) m.add(v);
  }
  return m;
}

double log_fitted_over_null(std::span<const double> x, double mean, double var) {
  if (!(var > 0.0)) return kNegInf;
  double acc = 0.0;
  for (double xi : x) {
    const double d = xi - mean;
    acc += -0.5 * std::log(var) - 0.5 * d * d / var + 0.5 * xi * xi;
  }
  return acc;
}

}  // namespace

TestStatistic plug_in_gaussian_statistic(std::vector<StateVector> history) {
  const Moments base = history_moments(history);
  return TestStatistic("plug_in_gaussian", [base](std::span<const double> x) {
    Moments m = base;
    for (double v : x) m.add(v);
    if (m.count < 2) return kNegInf;
    return log_fitted_over_null(x, m.mean, m.m2 / static_cast<double>(m.count));
  });
}

TestStatistic predictable_plug_in_gaussian_statistic(std::vector<StateVector> history) {
  const Moments m = history_moments(history);
  const double var = m.count >= 1 ? m.m2 / static_cast<double>(m.count) : 0.0;
  return TestStatistic("predictable_plug_in_gaussian", [mean = m.mean, var](std::span<const double> x) {
    return log_fitted_over_null(x, mean, var);
  });
}

TestStatistic gaussian_mean_mle_statistic(double theta, double variance) {
  if (!(variance > 0.0)) throw std::domain_error("gaussian_mean_mle_statistic: variance must be positive");
  return TestStatistic("gaussian_mean_mle(" + format_param(theta) + ")",
                       [theta, variance](std::span<const double> x) {
                         double sum = 0.0;
                         for (double v : x) sum += v;
                         const double n = static_cast<double>(x.size());
                         const double d = sum / n - theta;
                         return n * d * d / (2.0 * variance);
                       });
}

}  // namespace bcev
