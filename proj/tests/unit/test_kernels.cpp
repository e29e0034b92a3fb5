#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bcev/kernels.hpp"

using namespace bcev;

namespace {

struct Stats {
  double mean = 0.0, var = 0.0;
};

Stats moments(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.var += (x - s.mean) * (x - s.mean);
  s.var /= static_cast<double>(v.size() - 1);
  return s;
}

/// One kernel step from exact target draws keeps mean and variance.
void expect_stationary(const ReversibleKernel& k, double mean, double var, std::uint64_t seed) {
  const int n = 100000;
  std::vector<double> before(n), after(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = RngStream(seed).child(i).engine();
    StateVector y = k.target().sample(rng);
    before[i] = y[0];
    after[i] = k.step(y, rng)[0];
  }
  const Stats b = moments(before), a = moments(after);
  const double se_mean = std::sqrt(var / n);
  const double se_var = var * std::sqrt(2.0 / n);
  EXPECT_NEAR(b.mean, mean, 5 * se_mean);
  EXPECT_NEAR(a.mean, mean, 5 * se_mean) << k.id();
  EXPECT_NEAR(a.var, var, 5 * se_var * 1.5) << k.id();
}

double ks_statistic_normal(std::vector<double> v, double mean, double var) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = 0.5 * std::erfc(-(v[i] - mean) / std::sqrt(2.0 * var));
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

}  // namespace

TEST(Ar1Kernel, ComposeClosedForm) {
  const auto law = ar1_compose(0.5, 2);
  EXPECT_DOUBLE_EQ(law.mean_coefficient, 0.25);
  EXPECT_DOUBLE_EQ(law.variance, 0.9375);
  EXPECT_THROW(ar1_compose(1.0, 1), std::domain_error);
  EXPECT_THROW(ar1_kernel(-1.0, 1), std::domain_error);
}

TEST(Ar1Kernel, DetailedBalanceAtSpecPoint) {
  const auto k = ar1_kernel(0.8, 1);
  const std::vector<double> y{0.3}, z{-1.2};
  const double lhs = k.target().log_density(y) + k.log_transition_density(y, z);
  const double rhs = k.target().log_density(z) + k.log_transition_density(z, y);
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(Ar1Kernel, DetailedBalanceRandomPairs) {
  Rng rng = RngStream(2).engine();
  for (double phi : {-0.6, 0.2, 0.8}) {
    const auto k = ar1_kernel(phi, 2, 1.5, 2.0);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> y{4 * rng.normal(), 4 * rng.normal()}, z{4 * rng.normal(), 4 * rng.normal()};
      const double lhs = k.target().log_density(y) + k.log_transition_density(y, z);
      const double rhs = k.target().log_density(z) + k.log_transition_density(z, y);
      ASSERT_NEAR(lhs, rhs, 1e-10);
    }
  }
}

TEST(Ar1Kernel, TransitionDensityIsNormal) {
  const double phi = 0.6;
  const auto k = ar1_kernel(phi, 1);
  const double v = 1 - phi * phi;
  const double y = 0.7, z = -0.4;
  const double expected = -0.5 * std::log(2 * std::numbers::pi * v) - (z - phi * y) * (z - phi * y) / (2 * v);
  EXPECT_NEAR(k.log_transition_density(std::vector<double>{y}, std::vector<double>{z}), expected, 1e-14);
}

TEST(Ar1Kernel, PhiZeroIsIndependentSampling) {
  const auto k = ar1_kernel(0.0, 1);
  const int n = 100000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = RngStream(3).child(i).engine();
    draws[i] = k.step(StateVector{25.0}, rng)[0];
  }
  EXPECT_LT(ks_statistic_normal(draws, 0.0, 1.0), 0.01);
}

TEST(Ar1Kernel, JStepLawMatchesClosedForm) {
  const double phi = 0.5, y = 1.3;
  const std::size_t J = 3;
  const auto k = ar1_kernel(phi, 1);
  const auto law = ar1_compose(phi, J);
  const int n = 10000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = run_steps(k, StateVector{y}, J, RngStream(4).child(i))[0];
  EXPECT_LT(ks_statistic_normal(draws, law.mean_coefficient * y, law.variance), 0.02);

  std::vector<double> big(100000);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = run_steps(k, StateVector{y}, J, RngStream(5).child(i))[0];
  const Stats s = moments(big);
  EXPECT_NEAR(s.mean, law.mean_coefficient * y, 5 * std::sqrt(law.variance / big.size()));
  EXPECT_NEAR(s.var, law.variance, 5 * law.variance * std::sqrt(2.0 / big.size()));
}

TEST(Kernels, Stationarity) {
  expect_stationary(ar1_kernel(0.7, 1), 0.0, 1.0, 10);
  expect_stationary(ar1_kernel(0.7, 1, 2.0, 3.0), 2.0, 3.0, 11);
  expect_stationary(rwm_kernel(gaussian_model(0, 1, 1)), 0.0, 1.0, 12);
  expect_stationary(mala_kernel(gaussian_model(1, 2, 1), 0.8), 1.0, 2.0, 13);
  expect_stationary(exact_kernel(gaussian_model(0, 1, 1)), 0.0, 1.0, 14);
}

TEST(RwmKernel, RejectsMovesOutOfSupport) {
  const auto target = poisson_model(1.0, 1);
  const auto k = rwm_kernel(target, 0.3);
  Rng rng = RngStream(6).engine();
  StateVector y{2.0};
  for (int i = 0; i < 1000; ++i) {
    y = k.step(y, rng);
    ASSERT_EQ(y[0], 2.0);
  }
}

TEST(RwmKernel, AcceptanceRateAndLongRunMean) {
  const auto target = gaussian_model(0, 1, 1);
  const auto k = rwm_kernel(target);
  Rng rng = RngStream(7).engine();
  StateVector y{0.0};
  int accepted = 0;
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const StateVector next = k.step(y, rng);
    if (next[0] != y[0]) ++accepted;
    y = next;
    sum += y[0];
  }
  const double rate = static_cast<double>(accepted) / n;
  EXPECT_GT(rate, 0.2);
  EXPECT_LT(rate, 0.6);
  // Integrated autocorrelation of RWM at this scale is well below 10.
  EXPECT_NEAR(sum / n, 0.0, 5.0 * std::sqrt(10.0 / n));
  EXPECT_THROW(rwm_kernel(target, 0.0), std::domain_error);
}

TEST(MalaKernel, SmallStepAcceptsAlmostAlways) {
  const auto k = mala_kernel(gaussian_model(0, 1, 1), 1e-4);
  Rng rng = RngStream(8).engine();
  StateVector y{0.5};
  int accepted = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const StateVector next = k.step(y, rng);
    if (next[0] != y[0]) ++accepted;
    y = next;
  }
  EXPECT_GE(static_cast<double>(accepted) / n, 0.99);
}

TEST(MalaKernel, ProposalDrift) {
  // With the accept/reject removed (tiny noise, large sample), the mean move
  // from x under N(0,1) is x + (step / 2) (-x).
  const double step = 0.2, x = 1.5;
  const auto k = mala_kernel(gaussian_model(0, 1, 1), step);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng rng = RngStream(9).child(i).engine();
    sum += k.step(StateVector{x}, rng)[0];
  }
  // Accepted moves are centred near the drift target; rejections stay at x.
  const double drift_target = x + 0.5 * step * (-x);
  EXPECT_LT(sum / n, x);
  EXPECT_GT(sum / n, drift_target - 0.05);
}

TEST(MalaKernel, RequiresGradient) {
  const auto no_grad = std::make_shared<const LogModel>(
      "flat", 1, false, [](std::span<const double>) { return 0.0; });
  EXPECT_THROW(mala_kernel(no_grad, 0.1), ConfigError);
}

TEST(ExactKernel, RequiresSampler) {
  const auto no_sampler = std::make_shared<const LogModel>(
      "flat", 1, false, [](std::span<const double>) { return 0.0; });
  EXPECT_THROW(exact_kernel(no_sampler), ConfigError);
  EXPECT_THROW(exact_kernel(poe_student_t_model({{0, 1, 1}}, 1)).log_transition_density(
                   std::vector<double>{0.0}, std::vector<double>{0.0}),
               ConfigError);
}

TEST(ExactKernel, ConsecutiveStepsAreIndependent) {
  const auto k = exact_kernel(gaussian_model(0, 1, 1));
  Rng rng = RngStream(10).engine();
  StateVector y{0.0};
  const int n = 100000;
  std::vector<double> chain(n);
  for (int i = 0; i < n; ++i) {
    y = k.step(y, rng);
    chain[i] = y[0];
  }
  double lag1 = 0.0;
  for (int i = 1; i < n; ++i) lag1 += chain[i] * chain[i - 1];
  EXPECT_NEAR(lag1 / (n - 1), 0.0, 5.0 / std::sqrt(n));
}

TEST(ExactKernel, PoissonDrawsAreIntegers) {
  const auto k = exact_kernel(poisson_model(3.0, 4));
  Rng rng = RngStream(11).engine();
  for (int i = 0; i < 100; ++i) {
    const StateVector s = k.step(StateVector{0, 0, 0, 0}, rng);
    for (double v : s.values()) ASSERT_EQ(v, std::floor(v));
  }
}

TEST(RunSteps, OneStepEqualsStep) {
  const auto k = ar1_kernel(0.5, 2);
  const StateVector start{0.1, -0.2};
  const RngStream s(12);
  Rng rng = s.engine();
  EXPECT_EQ(run_steps(k, start, 1, s), k.step(start, rng));
  EXPECT_THROW(run_steps(k, start, 0, s), std::domain_error);
}

TEST(RunSteps, Deterministic) {
  const auto k = ar1_kernel(0.5, 3);
  const StateVector start{1.0, 2.0, 3.0};
  EXPECT_EQ(run_steps(k, start, 3, RngStream(13, {1, 2})), run_steps(k, start, 3, RngStream(13, {1, 2})));
  EXPECT_NE(run_steps(k, start, 3, RngStream(13, {1, 2})), run_steps(k, start, 3, RngStream(13, {1, 3})));
}

TEST(ReversibleKernel, NonReversibleNeedsBackwardStep) {
  const auto target = gaussian_model(0, 1, 1);
  auto step = [](std::span<double>, Rng&) {};
  EXPECT_THROW(ReversibleKernel("custom", target, step, false), ConfigError);
  EXPECT_NO_THROW(ReversibleKernel("custom", target, step, false, {}, step));
}
