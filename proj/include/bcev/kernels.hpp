#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "bcev/model.hpp"
#include "bcev/rng.hpp"

namespace bcev {

/// In-place one-step transition: state <- draw from K(state, .).
using StepFn = std::function<void(std::span<double>, Rng&)>;
using TransitionDensityFn = std::function<double(std::span<const double>, std::span<const double>)>;

/// A one-step Markov transition with stationary target. The backward step
/// defaults to the forward step, which is exact for reversible kernels.
class ReversibleKernel {
 public:
  ReversibleKernel(std::string id, ModelPtr target, StepFn forward, bool reversible,
                   TransitionDensityFn log_transition_density = {}, StepFn backward = {});

  const std::string& id() const { return id_; }
  const LogModel& target() const { return *target_; }
  const ModelPtr& target_ptr() const { return target_; }
  std::size_t dimension() const { return target_->dimension(); }
  bool reversible() const { return reversible_; }
  bool has_transition_density() const { return static_cast<bool>(log_transition_density_); }

  void step_forward(std::span<double> state, Rng& rng) const;
  void step_backward(std::span<double> state, Rng& rng) const;

  /// Convenience value-returning forward step.
  StateVector step(const StateVector& from, Rng& rng) const;

  double log_transition_density(std::span<const double> from, std::span<const double> to) const;

 private:
  std::string id_;
  ModelPtr target_;
  StepFn forward_;
  StepFn backward_;
  bool reversible_;
  TransitionDensityFn log_transition_density_;
};

/// Law of the J-step AR(1) transition from y: N(mean_coefficient * y, variance)
/// per coordinate (in standardized units).
struct GaussianTransitionLaw {
  double mean_coefficient;
  double variance;
};

/// y' = m + phi (y - m) + sqrt(v (1 - phi^2)) eps, stationary for N(m, v)^n.
/// Defaults give the standard-normal target.
ReversibleKernel ar1_kernel(double phi, std::size_t n, double mean = 0.0, double variance = 1.0);

/// Closed-form J-step law of the standardized AR(1) kernel: N(phi^J y, 1 - phi^{2J}).
GaussianTransitionLaw ar1_compose(double phi, std::size_t J);

inline constexpr double kDefaultProposalSd = 2.4;

ReversibleKernel rwm_kernel(ModelPtr target, double proposal_sd = kDefaultProposalSd);
ReversibleKernel mala_kernel(ModelPtr target, double step_size);
ReversibleKernel exact_kernel(ModelPtr target);

enum class Direction { kForward, kBackward };

/// J sequential steps from start; deterministic in (kernel, start, J, rng).
void run_steps_inplace(const ReversibleKernel& kernel, std::span<double> state, std::size_t J,
                       Rng& rng, Direction direction = Direction::kForward);
StateVector run_steps(const ReversibleKernel& kernel, const StateVector& start, std::size_t J,
                      const RngStream& rng, Direction direction = Direction::kForward);

}  // namespace bcev
