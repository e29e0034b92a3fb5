#include "bcev/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace bcev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string with_param(const std::string& name, double v) {
  std::ostringstream s;
  s << name << "(" << v << ")";
  return s.str();
}

// Metropolis accept step given log target values; -inf proposals never accepted.
bool accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio) || log_ratio == kNegInf) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

}  // namespace

ReversibleKernel::ReversibleKernel(std::string id, ModelPtr target, StepFn forward, bool reversible,
                                   TransitionDensityFn log_transition_density, StepFn backward)
    : id_(std::move(id)),
      target_(std::move(target)),
      forward_(std::move(forward)),
      backward_(std::move(backward)),
      reversible_(reversible),
      log_transition_density_(std::move(log_transition_density)) {
  if (!target_) throw std::invalid_argument("ReversibleKernel requires a target");
  if (!forward_) throw std::invalid_argument("ReversibleKernel requires a step function");
  if (!reversible_ && !backward_) {
    throw ConfigError(id_ + ": non-reversible kernels need an explicit backward step");
  }
}

void ReversibleKernel::step_forward(std::span<double> state, Rng& rng) const { forward_(state, rng); }

void ReversibleKernel::step_backward(std::span<double> state, Rng& rng) const {
  if (backward_) {
    backward_(state, rng);
  } else {
    forward_(state, rng);
  }
}

StateVector ReversibleKernel::step(const StateVector& from, Rng& rng) const {
  std::vector<double> buf = from.vector();
  forward_(buf, rng);
  return StateVector(std::move(buf));
}

double ReversibleKernel::log_transition_density(std::span<const double> from,
                                                std::span<const double> to) const {
  if (!log_transition_density_) throw ConfigError(id_ + ": no closed-form transition density");
  return log_transition_density_(from, to);
}

ReversibleKernel ar1_kernel(double phi, std::size_t n, double mean, double variance) {
  if (!(std::abs(phi) < 1.0)) throw std::domain_error("ar1_kernel: |phi| must be < 1");
  if (!(variance > 0.0)) throw std::domain_error("ar1_kernel: variance must be positive");
  const double noise_var = variance * (1.0 - phi * phi);
  const double noise_sd = std::sqrt(noise_var);
  auto step = [phi, mean, noise_sd](std::span<double> y, Rng& rng) {
    for (double& v : y) v = mean + phi * (v - mean) + noise_sd * rng.normal();
  };
  auto density = [phi, mean, noise_var](std::span<const double> from, std::span<const double> to) {
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * noise_var);
    double acc = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      const double d = to[i] - mean - phi * (from[i] - mean);
      acc += log_norm - 0.5 * d * d / noise_var;
    }
    return acc;
  };
  return ReversibleKernel(with_param("ar1", phi), gaussian_model(mean, variance, n), step, true,
                          density);
}

GaussianTransitionLaw ar1_compose(double phi, std::size_t J) {
  if (!(std::abs(phi) < 1.0)) throw std::domain_error("ar1_compose: |phi| must be < 1");
  if (J == 0) throw std::domain_error("ar1_compose: J must be at least 1");
  const double coef = std::pow(phi, static_cast<double>(J));
  return {coef, 1.0 - coef * coef};
}

ReversibleKernel rwm_kernel(ModelPtr target, double proposal_sd) {
  if (!target) throw std::invalid_argument("rwm_kernel: null target");
  if (!(proposal_sd > 0.0)) throw std::domain_error("rwm_kernel: proposal_sd must be positive");
  const LogModel* model = target.get();
  auto step = [model, proposal_sd](std::span<double> y, Rng& rng) {
    thread_local std::vector<double> proposal;
    proposal.assign(y.begin(), y.end());
    for (double& v : proposal) v += proposal_sd * rng.normal();
    const double current = model->log_density(y);
    const double proposed = model->log_density(proposal);
    double log_ratio = proposed - current;
    if (current == kNegInf) log_ratio = proposed == kNegInf ? kNegInf : 0.0;
    if (accept(log_ratio, rng)) std::copy(proposal.begin(), proposal.end(), y.begin());
  };
  return ReversibleKernel(with_param("rwm", proposal_sd), std::move(target), step, true);
}

ReversibleKernel mala_kernel(ModelPtr target, double step_size) {
  if (!target) throw std::invalid_argument("mala_kernel: null target");
  if (!target->has_gradient()) throw ConfigError("mala_kernel: target has no gradient");
  if (!(step_size > 0.0)) throw std::domain_error("mala_kernel: step_size must be positive");
  const LogModel* model = target.get();
  auto step = [model, step_size](std::span<double> y, Rng& rng) {
    const std::size_t n = y.size();
    thread_local std::vector<double> grad_y, proposal, grad_p;
    grad_y.resize(n);
    grad_p.resize(n);
    proposal.resize(n);
    const double sd = std::sqrt(step_size);
    model->log_gradient(y, grad_y);
    for (std::size_t i = 0; i < n; ++i) {
      proposal[i] = y[i] + 0.5 * step_size * grad_y[i] + sd * rng.normal();
    }
    const double current = model->log_density(y);
    const double proposed = model->log_density(proposal);
    if (proposed == kNegInf) {
      rng.uniform();
      return;
    }
    model->log_gradient(proposal, grad_p);
    // log q(y | y') - log q(y' | y)
    double log_q_ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double back = y[i] - proposal[i] - 0.5 * step_size * grad_p[i];
      const double fwd = proposal[i] - y[i] - 0.5 * step_size * grad_y[i];
      log_q_ratio += -(back * back - fwd * fwd) / (2.0 * step_size);
    }
    const double log_ratio = (current == kNegInf) ? 0.0 : proposed - current + log_q_ratio;
    if (accept(log_ratio, rng)) std::copy(proposal.begin(), proposal.end(), y.begin());
  };
  return ReversibleKernel(with_param("mala", step_size), std::move(target), step, true);
}

ReversibleKernel exact_kernel(ModelPtr target) {
  if (!target) throw std::invalid_argument("exact_kernel: null target");
  if (!target->has_sampler()) throw ConfigError("exact_kernel: target has no exact sampler");
  const LogModel* model = target.get();
  auto step = [model](std::span<double> y, Rng& rng) { model->sample(y, rng); };
  auto density = [model](std::span<const double>, std::span<const double> to) {
    return model->log_density(to);
  };
  return ReversibleKernel("exact", std::move(target), step, true,
                          model->normalized() ? TransitionDensityFn(density) : TransitionDensityFn{});
}

void run_steps_inplace(const ReversibleKernel& kernel, std::span<double> state, std::size_t J,
                       Rng& rng, Direction direction) {
  for (std::size_t j = 0; j < J; ++j) {
    if (direction == Direction::kForward) {
      kernel.step_forward(state, rng);
    } else {
      kernel.step_backward(state, rng);
    }
  }
}

StateVector run_steps(const ReversibleKernel& kernel, const StateVector& start, std::size_t J,
                      const RngStream& rng, Direction direction) {
  if (J == 0) throw std::domain_error("run_steps: J must be at least 1");
  std::vector<double> buf = start.vector();
  Rng engine = rng.engine();
  run_steps_inplace(kernel, buf, J, engine, direction);
  return StateVector(std::move(buf));
}

}  // namespace bcev
