#pragma once

#include <cstddef>
#include <functional>

#include "bcev/rng.hpp"

/// Closed forms for the AR(1) sampler with standard-normal target, used as
/// reference values by the tests. Everything is returned in log space unless
/// stated otherwise.
namespace bcev::oracles {

/// log E(x) for N(mu,1) against N(0,1): mu x - mu^2 / 2.
double lr_mean_shift(double x, double mu);

/// log Delta^J(y0) = phi^J mu y0 - phi^{2J} mu^2 / 2.
double delta_j_mean_shift(double y0, double phi, double mu, std::size_t J);

/// E^Q[log Delta^J] = phi^{2J} mu^2 / 2.
double epower_delta_mean_shift(double phi, double mu, std::size_t J);

/// log E(x) for N(0,sigma2) against N(0,1).
double lr_rescale(double x, double sigma2);

/// log Delta^J(y0) for the rescaling problem, with the J-step AR(1) law
/// N(phi^J y0, 1 - phi^{2J}). Requires (1 - sigma2)/sigma2 > -1/(1 - phi^{2J}).
double delta_j_rescale(double y0, double phi, double sigma2, std::size_t J);
double delta1_rescale(double y0, double phi, double sigma2);

/// KL(N(phi^J mu, 1), N(0,1)).
double kl_mixing_mean_shift(double phi, double mu, std::size_t J);
/// KL(N(0, phi^{2J} sigma2 + 1 - phi^{2J}), N(0,1)).
double kl_mixing_rescale(double phi, double sigma2, std::size_t J);

struct DeltaEVariableCheck {
  double mean_delta;      ///< Monte Carlo E^P[Delta^J(X)]
  double se_delta;
  double mean_inv_delta;  ///< Monte Carlo E^Q[1/Delta^J(X)]
  double se_inv_delta;
};

/// Simulates Delta^J(X) = exp{phi^{2J} mu X + phi^J mu sqrt(1 - phi^{2J}) delta - phi^{2J} mu^2 / 2}
/// with X ~ N(0,1) and with X ~ N(mu,1).
DeltaEVariableCheck exact_delta_evariable_check(double phi, double mu, std::size_t J,
                                                std::size_t n_mc, const RngStream& rng);

/// Trapezoid rule on `points` equally spaced nodes over [lo, hi].
double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t points);

}  // namespace bcev::oracles
