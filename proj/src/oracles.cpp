#include "bcev/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcev::oracles {

namespace {

void check_phi(double phi) {
  if (!(std::abs(phi) < 1.0)) throw std::domain_error("|phi| must be < 1");
}

double phi_pow(double phi, std::size_t J) { return std::pow(phi, static_cast<double>(J)); }

}  // namespace

double lr_mean_shift(double x, double mu) { return mu * x - 0.5 * mu * mu; }

double delta_j_mean_shift(double y0, double phi, double mu, std::size_t J) {
  check_phi(phi);
  if (J == 0) throw std::domain_error("J must be at least 1");
  const double a = phi_pow(phi, J);
  return a * mu * y0 - 0.5 * a * a * mu * mu;
}

double epower_delta_mean_shift(double phi, double mu, std::size_t J) {
  check_phi(phi);
  const double a = phi_pow(phi, J);
  return 0.5 * a * a * mu * mu;
}

double lr_rescale(double x, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("lr_rescale: sigma2 must be positive");
  return -0.5 * std::log(sigma2) - x * x * (1.0 - sigma2) / (2.0 * sigma2);
}

double delta_j_rescale(double y0, double phi, double sigma2, std::size_t J) {
  check_phi(phi);
  if (J == 0) throw std::domain_error("J must be at least 1");
  if (!(sigma2 > 0.0)) throw std::domain_error("delta_rescale: sigma2 must be positive");
  const double a = phi_pow(phi, J);
  const double noise = 1.0 - a * a;  // gamma^2 for the J-step law
  const double c = (1.0 - sigma2) / sigma2;
  const double scale = 1.0 + noise * c;
  if (!(scale > 0.0)) {
    throw std::domain_error("delta_rescale: (1 - sigma2)/sigma2 must exceed -1/gamma^2");
  }
  return -0.5 * std::log(sigma2) - 0.5 * std::log(scale) -
         (a * a * y0 * y0 / (2.0 * sigma2)) * (1.0 - sigma2) / scale;
}

double delta1_rescale(double y0, double phi, double sigma2) {
  return delta_j_rescale(y0, phi, sigma2, 1);
}

double kl_mixing_mean_shift(double phi, double mu, std::size_t J) {
  return epower_delta_mean_shift(phi, mu, J);
}

double kl_mixing_rescale(double phi, double sigma2, std::size_t J) {
  check_phi(phi);
  if (!(sigma2 > 0.0)) throw std::domain_error("kl_mixing_rescale: sigma2 must be positive");
  const double a2 = phi_pow(phi, 2 * J);
  return 0.5 * (a2 * (sigma2 - 1.0) - std::log(a2 * sigma2 + 1.0 - a2));
}

DeltaEVariableCheck exact_delta_evariable_check(double phi, double mu, std::size_t J,
                                                std::size_t n_mc, const RngStream& rng) {
  check_phi(phi);
  if (n_mc == 0) throw std::domain_error("exact_delta_evariable_check: n_mc must be at least 1");
  const double a = phi_pow(phi, J);
  const double a2 = a * a;
  const double noise_sd = std::sqrt(1.0 - a2);
  auto log_delta = [&](double x, double delta) {
    return a2 * mu * x + a * mu * noise_sd * delta - 0.5 * a2 * mu * mu;
  };
  Rng under_null = rng.child(0).engine();
  Rng under_alt = rng.child(1).engine();
  double sum_p = 0.0, sum_sq_p = 0.0, sum_q = 0.0, sum_sq_q = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double xp = under_null.normal();
    const double dp = std::exp(log_delta(xp, under_null.normal()));
    sum_p += dp;
    sum_sq_p += dp * dp;
    const double xq = mu + under_alt.normal();
    const double dq = std::exp(-log_delta(xq, under_alt.normal()));
    sum_q += dq;
    sum_sq_q += dq * dq;
  }
  const double n = static_cast<double>(n_mc);
  auto se = [n](double sum, double sum_sq) {
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return std::sqrt(var / n);
  };
  return {sum_p / n, se(sum_p, sum_sq_p), sum_q / n, se(sum_q, sum_sq_q)};
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
  if (points < 2) throw std::domain_error("trapezoid: need at least two nodes");
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double acc = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < points; ++i) acc += f(lo + h * static_cast<double>(i));
  return acc * h;
}

}  // namespace bcev::oracles
