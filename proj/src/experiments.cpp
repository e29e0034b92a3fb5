#include "bcev/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

#include "bcev/eprocess.hpp"
#include "bcev/evalues.hpp"
#include "bcev/exchangeable.hpp"
#include "bcev/kernels.hpp"
#include "bcev/oracles.hpp"
#include "bcev/parallel.hpp"

namespace bcev::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream roots, one per study.
enum Tag : std::uint64_t {
  kTagPoisson = 1,
  kTagAr1 = 2,
  kTagPower = 3,
  kTagPoe = 4,
  kTagComposite = 5,
  kTagCoverage = 6,
  kTagValidity = 7,
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void require_positive(std::size_t v, const std::string& name) {
  require(v >= 1, name + " must be at least 1");
}

void require_counts(const std::vector<std::size_t>& v, const std::string& name) {
  require(!v.empty(), name + " must not be empty");
  for (std::size_t c : v) require_positive(c, name);
}

void require_alpha(double alpha) { require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)"); }

double d(std::size_t v) { return static_cast<double>(v); }

/// Runs body(r, rows) for each replicate in parallel and concatenates the
/// per-replicate rows in replicate order.
template <typename Body>
io::Table collect(std::vector<std::string> columns, std::size_t replicates, unsigned threads,
                  Body&& body) {
  std::vector<std::vector<std::vector<double>>> per(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) { body(r, per[r]); });
  io::Table table;
  table.columns = std::move(columns);
  for (auto& rows : per) {
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  return table;
}

StateVector draw_normal(Rng& rng, std::size_t n, double mean, double sd) {
  std::vector<double> v(n);
  for (double& e : v) e = mean + sd * rng.normal();
  return StateVector(std::move(v));
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    if constexpr (std::is_floating_point_v<T>) {
      out << io::format_double(values[i]);
    } else {
      out << values[i];
    }
  }
  return out.str();
}

std::string num(double v) { return io::format_double(v); }

// ---- parameter <-> [experiment] keys -------------------------------------

const std::string kSec = "experiment.";

void store(const PoissonFig1Params& p, io::KeyValueConfig& c) {
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "n", std::to_string(p.n));
  c.set(kSec + "null_rate", num(p.null_rate));
  c.set(kSec + "alt_rate", num(p.alt_rate));
  c.set(kSec + "M", join(p.Ms));
}

PoissonFig1Params load_poisson(const io::KeyValueConfig& c) {
  PoissonFig1Params p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  p.n = c.get_count(kSec + "n", p.n);
  p.null_rate = c.get_double(kSec + "null_rate", p.null_rate);
  p.alt_rate = c.get_double(kSec + "alt_rate", p.alt_rate);
  p.Ms = c.get_counts(kSec + "M", p.Ms);
  return p;
}

void store(const Ar1Fig2Params& p, io::KeyValueConfig& c) {
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "phi", join(p.phis));
  c.set(kSec + "mu", num(p.mu));
  c.set(kSec + "J", std::to_string(p.J));
  c.set(kSec + "M", std::to_string(p.M));
}

Ar1Fig2Params load_ar1(const io::KeyValueConfig& c) {
  Ar1Fig2Params p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  p.phis = c.get_doubles(kSec + "phi", p.phis);
  p.mu = c.get_double(kSec + "mu", p.mu);
  p.J = c.get_count(kSec + "J", p.J);
  p.M = c.get_count(kSec + "M", p.M);
  return p;
}

void store(const Ar1PowerFig3Params& p, io::KeyValueConfig& c) {
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "phi", num(p.phi));
  c.set(kSec + "mu", num(p.mu));
  c.set(kSec + "alpha", num(p.alpha));
  c.set(kSec + "J", join(p.Js));
  c.set(kSec + "M", join(p.Ms));
}

Ar1PowerFig3Params load_power(const io::KeyValueConfig& c) {
  Ar1PowerFig3Params p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  p.phi = c.get_double(kSec + "phi", p.phi);
  p.mu = c.get_double(kSec + "mu", p.mu);
  p.alpha = c.get_double(kSec + "alpha", p.alpha);
  p.Js = c.get_counts(kSec + "J", p.Js);
  p.Ms = c.get_counts(kSec + "M", p.Ms);
  return p;
}

void store(const PoeFig4Params& p, io::KeyValueConfig& c) {
  std::vector<double> centers, scales, dofs;
  for (const auto& e : p.experts) {
    centers.push_back(e.center);
    scales.push_back(e.scale);
    dofs.push_back(e.dof);
  }
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "n", std::to_string(p.n));
  c.set(kSec + "centers", join(centers));
  c.set(kSec + "scales", join(scales));
  c.set(kSec + "dofs", join(dofs));
  c.set(kSec + "alt_mean", num(p.alt_mean));
  c.set(kSec + "alt_var", num(p.alt_var));
  c.set(kSec + "J", std::to_string(p.J));
  c.set(kSec + "M", std::to_string(p.M));
  c.set(kSec + "S", join(p.Ss));
  c.set(kSec + "proposal_sd", num(p.proposal_sd));
  c.set(kSec + "lambda", num(p.lambda));
}

PoeFig4Params load_poe(const io::KeyValueConfig& c) {
  PoeFig4Params p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  p.n = c.get_count(kSec + "n", p.n);
  std::vector<double> centers, scales, dofs;
  for (const auto& e : p.experts) {
    centers.push_back(e.center);
    scales.push_back(e.scale);
    dofs.push_back(e.dof);
  }
  centers = c.get_doubles(kSec + "centers", centers);
  scales = c.get_doubles(kSec + "scales", scales);
  dofs = c.get_doubles(kSec + "dofs", dofs);
  require(centers.size() == scales.size() && centers.size() == dofs.size(),
          "centers, scales and dofs must have equal length");
  p.experts.clear();
  for (std::size_t w = 0; w < centers.size(); ++w) p.experts.push_back({centers[w], scales[w], dofs[w]});
  p.alt_mean = c.get_double(kSec + "alt_mean", p.alt_mean);
  p.alt_var = c.get_double(kSec + "alt_var", p.alt_var);
  p.J = c.get_count(kSec + "J", p.J);
  p.M = c.get_count(kSec + "M", p.M);
  p.Ss = c.get_counts(kSec + "S", p.Ss);
  p.proposal_sd = c.get_double(kSec + "proposal_sd", p.proposal_sd);
  p.lambda = c.get_double(kSec + "lambda", p.lambda);
  return p;
}

void store(const CompositeFig5Params& p, io::KeyValueConfig& c) {
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "n", std::to_string(p.n));
  c.set(kSec + "alt_mean", num(p.alt_mean));
  c.set(kSec + "alt_var", num(p.alt_var));
  c.set(kSec + "J", std::to_string(p.J));
  c.set(kSec + "M", std::to_string(p.M));
  c.set(kSec + "lambda0", num(p.lambda0));
}

CompositeFig5Params load_composite(const io::KeyValueConfig& c) {
  CompositeFig5Params p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  p.n = c.get_count(kSec + "n", p.n);
  p.alt_mean = c.get_double(kSec + "alt_mean", p.alt_mean);
  p.alt_var = c.get_double(kSec + "alt_var", p.alt_var);
  p.J = c.get_count(kSec + "J", p.J);
  p.M = c.get_count(kSec + "M", p.M);
  p.lambda0 = c.get_double(kSec + "lambda0", p.lambda0);
  return p;
}

void store(const CoverageParams& p, io::KeyValueConfig& c) {
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "n", std::to_string(p.n));
  c.set(kSec + "true_theta", num(p.true_theta));
  c.set(kSec + "grid", join(p.grid));
  c.set(kSec + "alpha", num(p.alpha));
  c.set(kSec + "J", std::to_string(p.J));
  c.set(kSec + "M", std::to_string(p.M));
  c.set(kSec + "phi", num(p.phi));
}

CoverageParams load_coverage(const io::KeyValueConfig& c) {
  CoverageParams p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  p.n = c.get_count(kSec + "n", p.n);
  p.true_theta = c.get_double(kSec + "true_theta", p.true_theta);
  p.grid = c.get_doubles(kSec + "grid", p.grid);
  p.alpha = c.get_double(kSec + "alpha", p.alpha);
  p.J = c.get_count(kSec + "J", p.J);
  p.M = c.get_count(kSec + "M", p.M);
  p.phi = c.get_double(kSec + "phi", p.phi);
  return p;
}

void store(const ValidityParams& p, io::KeyValueConfig& c) {
  c.set(kSec + "replicates", std::to_string(p.replicates));
  c.set(kSec + "samplers", join(p.samplers));
  c.set(kSec + "phi", join(p.phis));
  c.set(kSec + "J", join(p.Js));
  c.set(kSec + "M", join(p.Ms));
  c.set(kSec + "S", join(p.Ss));
  c.set(kSec + "threshold", num(p.threshold));
  c.set(kSec + "poisson_n", std::to_string(p.poisson_n));
  c.set(kSec + "eprocess_steps", std::to_string(p.eprocess_steps));
}

ValidityParams load_validity(const io::KeyValueConfig& c) {
  ValidityParams p;
  p.replicates = c.get_count(kSec + "replicates", p.replicates);
  std::vector<std::size_t> codes(p.samplers.begin(), p.samplers.end());
  codes = c.get_counts(kSec + "samplers", codes);
  p.samplers.assign(codes.begin(), codes.end());
  p.phis = c.get_doubles(kSec + "phi", p.phis);
  p.Js = c.get_counts(kSec + "J", p.Js);
  p.Ms = c.get_counts(kSec + "M", p.Ms);
  p.Ss = c.get_counts(kSec + "S", p.Ss);
  p.threshold = c.get_double(kSec + "threshold", p.threshold);
  p.poisson_n = c.get_count(kSec + "poisson_n", p.poisson_n);
  p.eprocess_steps = c.get_count(kSec + "eprocess_steps", p.eprocess_steps);
  return p;
}

}  // namespace

// ---- studies -------------------------------------------------------------

io::Table run_poisson_fig1(const PoissonFig1Params& p, const RunContext& ctx) {
  require_positive(p.replicates, "replicates");
  require_positive(p.n, "n");
  require_counts(p.Ms, "M");
  const ModelPtr null = poisson_model(p.null_rate, p.n);
  const ModelPtr alt = poisson_model(p.alt_rate, p.n);
  const TestStatistic stat = ulr_statistic(alt, null);
  const ReversibleKernel kernel = exact_kernel(null);
  const std::size_t m_max = *std::max_element(p.Ms.begin(), p.Ms.end());
  const RngStream root = RngStream(ctx.seed).child(kTagPoisson);

  return collect({"replicate", "M", "log_E_true", "log_E_hat"}, p.replicates, ctx.threads,
                 [&](std::size_t r, auto& rows) {
                   const RngStream rep = root.child(r);
                   Rng data = rep.child(0).engine();
                   const StateVector x = alt->sample(data);
                   const FanStatistics fs = fan_statistics(kernel, stat, x, 1, m_max, rep.child(1));
                   const std::span<const double> ty(fs.log_ty);
                   for (std::size_t M : p.Ms) {
                     rows.push_back({d(r), d(M), fs.log_tx, log_bc_evalue(fs.log_tx, ty.first(M))});
                   }
                 });
}

io::Table run_ar1_fig2(const Ar1Fig2Params& p, const RunContext& ctx) {
  require_positive(p.replicates, "replicates");
  require_positive(p.J, "J");
  require_positive(p.M, "M");
  require(!p.phis.empty(), "phi must not be empty");
  const ModelPtr null = gaussian_model(0.0, 1.0, 1);
  const TestStatistic stat = ulr_statistic(gaussian_model(p.mu, 1.0, 1), null);
  std::vector<ReversibleKernel> kernels;
  for (double phi : p.phis) kernels.push_back(ar1_kernel(phi, 1));
  const RngStream root = RngStream(ctx.seed).child(kTagAr1);

  return collect({"replicate", "phi", "x", "anchor", "log_E_true", "log_E_hat", "log_delta"},
                 p.replicates, ctx.threads, [&](std::size_t r, auto& rows) {
                   const RngStream rep = root.child(r);
                   Rng data = rep.child(0).engine();
                   const StateVector x{p.mu + data.normal()};
                   for (std::size_t k = 0; k < p.phis.size(); ++k) {
                     const FanStatistics fs =
                         fan_statistics(kernels[k], stat, x, p.J, p.M, rep.child({1, k}));
                     const double y0 = fs.anchor[0];
                     rows.push_back({d(r), p.phis[k], x[0], y0, oracles::lr_mean_shift(x[0], p.mu),
                                     log_bc_evalue(fs.log_tx, fs.log_ty),
                                     oracles::delta_j_mean_shift(y0, p.phis[k], p.mu, p.J)});
                   }
                 });
}

io::Table run_ar1_power_fig3(const Ar1PowerFig3Params& p, const RunContext& ctx) {
  require_positive(p.replicates, "replicates");
  require_counts(p.Js, "J");
  require_counts(p.Ms, "M");
  require_alpha(p.alpha);
  const ModelPtr null = gaussian_model(0.0, 1.0, 1);
  const TestStatistic stat = ulr_statistic(gaussian_model(p.mu, 1.0, 1), null);
  const ReversibleKernel kernel = ar1_kernel(p.phi, 1);
  const std::size_t m_max = *std::max_element(p.Ms.begin(), p.Ms.end());
  const double threshold = -std::log(p.alpha);
  const RngStream root = RngStream(ctx.seed).child(kTagPower);

  return collect(
      {"replicate", "J", "M", "x", "log_E_true", "log_E_hat", "reject_bc", "reject_lr"},
      p.replicates, ctx.threads, [&](std::size_t r, auto& rows) {
        const RngStream rep = root.child(r);
        Rng data = rep.child(0).engine();
        const StateVector x{p.mu + data.normal()};
        const double log_e_true = oracles::lr_mean_shift(x[0], p.mu);
        for (std::size_t j = 0; j < p.Js.size(); ++j) {
          const FanStatistics fs = fan_statistics(kernel, stat, x, p.Js[j], m_max, rep.child({1, j}));
          const std::span<const double> ty(fs.log_ty);
          for (std::size_t M : p.Ms) {
            const double log_e = log_bc_evalue(fs.log_tx, ty.first(M));
            rows.push_back({d(r), d(p.Js[j]), d(M), x[0], log_e_true, log_e,
                            log_e >= threshold ? 1.0 : 0.0, log_e_true >= threshold ? 1.0 : 0.0});
          }
        }
      });
}

io::Table run_poe_fig4(const PoeFig4Params& p, const RunContext& ctx) {
  require_positive(p.replicates, "replicates");
  require_positive(p.n, "n");
  require_positive(p.J, "J");
  require_positive(p.M, "M");
  require_counts(p.Ss, "S");
  require(p.alt_var > 0.0, "alt_var must be positive");
  const ModelPtr null = poe_student_t_model(p.experts, 1);
  const TestStatistic stat = ulr_statistic(gaussian_model(p.alt_mean, p.alt_var, 1), null);
  const ReversibleKernel kernel = rwm_kernel(null, p.proposal_sd);
  const BettingStrategy strategy = BettingStrategy::fixed(p.lambda);
  const RngStream root = RngStream(ctx.seed).child(kTagPoe);

  return collect({"replicate", "S", "t", "x", "log_u", "log_wealth"}, p.replicates, ctx.threads,
                 [&](std::size_t r, auto& rows) {
                   const RngStream rep = root.child(r);
                   Rng data = rep.child(0).engine();
                   const StateVector xs = draw_normal(data, p.n, p.alt_mean, std::sqrt(p.alt_var));
                   for (std::size_t S : p.Ss) {
                     EProcessState state;
                     for (std::size_t t = 0; t < p.n; ++t) {
                       state = step(state, StateVector{xs[t]}, stat, kernel, {p.J, p.M, S}, strategy,
                                    rep.child(1));
                       rows.push_back({d(r), d(S), d(t + 1), xs[t], state.log_u_history.back(),
                                       state.log_wealth});
                     }
                   }
                 });
}

io::Table run_composite_fig5(const CompositeFig5Params& p, const RunContext& ctx) {
  require_positive(p.replicates, "replicates");
  require_positive(p.n, "n");
  require_positive(p.J, "J");
  require_positive(p.M, "M");
  require(p.alt_var > 0.0, "alt_var must be positive");
  const ReversibleKernel kernel = exact_kernel(gaussian_model(0.0, 1.0, 1));
  const BettingStrategy grapa = BettingStrategy::grapa(p.lambda0);
  const RngStream root = RngStream(ctx.seed).child(kTagComposite);

  return collect({"replicate", "t", "x", "log_u_bc", "lambda_bc", "log_wealth_bc", "log_d_lr",
                  "lambda_lr", "log_wealth_lr"},
                 p.replicates, ctx.threads, [&](std::size_t r, auto& rows) {
                   const RngStream rep = root.child(r);
                   Rng data = rep.child(0).engine();
                   const StateVector xs = draw_normal(data, p.n, p.alt_mean, std::sqrt(p.alt_var));
                   EProcessState bc, lr;
                   std::vector<StateVector> history;
                   for (std::size_t t = 0; t < p.n; ++t) {
                     const StateVector x_t{xs[t]};
                     double log_u = kNaN, lambda_bc = kNaN, log_d = kNaN, lambda_lr = kNaN;
                     // The full-history fit needs two points including x_t.
                     if (history.empty()) {
                       bc = skip(bc);
                     } else {
                       bc = step(bc, x_t, plug_in_gaussian_statistic(history), kernel, {p.J, p.M, 1},
                                 grapa, rep.child(1));
                       log_u = bc.log_u_history.back();
                       lambda_bc = bc.lambda_history.back();
                     }
                     // The predictable fit needs two past points.
                     if (history.size() < 2) {
                       lr = skip(lr);
                     } else {
                       log_d = predictable_plug_in_gaussian_statistic(history).log_t(x_t);
                       lr = bet(lr, log_d, grapa);
                       lambda_lr = lr.lambda_history.back();
                     }
                     history.push_back(x_t);
                     rows.push_back({d(r), d(t + 1), xs[t], log_u, lambda_bc, bc.log_wealth, log_d,
                                     lambda_lr, lr.log_wealth});
                   }
                 });
}

io::Table run_coverage(const CoverageParams& p, const RunContext& ctx) {
  require_positive(p.replicates, "replicates");
  require_positive(p.n, "n");
  require_positive(p.J, "J");
  require_positive(p.M, "M");
  require(!p.grid.empty(), "grid must not be empty");
  require_alpha(p.alpha);
  const RegionBuilder builder = [&p](double theta) {
    ReversibleKernel kernel = p.phi == 0.0 ? exact_kernel(gaussian_model(theta, 1.0, p.n))
                                           : ar1_kernel(p.phi, p.n, theta, 1.0);
    return std::make_pair(gaussian_mean_mle_statistic(theta, 1.0), std::move(kernel));
  };
  const RngStream root = RngStream(ctx.seed).child(kTagCoverage);

  return collect({"replicate", "theta", "log_e", "in_region"}, p.replicates, ctx.threads,
                 [&](std::size_t r, auto& rows) {
                   const RngStream rep = root.child(r);
                   Rng data = rep.child(0).engine();
                   const StateVector x = draw_normal(data, p.n, p.true_theta, 1.0);
                   const ConfidenceRegion region =
                       confidence_region(p.grid, builder, x, p.J, p.M, p.alpha, rep.child(1));
                   for (const auto& m : region.members) {
                     rows.push_back({d(r), m.theta, m.evalue.log_e, m.in_region ? 1.0 : 0.0});
                   }
                 });
}

namespace {

struct ValidityCell {
  ValiditySampler sampler;
  double phi;
  std::size_t J, M, S;
};

/// One null replicate of a cell: returns the log e-value.
class CellRunner {
 public:
  CellRunner(const ValidityCell& cell, const ValidityParams& p) : cell_(cell), p_(p) {
    const PoeFig4Params poe_defaults;
    switch (cell.sampler) {
      case ValiditySampler::kPoissonExact: {
        null_ = poisson_model(1.0, p.poisson_n);
        stats_.push_back(ulr_statistic(poisson_model(1.5, p.poisson_n), null_));
        kernels_.push_back(exact_kernel(null_));
        break;
      }
      case ValiditySampler::kAr1:
      case ValiditySampler::kEProcessAr1: {
        null_ = gaussian_model(0.0, 1.0, 1);
        stats_.push_back(ulr_statistic(gaussian_model(1.0, 1.0, 1), null_));
        kernels_.push_back(ar1_kernel(cell.phi, 1));
        break;
      }
      case ValiditySampler::kRwmPoe: {
        null_ = poe_student_t_model(poe_defaults.experts, 1);
        stats_.push_back(ulr_statistic(gaussian_model(0.0, 1.0, 1), null_));
        kernels_.push_back(rwm_kernel(null_, kDefaultProposalSd));
        break;
      }
      case ValiditySampler::kCompositeAr1: {
        // Null family {N(0,1), N(0.5,1)}; data come from the first member.
        null_ = gaussian_model(0.0, 1.0, 1);
        const ModelPtr alt = gaussian_model(1.0, 1.0, 1);
        for (double mean : {0.0, 0.5}) {
          const ModelPtr member = gaussian_model(mean, 1.0, 1);
          stats_.push_back(ulr_statistic(alt, member));
          kernels_.push_back(ar1_kernel(cell.phi, 1, mean, 1.0));
        }
        break;
      }
    }
  }

  double operator()(const RngStream& rep) const {
    Rng data = rep.child(0).engine();
    if (cell_.sampler == ValiditySampler::kEProcessAr1) {
      EProcessState state;
      const auto grapa = BettingStrategy::grapa();
      for (std::size_t t = 0; t < p_.eprocess_steps; ++t) {
        state = step(state, null_->sample(data), stats_[0], kernels_[0], {cell_.J, cell_.M, cell_.S},
                     grapa, rep.child(1));
      }
      return state.log_wealth;
    }
    const StateVector x = null_->sample(data);
    std::vector<EValueResult> per_null;
    for (std::size_t k = 0; k < stats_.size(); ++k) {
      const auto chains =
          multi_fan_statistics(kernels_[k], stats_[k], x, cell_.J, cell_.M, cell_.S, rep.child({1, k}));
      per_null.push_back(bc_evalue_multichain(stats_[k].id(), chains));
    }
    return composite_null_evalue(per_null).log_e;
  }

 private:
  ValidityCell cell_;
  const ValidityParams& p_;
  ModelPtr null_;
  std::vector<TestStatistic> stats_;
  std::vector<ReversibleKernel> kernels_;
};

}  // namespace

io::Table run_validity(const ValidityParams& p, const RunContext& ctx) {
  require(p.replicates >= 2, "replicates must be at least 2");
  require_counts(p.Js, "J");
  require_counts(p.Ms, "M");
  require_counts(p.Ss, "S");
  require(p.threshold > 0.0, "threshold must be positive");
  std::vector<ValidityCell> cells;
  for (int code : p.samplers) {
    require(code >= 0 && code <= 4, "unknown validity sampler code " + std::to_string(code));
    const auto sampler = static_cast<ValiditySampler>(code);
    std::vector<double> phis{kNaN};
    if (sampler == ValiditySampler::kAr1) phis = p.phis;
    if (sampler == ValiditySampler::kCompositeAr1 || sampler == ValiditySampler::kEProcessAr1) {
      phis = {0.5};
    }
    for (double phi : phis) {
      for (std::size_t J : p.Js) {
        for (std::size_t M : p.Ms) {
          for (std::size_t S : p.Ss) cells.push_back({sampler, phi, J, M, S});
        }
      }
    }
  }
  const RngStream root = RngStream(ctx.seed).child(kTagValidity);
  const double log_threshold = std::log(p.threshold);
  io::Table table;
  table.columns = {"sampler", "phi", "J", "M", "S", "replicates", "mean_e", "se_e", "frac_exceed",
                   "se_exceed", "mean_log_e"};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const ValidityCell& cell = cells[c];
    const CellRunner runner(cell, p);
    std::vector<double> log_e(p.replicates);
    const RngStream cell_root = root.child(c);
    parallel_for(p.replicates, ctx.threads, [&](std::size_t r) { log_e[r] = runner(cell_root.child(r)); });
    double sum = 0.0, sum_sq = 0.0, exceed = 0.0, sum_log = 0.0;
    for (double v : log_e) {
      const double e = std::exp(v);
      sum += e;
      sum_sq += e * e;
      exceed += v >= log_threshold ? 1.0 : 0.0;
      sum_log += v;
    }
    const double n = d(p.replicates);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    const double frac = exceed / n;
    table.rows.push_back({static_cast<double>(static_cast<int>(cell.sampler)), cell.phi, d(cell.J),
                          d(cell.M), d(cell.S), n, mean, std::sqrt(var / n), frac,
                          std::sqrt(frac * (1.0 - frac) / n), sum_log / n});
  }
  return table;
}

// ---- dispatch ------------------------------------------------------------

std::vector<std::string> names() {
  return {"poisson_fig1", "ar1_fig2", "ar1_power_fig3", "poe_fig4", "composite_fig5", "coverage",
          "validity"};
}

io::KeyValueConfig defaults(const std::string& name, bool paper_scale) {
  io::KeyValueConfig c;
  if (name == "poisson_fig1") {
    store(PoissonFig1Params{}, c);
  } else if (name == "ar1_fig2") {
    store(Ar1Fig2Params{}, c);
  } else if (name == "ar1_power_fig3") {
    Ar1PowerFig3Params p;
    if (paper_scale) p.replicates = 2500;
    store(p, c);
  } else if (name == "poe_fig4") {
    PoeFig4Params p;
    if (paper_scale) {
      p.replicates = 500;
      p.n = 50;
    }
    store(p, c);
  } else if (name == "composite_fig5") {
    CompositeFig5Params p;
    if (paper_scale) p.replicates = 1000;
    store(p, c);
  } else if (name == "coverage") {
    store(CoverageParams{}, c);
  } else if (name == "validity") {
    store(ValidityParams{}, c);
  } else {
    throw ConfigError("unknown experiment: " + name);
  }
  c.set("experiment.name", name);
  return c;
}

io::Table run(const std::string& name, const io::KeyValueConfig& cfg, const RunContext& ctx,
              bool paper_scale, io::KeyValueConfig* manifest) {
  io::KeyValueConfig effective = defaults(name, paper_scale);
  for (const auto& [key, value] : cfg.section("experiment")) effective.set(kSec + key, value);
  effective.set("experiment.name", name);

  io::Table table;
  if (name == "poisson_fig1") {
    table = run_poisson_fig1(load_poisson(effective), ctx);
  } else if (name == "ar1_fig2") {
    table = run_ar1_fig2(load_ar1(effective), ctx);
  } else if (name == "ar1_power_fig3") {
    table = run_ar1_power_fig3(load_power(effective), ctx);
  } else if (name == "poe_fig4") {
    table = run_poe_fig4(load_poe(effective), ctx);
  } else if (name == "composite_fig5") {
    table = run_composite_fig5(load_composite(effective), ctx);
  } else if (name == "coverage") {
    table = run_coverage(load_coverage(effective), ctx);
  } else {
    table = run_validity(load_validity(effective), ctx);
  }
  if (manifest) {
    effective.set("run.seed", std::to_string(ctx.seed));
    effective.set("run.threads", std::to_string(ctx.threads));
    *manifest = effective;
  }
  return table;
}

}  // namespace bcev::experiments
