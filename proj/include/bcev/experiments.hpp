#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bcev/io.hpp"
#include "bcev/model.hpp"

/// Seeded simulation studies. Every study returns a tidy table whose rows are
/// emitted in deterministic replicate order regardless of the thread count.
namespace bcev::experiments {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct RunContext {
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

/// Exact sampling from Poisson(null_rate)^n, data from Poisson(alt_rate)^n.
/// Columns: replicate, M, log_E_true, log_E_hat.
struct PoissonFig1Params {
  std::size_t replicates = 1000;
  std::size_t n = 100;
  double null_rate = 1.0;
  double alt_rate = 1.1;
  std::vector<std::size_t> Ms{10, 100, 500, 1000};
};

/// AR(1) with N(0,1) target, data from N(mu,1), T(x) = exp(mu x).
/// Columns: replicate, phi, x, anchor, log_E_true, log_E_hat, log_delta.
struct Ar1Fig2Params {
  std::size_t replicates = 1000;
  std::vector<double> phis{0.3, 0.5, 0.8};
  double mu = 1.0;
  std::size_t J = 1;
  std::size_t M = 1000;
};

/// Power of 1{E_hat >= 1/alpha} against the exact test 1{E >= 1/alpha}.
/// Each (replicate, J) uses one fan of max(Ms) draws whose prefixes give the
/// smaller M. Columns: replicate, J, M, x, log_E_true, log_E_hat, reject_bc,
/// reject_lr.
struct Ar1PowerFig3Params {
  std::size_t replicates = 250;
  double phi = 0.5;
  double mu = 2.0;
  double alpha = 0.05;
  std::vector<std::size_t> Js{1, 3, 5, 10, 20};
  std::vector<std::size_t> Ms{10, 50, 100, 500, 1000, 2500, 5000};
};

/// ULR e-process for N(alt_mean, alt_var) against a product of Student-t
/// experts, random-walk Metropolis fans. For every S the process sees the same
/// data and the same streams, so chain 0 is shared across S.
/// Columns: replicate, S, t, x, log_u, log_wealth.
struct PoeFig4Params {
  std::size_t replicates = 100;
  std::size_t n = 25;
  std::vector<Expert> experts{{-3.0, 1.0, 1.0}, {0.0, 1.0, 10.0}};
  double alt_mean = 0.0;
  double alt_var = 1.0;
  std::size_t J = 4;
  std::size_t M = 25;
  std::vector<std::size_t> Ss{1, 4, 10};
  double proposal_sd = 2.4;
  double lambda = 1.0;
};

/// Besag-Clifford plug-in process against the predictable plug-in (LR)
/// process, both with GRAPA, data from N(alt_mean, alt_var). Steps at which
/// a statistic is undefined are skipped (log_u and lambda are NaN).
/// Columns: replicate, t, x, log_u_bc, lambda_bc, log_wealth_bc, log_d_lr,
/// lambda_lr, log_wealth_lr.
struct CompositeFig5Params {
  std::size_t replicates = 200;
  std::size_t n = 200;
  double alt_mean = 1.0;
  double alt_var = 4.0;
  std::size_t J = 1;
  std::size_t M = 1000;
  double lambda0 = 0.5;
};

/// Coverage of the Gaussian-mean confidence region.
/// Columns: replicate, theta, log_e, in_region.
struct CoverageParams {
  std::size_t replicates = 1000;
  std::size_t n = 50;
  double true_theta = 0.0;
  std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  double alpha = 0.1;
  std::size_t J = 1;
  std::size_t M = 100;
  /// 0 exact sampling, otherwise an AR(1) kernel with this coefficient.
  double phi = 0.0;
};

enum class ValiditySampler : int {
  kPoissonExact = 0,
  kAr1 = 1,
  kRwmPoe = 2,
  kCompositeAr1 = 3,
  kEProcessAr1 = 4,
};

/// Null Monte Carlo behaviour of e-values over a grid of samplers and
/// (J, M, S). One row per cell.
/// Columns: sampler, phi, J, M, S, replicates, mean_e, se_e, frac_exceed,
/// se_exceed, mean_log_e.
struct ValidityParams {
  std::size_t replicates = 2000;
  std::vector<int> samplers{0, 1, 2, 3, 4};
  std::vector<double> phis{0.3, 0.5, 0.8};
  std::vector<std::size_t> Js{1, 4};
  std::vector<std::size_t> Ms{10, 100};
  std::vector<std::size_t> Ss{1, 4};
  double threshold = 20.0;
  std::size_t poisson_n = 10;
  std::size_t eprocess_steps = 5;
};

io::Table run_poisson_fig1(const PoissonFig1Params& p, const RunContext& ctx);
io::Table run_ar1_fig2(const Ar1Fig2Params& p, const RunContext& ctx);
io::Table run_ar1_power_fig3(const Ar1PowerFig3Params& p, const RunContext& ctx);
io::Table run_poe_fig4(const PoeFig4Params& p, const RunContext& ctx);
io::Table run_composite_fig5(const CompositeFig5Params& p, const RunContext& ctx);
io::Table run_coverage(const CoverageParams& p, const RunContext& ctx);
io::Table run_validity(const ValidityParams& p, const RunContext& ctx);

/// Known experiment names.
std::vector<std::string> names();

/// Default parameters of an experiment as [experiment] keys. paper_scale
/// restores the full replicate counts.
io::KeyValueConfig defaults(const std::string& name, bool paper_scale);

/// Runs `name` with defaults overridden by the [experiment] section of cfg.
/// The effective parameters (including seed) are written to manifest if
/// given. Unknown names and bad values raise ConfigError.
io::Table run(const std::string& name, const io::KeyValueConfig& cfg, const RunContext& ctx,
              bool paper_scale = false, io::KeyValueConfig* manifest = nullptr);

}  // namespace bcev::experiments
