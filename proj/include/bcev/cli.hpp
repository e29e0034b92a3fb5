#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "bcev/io.hpp"
#include "bcev/kernels.hpp"
#include "bcev/model.hpp"

namespace bcev::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 2,
  kConfigError = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. `in` feeds eprocess-stream; records go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Model described by a config section ([null] or [alternative]) for data of
/// dimension n. Keys: family = gaussian | poisson | poe, plus mean, variance,
/// rate, centers, scales, dofs.
ModelPtr build_model(const io::KeyValueConfig& cfg, const std::string& section, std::size_t n);

/// Statistic from [statistic]: type = ulr | power_ulr | gaussian_mean_mle.
TestStatistic build_statistic(const io::KeyValueConfig& cfg, std::size_t n);

/// Kernel from [kernel]: type = exact | ar1 | rwm | mala, stationary for the
/// [null] model.
ReversibleKernel build_kernel(const io::KeyValueConfig& cfg, std::size_t n);

}  // namespace bcev::cli
