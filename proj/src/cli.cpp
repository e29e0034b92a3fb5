#include "bcev/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "bcev/eprocess.hpp"
#include "bcev/evalues.hpp"
#include "bcev/exchangeable.hpp"
#include "bcev/experiments.hpp"

namespace bcev::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string data_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool paper_scale = false;
  std::string out_dir;
  std::string experiment;
};

struct Settings {
  io::KeyValueConfig cfg;
  std::uint64_t seed = experiments::kDefaultSeed;
  unsigned threads = 1;
};

Settings load_settings(const Options& opt) {
  Settings s;
  if (!opt.config_path.empty()) s.cfg = io::KeyValueConfig::load(opt.config_path);
  s.seed = s.cfg.get_u64("run.seed", s.seed);
  s.threads = static_cast<unsigned>(s.cfg.get_count("run.threads", s.threads));
  if (opt.seed) s.seed = *opt.seed;
  if (opt.threads) s.threads = *opt.threads;
  if (s.threads == 0) s.threads = 1;
  return s;
}

std::ifstream open_data(const std::string& path) {
  if (path.empty()) throw io::ParseError("--data is required", 0);
  std::ifstream in(path);
  if (!in) throw io::ParseError("cannot open " + path, 0);
  return in;
}

FanConfig fan_config(const io::KeyValueConfig& cfg, const std::string& section) {
  FanConfig f;
  f.J = cfg.get_count(section + ".J", 1);
  f.M = cfg.get_count(section + ".M", 100);
  f.S = cfg.get_count(section + ".S", 1);
  if (f.J == 0 || f.M == 0 || f.S == 0) throw ConfigError("J, M and S must be at least 1");
  return f;
}

double alpha_of(const io::KeyValueConfig& cfg) {
  const double alpha = cfg.get_double("test.alpha", 0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("test.alpha must lie in (0,1)");
  return alpha;
}

/// Writes the table and a manifest under out_dir (if set); always prints the
/// table to out.
void emit(const Options& opt, const Settings& s, const std::string& stem, const io::Table& table,
          std::ostream& out) {
  io::write_csv(out, table);
  if (opt.out_dir.empty()) return;
  fs::create_directories(opt.out_dir);
  std::ofstream csv(fs::path(opt.out_dir) / (stem + ".csv"));
  io::write_csv(csv, table);
  io::KeyValueConfig manifest = s.cfg;
  manifest.set("run.seed", std::to_string(s.seed));
  manifest.set("run.threads", std::to_string(s.threads));
  manifest.set("run.command", stem);
  if (!opt.data_path.empty()) manifest.set("run.data", fs::absolute(opt.data_path).string());
  std::ofstream mf(fs::path(opt.out_dir) / (stem + ".manifest.ini"));
  manifest.write(mf);
}

int cmd_evalue(const Options& opt, std::ostream& out, bool pvalue) {
  const Settings s = load_settings(opt);
  auto in = open_data(opt.data_path);
  const StateVector x(io::read_observation_vector(in));
  const FanConfig f = fan_config(s.cfg, "sampling");
  const TestStatistic stat = build_statistic(s.cfg, x.size());
  const ReversibleKernel kernel = build_kernel(s.cfg, x.size());
  const RngStream rng(s.seed);
  const auto chains = multi_fan_statistics(kernel, stat, x, f.J, f.M, f.S, rng, s.threads);
  io::Table table;
  if (pvalue) {
    table.columns = {"p_value", "M", "J", "seed"};
    table.rows.push_back({gof_pvalue(chains[0].log_tx, chains[0].log_ty), static_cast<double>(f.M),
                          static_cast<double>(f.J), static_cast<double>(s.seed)});
  } else {
    const EValueResult e = bc_evalue_multichain(stat.id(), chains);
    table.columns = {"log_e", "e", "M", "S", "J", "seed"};
    table.rows.push_back({e.log_e, e.e(), static_cast<double>(f.M), static_cast<double>(f.S),
                          static_cast<double>(f.J), static_cast<double>(s.seed)});
  }
  emit(opt, s, pvalue ? "pvalue" : "evalue", table, out);
  return kOk;
}

BettingStrategy strategy_of(const io::KeyValueConfig& cfg) {
  const std::string kind = cfg.get_string("eprocess.strategy", "fixed");
  if (kind == "fixed") return BettingStrategy::fixed(cfg.get_double("eprocess.lambda", 1.0));
  if (kind == "grapa") {
    return BettingStrategy::grapa(cfg.get_double("eprocess.lambda0", kDefaultGrapaInitialLambda));
  }
  throw ConfigError("eprocess.strategy must be fixed or grapa");
}

/// Sequential driver shared by eprocess and eprocess-stream.
class Process {
 public:
  explicit Process(const Settings& s)
      : s_(s),
        strategy_(strategy_of(s.cfg)),
        alpha_(alpha_of(s.cfg)),
        base_(fan_config(s.cfg, "sampling")),
        rng_(s.seed) {}

  static std::vector<std::string> columns() { return {"t", "log_u", "lambda", "log_wealth", "stopped"}; }

  std::vector<double> advance(const StateVector& x) {
    const std::size_t t = state_.t + 1;
    const std::string override = "t:" + std::to_string(t);
    FanConfig f = base_;
    f.J = s_.cfg.get_count(override + ".J", f.J);
    f.M = s_.cfg.get_count(override + ".M", f.M);
    f.S = s_.cfg.get_count(override + ".S", f.S);
    const TestStatistic stat = build_statistic(s_.cfg, x.size());
    const ReversibleKernel kernel = build_kernel(s_.cfg, x.size());
    state_ = step(state_, x, stat, kernel, f, strategy_, rng_, s_.threads);
    if (!stopped_ && state_.log_wealth >= -std::log(alpha_)) stopped_ = true;
    return {static_cast<double>(t), state_.log_u_history.back(), state_.lambda_history.back(),
            state_.log_wealth, stopped_ ? 1.0 : 0.0};
  }

 private:
  const Settings& s_;
  BettingStrategy strategy_;
  double alpha_;
  FanConfig base_;
  RngStream rng_;
  EProcessState state_;
  bool stopped_ = false;
};

int cmd_eprocess(const Options& opt, std::ostream& out) {
  const Settings s = load_settings(opt);
  auto in = open_data(opt.data_path);
  const auto rows = io::read_observation_rows(in);
  Process process(s);
  io::Table table;
  table.columns = Process::columns();
  for (const auto& row : rows) table.rows.push_back(process.advance(StateVector(row)));
  emit(opt, s, "eprocess", table, out);
  return kOk;
}

int cmd_eprocess_stream(const Options& opt, std::istream& in, std::ostream& out, std::ostream& err) {
  const Settings s = load_settings(opt);
  Process process(s);
  io::write_csv_header(out, Process::columns());
  out.flush();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double x = 0.0;
    try {
      x = io::parse_double(line, line_no);
      if (!std::isfinite(x)) throw io::ParseError("non-finite observation", line_no);
    } catch (const io::ParseError& e) {
      out << "error,line " << line_no << ",,," << '\n';
      out.flush();
      err << "eprocess-stream: " << e.what() << '\n';
      return kParseError;
    }
    io::write_csv_row(out, process.advance(StateVector{x}));
    out.flush();
  }
  return kOk;
}

int cmd_confregion(const Options& opt, std::ostream& out) {
  const Settings s = load_settings(opt);
  auto in = open_data(opt.data_path);
  const StateVector x(io::read_observation_vector(in));
  const auto grid = s.cfg.get_doubles("confregion.grid", {});
  if (grid.empty()) throw ConfigError("confregion.grid is required");
  const std::string family = s.cfg.get_string("confregion.family", "gaussian_mean");
  if (family != "gaussian_mean") throw ConfigError("confregion.family must be gaussian_mean");
  const double variance = s.cfg.get_double("confregion.variance", 1.0);
  if (!(variance > 0.0)) throw ConfigError("confregion.variance must be positive");
  const std::string kernel_type = s.cfg.get_string("kernel.type", "exact");
  const double phi = s.cfg.get_double("kernel.phi", 0.5);
  if (kernel_type != "exact" && kernel_type != "ar1") {
    throw ConfigError("confregion supports kernel.type exact or ar1");
  }
  const std::size_t n = x.size();
  const RegionBuilder builder = [&](double theta) {
    ReversibleKernel kernel = kernel_type == "exact"
                                  ? exact_kernel(gaussian_model(theta, variance, n))
                                  : ar1_kernel(phi, n, theta, variance);
    return std::make_pair(gaussian_mean_mle_statistic(theta, variance), std::move(kernel));
  };
  const FanConfig f = fan_config(s.cfg, "sampling");
  const ConfidenceRegion region =
      confidence_region(grid, builder, x, f.J, f.M, alpha_of(s.cfg), RngStream(s.seed), s.threads, f.S);
  io::Table table;
  table.columns = {"theta", "log_e", "in_region"};
  for (const auto& m : region.members) {
    table.rows.push_back({m.theta, m.evalue.log_e, m.in_region ? 1.0 : 0.0});
  }
  emit(opt, s, "confregion", table, out);
  return kOk;
}

int cmd_experiment(const Options& opt, std::ostream& out) {
  const Settings s = load_settings(opt);
  std::string name = opt.experiment;
  if (name.empty()) name = s.cfg.get_string("experiment.name", "");
  if (name.empty()) throw ConfigError("experiment name is required");
  const bool paper_scale = opt.paper_scale || s.cfg.get_string("run.paper_scale", "0") == "1";
  io::KeyValueConfig manifest;
  const io::Table table =
      experiments::run(name, s.cfg, {s.seed, s.threads}, paper_scale, &manifest);
  if (paper_scale) manifest.set("run.paper_scale", "1");
  if (opt.out_dir.empty()) {
    io::write_csv(out, table);
    return kOk;
  }
  fs::create_directories(opt.out_dir);
  std::ofstream csv(fs::path(opt.out_dir) / (name + ".csv"));
  io::write_csv(csv, table);
  std::ofstream mf(fs::path(opt.out_dir) / (name + ".manifest.ini"));
  manifest.write(mf);
  out << "wrote " << (fs::path(opt.out_dir) / (name + ".csv")).string() << " (" << table.rows.size()
      << " rows)\n";
  return kOk;
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "INI configuration file");
  sub->add_option("--seed", opt.seed, "base seed");
  sub->add_option("--threads", opt.threads, "worker threads");
  sub->add_option("--out", opt.out_dir, "output directory for CSV and manifest");
}

}  // namespace

ModelPtr build_model(const io::KeyValueConfig& cfg, const std::string& section, std::size_t n) {
  const std::string family = cfg.get_string(section + ".family", "");
  const std::string k = section + ".";
  try {
    if (family == "gaussian") {
      return gaussian_model(cfg.get_double(k + "mean", 0.0), cfg.get_double(k + "variance", 1.0), n);
    }
    if (family == "poisson") return poisson_model(cfg.get_double(k + "rate", 1.0), n);
    if (family == "poe") {
      const auto centers = cfg.get_doubles(k + "centers", {});
      const auto scales = cfg.get_doubles(k + "scales", std::vector<double>(centers.size(), 1.0));
      const auto dofs = cfg.get_doubles(k + "dofs", std::vector<double>(centers.size(), 1.0));
      if (centers.size() != scales.size() || centers.size() != dofs.size()) {
        throw ConfigError(section + ": centers, scales and dofs must have equal length");
      }
      std::vector<Expert> experts;
      for (std::size_t w = 0; w < centers.size(); ++w) experts.push_back({centers[w], scales[w], dofs[w]});
      return poe_student_t_model(std::move(experts), n);
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(section + ": " + e.what());
  }
  throw ConfigError(section + ".family must be gaussian, poisson or poe");
}

TestStatistic build_statistic(const io::KeyValueConfig& cfg, std::size_t n) {
  const std::string type = cfg.get_string("statistic.type", "ulr");
  try {
    if (type == "ulr") {
      return ulr_statistic(build_model(cfg, "alternative", n), build_model(cfg, "null", n));
    }
    if (type == "power_ulr") {
      return power_ulr_statistic(build_model(cfg, "alternative", n), build_model(cfg, "null", n),
                                 cfg.get_double("statistic.eta", 0.5));
    }
    if (type == "gaussian_mean_mle") {
      return gaussian_mean_mle_statistic(cfg.get_double("statistic.theta", 0.0),
                                         cfg.get_double("statistic.variance", 1.0));
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("statistic: ") + e.what());
  }
  throw ConfigError("statistic.type must be ulr, power_ulr or gaussian_mean_mle");
}

ReversibleKernel build_kernel(const io::KeyValueConfig& cfg, std::size_t n) {
  const std::string type = cfg.get_string("kernel.type", "exact");
  try {
    if (type == "ar1") {
      if (cfg.get_string("null.family", "") != "gaussian") {
        throw ConfigError("kernel.type ar1 requires a gaussian null");
      }
      return ar1_kernel(cfg.get_double("kernel.phi", 0.5), n, cfg.get_double("null.mean", 0.0),
                        cfg.get_double("null.variance", 1.0));
    }
    const ModelPtr null = build_model(cfg, "null", n);
    if (type == "exact") return exact_kernel(null);
    if (type == "rwm") return rwm_kernel(null, cfg.get_double("kernel.proposal_sd", kDefaultProposalSd));
    if (type == "mala") return mala_kernel(null, cfg.get_double("kernel.step_size", 0.5));
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  throw ConfigError("kernel.type must be exact, ar1, rwm or mala");
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Besag-Clifford e-values and e-processes", "bcev"};
  app.require_subcommand(1);
  Options opt;

  auto* evalue = app.add_subcommand("evalue", "e-value of one observation vector");
  add_common(evalue, opt);
  evalue->add_option("--data", opt.data_path, "CSV observation vector");
  auto* pvalue = app.add_subcommand("pvalue", "Monte Carlo goodness-of-fit p-value");
  add_common(pvalue, opt);
  pvalue->add_option("--data", opt.data_path, "CSV observation vector");
  auto* eproc = app.add_subcommand("eprocess", "e-process over one observation per row");
  add_common(eproc, opt);
  eproc->add_option("--data", opt.data_path, "CSV, one observation vector per row");
  auto* stream = app.add_subcommand("eprocess-stream", "e-process over scalars read from stdin");
  add_common(stream, opt);
  auto* conf = app.add_subcommand("confregion", "confidence region over a parameter grid");
  add_common(conf, opt);
  conf->add_option("--data", opt.data_path, "CSV observation vector");
  auto* exp = app.add_subcommand("experiment", "run a simulation study");
  add_common(exp, opt);
  exp->add_option("name", opt.experiment, "study name");
  exp->add_flag("--paper-scale", opt.paper_scale, "use full replicate counts");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (evalue->parsed()) return cmd_evalue(opt, out, false);
    if (pvalue->parsed()) return cmd_evalue(opt, out, true);
    if (eproc->parsed()) return cmd_eprocess(opt, out);
    if (stream->parsed()) return cmd_eprocess_stream(opt, in, out, err);
    if (conf->parsed()) return cmd_confregion(opt, out);
    if (exp->parsed()) return cmd_experiment(opt, out);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::domain_error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace bcev::cli
