// trustcp: command-line front end.
//
// Exit status: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trustcp/config.hpp"
#include "trustcp/errors.hpp"
#include "trustcp/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  // run
  std::string train, pool, method;
  std::optional<double> alpha;
  // sweep-degree
  std::vector<std::size_t> degrees;
  // audit-balls, correlate
  std::string run_dir;
  std::optional<std::size_t> radii;
};

// File, then flags. Without --config the audit starts from the run's own config.
trustcp::RunConfig resolve(const Options& o, const std::optional<std::string>& run_dir = {}) {
  trustcp::RunConfig cfg;
  if (!o.config.empty()) {
    cfg = trustcp::load_config(o.config);
  } else if (run_dir) {
    cfg = trustcp::config_of_run(*run_dir);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (!o.method.empty()) cfg.method = trustcp::parse_method(o.method);
  if (!o.train.empty()) cfg.data.train = o.train;
  if (!o.pool.empty()) cfg.data.pool = o.pool;
  if (!o.degrees.empty()) cfg.degrees = o.degrees;
  if (o.radii) cfg.audit.radii = *o.radii;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal prediction sets with confidence/trust conditional coverage"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON configuration file");
  app.add_option("--seed", o.seed, "Run seed (overrides the config)");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();

  auto* gen = app.add_subcommand("gen", "Write train.csv and pool.csv from the synthetic mixture");
  auto* run = app.add_subcommand("run", "Calibrate, predict and write report.json, bin tables and examples.csv");
  run->add_option("--train", o.train, "Training set for the trust index");
  run->add_option("--pool", o.pool, "Calibration/evaluation pool");
  run->add_option("--method", o.method, "standard | mondrian | conditional | oracle");
  run->add_option("--alpha", o.alpha, "Miscoverage level");
  auto* sweep = app.add_subcommand("sweep-degree", "Conditional runs over polynomial degrees on one split");
  sweep->add_option("--train", o.train, "Training set for the trust index");
  sweep->add_option("--pool", o.pool, "Calibration/evaluation pool");
  sweep->add_option("--degrees", o.degrees, "Degrees, e.g. --degrees 0 1 2")->delimiter(',');
  auto* audit = app.add_subcommand("audit-balls", "Euclidean-ball coverage gap curve of a finished run");
  audit->add_option("--run", o.run_dir, "Output directory of a run")->required();
  audit->add_option("--radii", o.radii, "Number of radii");
  auto* corr = app.add_subcommand("correlate", "Trust/rank correlation of a finished run");
  corr->add_option("--run", o.run_dir, "Output directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      trustcp::cmd_gen(resolve(o), o.out);
    } else if (*run) {
      trustcp::cmd_run(resolve(o), o.out);
    } else if (*sweep) {
      trustcp::cmd_sweep_degree(resolve(o), o.out);
    } else if (*audit) {
      trustcp::cmd_audit_balls(resolve(o, o.run_dir), o.run_dir, o.out);
    } else if (*corr) {
      trustcp::cmd_correlate(o.run_dir, o.out);
    }
  } catch (const trustcp::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const trustcp::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const trustcp::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kNumeric;
  }
  return kOk;
}
