#pragma once

// End-to-end experiment: trust index from the training set, calibration /
// evaluation split of the pool, temperature scaling, scoring, calibration,
// prediction, metrics. The cmd_* functions add the file plumbing used by the
// command-line tool; every file they write is a pure function of the resolved
// configuration and the input data.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trustcp/calibration.hpp"
#include "trustcp/config.hpp"
#include "trustcp/conformal.hpp"
#include "trustcp/evaluation.hpp"
#include "trustcp/scores.hpp"

namespace trustcp {

inline constexpr int kFormatVersion = 1;

struct ExperimentData {
  LabeledDataset train;
  LabeledDataset pool;
};

// Files named in cfg.data, or the synthetic mixture when no files are named.
ExperimentData load_experiment_data(const RunConfig& cfg);

// Everything that does not depend on the calibration method.
struct PreparedRun {
  SplitIndices split;
  double temperature = 1.0;
  LabeledDataset calibration;  // temperature applied
  LabeledDataset evaluation;   // temperature applied
  LabeledDataset evaluation_raw;
  ScoredCalibration cal_scored;
  ScoredCalibration eval_scored;  // scores of the true labels
  Eigen::MatrixXd train_features;
};

PreparedRun prepare_run(const RunConfig& cfg, const ExperimentData& data);

struct RunResult {
  double temperature = 1.0;
  std::size_t n_calibration = 0;
  CoverageReport report;
  EvaluationInputs inputs;
  std::vector<std::size_t> pool_index;
  std::vector<double> true_scores;
};

// Calibrates cfg.method on prepared.calibration and evaluates on prepared.evaluation.
RunResult calibrate_and_evaluate(const RunConfig& cfg, const PreparedRun& prepared);
RunResult run_experiment(const RunConfig& cfg, const ExperimentData& data);

// ---- file plumbing ---------------------------------------------------------

// out_dir/train.csv and out_dir/pool.csv from the synthetic section.
void cmd_gen(const RunConfig& cfg, const std::filesystem::path& out_dir);

// report.json, bins_conf_trust.csv, bins_conf_rank.csv, bins_class.csv and
// examples.csv in out_dir.
RunResult cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir);

// out_dir/degree_sweep.csv: one conditional polynomial run per degree on the
// same split.
void cmd_sweep_degree(const RunConfig& cfg, const std::filesystem::path& out_dir);

// Reads examples.csv from run_dir and writes out_dir/ball_audit.csv.
void cmd_audit_balls(const RunConfig& cfg, const std::filesystem::path& run_dir,
                     const std::filesystem::path& out_dir);

// Reads examples.csv from run_dir and writes out_dir/correlation.json.
void cmd_correlate(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

// The resolved configuration embedded in run_dir/report.json.
RunConfig config_of_run(const std::filesystem::path& run_dir);

// One parsed row of examples.csv.
struct ExampleRecord {
  std::size_t pool_index = 0;
  std::size_t label = 0;
  double score = 0.0;
  double conf = 0.0;
  double trust = 0.0;
  std::size_t rank = 0;
  bool covered = false;
  PredictionSet set;
  std::optional<std::string> group;
};

std::string examples_csv(const RunResult& result);
std::vector<ExampleRecord> parse_examples_csv(const std::string& text);

std::string report_json(const RunConfig& cfg, const RunResult& result);

// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace trustcp
