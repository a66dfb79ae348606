#include "trustcp/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trustcp/errors.hpp"
#include "trustcp/synthetic.hpp"
#include "trustcp/trust.hpp"

namespace trustcp {

using nlohmann::json;

namespace {

// Stream ids for seeds derived from the run seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kAuditStream = 2;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());
}

json double_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string bins_csv(const std::vector<BinStat>& bins) {
  std::string out = "bin_id,count,coverage\n";
  for (const auto& b : bins) {
    out += std::to_string(b.bin_id) + "," + std::to_string(b.count) + "," +
           format_double(b.coverage) + "\n";
  }
  return out;
}

FunctionBasis make_basis(const RunConfig& cfg, const PreparedRun& prepared) {
  switch (cfg.basis.kind) {
    case BasisKind::polynomial:
      return FunctionBasis::polynomial(cfg.basis.degree);
    case BasisKind::indicator:
      return FunctionBasis::indicator(cfg.basis.conf_edges, cfg.basis.trust_edges);
    case BasisKind::pca:
      return FunctionBasis::pca(fit_pca(prepared.train_features, cfg.basis.pca_components));
  }
  throw ArgumentError("unknown basis kind");
}

Eigen::MatrixXd feature_matrix(const LabeledDataset& ds) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.feature_dim()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t d = 0; d < ds.feature_dim(); ++d) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = ds[i].features[d];
    }
  }
  return m;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("examples.csv line " + std::to_string(line) + ": bad " + name + " '" +
                    std::string(text) + "'");
  }
  return value;
}

std::vector<ExampleRecord> load_examples(const std::filesystem::path& run_dir) {
  return parse_examples_csv(read_text(run_dir / "examples.csv"));
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ExperimentData load_experiment_data(const RunConfig& cfg) {
  ExperimentData data;
  if (cfg.data.train.has_value() != cfg.data.pool.has_value()) {
    throw ArgumentError("data.train and data.pool must be given together");
  }
  if (cfg.data.train) {
    const std::filesystem::path train = *cfg.data.train;
    const std::filesystem::path pool = *cfg.data.pool;
    data.train = load_dataset(train, cfg.data.format.value_or(infer_data_format(train)));
    data.pool = load_dataset(pool, cfg.data.format.value_or(infer_data_format(pool)));
  } else {
    data.pool = generate_gaussian_mixture(cfg.synthetic.pool_spec(cfg.seed));
    data.train = generate_gaussian_mixture(cfg.synthetic.train_spec(cfg.seed));
  }
  return data;
}

PreparedRun prepare_run(const RunConfig& cfg, const ExperimentData& data) {
  cfg.validate();
  PreparedRun out;
  try {
    if (data.train.empty()) throw DataError("training set is empty");
    if (data.train.num_classes() != data.pool.num_classes() ||
        data.train.feature_dim() != data.pool.feature_dim()) {
      throw DataError("training set and pool disagree on class count or feature dimension");
    }
    out.split = split_indices(data.pool.size(), cfg.split_fraction,
                              derive_seed(cfg.seed, kSplitStream, 0));
    if (out.split.calibration.empty() || out.split.evaluation.empty()) {
      throw DataError("pool too small for the split fraction");
    }
  } catch (...) {
    rethrow_with_stage("split");
  }
  LabeledDataset calibration = data.pool.subset(out.split.calibration);
  out.evaluation_raw = data.pool.subset(out.split.evaluation);

  TemperatureFit tfit;
  try {
    if (cfg.temperature_scaling) tfit = fit_temperature(calibration);
  } catch (...) {
    rethrow_with_stage("temperature");
  }
  out.temperature = tfit.temperature.value();
  out.calibration = apply_temperature(calibration, tfit.temperature);
  out.evaluation = apply_temperature(out.evaluation_raw, tfit.temperature);

  try {
    const TrustIndex index = build_trust_index(data.train, cfg.trust);
    out.cal_scored = score_calibration(out.calibration, cfg.score, index);
    out.eval_scored = score_calibration(out.evaluation, cfg.score, index);
  } catch (...) {
    rethrow_with_stage("score");
  }
  out.train_features = feature_matrix(data.train);
  return out;
}

RunResult calibrate_and_evaluate(const RunConfig& cfg, const PreparedRun& prepared) {
  RunResult res;
  res.temperature = prepared.temperature;
  res.n_calibration = prepared.calibration.size();
  const LabeledDataset& eval = prepared.evaluation;
  const ScoredCalibration& es = prepared.eval_scored;
  const std::size_t m = eval.size();
  auto& sets = res.inputs.sets;
  sets.reserve(m);

  try {
    switch (cfg.method) {
      case Method::standard: {
        const auto cal = fit_standard(prepared.cal_scored.scores, cfg.alpha);
        for (const auto& ex : eval.examples()) sets.push_back(predict_standard(cal, ex, cfg.score));
        break;
      }
      case Method::mondrian: {
        const BinScheme scheme{cfg.binning.n_conf, cfg.binning.n_sub, SecondAxis::trust, std::nullopt};
        const auto cal = fit_mondrian(prepared.cal_scored, scheme, cfg.alpha);
        for (std::size_t i = 0; i < m; ++i) {
          sets.push_back(predict_mondrian(cal, eval[i], es.trust[i], cfg.score));
        }
        break;
      }
      case Method::conditional: {
        const auto cal = fit_conditional(prepared.cal_scored, prepared.calibration,
                                         make_basis(cfg, prepared), cfg.alpha);
        for (std::size_t i = 0; i < m; ++i) {
          const auto probs = class_probabilities(eval[i]);
          const auto candidates = all_scores(probs, cfg.score);
          sets.push_back(cal.predict(Covariates{es.conf[i], es.trust[i], eval[i].features}, candidates));
        }
        break;
      }
      case Method::oracle: {
        // The stored model probabilities, before temperature scaling.
        for (const auto& ex : prepared.evaluation_raw.examples()) {
          sets.push_back(oracle_predict_set(class_probabilities(ex), cfg.alpha));
        }
        break;
      }
    }
  } catch (...) {
    rethrow_with_stage(method_name(cfg.method));
  }

  res.inputs.labels = eval.labels();
  res.inputs.conf = es.conf;
  res.inputs.trust = es.trust;
  res.inputs.rank = es.rank;
  res.inputs.groups = es.group;
  res.pool_index = prepared.split.evaluation;
  res.true_scores = es.scores;
  try {
    const BinScheme scheme{cfg.binning.n_conf, cfg.binning.n_sub, SecondAxis::trust,
                           cfg.binning.rank_edges};
    res.report = coverage_report(res.inputs, scheme, cfg.alpha);
  } catch (...) {
    rethrow_with_stage("evaluate");
  }
  return res;
}

RunResult run_experiment(const RunConfig& cfg, const ExperimentData& data) {
  return calibrate_and_evaluate(cfg, prepare_run(cfg, data));
}

std::string report_json(const RunConfig& cfg, const RunResult& result) {
  const auto& r = result.report;
  json j;
  j["format_version"] = kFormatVersion;
  j["method"] = method_name(cfg.method);
  j["temperature"] = result.temperature;
  j["marginal_coverage"] = r.marginal_coverage;
  j["avg_set_size"] = r.avg_set_size;
  j["covgap_conf_trust"] = r.covgap_conf_trust;
  j["covgap_conf_rank"] = r.covgap_conf_rank;
  j["covgap_class"] = r.covgap_class;
  j["worst_group_coverage"] = r.worst_group_coverage ? json(*r.worst_group_coverage) : json(nullptr);
  j["n_calibration"] = result.n_calibration;
  j["n_evaluation"] = result.inputs.sets.size();
  j["config"] = config_to_json(cfg);
  return j.dump(2) + "\n";
}

std::string examples_csv(const RunResult& result) {
  const auto& in = result.inputs;
  std::string out = "pool_index,label,score,conf,trust,rank,covered,set_size,set,group\n";
  for (std::size_t i = 0; i < in.sets.size(); ++i) {
    const auto& set = in.sets[i];
    std::string members;
    for (std::size_t k = 0; k < set.members.size(); ++k) {
      if (k) members += ';';
      members += std::to_string(set.members[k]);
    }
    out += std::to_string(result.pool_index[i]) + "," + std::to_string(in.labels[i]) + "," +
           format_double(result.true_scores[i]) + "," + format_double(in.conf[i]) + "," +
           format_double(in.trust[i]) + "," + std::to_string(in.rank[i]) + "," +
           (set.contains(in.labels[i]) ? "1" : "0") + "," + std::to_string(set.size()) + "," +
           members + "," + (in.groups ? (*in.groups)[i] : std::string()) + "\n";
  }
  return out;
}

std::vector<ExampleRecord> parse_examples_csv(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != "pool_index,label,score,conf,trust,rank,covered,set_size,set,group") {
    throw DataError("examples.csv: unexpected header");
  }
  std::vector<ExampleRecord> out;
  out.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    if (f.size() != 10) {
      throw DataError("examples.csv line " + std::to_string(li + 1) + ": expected 10 fields");
    }
    ExampleRecord r;
    r.pool_index = parse_field<std::size_t>(f[0], li + 1, "pool_index");
    r.label = parse_field<std::size_t>(f[1], li + 1, "label");
    r.score = parse_field<double>(f[2], li + 1, "score");
    r.conf = parse_field<double>(f[3], li + 1, "conf");
    r.trust = parse_field<double>(f[4], li + 1, "trust");
    r.rank = parse_field<std::size_t>(f[5], li + 1, "rank");
    const auto covered = parse_field<int>(f[6], li + 1, "covered");
    if (covered != 0 && covered != 1) {
      throw DataError("examples.csv line " + std::to_string(li + 1) + ": covered must be 0 or 1");
    }
    r.covered = covered == 1;
    const auto size = parse_field<std::size_t>(f[7], li + 1, "set_size");
    if (!f[8].empty()) {
      for (auto m : split(f[8], ';')) r.set.members.push_back(parse_field<std::size_t>(m, li + 1, "set"));
    }
    if (r.set.size() != size) {
      throw DataError("examples.csv line " + std::to_string(li + 1) + ": set_size disagrees with set");
    }
    if (!f[9].empty()) r.group = std::string(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

void cmd_gen(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  LabeledDataset pool, train;
  try {
    pool = generate_gaussian_mixture(cfg.synthetic.pool_spec(cfg.seed));
    train = generate_gaussian_mixture(cfg.synthetic.train_spec(cfg.seed));
  } catch (...) {
    rethrow_with_stage("generate");
  }
  save_dataset(train, out_dir / "train.csv", DataFormat::csv);
  save_dataset(pool, out_dir / "pool.csv", DataFormat::csv);
}

RunResult cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ExperimentData data;
  try {
    data = load_experiment_data(cfg);
  } catch (...) {
    rethrow_with_stage("load");
  }
  RunResult res = run_experiment(cfg, data);
  ensure_dir(out_dir);
  write_text(out_dir / "report.json", report_json(cfg, res));
  write_text(out_dir / "bins_conf_trust.csv", bins_csv(res.report.bins_conf_trust));
  write_text(out_dir / "bins_conf_rank.csv", bins_csv(res.report.bins_conf_rank));
  write_text(out_dir / "bins_class.csv", bins_csv(res.report.bins_class));
  write_text(out_dir / "examples.csv", examples_csv(res));
  return res;
}

void cmd_sweep_degree(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ExperimentData data;
  try {
    data = load_experiment_data(cfg);
  } catch (...) {
    rethrow_with_stage("load");
  }
  const PreparedRun prepared = prepare_run(cfg, data);
  std::string out = "degree,marginal_coverage,avg_set_size,covgap_conf_trust,covgap_conf_rank,covgap_class\n";
  for (std::size_t degree : cfg.degrees) {
    RunConfig c = cfg;
    c.method = Method::conditional;
    c.basis.kind = BasisKind::polynomial;
    c.basis.degree = degree;
    RunResult res;
    try {
      res = calibrate_and_evaluate(c, prepared);
    } catch (...) {
      rethrow_with_stage("degree " + std::to_string(degree));
    }
    const auto& r = res.report;
    out += std::to_string(degree) + "," + format_double(r.marginal_coverage) + "," +
           format_double(r.avg_set_size) + "," + format_double(r.covgap_conf_trust) + "," +
           format_double(r.covgap_conf_rank) + "," + format_double(r.covgap_class) + "\n";
  }
  ensure_dir(out_dir);
  write_text(out_dir / "degree_sweep.csv", out);
}

RunConfig config_of_run(const std::filesystem::path& run_dir) {
  const std::string text = read_text(run_dir / "report.json");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("report.json: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("config")) throw DataError("report.json: missing config");
  return config_from_json(doc.at("config"));
}

void cmd_audit_balls(const RunConfig& cfg, const std::filesystem::path& run_dir,
                     const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto records = load_examples(run_dir);
  if (records.empty()) throw DataError("examples.csv has no rows");
  const RunConfig run_cfg = config_of_run(run_dir);
  ExperimentData data;
  try {
    data = load_experiment_data(run_cfg);
  } catch (...) {
    rethrow_with_stage("load");
  }
  simd::BlockedRows features(data.pool.feature_dim());
  CoverFlags cover;
  cover.reserve(records.size());
  for (const auto& r : records) {
    if (r.pool_index >= data.pool.size()) {
      throw DataError("examples.csv refers to pool row " + std::to_string(r.pool_index) +
                      " beyond the pool");
    }
    features.push_back(data.pool[r.pool_index].features);
    cover.push_back(r.covered ? 1 : 0);
  }

  std::string out = "radius,covgap,stderr\n";
  try {
    const std::uint64_t seed = derive_seed(cfg.seed, kAuditStream, 0);
    const auto grid = radius_grid(features, cfg.audit.radii, seed, cfg.audit.pairs);
    const AuditSettings settings{cfg.audit.trials, cfg.audit.centers, cfg.audit.min_neighbors};
    const auto curve = ball_audit_curve(features, cover, grid.grid, cfg.alpha, settings,
                                        derive_seed(cfg.seed, kAuditStream, 1));
    for (const auto& p : curve) {
      out += format_double(p.radius) + "," + format_double(p.covgap) + "," +
             format_double(p.stderr_) + "\n";
    }
  } catch (...) {
    rethrow_with_stage("audit");
  }
  ensure_dir(out_dir);
  write_text(out_dir / "ball_audit.csv", out);
}

void cmd_correlate(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir) {
  const auto records = load_examples(run_dir);
  std::vector<double> trust, rank;
  for (const auto& r : records) {
    trust.push_back(r.trust);
    rank.push_back(static_cast<double>(r.rank));
  }
  Correlation p, s;
  try {
    p = pearson(trust, rank);
    s = spearman(trust, rank);
  } catch (...) {
    rethrow_with_stage("correlate");
  }
  json j;
  j["n"] = records.size();
  j["pearson_r"] = double_json(p.r);
  j["pearson_p"] = double_json(p.p_value);
  j["spearman_r"] = double_json(s.r);
  j["spearman_p"] = double_json(s.p_value);
  ensure_dir(out_dir);
  write_text(out_dir / "correlation.json", j.dump(2) + "\n");
}

}  // namespace trustcp
