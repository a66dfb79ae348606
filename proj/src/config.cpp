#include "trustcp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "trustcp/binning.hpp"
#include "trustcp/errors.hpp"

namespace trustcp {

using nlohmann::json;

Method parse_method(const std::string& name) {
  if (name == "standard") return Method::standard;
  if (name == "mondrian") return Method::mondrian;
  if (name == "conditional") return Method::conditional;
  if (name == "oracle") return Method::oracle;
  throw ArgumentError("unknown method '" + name +
                      "' (expected standard, mondrian, conditional or oracle)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::standard: return "standard";
    case Method::mondrian: return "mondrian";
    case Method::conditional: return "conditional";
    case Method::oracle: return "oracle";
  }
  return "?";
}

SyntheticSpec SyntheticConfig::pool_spec(std::uint64_t seed) const {
  SyntheticSpec spec;
  spec.num_classes = num_classes;
  spec.feature_dim = feature_dim;
  spec.class_means = class_means.empty()
                         ? random_class_means(num_classes, feature_dim, mean_scale, means_seed)
                         : class_means;
  spec.shared_covariance_scale = sigma2;
  spec.class_priors =
      priors.empty() ? std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes))
                     : priors;
  if (distortion.kind == "temperature") {
    spec.model_distortion = TemperatureDistortion{distortion.t};
  } else if (distortion.kind == "mean_shift") {
    std::vector<double> shift = distortion.shift;
    if (shift.size() == 1) shift.assign(feature_dim, shift.front());
    spec.model_distortion = MeanShiftDistortion{std::move(shift)};
  } else if (distortion.kind != "none") {
    throw ArgumentError("unknown distortion kind '" + distortion.kind +
                        "' (expected none, temperature or mean_shift)");
  }
  spec.sample_count = sample_count;
  // Stream 0 is the pool, stream 1 the training set.
  spec.seed = seed * 2;
  return spec;
}

SyntheticSpec SyntheticConfig::train_spec(std::uint64_t seed) const {
  SyntheticSpec spec = pool_spec(seed);
  spec.sample_count = train_count;
  spec.seed = seed * 2 + 1;
  return spec;
}

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ArgumentError("split_fraction must lie in (0, 1)");
  }
  score.validate();
  if (trust.k == 0) throw ArgumentError("trust.k must be positive");
  if (!(trust.delta >= 0.0 && trust.delta < 1.0)) throw ArgumentError("trust.delta must lie in [0, 1)");
  if (!(trust.cap > 0.0)) throw ArgumentError("trust.cap must be positive");
  if (basis.kind == BasisKind::pca && basis.pca_components == 0) {
    throw ArgumentError("basis.pca_components must be positive");
  }
  if (basis.kind == BasisKind::indicator) {
    // Construction checks the edges.
    (void)FunctionBasis::indicator(basis.conf_edges, basis.trust_edges);
  }
  BinScheme{binning.n_conf, binning.n_sub, SecondAxis::rank, binning.rank_edges}.validate();
  if (synthetic.num_classes < 2) throw ArgumentError("synthetic.num_classes must be at least 2");
  if (synthetic.feature_dim == 0) throw ArgumentError("synthetic.feature_dim must be positive");
  if (!synthetic.distortion.shift.empty() && synthetic.distortion.shift.size() != 1 &&
      synthetic.distortion.shift.size() != synthetic.feature_dim) {
    throw ArgumentError("synthetic.distortion.shift needs 1 or feature_dim values");
  }
  if (audit.radii == 0 || audit.trials == 0 || audit.centers == 0 || audit.pairs == 0) {
    throw ArgumentError("audit counts must be positive");
  }
  if (degrees.empty()) throw ArgumentError("degrees must not be empty");
}

namespace {

// Reads one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ArgumentError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ArgumentError(where(key) + ": " + e.what());
    }
  }

  void get_number(const char* key, double& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    out = number(obj_.at(key), where(key));
  }

  void get_numbers(const char* key, std::vector<double>& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    out = numbers(obj_.at(key), where(key));
  }

  void get_count(const char* key, std::size_t& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned()) throw ArgumentError(where(key) + " must be a nonnegative integer");
    out = v.get<std::size_t>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ArgumentError("unknown config key '" + where(key) + "'");
    }
  }

  static double number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ArgumentError(where + " must be a number");
  }

  static std::vector<double> numbers(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ArgumentError(where + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

json numbers_json(const std::vector<double>& vs) {
  json arr = json::array();
  for (double v : vs) arr.push_back(number_json(v));
  return arr;
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  RunConfig cfg;
  ObjectReader top(doc, "");
  if (const json* v = top.child("seed")) {
    if (!v->is_number_unsigned()) throw ArgumentError("seed must be a nonnegative integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  top.get_number("alpha", cfg.alpha);
  std::string method = method_name(cfg.method);
  top.get("method", method);
  cfg.method = parse_method(method);
  top.get_number("split_fraction", cfg.split_fraction);
  top.get("temperature_scaling", cfg.temperature_scaling);

  if (const json* v = top.child("score")) {
    ObjectReader r(*v, "score");
    std::string kind = score_kind_name(cfg.score.kind);
    r.get("kind", kind);
    cfg.score.kind = parse_score_kind(kind);
    r.get_number("raps_lambda", cfg.score.raps_lambda);
    r.get_count("raps_kreg", cfg.score.raps_kreg);
    r.finish();
  }
  if (const json* v = top.child("trust")) {
    ObjectReader r(*v, "trust");
    r.get_count("k", cfg.trust.k);
    r.get_number("delta", cfg.trust.delta);
    r.get_number("cap", cfg.trust.cap);
    r.finish();
  }
  if (const json* v = top.child("basis")) {
    ObjectReader r(*v, "basis");
    std::string kind = basis_kind_name(cfg.basis.kind);
    r.get("kind", kind);
    cfg.basis.kind = parse_basis_kind(kind);
    r.get_count("degree", cfg.basis.degree);
    r.get_count("pca_components", cfg.basis.pca_components);
    r.get_numbers("conf_edges", cfg.basis.conf_edges);
    r.get_numbers("trust_edges", cfg.basis.trust_edges);
    r.finish();
  }
  if (const json* v = top.child("binning")) {
    ObjectReader r(*v, "binning");
    r.get_count("n_conf", cfg.binning.n_conf);
    r.get_count("n_sub", cfg.binning.n_sub);
    if (const json* e = r.child("rank_edges"); e && !e->is_null()) {
      cfg.binning.rank_edges = ObjectReader::numbers(*e, "binning.rank_edges");
    }
    r.finish();
  }
  if (const json* v = top.child("synthetic")) {
    auto& s = cfg.synthetic;
    ObjectReader r(*v, "synthetic");
    r.get_count("num_classes", s.num_classes);
    r.get_count("feature_dim", s.feature_dim);
    if (const json* m = r.child("class_means")) {
      if (!m->is_array()) throw ArgumentError("synthetic.class_means must be an array of arrays");
      s.class_means.clear();
      for (std::size_t i = 0; i < m->size(); ++i) {
        s.class_means.push_back(
            ObjectReader::numbers((*m)[i], "synthetic.class_means[" + std::to_string(i) + "]"));
      }
    }
    r.get_number("mean_scale", s.mean_scale);
    if (const json* ms = r.child("means_seed")) {
      if (!ms->is_number_unsigned()) {
        throw ArgumentError("synthetic.means_seed must be a nonnegative integer");
      }
      s.means_seed = ms->get<std::uint64_t>();
    }
    r.get_number("sigma2", s.sigma2);
    r.get_numbers("priors", s.priors);
    if (const json* d = r.child("distortion")) {
      ObjectReader dr(*d, "synthetic.distortion");
      dr.get("kind", s.distortion.kind);
      dr.get_number("t", s.distortion.t);
      dr.get_numbers("shift", s.distortion.shift);
      dr.finish();
    }
    r.get_count("sample_count", s.sample_count);
    r.get_count("train_count", s.train_count);
    r.finish();
  }
  if (const json* v = top.child("audit")) {
    ObjectReader r(*v, "audit");
    r.get_count("radii", cfg.audit.radii);
    r.get_count("trials", cfg.audit.trials);
    r.get_count("centers", cfg.audit.centers);
    r.get_count("min_neighbors", cfg.audit.min_neighbors);
    r.get_count("pairs", cfg.audit.pairs);
    r.finish();
  }
  if (const json* v = top.child("data")) {
    ObjectReader r(*v, "data");
    if (const json* p = r.child("train"); p && !p->is_null()) cfg.data.train = p->get<std::string>();
    if (const json* p = r.child("pool"); p && !p->is_null()) cfg.data.pool = p->get<std::string>();
    if (const json* f = r.child("format"); f && !f->is_null()) {
      try {
        cfg.data.format = parse_data_format(f->get<std::string>());
      } catch (const std::exception& e) {
        throw ArgumentError(std::string("data.format: ") + e.what());
      }
    }
    r.finish();
  }
  if (const json* v = top.child("degrees")) {
    if (!v->is_array()) throw ArgumentError("degrees must be an array of integers");
    cfg.degrees.clear();
    for (const auto& d : *v) {
      if (!d.is_number_unsigned()) throw ArgumentError("degrees must be nonnegative integers");
      cfg.degrees.push_back(d.get<std::size_t>());
    }
  }
  top.finish();
  cfg.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["method"] = method_name(cfg.method);
  j["split_fraction"] = cfg.split_fraction;
  j["temperature_scaling"] = cfg.temperature_scaling;
  j["score"] = {{"kind", score_kind_name(cfg.score.kind)},
                {"raps_lambda", cfg.score.raps_lambda},
                {"raps_kreg", cfg.score.raps_kreg}};
  j["trust"] = {{"k", cfg.trust.k}, {"delta", cfg.trust.delta}, {"cap", cfg.trust.cap}};
  j["basis"] = {{"kind", basis_kind_name(cfg.basis.kind)},
                {"degree", cfg.basis.degree},
                {"pca_components", cfg.basis.pca_components},
                {"conf_edges", numbers_json(cfg.basis.conf_edges)},
                {"trust_edges", numbers_json(cfg.basis.trust_edges)}};
  j["binning"] = {{"n_conf", cfg.binning.n_conf},
                  {"n_sub", cfg.binning.n_sub},
                  {"rank_edges", cfg.binning.rank_edges ? numbers_json(*cfg.binning.rank_edges)
                                                        : json(nullptr)}};
  const auto& s = cfg.synthetic;
  json means = json::array();
  for (const auto& m : s.class_means) means.push_back(numbers_json(m));
  j["synthetic"] = {{"num_classes", s.num_classes},
                    {"feature_dim", s.feature_dim},
                    {"class_means", means},
                    {"mean_scale", s.mean_scale},
                    {"means_seed", s.means_seed},
                    {"sigma2", s.sigma2},
                    {"priors", numbers_json(s.priors)},
                    {"distortion",
                     {{"kind", s.distortion.kind},
                      {"t", s.distortion.t},
                      {"shift", numbers_json(s.distortion.shift)}}},
                    {"sample_count", s.sample_count},
                    {"train_count", s.train_count}};
  j["audit"] = {{"radii", cfg.audit.radii},
                {"trials", cfg.audit.trials},
                {"centers", cfg.audit.centers},
                {"min_neighbors", cfg.audit.min_neighbors},
                {"pairs", cfg.audit.pairs}};
  j["data"] = {{"train", cfg.data.train ? json(*cfg.data.train) : json(nullptr)},
               {"pool", cfg.data.pool ? json(*cfg.data.pool) : json(nullptr)},
               {"format", cfg.data.format ? json(*cfg.data.format == DataFormat::csv ? "csv" : "jsonl")
                                          : json(nullptr)}};
  j["degrees"] = cfg.degrees;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ArgumentError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace trustcp
