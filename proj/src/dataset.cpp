#include "trustcp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trustcp/errors.hpp"

namespace trustcp {

LabeledDataset::LabeledDataset(std::vector<LabeledExample> examples, std::size_t num_classes,
                               std::size_t feature_dim)
    : examples_(std::move(examples)), num_classes_(num_classes), feature_dim_(feature_dim) {
  if (num_classes_ < 2) throw DataError("dataset needs at least 2 classes");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.logits.size() != num_classes_) {
      throw DataError("example " + std::to_string(i) + " has " + std::to_string(ex.logits.size()) +
                      " logits, expected " + std::to_string(num_classes_));
    }
    if (ex.features.size() != feature_dim_) {
      throw DataError("example " + std::to_string(i) + " has " +
                      std::to_string(ex.features.size()) + " features, expected " +
                      std::to_string(feature_dim_));
    }
    if (ex.label >= num_classes_) {
      throw DataError("label out of range at example " + std::to_string(i));
    }
  }
}

bool LabeledDataset::has_groups() const {
  return std::any_of(examples_.begin(), examples_.end(),
                     [](const LabeledExample& ex) { return ex.group.has_value(); });
}

std::vector<std::size_t> LabeledDataset::labels() const {
  std::vector<std::size_t> out;
  out.reserve(examples_.size());
  for (const auto& ex : examples_) out.push_back(ex.label);
  return out;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<LabeledExample> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= examples_.size()) throw ArgumentError("subset index out of range");
    picked.push_back(examples_[i]);
  }
  LabeledDataset out;
  out.examples_ = std::move(picked);
  out.num_classes_ = num_classes_;
  out.feature_dim_ = feature_dim_;
  return out;
}

DataFormat parse_data_format(const std::string& name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "jsonl") return DataFormat::jsonl;
  throw ArgumentError("unknown data format '" + name + "' (expected csv or jsonl)");
}

DataFormat infer_data_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".ndjson") ? DataFormat::jsonl : DataFormat::csv;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string at_row(std::size_t row) { return " at row " + std::to_string(row); }

double parse_real(std::string_view field, std::string_view column, std::size_t row) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw DataError("malformed numeric value '" + std::string(field) + "' in column " +
                    std::string(column) + at_row(row));
  }
  if (!std::isfinite(value)) {
    throw DataError("non-finite value in column " + std::string(column) + at_row(row));
  }
  return value;
}

std::size_t parse_label(std::string_view field, std::size_t num_classes, std::size_t row) {
  unsigned long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError("malformed label '" + std::string(field) + "'" + at_row(row));
  }
  if (value >= num_classes) throw DataError("label out of range" + at_row(row));
  return static_cast<std::size_t>(value);
}

std::string format_real(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace

LabeledDataset parse_csv(const std::string& text) {
  auto lines = split_lines(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw DataError("empty CSV: missing header");

  const auto header = split_fields(lines[0]);
  if (header.empty() || header[0] != "label") throw DataError("CSV header must start with 'label'");
  std::size_t k = 0;
  std::size_t pos = 1;
  while (pos < header.size() && header[pos] == "logit_" + std::to_string(k)) ++k, ++pos;
  std::size_t d = 0;
  while (pos < header.size() && header[pos] == "feat_" + std::to_string(d)) ++d, ++pos;
  bool has_group = false;
  if (pos < header.size() && header[pos] == "group") has_group = true, ++pos;
  if (pos != header.size()) {
    throw DataError("unexpected CSV header column '" + std::string(header[pos]) + "'");
  }
  if (k < 2) throw DataError("CSV header declares fewer than 2 logit columns");

  const std::size_t expected = header.size();
  std::vector<LabeledExample> examples;
  examples.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li;
    if (lines[li].empty()) throw DataError("empty line" + at_row(row));
    const auto fields = split_fields(lines[li]);
    if (fields.size() != expected) {
      throw DataError("expected " + std::to_string(expected) + " columns, found " +
                      std::to_string(fields.size()) + at_row(row));
    }
    LabeledExample ex;
    ex.label = parse_label(fields[0], k, row);
    ex.logits.reserve(k);
    for (std::size_t j = 0; j < k; ++j) ex.logits.push_back(parse_real(fields[1 + j], header[1 + j], row));
    ex.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      ex.features.push_back(parse_real(fields[1 + k + j], header[1 + k + j], row));
    }
    if (has_group) ex.group = std::string(fields[1 + k + d]);
    examples.push_back(std::move(ex));
  }
  return LabeledDataset(std::move(examples), k, d);
}

std::string to_csv(const LabeledDataset& ds) {
  const bool groups = ds.has_groups();
  std::string out = "label";
  for (std::size_t j = 0; j < ds.num_classes(); ++j) out += ",logit_" + std::to_string(j);
  for (std::size_t j = 0; j < ds.feature_dim(); ++j) out += ",feat_" + std::to_string(j);
  if (groups) out += ",group";
  out += '\n';
  for (const auto& ex : ds.examples()) {
    if (ex.group && ex.group->find_first_of(",\n\r") != std::string::npos) {
      throw DataError("group tag '" + *ex.group + "' cannot be written to CSV");
    }
    out += std::to_string(ex.label);
    for (double v : ex.logits) out += ',' + format_real(v);
    for (double v : ex.features) out += ',' + format_real(v);
    if (groups) out += ',' + ex.group.value_or("");
    out += '\n';
  }
  return out;
}

LabeledDataset parse_jsonl(const std::string& text) {
  auto lines = split_lines(text);
  std::vector<LabeledExample> examples;
  std::optional<std::size_t> k;
  std::optional<std::size_t> d;
  std::size_t row = 0;
  for (auto line : lines) {
    ++row;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("malformed JSON" + at_row(row) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("label") || !obj.contains("logits") ||
        !obj.contains("features")) {
      throw DataError("JSON object missing label/logits/features" + at_row(row));
    }
    const auto& logits = obj["logits"];
    const auto& features = obj["features"];
    if (!logits.is_array() || !features.is_array()) {
      throw DataError("logits and features must be arrays" + at_row(row));
    }
    if (!k) k = logits.size();
    if (!d) d = features.size();
    if (logits.size() != *k || features.size() != *d) {
      throw DataError("inconsistent logits/features length" + at_row(row));
    }
    if (*k < 2) throw DataError("fewer than 2 logits" + at_row(row));
    LabeledExample ex;
    const auto& label = obj["label"];
    if (!label.is_number_integer() || label.get<long long>() < 0) {
      throw DataError("malformed label" + at_row(row));
    }
    if (label.get<unsigned long long>() >= *k) throw DataError("label out of range" + at_row(row));
    ex.label = label.get<std::size_t>();
    auto read_reals = [&](const nlohmann::json& arr, std::vector<double>& dst, const char* name) {
      dst.reserve(arr.size());
      for (const auto& v : arr) {
        if (!v.is_number()) {
          throw DataError(std::string("non-numeric entry in ") + name + at_row(row));
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw DataError(std::string("non-finite entry in ") + name + at_row(row));
        dst.push_back(x);
      }
    };
    read_reals(logits, ex.logits, "logits");
    read_reals(features, ex.features, "features");
    if (obj.contains("group") && !obj["group"].is_null()) {
      if (!obj["group"].is_string()) throw DataError("group must be a string" + at_row(row));
      ex.group = obj["group"].get<std::string>();
    }
    examples.push_back(std::move(ex));
  }
  if (!k) throw DataError("empty JSONL file");
  return LabeledDataset(std::move(examples), *k, *d);
}

std::string to_jsonl(const LabeledDataset& ds) {
  std::string out;
  for (const auto& ex : ds.examples()) {
    nlohmann::json obj;
    obj["label"] = ex.label;
    obj["logits"] = ex.logits;
    obj["features"] = ex.features;
    if (ex.group) obj["group"] = *ex.group;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

LabeledDataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  const std::string text = read_file(path);
  try {
    return format == DataFormat::csv ? parse_csv(text) : parse_jsonl(text);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path, DataFormat format) {
  write_file(path, format == DataFormat::csv ? to_csv(ds) : to_jsonl(ds));
}

SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("split fraction must lie in (0, 1)");
  }
  if (n == 0) throw ArgumentError("cannot split an empty dataset");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_cal = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  SplitIndices out;
  out.calibration.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_cal));
  out.evaluation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_cal), perm.end());
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split_calibration_eval(const LabeledDataset& ds,
                                                                 double fraction,
                                                                 std::uint64_t seed) {
  const auto idx = split_indices(ds.size(), fraction, seed);
  return {ds.subset(idx.calibration), ds.subset(idx.evaluation)};
}

}  // namespace trustcp
