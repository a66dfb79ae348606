#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace trustcp {

struct LabeledExample {
  std::size_t label = 0;
  std::vector<double> logits;    // K pre-softmax scores
  std::vector<double> features;  // D-dimensional representation
  std::optional<std::string> group;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// Immutable, validated collection of examples sharing K classes and D features.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  // Throws DataError when an example disagrees with K or D, or K < 2.
  LabeledDataset(std::vector<LabeledExample> examples, std::size_t num_classes,
                 std::size_t feature_dim);

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t feature_dim() const { return feature_dim_; }
  const std::vector<LabeledExample>& examples() const { return examples_; }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }

  bool has_groups() const;
  std::vector<std::size_t> labels() const;

  // Examples at the given positions, in the given order.
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  std::vector<LabeledExample> examples_;
  std::size_t num_classes_ = 0;
  std::size_t feature_dim_ = 0;
};

enum class DataFormat { csv, jsonl };

DataFormat parse_data_format(const std::string& name);
// csv unless the extension is .jsonl / .ndjson.
DataFormat infer_data_format(const std::filesystem::path& path);

// CSV header: label,logit_0..logit_{K-1},feat_0..feat_{D-1}[,group]
// JSONL: {"label": int, "logits": [...], "features": [...], "group": "..."}
// Errors carry the 1-based data row (CSV rows after the header, JSONL lines).
LabeledDataset load_dataset(const std::filesystem::path& path, DataFormat format);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path, DataFormat format);

LabeledDataset parse_csv(const std::string& text);
std::string to_csv(const LabeledDataset& ds);
LabeledDataset parse_jsonl(const std::string& text);
std::string to_jsonl(const LabeledDataset& ds);

struct SplitIndices {
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> evaluation;
};

// Seeded uniform permutation; the first floor(fraction * n) positions go to
// calibration, the rest to evaluation.
SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed);
std::pair<LabeledDataset, LabeledDataset> split_calibration_eval(const LabeledDataset& ds,
                                                                 double fraction,
                                                                 std::uint64_t seed);

}  // namespace trustcp
