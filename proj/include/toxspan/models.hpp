#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "toxspan/corpus.hpp"

namespace toxspan {

struct TrainConfig {
  std::size_t epochs = 45;
  double batch_start = 4.0;
  double batch_stop = 32.0;
  double batch_factor = 1.001;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

/// Batches of shuffled indices covering 0..n_items-1 exactly once. Each
/// batch takes floor(b) items (capped by what remains), then
/// b <- min(batch_stop, b * batch_factor). Starts at b = batch_start.
std::vector<std::vector<std::size_t>> compounding_batches(
    const TrainConfig& cfg, std::size_t n_items);

struct LexiconEntry {
  std::size_t in_span_count = 0;
  std::size_t total_count = 0;

  bool operator==(const LexiconEntry&) const = default;
};

/// Token-level span extractor: a normalized token is "active" (predicted
/// toxic) when it was seen often enough and inside gold spans often enough.
class LexiconModel {
 public:
  LexiconModel() = default;
  LexiconModel(std::map<std::u32string, LexiconEntry> entries,
               std::size_t min_count, double min_ratio);

  bool is_active(const std::u32string& normalized) const;

  const std::map<std::u32string, LexiconEntry>& entries() const {
    return entries_;
  }
  std::size_t min_count() const { return min_count_; }
  double min_ratio() const { return min_ratio_; }

  bool operator==(const LexiconModel&) const = default;

 private:
  std::map<std::u32string, LexiconEntry> entries_;
  std::size_t min_count_ = 2;
  double min_ratio_ = 0.5;
};

/// Tallies every normalized token across the corpus: how often it occurs
/// and how often inside a gold span (any-overlap labeling).
LexiconModel train_lexicon(const Corpus& c, std::size_t min_count,
                           double min_ratio);

/// Core offsets of every active token in the text.
SpanSet extract_all(const LexiconModel& m, const std::u32string& text);

/// The leftmost maximal run of consecutive active tokens, from the first
/// token's core start to the last one's core end (internal whitespace
/// included); empty when no token is active.
SpanSet extract_one(const LexiconModel& m, const std::u32string& text);

inline constexpr std::size_t kDefaultHashBuckets = std::size_t{1} << 18;

/// Post-level toxicity classifier: logistic regression over hashed
/// character n-gram counts (n = 1..3).
class GateModel {
 public:
  GateModel() : GateModel(kDefaultHashBuckets) {}
  explicit GateModel(std::size_t hash_buckets)
      : weights_(hash_buckets, 0.0) {}
  GateModel(std::vector<double> weights, double bias)
      : weights_(std::move(weights)), bias_(bias) {}

  std::size_t hash_buckets() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

  bool operator==(const GateModel&) const = default;

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
};

/// Sparse hashed n-gram counts of a text, bucket-sorted. Hashing is FNV-1a
/// over the code points, stable across platforms for a fixed bucket count.
using FeatureVector = std::vector<std::pair<std::size_t, double>>;
FeatureVector gate_features(const std::u32string& text,
                            std::size_t hash_buckets);

/// Sigmoid of bias + w . features(text), in (0, 1). The toxic/non-toxic
/// decision is score >= threshold.
double gate_score(const GateModel& g, const std::u32string& text);

/// Mean log-loss over a labeled batch (labels in {0,1}).
double gate_log_loss(const GateModel& g, std::span<const FeatureVector> xs,
                     std::span<const int> labels);

struct GateGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Analytic gradient of gate_log_loss in the model's parameters.
GateGradient gate_log_loss_gradient(const GateModel& g,
                                    std::span<const FeatureVector> xs,
                                    std::span<const int> labels);

/// SGD on the post-level label "gold is nonempty", batched by
/// compounding_batches (reseeded per epoch), deterministic given cfg.seed.
/// Throws InputError when the corpus has only one class. When epoch_loss
/// is given, the full-corpus loss after each epoch is appended to it.
GateModel train_gate(const Corpus& c, const TrainConfig& cfg,
                     std::size_t hash_buckets = kDefaultHashBuckets,
                     std::vector<double>* epoch_loss = nullptr);

/// Each character offset kept independently with probability p.
SpanSet random_baseline(double p, std::uint64_t seed,
                        const std::u32string& text);

// Versioned JSON model files; loaders reject unknown formats and versions.
nlohmann::json gate_to_json(const GateModel& g);
GateModel gate_from_json(const nlohmann::json& j);
nlohmann::json lexicon_to_json(const LexiconModel& m);
LexiconModel lexicon_from_json(const nlohmann::json& j);

}  // namespace toxspan
