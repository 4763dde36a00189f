#include "toxspan/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "toxspan/errors.hpp"
#include "toxspan/unicode.hpp"

namespace toxspan {

namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.batch_start < 1.0)
    throw InputError("TrainConfig: batch_start must be >= 1");
  if (cfg.batch_factor <= 1.0)
    throw InputError("TrainConfig: batch_factor must be > 1");
  if (cfg.batch_stop < cfg.batch_start)
    throw InputError("TrainConfig: batch_stop must be >= batch_start");
  if (cfg.learning_rate <= 0.0)
    throw InputError("TrainConfig: learning_rate must be > 0");
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(gen() % i)]);
  return order;
}

std::uint64_t fnv1a_ngram(const char32_t* cps, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  mix(static_cast<std::uint8_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto cp = static_cast<std::uint32_t>(cps[i]);
    mix(static_cast<std::uint8_t>(cp));
    mix(static_cast<std::uint8_t>(cp >> 8));
    mix(static_cast<std::uint8_t>(cp >> 16));
    mix(static_cast<std::uint8_t>(cp >> 24));
  }
  return h;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(1 + e^x) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double linear_score(const GateModel& g, const FeatureVector& x) {
  double s = g.bias();
  for (const auto& [bucket, value] : x) s += g.weights()[bucket] * value;
  return s;
}

}  // namespace

std::vector<std::vector<std::size_t>> compounding_batches(
    const TrainConfig& cfg, std::size_t n_items) {
  validate(cfg);
  const std::vector<std::size_t> order = shuffled_indices(n_items, cfg.seed);

  std::vector<std::vector<std::size_t>> batches;
  double b = cfg.batch_start;
  std::size_t cursor = 0;
  while (cursor < n_items) {
    const auto want = static_cast<std::size_t>(std::floor(b));
    const std::size_t take = std::min(want, n_items - cursor);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                         order.begin() + static_cast<std::ptrdiff_t>(cursor + take));
    cursor += take;
    b = std::min(cfg.batch_stop, b * cfg.batch_factor);
  }
  return batches;
}

LexiconModel::LexiconModel(std::map<std::u32string, LexiconEntry> entries,
                           std::size_t min_count, double min_ratio)
    : entries_(std::move(entries)), min_count_(min_count), min_ratio_(min_ratio) {
  if (min_count_ < 1)
    throw InputError("LexiconModel: min_count must be >= 1");
  if (min_ratio_ <= 0.0 || min_ratio_ > 1.0)
    throw InputError("LexiconModel: min_ratio must be in (0, 1]");
  for (const auto& [lexeme, e] : entries_)
    if (e.in_span_count > e.total_count)
      throw InputError("LexiconModel: entry \"" + utf8_encode(lexeme) +
                       "\" has in_span_count > total_count");
}

bool LexiconModel::is_active(const std::u32string& normalized) const {
  const auto it = entries_.find(normalized);
  if (it == entries_.end()) return false;
  const LexiconEntry& e = it->second;
  if (e.total_count < min_count_) return false;
  return static_cast<double>(e.in_span_count) >=
         min_ratio_ * static_cast<double>(e.total_count);
}

LexiconModel train_lexicon(const Corpus& c, std::size_t min_count,
                           double min_ratio) {
  if (c.posts.empty()) throw InputError("train_lexicon: empty corpus");
  std::map<std::u32string, LexiconEntry> entries;
  for (const Post& p : c.posts) {
    for (const auto& [token, toxic] : label_tokens(p)) {
      std::u32string norm = normalize_token(token);
      if (norm.empty()) continue;
      LexiconEntry& e = entries[std::move(norm)];
      ++e.total_count;
      if (toxic) ++e.in_span_count;
    }
  }
  return LexiconModel(std::move(entries), min_count, min_ratio);
}

SpanSet extract_all(const LexiconModel& m, const std::u32string& text) {
  std::vector<std::size_t> offs;
  for (const Token& t : tokenize(text)) {
    if (!m.is_active(normalize_token(t))) continue;
    const ContiguousSpan core = token_core(t);
    for (std::size_t o = core.start; o < core.end; ++o) offs.push_back(o);
  }
  return SpanSet(std::move(offs));
}

SpanSet extract_one(const LexiconModel& m, const std::u32string& text) {
  const std::vector<Token> tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!m.is_active(normalize_token(tokens[i]))) continue;
    std::size_t j = i;
    while (j + 1 < tokens.size() && m.is_active(normalize_token(tokens[j + 1])))
      ++j;
    const std::size_t start = token_core(tokens[i]).start;
    const std::size_t end = token_core(tokens[j]).end;
    std::vector<std::size_t> offs;
    offs.reserve(end - start);
    for (std::size_t o = start; o < end; ++o) offs.push_back(o);
    return SpanSet(std::move(offs));
  }
  return SpanSet();
}

FeatureVector gate_features(const std::u32string& text,
                            std::size_t hash_buckets) {
  if (hash_buckets == 0)
    throw InvariantError("gate_features: hash_buckets must be >= 1");
  std::unordered_map<std::size_t, double> counts;
  for (std::size_t n = 1; n <= 3; ++n) {
    if (text.size() < n) break;
    for (std::size_t i = 0; i + n <= text.size(); ++i)
      counts[fnv1a_ngram(text.data() + i, n) % hash_buckets] += 1.0;
  }
  FeatureVector features(counts.begin(), counts.end());
  std::sort(features.begin(), features.end());
  return features;
}

double gate_score(const GateModel& g, const std::u32string& text) {
  return sigmoid(linear_score(g, gate_features(text, g.hash_buckets())));
}

double gate_log_loss(const GateModel& g, std::span<const FeatureVector> xs,
                     std::span<const int> labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double s = linear_score(g, xs[i]);
    loss += softplus(s) - static_cast<double>(labels[i]) * s;
  }
  return xs.empty() ? 0.0 : loss / static_cast<double>(xs.size());
}

GateGradient gate_log_loss_gradient(const GateModel& g,
                                    std::span<const FeatureVector> xs,
                                    std::span<const int> labels) {
  GateGradient grad;
  grad.weights.assign(g.hash_buckets(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d =
        sigmoid(linear_score(g, xs[i])) - static_cast<double>(labels[i]);
    for (const auto& [bucket, value] : xs[i]) grad.weights[bucket] += d * value;
    grad.bias += d;
  }
  if (!xs.empty()) {
    const auto n = static_cast<double>(xs.size());
    for (double& w : grad.weights) w /= n;
    grad.bias /= n;
  }
  return grad;
}

GateModel train_gate(const Corpus& c, const TrainConfig& cfg,
                     std::size_t hash_buckets,
                     std::vector<double>* epoch_loss) {
  validate(cfg);
  if (hash_buckets == 0)
    throw InputError("train_gate: hash_buckets must be >= 1");

  std::vector<FeatureVector> xs;
  std::vector<int> labels;
  xs.reserve(c.posts.size());
  labels.reserve(c.posts.size());
  for (const Post& p : c.posts) {
    xs.push_back(gate_features(p.text, hash_buckets));
    labels.push_back(p.gold.empty() ? 0 : 1);
  }
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg)
    throw InputError("train_gate: corpus must contain both annotated and "
                     "unannotated posts");

  std::vector<double> weights(hash_buckets, 0.0);
  double bias = 0.0;
  std::unordered_map<std::size_t, double> sparse_grad;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    TrainConfig epoch_cfg = cfg;
    epoch_cfg.seed = cfg.seed + epoch;  // fresh shuffle each pass
    for (const auto& batch : compounding_batches(epoch_cfg, xs.size())) {
      sparse_grad.clear();
      double bias_grad = 0.0;
      for (std::size_t idx : batch) {
        double s = bias;
        for (const auto& [bucket, value] : xs[idx]) s += weights[bucket] * value;
        const double d = sigmoid(s) - static_cast<double>(labels[idx]);
        for (const auto& [bucket, value] : xs[idx]) sparse_grad[bucket] += d * value;
        bias_grad += d;
      }
      const double scale = cfg.learning_rate / static_cast<double>(batch.size());
      for (const auto& [bucket, g] : sparse_grad) weights[bucket] -= scale * g;
      bias -= scale * bias_grad;
    }
    if (epoch_loss) {
      const GateModel snapshot(weights, bias);
      epoch_loss->push_back(gate_log_loss(snapshot, xs, labels));
    }
  }
  return GateModel(std::move(weights), bias);
}

SpanSet random_baseline(double p, std::uint64_t seed,
                        const std::u32string& text) {
  if (p < 0.0 || p > 1.0)
    throw InputError("random_baseline: p must be in [0, 1]");
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> offs;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const double u =
        static_cast<double>(gen() >> 11) * 0x1.0p-53;  // uniform in [0, 1)
    if (u < p) offs.push_back(i);
  }
  return SpanSet(std::move(offs));
}

namespace {

constexpr const char* kGateFormat = "toxspan-gate";
constexpr const char* kLexiconFormat = "toxspan-lexicon";
constexpr int kModelVersion = 1;

void check_header(const nlohmann::json& j, const char* format) {
  if (!j.is_object() || j.value("format", std::string()) != format)
    throw InputError(std::string("model file is not a ") + format +
                     " document");
  if (j.value("version", -1) != kModelVersion)
    throw InputError(std::string("unsupported ") + format + " version");
}

}  // namespace

nlohmann::json gate_to_json(const GateModel& g) {
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t i = 0; i < g.weights().size(); ++i)
    if (g.weights()[i] != 0.0) weights.push_back({i, g.weights()[i]});
  return nlohmann::json{{"format", kGateFormat},
                        {"version", kModelVersion},
                        {"hash_buckets", g.hash_buckets()},
                        {"bias", g.bias()},
                        {"weights", std::move(weights)}};
}

GateModel gate_from_json(const nlohmann::json& j) {
  check_header(j, kGateFormat);
  const auto buckets = j.at("hash_buckets").get<std::size_t>();
  if (buckets == 0) throw InputError("gate model: hash_buckets must be >= 1");
  std::vector<double> weights(buckets, 0.0);
  for (const auto& entry : j.at("weights")) {
    const auto bucket = entry.at(0).get<std::size_t>();
    const auto value = entry.at(1).get<double>();
    if (bucket >= buckets)
      throw InputError("gate model: weight bucket out of range");
    if (!std::isfinite(value))
      throw InputError("gate model: non-finite weight");
    weights[bucket] = value;
  }
  const auto bias = j.at("bias").get<double>();
  if (!std::isfinite(bias)) throw InputError("gate model: non-finite bias");
  return GateModel(std::move(weights), bias);
}

nlohmann::json lexicon_to_json(const LexiconModel& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [lexeme, e] : m.entries())
    entries.push_back({utf8_encode(lexeme), e.in_span_count, e.total_count});
  return nlohmann::json{{"format", kLexiconFormat},
                        {"version", kModelVersion},
                        {"min_count", m.min_count()},
                        {"min_ratio", m.min_ratio()},
                        {"entries", std::move(entries)}};
}

LexiconModel lexicon_from_json(const nlohmann::json& j) {
  check_header(j, kLexiconFormat);
  std::map<std::u32string, LexiconEntry> entries;
  for (const auto& entry : j.at("entries")) {
    LexiconEntry e{entry.at(1).get<std::size_t>(),
                   entry.at(2).get<std::size_t>()};
    entries[utf8_decode(entry.at(0).get<std::string>())] = e;
  }
  return LexiconModel(std::move(entries), j.at("min_count").get<std::size_t>(),
                      j.at("min_ratio").get<double>());
}

}  // namespace toxspan
