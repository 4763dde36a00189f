#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "toxspan/corpus.hpp"

namespace toxspan {

/// The task's per-post score over character-offset sets:
///   both empty        -> 1
///   exactly one empty -> 0
///   otherwise         -> 2|pred ∩ gold| / (|pred| + |gold|)
double per_post_f1(const SpanSet& pred, const SpanSet& gold);

struct EvalReport {
  std::vector<std::pair<std::size_t, double>> per_post;  // (id, f1)
  double mean_f1 = 0.0;
};

/// Scores every post and averages. Requires exactly one prediction per
/// corpus id; throws InputError on missing, duplicate, or extra ids.
EvalReport evaluate(std::span<const Prediction> preds, const Corpus& c);

void to_json(nlohmann::json& j, const EvalReport& r);

/// Writes a short human-readable table (worst posts first).
void print_eval_summary(std::ostream& out, const EvalReport& r);

/// Jaccard index of the gold offsets against all offsets of the text;
/// since gold is a subset, this is |gold| / length(text). Throws
/// InputError on empty text.
double toxic_fraction(const Post& p);

}  // namespace toxspan
