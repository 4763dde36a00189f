#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxspan/corpus.hpp"

namespace toxspan {

/// A normalized token that annotators marked toxic in some posts but not
/// in others.
struct LexemeInconsistency {
  std::u32string lexeme;
  std::size_t toxic_occurrences = 0;
  std::size_t total_occurrences = 0;
  std::vector<std::size_t> toxic_example_ids;  // up to 3 each side
  std::vector<std::size_t> clean_example_ids;

  bool operator==(const LexemeInconsistency&) const = default;
};

/// Lexemes with at least min_total occurrences and mixed labels (strictly
/// between never and always toxic), sorted by total occurrences descending,
/// ties by lexeme. Requires min_total >= 2.
std::vector<LexemeInconsistency> consistency_report(const Corpus& c,
                                                    std::size_t min_total);

/// A gold range whose surface looks malformed.
struct ShapeFlag {
  std::size_t post_id = 0;
  ContiguousSpan range;
  std::string reason;  // "non-word characters" or "partial token"

  bool operator==(const ShapeFlag&) const = default;
};

/// Flags gold ranges containing characters outside letters, digits,
/// apostrophe, hyphen, and internal spaces, and ranges that start or end
/// in the middle of a token. A range can earn both flags.
std::vector<ShapeFlag> shape_flags(const Corpus& c);

/// Ranges one side got entirely wrong: missed gold ranges have zero
/// character overlap with the prediction, spurious predicted ranges zero
/// overlap with gold.
struct SpanDiff {
  std::size_t post_id = 0;
  std::vector<ContiguousSpan> missed;
  std::vector<ContiguousSpan> spurious;

  bool operator==(const SpanDiff&) const = default;
};

/// One entry per post with at least one missed or spurious range. Same id
/// alignment rules as evaluate.
std::vector<SpanDiff> diff_report(std::span<const Prediction> preds,
                                  const Corpus& c);

void to_json(nlohmann::json& j, const LexemeInconsistency& r);
void to_json(nlohmann::json& j, const ShapeFlag& f);
void to_json(nlohmann::json& j, const SpanDiff& d);

// Plain-text tables of the same reports, for terminal reading.
void print_consistency_table(std::ostream& out,
                             std::span<const LexemeInconsistency> report);
void print_shape_table(std::ostream& out, std::span<const ShapeFlag> flags);
void print_diff_table(std::ostream& out, std::span<const SpanDiff> diffs);

}  // namespace toxspan
