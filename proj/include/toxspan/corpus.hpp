#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "toxspan/post.hpp"

namespace toxspan {

/// An ordered sequence of posts; ids are unique and equal positions.
struct Corpus {
  std::vector<Post> posts;

  std::size_t size() const { return posts.size(); }
  bool operator==(const Corpus&) const = default;
};

/// Parses the task's comma-separated format: a header naming the "spans"
/// and "text" columns, the spans field a bracketed integer list. Gold sets
/// are deduplicated and sorted; duplicate offsets are harmless noise, but
/// out-of-bounds ones abort with the record number and offending offset.
/// `source_name` only labels error messages.
Corpus parse_corpus(std::istream& in, const std::string& source_name = "<input>");

/// Writes the same format back (header `spans,text`, minimal quoting).
/// parse_corpus(write_corpus(c)) == c.
void write_corpus(std::ostream& out, const Corpus& c);

struct KFoldPair {
  Corpus train;
  Corpus heldout;
};

/// Deterministic k-fold assignment: posts shuffled by seed, fold sizes
/// differing by at most one, heldout folds disjoint and covering. Posts in
/// the returned sub-corpora are re-indexed from 0. Throws InputError unless
/// 2 <= k <= corpus size.
std::vector<KFoldPair> kfold_split(const Corpus& c, std::size_t k,
                                   std::uint64_t seed);

struct StatsReport {
  std::size_t record_count = 0;
  /// number of contiguous gold ranges -> number of posts
  std::map<std::size_t, std::size_t> span_count_histogram;
  double zero_span_fraction = 0.0;
  double single_span_fraction = 0.0;
  /// per-post toxic fraction in 20 bins of width 0.05; 1.0 lands in the top bin
  std::array<std::size_t, 20> jaccard_histogram{};
};

StatsReport corpus_stats(const Corpus& c);
void to_json(nlohmann::json& j, const StatsReport& r);

/// One NER training record per post; entities are end-exclusive ranges,
/// all labeled TOXIC.
struct NerRecord {
  std::u32string text;
  std::vector<ContiguousSpan> entities;
};

std::vector<NerRecord> export_ner(const Corpus& c);

/// JSON-lines serialization of export_ner: one object per line with fields
/// "text" and "entities" (arrays [start, end, "TOXIC"]).
void write_ner(std::ostream& out, const Corpus& c);

using Prediction = std::pair<std::size_t, SpanSet>;

/// One line per prediction: id, tab, bracketed sorted offset list.
/// Throws InvariantError on duplicate ids.
void write_predictions(std::ostream& out, std::span<const Prediction> preds);

/// Reads the format back losslessly. Throws InputError on malformed lines
/// or duplicate ids.
std::vector<Prediction> read_predictions(std::istream& in,
                                         const std::string& source_name = "<input>");

}  // namespace toxspan
