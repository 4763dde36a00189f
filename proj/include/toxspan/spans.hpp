#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace toxspan {

struct Post;

/// A set of character offsets, kept sorted ascending and duplicate-free.
/// This is the representation used for gold annotations and predictions.
class SpanSet {
 public:
  SpanSet() = default;
  /// Normalizes: sorts and deduplicates.
  explicit SpanSet(std::vector<std::size_t> offsets);

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  bool empty() const { return offsets_.empty(); }
  bool contains(std::size_t offset) const;

  auto begin() const { return offsets_.begin(); }
  auto end() const { return offsets_.end(); }

  bool operator==(const SpanSet&) const = default;

 private:
  std::vector<std::size_t> offsets_;
};

SpanSet unite(const SpanSet& a, const SpanSet& b);
std::size_t intersection_size(const SpanSet& a, const SpanSet& b);

/// A [start, end) character range, start < end.
struct ContiguousSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const ContiguousSpan&) const = default;
};

/// Maximal runs of consecutive offsets as ranges: sorted, disjoint,
/// non-adjacent.
std::vector<ContiguousSpan> offsets_to_ranges(const SpanSet& s);

/// Union of all offsets covered by the ranges (overlaps allowed).
SpanSet ranges_to_offsets(std::span<const ContiguousSpan> ranges);

/// The exact substring under a range. Throws InvariantError when the range
/// reaches past the text.
std::u32string span_surface(const std::u32string& text, ContiguousSpan r);

/// A whitespace-delimited token with its exact offsets;
/// surface == text[start, end).
struct Token {
  std::u32string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

/// Maximal runs of non-whitespace characters, in order.
std::vector<Token> tokenize(const std::u32string& text);

/// The token's alphanumeric core: surrounding non-word characters stripped,
/// internal ones kept. Empty range (start == start) when nothing remains.
ContiguousSpan token_core(const Token& t);

/// Lowercased core surface; the lexeme key used by the lexicon and audit.
std::u32string normalize_token(const Token& t);

/// Labels each token toxic iff any of its character offsets is in gold.
std::vector<std::pair<Token, bool>> label_tokens(const Post& p);

/// Maps character positions of a derived (edited) text back to the
/// original text. forward() is strictly increasing.
class OffsetMap {
 public:
  OffsetMap() = default;
  /// Throws InvariantError unless forward is strictly increasing.
  explicit OffsetMap(std::vector<std::size_t> forward);
  static OffsetMap identity(std::size_t length);

  std::size_t derived_length() const { return forward_.size(); }
  const std::vector<std::size_t>& forward() const { return forward_; }

  /// Original position of a derived position; throws InvariantError when
  /// derived_pos >= derived_length().
  std::size_t to_original(std::size_t derived_pos) const;

  /// Derived position of an original one, if that character survived.
  std::optional<std::size_t> to_derived(std::size_t original_pos) const;

  /// Composes with a map whose "original" side is this map's derived side,
  /// yielding derived-of-inner -> original-of-this.
  OffsetMap composed_with(const OffsetMap& inner) const;

 private:
  std::vector<std::size_t> forward_;
};

/// Excises the given disjoint in-bounds ranges; the map sends each
/// surviving character back to its original position.
std::pair<std::u32string, OffsetMap> delete_ranges(
    const std::u32string& text, std::vector<ContiguousSpan> ranges);

/// Offsets of s (derived coordinates) mapped back to original coordinates.
SpanSet remap_to_original(const OffsetMap& m, const SpanSet& s);

/// Widens a range by one adjacent space: the preceding one when present,
/// else the following one. Used when excising a span from running text.
ContiguousSpan absorb_adjacent_space(const std::u32string& text,
                                     ContiguousSpan r);

/// One derived post per contiguous gold range: derived post i keeps range i
/// and deletes every other range together with one adjacent space. Posts
/// with zero or one range come back unchanged.
std::vector<Post> split_multispan(const Post& p);

/// Offsets of each phrase's leftmost not-yet-consumed exact occurrence,
/// phrases processed in order. Throws InvariantError when a phrase cannot
/// be placed (extractor and text have desynchronized).
SpanSet match_phrase_offsets(const std::u32string& text,
                             std::span<const std::u32string> phrases);

}  // namespace toxspan
