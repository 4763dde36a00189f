#include "toxspan/spans.hpp"

#include <algorithm>

#include "toxspan/errors.hpp"
#include "toxspan/post.hpp"
#include "toxspan/unicode.hpp"

namespace toxspan {

SpanSet::SpanSet(std::vector<std::size_t> offsets) : offsets_(std::move(offsets)) {
  std::sort(offsets_.begin(), offsets_.end());
  offsets_.erase(std::unique(offsets_.begin(), offsets_.end()), offsets_.end());
}

bool SpanSet::contains(std::size_t offset) const {
  return std::binary_search(offsets_.begin(), offsets_.end(), offset);
}

SpanSet unite(const SpanSet& a, const SpanSet& b) {
  std::vector<std::size_t> merged;
  merged.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(merged));
  return SpanSet(std::move(merged));
}

std::size_t intersection_size(const SpanSet& a, const SpanSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else
      ++n, ++ia, ++ib;
  }
  return n;
}

std::vector<ContiguousSpan> offsets_to_ranges(const SpanSet& s) {
  std::vector<ContiguousSpan> ranges;
  const auto& offs = s.offsets();
  std::size_t i = 0;
  while (i < offs.size()) {
    std::size_t j = i + 1;
    while (j < offs.size() && offs[j] == offs[j - 1] + 1) ++j;
    ranges.push_back({offs[i], offs[j - 1] + 1});
    i = j;
  }
  return ranges;
}

SpanSet ranges_to_offsets(std::span<const ContiguousSpan> ranges) {
  std::vector<std::size_t> offs;
  for (const auto& r : ranges)
    for (std::size_t o = r.start; o < r.end; ++o) offs.push_back(o);
  return SpanSet(std::move(offs));
}

std::u32string span_surface(const std::u32string& text, ContiguousSpan r) {
  if (r.end > text.size() || r.start >= r.end)
    throw InvariantError("span_surface: range [" + std::to_string(r.start) +
                         ", " + std::to_string(r.end) +
                         ") out of bounds for text of length " +
                         std::to_string(text.size()));
  return text.substr(r.start, r.end - r.start);
}

std::vector<Token> tokenize(const std::u32string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && !is_space(text[j])) ++j;
    tokens.push_back({text.substr(i, j - i), i, j});
    i = j;
  }
  return tokens;
}

ContiguousSpan token_core(const Token& t) {
  std::size_t lo = 0;
  std::size_t hi = t.surface.size();
  while (lo < hi && !is_word_char(t.surface[lo])) ++lo;
  while (hi > lo && !is_word_char(t.surface[hi - 1])) --hi;
  return {t.start + lo, t.start + hi};
}

std::u32string normalize_token(const Token& t) {
  const ContiguousSpan core = token_core(t);
  std::u32string norm;
  norm.reserve(core.length());
  for (std::size_t i = core.start; i < core.end; ++i)
    norm.push_back(to_lower(t.surface[i - t.start]));
  return norm;
}

std::vector<std::pair<Token, bool>> label_tokens(const Post& p) {
  std::vector<std::pair<Token, bool>> labeled;
  const auto& gold = p.gold.offsets();
  for (Token& t : tokenize(p.text)) {
    // Any-overlap rule: toxic iff gold hits any offset in [start, end).
    auto it = std::lower_bound(gold.begin(), gold.end(), t.start);
    const bool toxic = it != gold.end() && *it < t.end;
    labeled.emplace_back(std::move(t), toxic);
  }
  return labeled;
}

OffsetMap::OffsetMap(std::vector<std::size_t> forward)
    : forward_(std::move(forward)) {
  for (std::size_t i = 1; i < forward_.size(); ++i)
    if (forward_[i] <= forward_[i - 1])
      throw InvariantError("OffsetMap: forward positions not strictly increasing");
}

OffsetMap OffsetMap::identity(std::size_t length) {
  std::vector<std::size_t> forward(length);
  for (std::size_t i = 0; i < length; ++i) forward[i] = i;
  OffsetMap m;
  m.forward_ = std::move(forward);
  return m;
}

std::size_t OffsetMap::to_original(std::size_t derived_pos) const {
  if (derived_pos >= forward_.size())
    throw InvariantError("OffsetMap: derived position " +
                         std::to_string(derived_pos) +
                         " beyond derived length " +
                         std::to_string(forward_.size()));
  return forward_[derived_pos];
}

std::optional<std::size_t> OffsetMap::to_derived(
    std::size_t original_pos) const {
  auto it = std::lower_bound(forward_.begin(), forward_.end(), original_pos);
  if (it == forward_.end() || *it != original_pos) return std::nullopt;
  return static_cast<std::size_t>(it - forward_.begin());
}

OffsetMap OffsetMap::composed_with(const OffsetMap& inner) const {
  std::vector<std::size_t> forward(inner.derived_length());
  for (std::size_t i = 0; i < forward.size(); ++i)
    forward[i] = to_original(inner.forward_[i]);
  OffsetMap m;
  m.forward_ = std::move(forward);
  return m;
}

std::pair<std::u32string, OffsetMap> delete_ranges(
    const std::u32string& text, std::vector<ContiguousSpan> ranges) {
  std::sort(ranges.begin(), ranges.end(),
            [](const ContiguousSpan& a, const ContiguousSpan& b) {
              return a.start < b.start;
            });
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    if (r.start >= r.end || r.end > text.size())
      throw InvariantError("delete_ranges: range [" + std::to_string(r.start) +
                           ", " + std::to_string(r.end) + ") out of bounds");
    if (i > 0 && ranges[i - 1].end > r.start)
      throw InvariantError("delete_ranges: overlapping ranges at offset " +
                           std::to_string(r.start));
  }

  std::u32string derived;
  std::vector<std::size_t> forward;
  std::size_t next_range = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    while (next_range < ranges.size() && i >= ranges[next_range].end)
      ++next_range;
    if (next_range < ranges.size() && i >= ranges[next_range].start) continue;
    derived.push_back(text[i]);
    forward.push_back(i);
  }
  OffsetMap m(std::move(forward));
  return {std::move(derived), std::move(m)};
}

SpanSet remap_to_original(const OffsetMap& m, const SpanSet& s) {
  std::vector<std::size_t> mapped;
  mapped.reserve(s.size());
  for (std::size_t o : s) mapped.push_back(m.to_original(o));
  return SpanSet(std::move(mapped));
}

ContiguousSpan absorb_adjacent_space(const std::u32string& text,
                                     ContiguousSpan r) {
  if (r.start > 0 && is_space(text[r.start - 1])) return {r.start - 1, r.end};
  if (r.end < text.size() && is_space(text[r.end])) return {r.start, r.end + 1};
  return r;
}

std::vector<Post> split_multispan(const Post& p) {
  const auto ranges = offsets_to_ranges(p.gold);
  if (ranges.size() <= 1) return {p};

  std::vector<Post> derived;
  derived.reserve(ranges.size());
  for (std::size_t keep = 0; keep < ranges.size(); ++keep) {
    std::vector<ContiguousSpan> deletions;
    for (std::size_t j = 0; j < ranges.size(); ++j)
      if (j != keep) deletions.push_back(absorb_adjacent_space(p.text, ranges[j]));
    // Two deletions may claim the same gap space; re-canonicalize as a union.
    deletions = offsets_to_ranges(ranges_to_offsets(deletions));

    auto [text, map] = delete_ranges(p.text, std::move(deletions));
    std::vector<std::size_t> gold;
    for (std::size_t o = ranges[keep].start; o < ranges[keep].end; ++o)
      gold.push_back(*map.to_derived(o));
    derived.push_back({p.id, std::move(text), SpanSet(std::move(gold))});
  }
  return derived;
}

SpanSet match_phrase_offsets(const std::u32string& text,
                             std::span<const std::u32string> phrases) {
  std::vector<bool> consumed(text.size(), false);
  std::vector<std::size_t> offs;
  for (const auto& phrase : phrases) {
    if (phrase.empty()) continue;
    bool placed = false;
    for (std::size_t pos = text.find(phrase); pos != std::u32string::npos;
         pos = text.find(phrase, pos + 1)) {
      const bool free = std::none_of(
          consumed.begin() + static_cast<std::ptrdiff_t>(pos),
          consumed.begin() + static_cast<std::ptrdiff_t>(pos + phrase.size()),
          [](bool c) { return c; });
      if (!free) continue;
      for (std::size_t o = pos; o < pos + phrase.size(); ++o) {
        consumed[o] = true;
        offs.push_back(o);
      }
      placed = true;
      break;
    }
    if (!placed)
      throw InvariantError("match_phrase_offsets: phrase \"" +
                           utf8_encode(phrase) + "\" not found in text");
  }
  return SpanSet(std::move(offs));
}

}  // namespace toxspan
