#include "toxspan/audit.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <unordered_map>

#include "toxspan/errors.hpp"
#include "toxspan/unicode.hpp"

namespace toxspan {

namespace {

struct LexemeTally {
  std::size_t toxic = 0;
  std::size_t total = 0;
  std::vector<std::size_t> toxic_ids;
  std::vector<std::size_t> clean_ids;
};

void note_example(std::vector<std::size_t>& ids, std::size_t id) {
  if (ids.size() < 3 && (ids.empty() || ids.back() != id)) ids.push_back(id);
}

bool overlaps_any(ContiguousSpan r, const SpanSet& offsets) {
  for (std::size_t o = r.start; o < r.end; ++o)
    if (offsets.contains(o)) return true;
  return false;
}

}  // namespace

std::vector<LexemeInconsistency> consistency_report(const Corpus& c,
                                                    std::size_t min_total) {
  if (min_total < 2)
    throw InputError("consistency_report: min_total must be >= 2");

  std::map<std::u32string, LexemeTally> tallies;
  for (const Post& p : c.posts) {
    for (const auto& [token, toxic] : label_tokens(p)) {
      std::u32string norm = normalize_token(token);
      if (norm.empty()) continue;
      LexemeTally& t = tallies[std::move(norm)];
      ++t.total;
      if (toxic) {
        ++t.toxic;
        note_example(t.toxic_ids, p.id);
      } else {
        note_example(t.clean_ids, p.id);
      }
    }
  }

  std::vector<LexemeInconsistency> report;
  for (auto& [lexeme, t] : tallies) {
    if (t.total < min_total) continue;
    if (t.toxic == 0 || t.toxic == t.total) continue;
    report.push_back({lexeme, t.toxic, t.total, std::move(t.toxic_ids),
                      std::move(t.clean_ids)});
  }
  std::stable_sort(report.begin(), report.end(),
                   [](const LexemeInconsistency& a,
                      const LexemeInconsistency& b) {
                     if (a.total_occurrences != b.total_occurrences)
                       return a.total_occurrences > b.total_occurrences;
                     return a.lexeme < b.lexeme;
                   });
  return report;
}

std::vector<ShapeFlag> shape_flags(const Corpus& c) {
  std::vector<ShapeFlag> flags;
  for (const Post& p : c.posts) {
    const std::vector<Token> tokens = tokenize(p.text);
    auto mid_token = [&tokens](std::size_t pos) {
      for (const Token& t : tokens)
        if (t.start < pos && pos < t.end) return true;
      return false;
    };
    for (const ContiguousSpan r : offsets_to_ranges(p.gold)) {
      const std::u32string surface = span_surface(p.text, r);
      bool non_word = false;
      for (std::size_t i = 0; i < surface.size(); ++i) {
        const char32_t ch = surface[i];
        if (is_word_char(ch) || ch == U'\'' || ch == U'-') continue;
        const bool internal_space =
            is_space(ch) && i > 0 && i + 1 < surface.size();
        if (!internal_space) {
          non_word = true;
          break;
        }
      }
      if (non_word) flags.push_back({p.id, r, "non-word characters"});
      if (mid_token(r.start) || mid_token(r.end))
        flags.push_back({p.id, r, "partial token"});
    }
  }
  return flags;
}

std::vector<SpanDiff> diff_report(std::span<const Prediction> preds,
                                  const Corpus& c) {
  std::unordered_map<std::size_t, const SpanSet*> by_id;
  by_id.reserve(preds.size());
  for (const auto& [id, spans] : preds) {
    if (!by_id.emplace(id, &spans).second)
      throw InputError("diff_report: duplicate prediction for id " +
                       std::to_string(id));
  }
  if (by_id.size() > c.posts.size())
    throw InputError("diff_report: " +
                     std::to_string(by_id.size() - c.posts.size()) +
                     " prediction id(s) beyond the corpus");

  std::vector<SpanDiff> diffs;
  for (const Post& p : c.posts) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end())
      throw InputError("diff_report: missing prediction for id " +
                       std::to_string(p.id));
    const SpanSet& pred = *it->second;
    SpanDiff d;
    d.post_id = p.id;
    for (const ContiguousSpan r : offsets_to_ranges(p.gold))
      if (!overlaps_any(r, pred)) d.missed.push_back(r);
    for (const ContiguousSpan r : offsets_to_ranges(pred))
      if (!overlaps_any(r, p.gold)) d.spurious.push_back(r);
    if (!d.missed.empty() || !d.spurious.empty()) diffs.push_back(std::move(d));
  }
  return diffs;
}

namespace {

nlohmann::json ranges_json(const std::vector<ContiguousSpan>& ranges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ContiguousSpan r : ranges) arr.push_back({r.start, r.end});
  return arr;
}

}  // namespace

void to_json(nlohmann::json& j, const LexemeInconsistency& r) {
  j = nlohmann::json{{"lexeme", utf8_encode(r.lexeme)},
                     {"toxic_occurrences", r.toxic_occurrences},
                     {"total_occurrences", r.total_occurrences},
                     {"toxic_example_ids", r.toxic_example_ids},
                     {"clean_example_ids", r.clean_example_ids}};
}

void to_json(nlohmann::json& j, const ShapeFlag& f) {
  j = nlohmann::json{{"post_id", f.post_id},
                     {"start", f.range.start},
                     {"end", f.range.end},
                     {"reason", f.reason}};
}

void to_json(nlohmann::json& j, const SpanDiff& d) {
  j = nlohmann::json{{"post_id", d.post_id},
                     {"missed", ranges_json(d.missed)},
                     {"spurious", ranges_json(d.spurious)}};
}

void print_consistency_table(std::ostream& out,
                             std::span<const LexemeInconsistency> report) {
  out << "mixed-label lexemes: " << report.size() << '\n';
  for (const LexemeInconsistency& r : report) {
    out << "  \"" << utf8_encode(r.lexeme) << "\"  toxic "
        << r.toxic_occurrences << "/" << r.total_occurrences << "  (e.g. ids";
    for (std::size_t id : r.toxic_example_ids) out << ' ' << id;
    out << " vs";
    for (std::size_t id : r.clean_example_ids) out << ' ' << id;
    out << ")\n";
  }
}

void print_shape_table(std::ostream& out, std::span<const ShapeFlag> flags) {
  out << "suspicious span shapes: " << flags.size() << '\n';
  for (const ShapeFlag& f : flags)
    out << "  id " << f.post_id << "  [" << f.range.start << ", "
        << f.range.end << ")  " << f.reason << '\n';
}

void print_diff_table(std::ostream& out, std::span<const SpanDiff> diffs) {
  out << "posts with fully missed or spurious ranges: " << diffs.size()
      << '\n';
  for (const SpanDiff& d : diffs) {
    out << "  id " << d.post_id << "  missed";
    for (const ContiguousSpan r : d.missed)
      out << " [" << r.start << ", " << r.end << ")";
    if (d.missed.empty()) out << " -";
    out << "  spurious";
    for (const ContiguousSpan r : d.spurious)
      out << " [" << r.start << ", " << r.end << ")";
    if (d.spurious.empty()) out << " -";
    out << '\n';
  }
}

}  // namespace toxspan
