#include "toxspan/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_set>

#include "toxspan/errors.hpp"
#include "toxspan/metrics.hpp"
#include "toxspan/unicode.hpp"

namespace toxspan {

namespace {

// Minimal RFC-4180 reader: quoted fields may contain commas, quotes ("")
// and newlines; records end at a bare or CRLF newline outside quotes.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  bool next_record(std::vector<std::string>& fields) {
    fields.clear();
    record_line_ = line_;
    std::string field;
    bool any_content = false;
    bool in_quotes = false;
    bool quote_closed = false;
    int ch;
    while ((ch = in_.get()) != std::istream::traits_type::eof()) {
      const char c = static_cast<char>(ch);
      if (c == '\n') ++line_;
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            in_quotes = false;
            quote_closed = true;
          }
        } else {
          field.push_back(c);
        }
        continue;
      }
      if (quote_closed && c != ',' && c != '\n' && c != '\r')
        throw error("unexpected content after closing quote");
      switch (c) {
        case '"':
          if (!field.empty())
            throw error("quote inside unquoted field");
          in_quotes = true;
          any_content = true;
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          quote_closed = false;
          any_content = true;
          break;
        case '\r':
          if (in_.peek() == '\n') {
            in_.get();
            ++line_;
          }
          [[fallthrough]];
        case '\n':
          if (!any_content && field.empty() && fields.empty()) {
            // blank separator line; surface it as an empty record
            fields.push_back(std::string());
            return true;
          }
          fields.push_back(std::move(field));
          return true;
        default:
          field.push_back(c);
          any_content = true;
      }
    }
    if (in_quotes) throw error("unterminated quoted field");
    if (!any_content && field.empty() && fields.empty()) return false;
    fields.push_back(std::move(field));
    return true;
  }

  // 1-based line where the last record started.
  std::size_t record_line() const { return record_line_; }

  InputError error(const std::string& what) const {
    return InputError(source_ + ": line " + std::to_string(record_line_) +
                      ": " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Parses "[7, 8, 9]" / "[]" into signed offsets; bounds are the caller's.
std::vector<long long> parse_offset_list(std::string_view s,
                                         const std::string& context) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw InputError(context + ": spans field is not a bracketed list: \"" +
                     std::string(s) + "\"");
  s = s.substr(1, s.size() - 2);

  std::vector<long long> values;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string_view tok = trim(s.substr(pos, comma - pos));
    if (!tok.empty()) {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InputError(context + ": non-integer offset token \"" +
                         std::string(tok) + "\"");
      values.push_back(v);
    } else if (!s.empty()) {
      throw InputError(context + ": empty offset token");
    }
    if (comma == s.size()) break;
    pos = comma + 1;
  }
  return values;
}

bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\n\r") != std::string_view::npos;
}

void write_csv_field(std::ostream& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string format_offsets(const SpanSet& s) {
  std::string out = "[";
  bool first = true;
  for (std::size_t o : s) {
    if (!first) out += ", ";
    out += std::to_string(o);
    first = false;
  }
  out += "]";
  return out;
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
  CsvReader reader(in, source_name);
  std::vector<std::string> fields;
  if (!reader.next_record(fields))
    throw InputError(source_name + ": empty input, expected a header row");

  // Some exports lead with a UTF-8 BOM.
  if (fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);

  std::size_t spans_col = fields.size();
  std::size_t text_col = fields.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == "spans") spans_col = i;
    if (fields[i] == "text") text_col = i;
  }
  if (spans_col == fields.size() || text_col == fields.size())
    throw InputError(source_name + ": header must name \"spans\" and \"text\" columns");

  Corpus corpus;
  std::size_t record = 0;
  while (reader.next_record(fields)) {
    ++record;
    const std::string context = source_name + ": record " +
                                std::to_string(record) + " (line " +
                                std::to_string(reader.record_line()) + ")";
    if (fields.size() <= std::max(spans_col, text_col))
      throw InputError(context + ": malformed row, expected at least " +
                       std::to_string(std::max(spans_col, text_col) + 1) +
                       " fields, got " + std::to_string(fields.size()));

    std::u32string text;
    try {
      text = utf8_decode(fields[text_col]);
    } catch (const InputError& e) {
      throw InputError(context + ": " + e.what());
    }

    std::vector<std::size_t> offsets;
    for (long long v : parse_offset_list(fields[spans_col], context)) {
      if (v < 0 || static_cast<std::size_t>(v) >= text.size())
        throw InputError(context + ": offset " + std::to_string(v) +
                         " out of bounds for text of length " +
                         std::to_string(text.size()));
      offsets.push_back(static_cast<std::size_t>(v));
    }
    corpus.posts.push_back(
        {corpus.posts.size(), std::move(text), SpanSet(std::move(offsets))});
  }
  return corpus;
}

void write_corpus(std::ostream& out, const Corpus& c) {
  out << "spans,text\n";
  for (const Post& p : c.posts) {
    write_csv_field(out, format_offsets(p.gold));
    out << ',';
    write_csv_field(out, utf8_encode(p.text));
    out << '\n';
  }
}

std::vector<KFoldPair> kfold_split(const Corpus& c, std::size_t k,
                                   std::uint64_t seed) {
  const std::size_t n = c.posts.size();
  if (k < 2 || k > n)
    throw InputError("kfold_split: k must be in [2, " + std::to_string(n) +
                     "], got " + std::to_string(k));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Explicit Fisher-Yates: std::shuffle's draw sequence is not pinned by
  // the standard, and fold assignment must be reproducible everywhere.
  std::mt19937_64 gen(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % (i + 1));
    std::swap(order[i], order[j]);
  }

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t rem = n % k;
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < rem ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                    order.begin() + static_cast<std::ptrdiff_t>(cursor + size));
    cursor += size;
  }

  auto subcorpus = [&](const std::vector<std::size_t>& members) {
    Corpus sub;
    sub.posts.reserve(members.size());
    for (std::size_t idx : members) {
      Post p = c.posts[idx];
      p.id = sub.posts.size();
      sub.posts.push_back(std::move(p));
    }
    return sub;
  };

  std::vector<KFoldPair> pairs;
  pairs.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_members;
    train_members.reserve(n - folds[f].size());
    for (std::size_t g = 0; g < k; ++g)
      if (g != f)
        train_members.insert(train_members.end(), folds[g].begin(),
                             folds[g].end());
    pairs.push_back({subcorpus(train_members), subcorpus(folds[f])});
  }
  return pairs;
}

StatsReport corpus_stats(const Corpus& c) {
  StatsReport report;
  report.record_count = c.posts.size();
  if (c.posts.empty()) return report;

  std::size_t zero = 0;
  std::size_t single = 0;
  for (const Post& p : c.posts) {
    const std::size_t ranges = offsets_to_ranges(p.gold).size();
    ++report.span_count_histogram[ranges];
    if (ranges == 0) ++zero;
    if (ranges == 1) ++single;

    // An empty text cannot carry offsets; bin its fraction as 0.
    const double fraction = p.text.empty() ? 0.0 : toxic_fraction(p);
    const auto bin = static_cast<std::size_t>(std::floor(fraction * 20.0));
    ++report.jaccard_histogram[std::min<std::size_t>(bin, 19)];
  }
  const auto total = static_cast<double>(c.posts.size());
  report.zero_span_fraction = static_cast<double>(zero) / total;
  report.single_span_fraction = static_cast<double>(single) / total;
  return report;
}

void to_json(nlohmann::json& j, const StatsReport& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [ranges, count] : r.span_count_histogram)
    hist[std::to_string(ranges)] = count;
  j = nlohmann::json{{"record_count", r.record_count},
                     {"span_count_histogram", std::move(hist)},
                     {"zero_span_fraction", r.zero_span_fraction},
                     {"single_span_fraction", r.single_span_fraction},
                     {"jaccard_bin_width", 0.05},
                     {"jaccard_histogram", r.jaccard_histogram}};
}

std::vector<NerRecord> export_ner(const Corpus& c) {
  std::vector<NerRecord> records;
  records.reserve(c.posts.size());
  for (const Post& p : c.posts)
    records.push_back({p.text, offsets_to_ranges(p.gold)});
  return records;
}

void write_ner(std::ostream& out, const Corpus& c) {
  for (const NerRecord& rec : export_ner(c)) {
    nlohmann::json entities = nlohmann::json::array();
    for (const ContiguousSpan& e : rec.entities)
      entities.push_back({e.start, e.end, "TOXIC"});
    const nlohmann::json j{{"text", utf8_encode(rec.text)},
                           {"entities", std::move(entities)}};
    out << j.dump() << '\n';
  }
}

void write_predictions(std::ostream& out, std::span<const Prediction> preds) {
  std::unordered_set<std::size_t> seen;
  for (const auto& [id, spans] : preds) {
    if (!seen.insert(id).second)
      throw InvariantError("write_predictions: duplicate id " +
                           std::to_string(id));
    out << id << '\t' << format_offsets(spans) << '\n';
  }
}

std::vector<Prediction> read_predictions(std::istream& in,
                                         const std::string& source_name) {
  std::vector<Prediction> preds;
  std::unordered_set<std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context =
        source_name + ": line " + std::to_string(line_no);

    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw InputError(context + ": expected <id>\\t<offset list>");
    const std::string_view id_part = trim(std::string_view(line).substr(0, tab));
    std::size_t id = 0;
    const auto [ptr, ec] =
        std::from_chars(id_part.data(), id_part.data() + id_part.size(), id);
    if (ec != std::errc() || ptr != id_part.data() + id_part.size())
      throw InputError(context + ": bad id \"" + std::string(id_part) + "\"");
    if (!seen.insert(id).second)
      throw InputError(context + ": duplicate id " + std::to_string(id));

    std::vector<std::size_t> offsets;
    for (long long v : parse_offset_list(std::string_view(line).substr(tab + 1),
                                         context)) {
      if (v < 0)
        throw InputError(context + ": negative offset " + std::to_string(v));
      offsets.push_back(static_cast<std::size_t>(v));
    }
    preds.emplace_back(id, SpanSet(std::move(offsets)));
  }
  return preds;
}

}  // namespace toxspan
