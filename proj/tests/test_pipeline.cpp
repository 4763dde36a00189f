#include "toxspan/pipeline.hpp"

#include <doctest.h>

#include <random>

#include "toxspan/errors.hpp"
#include "synth.hpp"

using namespace toxspan;

namespace {

LexiconModel lexicon_of(std::initializer_list<std::u32string> words) {
  std::map<std::u32string, LexiconEntry> entries;
  for (const auto& w : words) entries[w] = LexiconEntry{2, 2};
  return LexiconModel(std::move(entries), 1, 0.5);
}

// Gate that fires iff the lexicon would still extract something; with it,
// the loop stops exactly when the extractor runs dry.
GateFn lexicon_gate(const LexiconModel& m) {
  return [&m](const std::u32string& text) {
    return extract_one(m, text).empty() ? 0.0 : 1.0;
  };
}

}  // namespace

TEST_CASE("detect_spans walks the extract-delete-recheck loop") {
  const LexiconModel lex = lexicon_of({U"bitch", U"fucking", U"idiot"});
  const std::u32string text = U"This bitch is so fucking idiot.";
  PipelineConfig cfg;

  DetectTrace trace;
  const SpanSet found =
      detect_spans(lexicon_gate(lex),
                   [&lex](const std::u32string& t) { return extract_one(lex, t); },
                   text, cfg, &trace);

  // "bitch" in the first pass, "fucking idiot" in the second, both in
  // original coordinates.
  CHECK(offsets_to_ranges(found) ==
        std::vector<ContiguousSpan>{{5, 10}, {17, 30}});
  CHECK(trace.iterations == 2);
  CHECK_FALSE(trace.hit_iteration_cap);
}

TEST_CASE("a declining gate yields the empty span set") {
  const LexiconModel lex = lexicon_of({U"idiot"});
  PipelineConfig cfg;
  DetectTrace trace;
  const SpanSet found = detect_spans(
      [](const std::u32string&) { return 0.0; },
      [&lex](const std::u32string& t) { return extract_one(lex, t); },
      U"This is so fucking idiot.", cfg, &trace);
  CHECK(found.empty());
  CHECK(trace.iterations == 0);
  CHECK_FALSE(trace.hit_iteration_cap);
}

TEST_CASE("an empty extraction stops an always-toxic gate") {
  PipelineConfig cfg;
  DetectTrace trace;
  const SpanSet found = detect_spans(
      [](const std::u32string&) { return 1.0; },
      [](const std::u32string&) { return SpanSet(); },
      U"totally fine text", cfg, &trace);
  CHECK(found.empty());
  CHECK(trace.iterations == 0);
  CHECK_FALSE(trace.hit_iteration_cap);
}

TEST_CASE("the iteration cap cuts pathological loops short") {
  // "a b a b ..." with lexicon {a}: every pass extracts one "a".
  const LexiconModel lex = lexicon_of({U"a"});
  std::u32string text;
  for (int i = 0; i < 30; ++i) text += i % 2 ? U"b " : U"a ";
  PipelineConfig cfg;
  cfg.max_iterations = 3;

  DetectTrace trace;
  const SpanSet found =
      detect_spans(lexicon_gate(lex),
                   [&lex](const std::u32string& t) { return extract_one(lex, t); },
                   text, cfg, &trace);
  CHECK(offsets_to_ranges(found).size() == 3);
  CHECK(trace.iterations == 3);
  CHECK(trace.hit_iteration_cap);

  cfg.max_iterations = 100;
  const SpanSet all =
      detect_spans(lexicon_gate(lex),
                   [&lex](const std::u32string& t) { return extract_one(lex, t); },
                   text, cfg, &trace);
  CHECK(offsets_to_ranges(all).size() == 15);
  CHECK(trace.iterations == 15);
  CHECK_FALSE(trace.hit_iteration_cap);

  CHECK_THROWS_AS(detect_spans(lexicon_gate(lex),
                               [](const std::u32string&) { return SpanSet(); },
                               text, PipelineConfig{0.5, 0, true}, nullptr),
                  InputError);
}

TEST_CASE("detect_spans works with trained model objects") {
  const LexiconModel lex = lexicon_of({U"bitch", U"fucking", U"idiot"});
  // Hand-built gate with positive bias: always above threshold.
  const GateModel always(std::vector<double>(16, 0.0), 5.0);
  PipelineConfig cfg;
  const SpanSet found =
      detect_spans(always, lex, U"This bitch is so fucking idiot.", cfg);
  CHECK(offsets_to_ranges(found) ==
        std::vector<ContiguousSpan>{{5, 10}, {17, 30}});
}

TEST_CASE("absorbed whitespace is deleted but never reported") {
  const LexiconModel lex = lexicon_of({U"bad"});
  std::vector<std::u32string> seen_texts;
  PipelineConfig cfg;
  const std::u32string text = U"one bad two bad three";
  const SpanSet found = detect_spans(
      [&seen_texts](const std::u32string& t) {
        seen_texts.push_back(t);
        return 1.0;
      },
      [&lex](const std::u32string& t) { return extract_one(lex, t); }, text,
      cfg);

  CHECK(offsets_to_ranges(found) ==
        std::vector<ContiguousSpan>{{4, 7}, {12, 15}});
  // The working text loses the span plus one neighbor space per round.
  REQUIRE(seen_texts.size() == 3);
  CHECK(seen_texts[0] == U"one bad two bad three");
  CHECK(seen_texts[1] == U"one two bad three");
  CHECK(seen_texts[2] == U"one two three");

  PipelineConfig keep_spaces;
  keep_spaces.absorb_whitespace = false;
  seen_texts.clear();
  detect_spans(
      [&seen_texts](const std::u32string& t) {
        seen_texts.push_back(t);
        return 1.0;
      },
      [&lex](const std::u32string& t) { return extract_one(lex, t); }, text,
      keep_spaces);
  REQUIRE(seen_texts.size() == 3);
  CHECK(seen_texts[1] == U"one  two bad three");  // double space survives
}

TEST_CASE("iterated extraction converges to extract_all") {
  std::mt19937_64 gen(83);
  const std::vector<std::u32string> vocab{U"aa", U"bb", U"cc", U"dd",
                                          U"ee", U"ff"};
  for (int trial = 0; trial < 300; ++trial) {
    // Random lexicon over a small vocabulary, random text from it.
    std::map<std::u32string, LexiconEntry> entries;
    for (const auto& w : vocab)
      if (gen() % 2) entries[w] = LexiconEntry{2, 2};
    const LexiconModel lex(std::move(entries), 1, 0.5);

    std::u32string text;
    const std::size_t words = gen() % 12;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) text.push_back(U' ');
      text += vocab[gen() % vocab.size()];
    }

    PipelineConfig cfg;
    cfg.max_iterations = text.size() + 1;
    DetectTrace trace;
    const SpanSet iterated =
        detect_spans(lexicon_gate(lex),
                     [&lex](const std::u32string& t) { return extract_one(lex, t); },
                     text, cfg, &trace);
    CHECK_FALSE(trace.hit_iteration_cap);

    // Every offset extract_all finds is recovered by iterated removal;
    // the iterated set may add internal whitespace of merged runs.
    const SpanSet all = extract_all(lex, text);
    CHECK(intersection_size(iterated, all) == all.size());
    for (std::size_t o : iterated) {
      REQUIRE(o < text.size());
      if (!all.contains(o)) CHECK(text[o] == U' ');
    }
  }
}

TEST_CASE("detect_spans terminates within min(cap, text length)") {
  std::mt19937_64 gen(89);
  const std::vector<std::u32string> vocab{U"x", U"yy", U"zzz", U"w."};
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::u32string, LexiconEntry> entries;
    for (const auto& w : vocab)
      if (gen() % 2) entries[w] = LexiconEntry{2, 2};
    const LexiconModel lex(std::move(entries), 1, 0.5);

    std::u32string text;
    const std::size_t words = gen() % 20;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) text.push_back(U' ');
      text += vocab[gen() % vocab.size()];
    }

    PipelineConfig cfg;
    DetectTrace trace;
    const SpanSet found = detect_spans(
        [&gen](const std::u32string&) { return gen() % 4 ? 1.0 : 0.0; },
        [&lex](const std::u32string& t) { return extract_one(lex, t); }, text,
        cfg, &trace);

    CHECK(trace.iterations <=
          std::min<std::size_t>(cfg.max_iterations, text.size()));
    for (std::size_t o : found) CHECK(o < text.size());
  }
}

TEST_CASE("reported offsets carry the extracted surfaces") {
  // Coordinate fidelity: the surface at each reported original range must
  // be exactly what the extractor saw in its derived text.
  std::mt19937_64 gen(97);
  const std::vector<std::u32string> vocab{U"aa", U"bob", U"cry", U"dd",
                                          U"ee!"};
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::u32string, LexiconEntry> entries;
    for (const auto& w : vocab)
      if (gen() % 2) entries[w] = LexiconEntry{2, 2};
    const LexiconModel lex(std::move(entries), 1, 0.5);

    std::u32string text;
    const std::size_t words = 1 + gen() % 10;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) text.push_back(U' ');
      text += vocab[gen() % vocab.size()];
    }

    std::vector<std::u32string> extracted_surfaces;
    auto extract = [&lex, &extracted_surfaces](const std::u32string& t) {
      const SpanSet s = extract_one(lex, t);
      for (const ContiguousSpan r : offsets_to_ranges(s))
        extracted_surfaces.push_back(span_surface(t, r));
      return s;
    };

    PipelineConfig cfg;
    const SpanSet found =
        detect_spans([](const std::u32string&) { return 1.0; }, extract, text,
                     cfg);

    std::vector<std::u32string> reported_surfaces;
    for (const ContiguousSpan r : offsets_to_ranges(found))
      reported_surfaces.push_back(span_surface(text, r));

    // extract_one yields one range per pass, never re-extracting the same
    // original characters, so both lists align after sorting.
    std::sort(extracted_surfaces.begin(), extracted_surfaces.end());
    std::sort(reported_surfaces.begin(), reported_surfaces.end());
    CHECK(extracted_surfaces == reported_surfaces);
  }
}

TEST_CASE("rerunning on the cleaned text finds nothing") {
  std::mt19937_64 gen(101);
  const std::vector<std::u32string> vocab{U"foo", U"bar", U"baz", U"qux"};
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::u32string, LexiconEntry> entries;
    for (const auto& w : vocab)
      if (gen() % 2) entries[w] = LexiconEntry{2, 2};
    const LexiconModel lex(std::move(entries), 1, 0.5);

    std::u32string text;
    const std::size_t words = gen() % 10;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) text.push_back(U' ');
      text += vocab[gen() % vocab.size()];
    }

    PipelineConfig cfg;
    cfg.max_iterations = text.size() + 1;
    auto extract = [&lex](const std::u32string& t) {
      return extract_one(lex, t);
    };
    const SpanSet found = detect_spans(lexicon_gate(lex), extract, text, cfg);

    const std::u32string cleaned =
        delete_ranges(text, offsets_to_ranges(found)).first;
    CHECK(detect_spans(lexicon_gate(lex), extract, cleaned, cfg).empty());
  }
}

TEST_CASE("run_corpus preserves post order and ids") {
  const LexiconModel lex = lexicon_of({U"bitch", U"fucking", U"idiot"});
  Corpus c;
  c.posts.push_back({0, U"This bitch is so fucking idiot.", SpanSet()});
  c.posts.push_back({1, U"Not if they shoot you first...", SpanSet()});

  PipelineConfig cfg;
  const auto preds = run_corpus(
      lexicon_gate(lex),
      [&lex](const std::u32string& t) { return extract_one(lex, t); }, c, cfg);
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].first == 0);
  CHECK(offsets_to_ranges(preds[0].second) ==
        std::vector<ContiguousSpan>{{5, 10}, {17, 30}});
  CHECK(preds[1].first == 1);
  CHECK(preds[1].second.empty());

  CHECK(run_corpus(lexicon_gate(lex),
                   [&lex](const std::u32string& t) { return extract_one(lex, t); },
                   Corpus{}, cfg)
            .empty());
}

TEST_CASE("run_corpus gives identical results across worker counts") {
  const Corpus c = synth::make_separable_corpus(60, 5);
  const LexiconModel lex = train_lexicon(c, 2, 0.5);
  PipelineConfig cfg;

  std::vector<DetectTrace> t1;
  std::vector<DetectTrace> t4;
  const auto serial = run_corpus(
      lexicon_gate(lex),
      [&lex](const std::u32string& t) { return extract_one(lex, t); }, c, cfg,
      1, &t1);
  const auto parallel = run_corpus(
      lexicon_gate(lex),
      [&lex](const std::u32string& t) { return extract_one(lex, t); }, c, cfg,
      4, &t4);
  CHECK(serial == parallel);
  REQUIRE(t1.size() == t4.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].iterations == t4[i].iterations);
    CHECK(t1[i].hit_iteration_cap == t4[i].hit_iteration_cap);
  }

  CHECK_THROWS_AS(run_corpus(lexicon_gate(lex),
                             [](const std::u32string&) { return SpanSet(); },
                             c, cfg, 0),
                  InputError);
}
