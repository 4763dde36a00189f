#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "toxspan/corpus.hpp"
#include "toxspan/models.hpp"
#include "toxspan/spans.hpp"

namespace toxspan {

struct PipelineConfig {
  double gate_threshold = 0.5;
  std::size_t max_iterations = 10;
  bool absorb_whitespace = true;
};

/// What happened during one detect_spans call; iterations counts completed
/// extract-and-delete rounds (stops before extraction do not count).
struct DetectTrace {
  std::size_t iterations = 0;
  bool hit_iteration_cap = false;
};

using GateFn = std::function<double(const std::u32string&)>;
using ExtractFn = std::function<SpanSet(const std::u32string&)>;

/// Iterative detection: while the gate scores the working text at or above
/// the threshold, extract one span, record it in original-text coordinates,
/// excise it (plus one adjacent space per range when absorb_whitespace),
/// and recheck. Returns the union of everything extracted.
SpanSet detect_spans(const GateFn& gate, const ExtractFn& extract,
                     const std::u32string& text, const PipelineConfig& cfg,
                     DetectTrace* trace = nullptr);

SpanSet detect_spans(const GateModel& gate, const LexiconModel& extractor,
                     const std::u32string& text, const PipelineConfig& cfg,
                     DetectTrace* trace = nullptr);

/// detect_spans over every post, results in post order. jobs > 1 fans the
/// posts out across threads; the output is identical either way. When
/// traces is given it is resized to match the corpus, one entry per post.
std::vector<Prediction> run_corpus(const GateFn& gate,
                                   const ExtractFn& extract, const Corpus& c,
                                   const PipelineConfig& cfg,
                                   std::size_t jobs = 1,
                                   std::vector<DetectTrace>* traces = nullptr);

std::vector<Prediction> run_corpus(const GateModel& gate,
                                   const LexiconModel& extractor,
                                   const Corpus& c, const PipelineConfig& cfg,
                                   std::size_t jobs = 1,
                                   std::vector<DetectTrace>* traces = nullptr);

}  // namespace toxspan
