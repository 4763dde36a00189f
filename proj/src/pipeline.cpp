#include "toxspan/pipeline.hpp"

#include <atomic>
#include <thread>

#include "toxspan/errors.hpp"

namespace toxspan {

namespace {

void validate(const PipelineConfig& cfg) {
  if (cfg.max_iterations < 1)
    throw InputError("PipelineConfig: max_iterations must be >= 1");
}

}  // namespace

SpanSet detect_spans(const GateFn& gate, const ExtractFn& extract,
                     const std::u32string& text, const PipelineConfig& cfg,
                     DetectTrace* trace) {
  validate(cfg);
  std::u32string current = text;
  OffsetMap map = OffsetMap::identity(text.size());
  SpanSet accumulated;
  DetectTrace local;

  while (true) {
    if (local.iterations >= cfg.max_iterations) {
      local.hit_iteration_cap = true;
      break;
    }
    if (gate(current) < cfg.gate_threshold) break;
    const SpanSet extracted = extract(current);
    if (extracted.empty()) break;

    accumulated = unite(accumulated, remap_to_original(map, extracted));

    std::vector<ContiguousSpan> doomed = offsets_to_ranges(extracted);
    if (cfg.absorb_whitespace) {
      for (ContiguousSpan& r : doomed) r = absorb_adjacent_space(current, r);
      // Absorption can make neighbors overlap; merge before deleting.
      doomed = offsets_to_ranges(ranges_to_offsets(doomed));
    }
    auto [next, step] = delete_ranges(current, std::move(doomed));
    current = std::move(next);
    map = map.composed_with(step);
    ++local.iterations;
  }

  if (trace) *trace = local;
  return accumulated;
}

SpanSet detect_spans(const GateModel& gate, const LexiconModel& extractor,
                     const std::u32string& text, const PipelineConfig& cfg,
                     DetectTrace* trace) {
  return detect_spans(
      [&gate](const std::u32string& t) { return gate_score(gate, t); },
      [&extractor](const std::u32string& t) { return extract_one(extractor, t); },
      text, cfg, trace);
}

std::vector<Prediction> run_corpus(const GateFn& gate,
                                   const ExtractFn& extract, const Corpus& c,
                                   const PipelineConfig& cfg, std::size_t jobs,
                                   std::vector<DetectTrace>* traces) {
  validate(cfg);
  if (jobs < 1) throw InputError("run_corpus: jobs must be >= 1");

  const std::size_t n = c.posts.size();
  std::vector<Prediction> results(n);
  if (traces) traces->assign(n, DetectTrace{});

  auto work = [&](std::size_t i) {
    DetectTrace t;
    results[i] = {c.posts[i].id,
                  detect_spans(gate, extract, c.posts[i].text, cfg, &t)};
    if (traces) (*traces)[i] = t;
  };

  if (jobs == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(jobs, n);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        work(i);
    });
  }
  for (std::thread& t : pool) t.join();
  return results;
}

std::vector<Prediction> run_corpus(const GateModel& gate,
                                   const LexiconModel& extractor,
                                   const Corpus& c, const PipelineConfig& cfg,
                                   std::size_t jobs,
                                   std::vector<DetectTrace>* traces) {
  return run_corpus(
      [&gate](const std::u32string& t) { return gate_score(gate, t); },
      [&extractor](const std::u32string& t) { return extract_one(extractor, t); },
      c, cfg, jobs, traces);
}

}  // namespace toxspan
