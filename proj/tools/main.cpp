#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toxspan/audit.hpp"
#include "toxspan/corpus.hpp"
#include "toxspan/errors.hpp"
#include "toxspan/metrics.hpp"
#include "toxspan/models.hpp"
#include "toxspan/pipeline.hpp"

namespace {

using namespace toxspan;

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return parse_corpus(in, path);
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw InputError("write failed for " + path);
}

void run_stats(const std::string& corpus_path) {
  const Corpus c = load_corpus(corpus_path);
  nlohmann::json j = corpus_stats(c);
  std::cout << j.dump(2) << '\n';
  std::cerr << "records: " << c.size() << '\n';
}

void run_split(const std::string& corpus_path, const std::string& out_path) {
  const Corpus c = load_corpus(corpus_path);
  Corpus derived;
  for (const Post& p : c.posts)
    for (Post& d : split_multispan(p)) {
      d.id = derived.posts.size();  // ids must equal positions
      derived.posts.push_back(std::move(d));
    }
  std::ofstream out = open_output(out_path);
  write_corpus(out, derived);
  finish_output(out, out_path);
  std::cerr << c.size() << " posts -> " << derived.size()
            << " single-span posts\n";
}

void run_export_ner(const std::string& corpus_path,
                    const std::string& out_path) {
  const Corpus c = load_corpus(corpus_path);
  std::ofstream out = open_output(out_path);
  write_ner(out, c);
  finish_output(out, out_path);
  std::cerr << "wrote " << c.size() << " records\n";
}

struct TrainOptions {
  bool gate = false;
  bool lexicon = false;
  std::string corpus_path;
  std::string out_path;
  TrainConfig cfg;
  std::size_t hash_buckets = kDefaultHashBuckets;
  std::size_t min_count = 2;
  double min_ratio = 0.5;
};

void run_train(const TrainOptions& opt) {
  if (opt.gate == opt.lexicon)
    throw InputError("train: exactly one of --gate or --lexicon is required");
  const Corpus c = load_corpus(opt.corpus_path);
  nlohmann::json model;
  if (opt.gate) {
    std::vector<double> losses;
    model = gate_to_json(train_gate(c, opt.cfg, opt.hash_buckets, &losses));
    std::cerr << "trained gate on " << c.size() << " posts; mean log-loss "
              << (losses.empty() ? 0.0 : losses.back()) << " after "
              << losses.size() << " epochs\n";
  } else {
    const LexiconModel m = train_lexicon(c, opt.min_count, opt.min_ratio);
    std::size_t active = 0;
    for (const auto& [lexeme, entry] : m.entries())
      if (m.is_active(lexeme)) ++active;
    model = lexicon_to_json(m);
    std::cerr << "trained lexicon on " << c.size() << " posts; " << active
              << " of " << m.entries().size() << " lexemes active\n";
  }
  std::ofstream out = open_output(opt.out_path);
  out << model.dump(2) << '\n';
  finish_output(out, opt.out_path);
}

struct PredictOptions {
  std::string gate_path;
  std::string lexicon_path;
  std::string corpus_path;
  std::string out_path;
  PipelineConfig cfg;
  std::size_t jobs = 1;
};

void run_predict(const PredictOptions& opt) {
  const GateModel gate = gate_from_json(load_json(opt.gate_path));
  const LexiconModel lexicon = lexicon_from_json(load_json(opt.lexicon_path));
  const Corpus c = load_corpus(opt.corpus_path);

  std::vector<DetectTrace> traces;
  const std::vector<Prediction> preds =
      run_corpus(gate, lexicon, c, opt.cfg, opt.jobs, &traces);
  for (std::size_t i = 0; i < traces.size(); ++i)
    if (traces[i].hit_iteration_cap)
      std::cerr << "warning: post " << c.posts[i].id
                << " stopped at the iteration cap ("
                << opt.cfg.max_iterations << ")\n";

  std::ofstream out = open_output(opt.out_path);
  write_predictions(out, preds);
  finish_output(out, opt.out_path);
  std::cerr << "predicted " << preds.size() << " posts\n";
}

void run_eval(const std::string& pred_path, const std::string& gold_path) {
  std::ifstream in(pred_path, std::ios::binary);
  if (!in) throw InputError("cannot open " + pred_path);
  const std::vector<Prediction> preds = read_predictions(in, pred_path);
  const Corpus c = load_corpus(gold_path);
  const EvalReport report = evaluate(preds, c);
  nlohmann::json j = report;
  std::cout << j.dump(2) << '\n';
  print_eval_summary(std::cerr, report);
}

void run_audit(const std::string& corpus_path, const std::string& pred_path,
               std::size_t min_total) {
  const Corpus c = load_corpus(corpus_path);
  const auto consistency = consistency_report(c, min_total);
  const auto shapes = shape_flags(c);
  nlohmann::json j{{"consistency", consistency}, {"shape_flags", shapes}};
  print_consistency_table(std::cerr, consistency);
  print_shape_table(std::cerr, shapes);
  if (!pred_path.empty()) {
    std::ifstream in(pred_path, std::ios::binary);
    if (!in) throw InputError("cannot open " + pred_path);
    const auto diffs = diff_report(read_predictions(in, pred_path), c);
    j["diff"] = diffs;
    print_diff_table(std::cerr, diffs);
  }
  std::cout << j.dump(2) << '\n';
}

void run_kfold(const std::string& corpus_path, std::size_t k,
               std::uint64_t seed, const std::string& out_dir) {
  const Corpus c = load_corpus(corpus_path);
  const std::vector<KFoldPair> folds = kfold_split(c, k, seed);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw InputError("cannot create directory " + out_dir + ": " +
                     ec.message());
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto base =
        (std::filesystem::path(out_dir) / ("fold_" + std::to_string(i)))
            .string();
    std::ofstream train_out = open_output(base + "_train.csv");
    write_corpus(train_out, folds[i].train);
    finish_output(train_out, base + "_train.csv");
    std::ofstream held_out = open_output(base + "_heldout.csv");
    write_corpus(held_out, folds[i].heldout);
    finish_output(held_out, base + "_heldout.csv");
  }
  std::cerr << "wrote " << folds.size() << " fold pairs to " << out_dir
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toxic span detection toolkit"};
  app.require_subcommand(1);

  std::string corpus_path;
  std::string out_path;
  std::string pred_path;
  std::string gold_path;

  auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
  stats->add_option("corpus", corpus_path, "corpus CSV")->required();
  stats->callback([&] { run_stats(corpus_path); });

  auto* split = app.add_subcommand(
      "split", "rewrite multi-span posts as one post per span");
  split->add_option("corpus", corpus_path, "corpus CSV")->required();
  split->add_option("out", out_path, "output corpus CSV")->required();
  split->callback([&] { run_split(corpus_path, out_path); });

  auto* ner = app.add_subcommand("export-ner",
                                 "corpus as JSON-lines NER records");
  ner->add_option("corpus", corpus_path, "corpus CSV")->required();
  ner->add_option("out", out_path, "output JSONL file")->required();
  ner->callback([&] { run_export_ner(corpus_path, out_path); });

  TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "fit a gate or lexicon model");
  train->add_flag("--gate", train_opt.gate, "train the post-level gate");
  train->add_flag("--lexicon", train_opt.lexicon,
                  "train the span lexicon");
  train->add_option("corpus", train_opt.corpus_path, "corpus CSV")
      ->required();
  train->add_option("--out", train_opt.out_path, "model JSON file")
      ->required();
  train->add_option("--epochs", train_opt.cfg.epochs, "gate training passes");
  train->add_option("--batch-start", train_opt.cfg.batch_start,
                    "initial batch size");
  train->add_option("--batch-stop", train_opt.cfg.batch_stop,
                    "batch size cap");
  train->add_option("--batch-factor", train_opt.cfg.batch_factor,
                    "per-batch growth factor");
  train->add_option("--learning-rate", train_opt.cfg.learning_rate,
                    "SGD step size");
  train->add_option("--seed", train_opt.cfg.seed, "shuffle seed");
  train->add_option("--hash-buckets", train_opt.hash_buckets,
                    "gate feature buckets")
      ->check(CLI::PositiveNumber);
  train->add_option("--min-count", train_opt.min_count,
                    "lexicon occurrence floor")
      ->check(CLI::PositiveNumber);
  train->add_option("--min-ratio", train_opt.min_ratio,
                    "lexicon in-span ratio floor");
  train->callback([&] { run_train(train_opt); });

  PredictOptions predict_opt;
  auto* predict =
      app.add_subcommand("predict", "detect spans with trained models");
  predict->add_option("--gate", predict_opt.gate_path, "gate model JSON")
      ->required();
  predict
      ->add_option("--lexicon", predict_opt.lexicon_path,
                   "lexicon model JSON")
      ->required();
  predict->add_option("corpus", predict_opt.corpus_path, "corpus CSV")
      ->required();
  predict->add_option("--out", predict_opt.out_path, "predictions TSV")
      ->required();
  predict->add_option("--threshold", predict_opt.cfg.gate_threshold,
                      "gate decision threshold");
  predict
      ->add_option("--max-iterations", predict_opt.cfg.max_iterations,
                   "extraction round cap")
      ->check(CLI::PositiveNumber);
  predict->add_flag("--absorb-whitespace,!--no-absorb-whitespace",
                    predict_opt.cfg.absorb_whitespace,
                    "also delete one space next to each excised span");
  predict->add_option("--jobs", predict_opt.jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  predict->callback([&] { run_predict(predict_opt); });

  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--pred", pred_path, "predictions TSV")->required();
  eval->add_option("--gold", gold_path, "gold corpus CSV")->required();
  eval->callback([&] { run_eval(pred_path, gold_path); });

  std::size_t min_total = 2;
  auto* audit =
      app.add_subcommand("audit", "annotation consistency and shape report");
  audit->add_option("corpus", corpus_path, "corpus CSV")->required();
  audit->add_option("--pred", pred_path,
                    "also diff these predictions against gold");
  audit->add_option("--min-total", min_total,
                    "occurrence floor for consistency entries")
      ->check(CLI::Range(static_cast<std::size_t>(2),
                         std::numeric_limits<std::size_t>::max()));
  audit->callback([&] { run_audit(corpus_path, pred_path, min_total); });

  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* kfold = app.add_subcommand("kfold", "write k train/heldout splits");
  kfold->add_option("corpus", corpus_path, "corpus CSV")->required();
  kfold->add_option("-k,--folds", k, "number of folds")->required();
  kfold->add_option("--seed", seed, "shuffle seed");
  kfold->add_option("--out-dir", out_dir, "output directory")->required();
  kfold->callback([&] { run_kfold(corpus_path, k, seed, out_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const toxspan::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
