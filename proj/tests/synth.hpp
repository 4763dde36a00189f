#pragma once

// Shared test helpers: a synthetic corpus whose toxicity is perfectly
// learnable from character n-grams and exact token identity, plus a
// harness for spawning the CLI binary under test.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "toxspan/corpus.hpp"

namespace synth {

// Every toxic word opens with the marker "zqzq"; clean words avoid z and q
// entirely, so 1..3-gram features separate the classes and an exact-token
// lexicon recovers the spans.
inline const std::vector<std::u32string>& toxic_vocab() {
  static const std::vector<std::u32string> words = {
      U"zqzqara",  U"zqzqbelo", U"zqzqcind", U"zqzqdor",  U"zqzqelf",
      U"zqzqfum",  U"zqzqgon",  U"zqzqhilt", U"zqzqirn",  U"zqzqjas",
      U"zqzqkel",  U"zqzqlum",  U"zqzqmord", U"zqzqnix",  U"zqzqoralt",
      U"zqzqpish", U"zqzqrint", U"zqzqsalv", U"zqzqtur",  U"zqzqvex"};
  return words;
}

inline const std::vector<std::u32string>& clean_vocab() {
  static const std::vector<std::u32string> words = {
      U"the",   U"and",    U"people", U"have",  U"about", U"water",
      U"green", U"light",  U"house",  U"paper", U"garden", U"stone",
      U"river", U"cloud",  U"music",  U"table", U"happy",  U"window",
      U"often", U"little", U"summer", U"bread", U"dance",  U"yellow"};
  return words;
}

/// n_posts posts of 4..8 clean words; every other post gets one or two
/// two-word toxic phrases spliced in, gold covering each whole phrase
/// (internal space included). Phrases land after distinct clean words, so
/// they never touch, and a two-phrase post needs two extraction rounds.
/// Round-robin choice keeps every toxic word's corpus count at least 2 for
/// n_posts >= ~32, and since a post's toxic material always arrives in
/// two-word doses, every text the iterating gate sees matches the training
/// distribution (clean, or carrying one or two intact phrases).
inline toxspan::Corpus make_separable_corpus(std::size_t n_posts,
                                             std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto& toxic = toxic_vocab();
  const auto& clean = clean_vocab();
  std::size_t robin = 0;

  toxspan::Corpus c;
  for (std::size_t i = 0; i < n_posts; ++i) {
    const std::size_t n_clean = 4 + gen() % 5;
    // Each element is a clean word or a full toxic phrase.
    std::vector<std::u32string> phrases;
    std::vector<bool> phrase_toxic;
    for (std::size_t w = 0; w < n_clean; ++w) {
      phrases.push_back(clean[gen() % clean.size()]);
      phrase_toxic.push_back(false);
    }

    if (i % 2 == 0) {  // every other post is toxic
      const std::size_t k = 1 + gen() % 2;
      std::vector<std::size_t> gaps(n_clean);
      for (std::size_t g = 0; g < n_clean; ++g) gaps[g] = g;
      for (std::size_t g = n_clean; g > 1; --g)
        std::swap(gaps[g - 1], gaps[gen() % g]);
      gaps.resize(std::min(k, n_clean));
      std::sort(gaps.begin(), gaps.end());
      for (std::size_t g = 0; g < gaps.size(); ++g) {
        std::u32string phrase = toxic[robin++ % toxic.size()];
        phrase += U' ';
        phrase += toxic[robin++ % toxic.size()];
        const std::size_t at = gaps[g] + 1 + g;  // after clean word gaps[g]
        phrases.insert(phrases.begin() + static_cast<std::ptrdiff_t>(at),
                       std::move(phrase));
        phrase_toxic.insert(
            phrase_toxic.begin() + static_cast<std::ptrdiff_t>(at), true);
      }
    }

    toxspan::Post p;
    p.id = i;
    std::vector<std::size_t> gold;
    for (std::size_t w = 0; w < phrases.size(); ++w) {
      if (w > 0) p.text.push_back(U' ');
      const std::size_t start = p.text.size();
      p.text += phrases[w];
      if (phrase_toxic[w])
        for (std::size_t o = start; o < p.text.size(); ++o) gold.push_back(o);
    }
    p.gold = toxspan::SpanSet(std::move(gold));
    c.posts.push_back(std::move(p));
  }
  return c;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'')
      quoted += "'\\''";
    else
      quoted += c;
  }
  quoted += "'";
  return quoted;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
}

/// Runs the binary named by TOXSPAN_BIN with the given arguments.
inline CliResult run_cli(const std::vector<std::string>& args) {
  const char* bin = std::getenv("TOXSPAN_BIN");
  if (!bin)
    throw std::runtime_error("TOXSPAN_BIN is not set; run through ctest");

  static int counter = 0;
  const std::string tag =
      std::to_string(::getpid()) + "_" + std::to_string(counter++);
  const auto out_path =
      std::filesystem::temp_directory_path() / ("toxspan_cli_out_" + tag);
  const auto err_path =
      std::filesystem::temp_directory_path() / ("toxspan_cli_err_" + tag);

  std::string cmd = shell_quote(bin);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " > " + shell_quote(out_path.string());
  cmd += " 2> " + shell_quote(err_path.string());

  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return r;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("toxspan_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace synth
