#include "toxspan/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <unordered_map>

#include "toxspan/errors.hpp"

namespace toxspan {

double per_post_f1(const SpanSet& pred, const SpanSet& gold) {
  if (gold.empty() && pred.empty()) return 1.0;
  if (gold.empty() || pred.empty()) return 0.0;
  const auto inter = static_cast<double>(intersection_size(pred, gold));
  return 2.0 * inter / static_cast<double>(pred.size() + gold.size());
}

EvalReport evaluate(std::span<const Prediction> preds, const Corpus& c) {
  std::unordered_map<std::size_t, const SpanSet*> by_id;
  by_id.reserve(preds.size());
  for (const auto& [id, spans] : preds) {
    if (!by_id.emplace(id, &spans).second)
      throw InputError("evaluate: duplicate prediction for id " +
                       std::to_string(id));
  }
  if (by_id.size() > c.posts.size())
    throw InputError("evaluate: " +
                     std::to_string(by_id.size() - c.posts.size()) +
                     " prediction id(s) beyond the corpus");

  EvalReport report;
  report.per_post.reserve(c.posts.size());
  double sum = 0.0;
  for (const Post& p : c.posts) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end())
      throw InputError("evaluate: missing prediction for id " +
                       std::to_string(p.id));
    const double f1 = per_post_f1(*it->second, p.gold);
    report.per_post.emplace_back(p.id, f1);
    sum += f1;
  }
  report.mean_f1 =
      c.posts.empty() ? 0.0 : sum / static_cast<double>(c.posts.size());
  return report;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json per_post = nlohmann::json::array();
  for (const auto& [id, f1] : r.per_post)
    per_post.push_back({{"id", id}, {"f1", f1}});
  j = nlohmann::json{{"mean_f1", r.mean_f1}, {"per_post", std::move(per_post)}};
}

void print_eval_summary(std::ostream& out, const EvalReport& r) {
  out << "posts: " << r.per_post.size() << "  mean F1: " << std::fixed
      << std::setprecision(4) << r.mean_f1 << '\n';
  auto worst = r.per_post;
  std::stable_sort(worst.begin(), worst.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  const std::size_t show = std::min<std::size_t>(worst.size(), 5);
  if (show > 0 && worst.front().second < 1.0) {
    out << "lowest-scoring posts:\n";
    for (std::size_t i = 0; i < show; ++i)
      out << "  id " << worst[i].first << "  f1 " << worst[i].second << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

double toxic_fraction(const Post& p) {
  if (p.text.empty())
    throw InputError("toxic_fraction: post " + std::to_string(p.id) +
                     " has empty text");
  return static_cast<double>(p.gold.size()) /
         static_cast<double>(p.text.size());
}

}  // namespace toxspan
