// Independent brute-force oracles used by unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace testsupport {

// AUC by exhaustive pos/neg pair comparison, half credit for ties.
inline double brute_force_auc(std::span<const double> scores,
                              std::span<const std::int8_t> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Full-scan ranking with its own cosine; ties lexicographic by tag.
struct RankedTag {
  std::string tag;
  double similarity;
};

inline double oracle_cosine(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<RankedTag> brute_force_top_k(
    const std::map<std::string, std::vector<double>>& space,
    const std::vector<double>& query, std::size_t k,
    const std::string& exclude_tag, const std::string& required_prefix) {
  std::vector<RankedTag> all;
  for (const auto& [tag, vec] : space) {
    if (tag == exclude_tag) continue;
    if (!required_prefix.empty() && tag.rfind(required_prefix, 0) != 0)
      continue;
    all.push_back({tag, oracle_cosine(query, vec)});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const RankedTag& a, const RankedTag& b) {
                     if (a.similarity != b.similarity)
                       return a.similarity > b.similarity;
                     return a.tag < b.tag;
                   });
  if (all.size() > k) all.resize(k);
  return all;
}

// Central finite difference through an f32 parameter. Uses the actually
// applied step (difference of the rounded values) in the divisor.
template <typename LossFn>
double finite_difference_f32(float& param, double h, LossFn&& loss) {
  const float saved = param;
  const float plus = static_cast<float>(static_cast<double>(saved) + h);
  const float minus = static_cast<float>(static_cast<double>(saved) - h);
  param = plus;
  const double loss_plus = loss();
  param = minus;
  const double loss_minus = loss();
  param = saved;
  const double actual_step =
      static_cast<double>(plus) - static_cast<double>(minus);
  return (loss_plus - loss_minus) / actual_step;
}

template <typename LossFn>
double finite_difference_f64(double& param, double h, LossFn&& loss) {
  const double saved = param;
  param = saved + h;
  const double loss_plus = loss();
  param = saved - h;
  const double loss_minus = loss();
  param = saved;
  return (loss_plus - loss_minus) / (2.0 * h);
}

inline double relative_error(double got, double want) {
  const double denom = std::max({std::abs(got), std::abs(want), 1e-8});
  return std::abs(got - want) / denom;
}

}  // namespace testsupport
