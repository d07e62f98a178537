// Supervised look-alike harness: per-method feature assembly, nine
// binary logistic-regression tasks (gender, five age groups, two coarse
// age groups), grid search with stratified k-fold CV, AUC-ROC, and the
// cross-method report with deltas against the declared zero-baseline.
//
// Zero-baseline ("none"): intercept plus log(1 + #distinct apps used).
// The baseline is deliberately weak and is declared in every report
// header so representation deltas are attributable.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridrec/data.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/strings.hpp"
#include "hybridrec/rng.hpp"

namespace hybridrec {

// --- feature assembly ---------------------------------------------------

struct NamedVectorSet {
  std::string name;
  const std::map<UserId, std::vector<double>>* vectors;
};

struct FeatureBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t width = 0;
  bool continuous = true;  // standardized; one-hot blocks stay {0,1}
};

struct FeatureMatrix {
  std::vector<UserId> users;  // row order, sorted by id
  std::size_t cols = 0;
  std::vector<double> x;  // row-major
  std::vector<FeatureBlock> blocks;
  std::array<std::vector<std::int8_t>, 9> labels;  // per task, aligned rows

  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) {
    return {x.data() + i * cols, cols};
  }
  std::size_t size() const { return users.size(); }
};

// Seed users covered by every requested source; missing users are
// dropped with a warning so all methods share one row set.
inline std::vector<UserId> feature_row_set(
    const SeedLabelSet& labels, const InteractionSet& interactions,
    const std::vector<NamedVectorSet>& sources) {
  std::vector<UserId> rows;
  for (const auto& [user, _] : labels.labels()) {
    if (!interactions.contains(user)) continue;
    bool covered = true;
    for (const auto& src : sources) {
      if (!src.vectors->count(user)) {
        warn("seed user " + user + " missing from source " + src.name +
             "; dropped from the feature matrix");
        covered = false;
        break;
      }
    }
    if (covered) rows.push_back(user);
  }
  if (rows.empty())
    throw EmptyIntersection("no seed user is covered by all sources");
  return rows;
}

inline FeatureMatrix assemble_features(
    const std::vector<UserId>& rows, const SeedLabelSet& labels,
    const InteractionSet& interactions,
    const std::vector<NamedVectorSet>& sources, bool include_meta,
    const UserMetadataSet* user_meta = nullptr,
    const AppCatalog* catalog = nullptr) {
  if (rows.empty()) throw EmptyIntersection("empty row set");
  for (const auto& src : sources) {
    bool any = false;
    for (const auto& u : rows)
      if (src.vectors->count(u)) {
        any = true;
        break;
      }
    if (!any)
      throw SourceMissingUser("source " + src.name +
                              " covers no seed user in the row set");
  }
  if (include_meta && (!user_meta || !catalog))
    throw ConfigInvalid("meta features need user metadata and the catalog");

  FeatureMatrix fm;
  fm.users = rows;

  // Column plan. The zero-baseline block is always present.
  fm.blocks.push_back({"baseline", 0, 1, true});
  std::size_t offset = 1;
  for (const auto& src : sources) {
    std::size_t width = src.vectors->begin()->second.size();
    fm.blocks.push_back({src.name, offset, width, true});
    offset += width;
  }
  std::vector<std::string> os_vocab, city_vocab, genre_vocab;
  if (include_meta) {
    os_vocab = user_meta->os_vocab();
    city_vocab = user_meta->city_vocab();
    std::set<std::string> genres;
    for (const auto& [_, m] : catalog->apps()) genres.insert(m.genre);
    genre_vocab.assign(genres.begin(), genres.end());
    fm.blocks.push_back({"meta.os", offset, os_vocab.size(), false});
    offset += os_vocab.size();
    fm.blocks.push_back({"meta.city", offset, city_vocab.size(), false});
    offset += city_vocab.size();
    fm.blocks.push_back({"meta.app_means", offset, 3, true});
    offset += 3;
    fm.blocks.push_back({"meta.genres", offset, genre_vocab.size(), true});
    offset += genre_vocab.size();
  }
  fm.cols = offset;
  fm.x.assign(rows.size() * fm.cols, 0.0);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const UserId& user = rows[r];
    auto row = fm.row(r);
    const UserHistory* hist = interactions.find(user);
    row[0] = std::log(1.0 + static_cast<double>(hist->apps.size()));

    std::size_t at = 1;
    for (const auto& src : sources) {
      auto it = src.vectors->find(user);
      if (it == src.vectors->end())
        throw SourceMissingUser("source " + src.name + " lost user " + user);
      const auto& v = it->second;
      std::copy(v.begin(), v.end(), row.begin() + at);
      at += v.size();
    }
    if (include_meta) {
      const UserMetadata* um = user_meta->find(user);
      if (!um) throw MissingUserMetadata("user " + user);
      auto onehot = [&](const std::vector<std::string>& vocab,
                        const std::string& value) {
        for (std::size_t i = 0; i < vocab.size(); ++i)
          row[at + i] = vocab[i] == value ? 1.0 : 0.0;
        at += vocab.size();
      };
      onehot(os_vocab, um->os);
      onehot(city_vocab, um->city);

      double price = 0.0, rating = 0.0, pop = 0.0;
      std::map<std::string, double> genre_counts;
      for (const auto& app : hist->apps) {
        const AppMetadata& m = catalog->at(app);
        price += m.price;
        rating += m.avg_rating;
        pop += std::log10(static_cast<double>(m.num_ratings) + 1.0);
        genre_counts[m.genre] += 1.0;
      }
      const double inv = 1.0 / static_cast<double>(hist->apps.size());
      row[at++] = price * inv;
      row[at++] = rating * inv;
      row[at++] = pop * inv;
      for (std::size_t i = 0; i < genre_vocab.size(); ++i)
        row[at + i] = genre_counts.count(genre_vocab[i])
                          ? genre_counts[genre_vocab[i]]
                          : 0.0;
      at += genre_vocab.size();
    }
  }

  for (std::size_t t = 0; t < kAllTasks.size(); ++t) {
    fm.labels[t].resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const SeedLabel* label = labels.find(rows[r]);
      fm.labels[t][r] =
          label && task_positive(*label, kAllTasks[t]) ? 1 : 0;
    }
  }
  return fm;
}

struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 for non-continuous or zero-variance cols
};

// Zero mean / unit variance on continuous columns, fitted on the train
// rows only and applied to every row.
inline ColumnStats standardize_columns(FeatureMatrix& fm,
                                       const std::vector<std::size_t>& train) {
  ColumnStats stats;
  stats.mean.assign(fm.cols, 0.0);
  stats.scale.assign(fm.cols, 1.0);
  if (train.empty()) throw EmptyIntersection("empty train split");
  std::vector<bool> continuous(fm.cols, false);
  for (const auto& b : fm.blocks)
    if (b.continuous)
      for (std::size_t c = b.offset; c < b.offset + b.width; ++c)
        continuous[c] = true;

  const double n = static_cast<double>(train.size());
  for (std::size_t c = 0; c < fm.cols; ++c) {
    if (!continuous[c]) continue;
    double m = 0.0;
    for (auto r : train) m += fm.x[r * fm.cols + c];
    m /= n;
    double var = 0.0;
    for (auto r : train) {
      const double d = fm.x[r * fm.cols + c] - m;
      var += d * d;
    }
    var /= n;
    stats.mean[c] = m;
    stats.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  for (std::size_t r = 0; r < fm.size(); ++r)
    for (std::size_t c = 0; c < fm.cols; ++c)
      if (continuous[c])
        fm.x[r * fm.cols + c] =
            (fm.x[r * fm.cols + c] - stats.mean[c]) / stats.scale[c];
  return stats;
}

// --- logistic regression --------------------------------------------------

struct LogRegModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  bool converged = false;
  std::uint32_t iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;

  double score(std::span<const double> x) const {
    double f = intercept;
    for (std::size_t i = 0; i < weights.size(); ++i) f += weights[i] * x[i];
    return 1.0 / (1.0 + std::exp(-f));
  }
};

namespace detail {

inline double softplus(double t) {
  if (t > 30.0) return t;
  if (t < -30.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

struct DataView {
  const double* x;
  std::size_t n, d, stride;
  const std::int8_t* y;

  std::span<const double> row(std::size_t i) const {
    return {x + i * stride, d};
  }
};

// Sum logistic loss + (lambda/2)||w||^2; intercept unregularized.
inline double logreg_loss(const DataView& data, const std::vector<double>& w,
                          double b, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    double f = b;
    const auto xi = data.row(i);
    for (std::size_t j = 0; j < data.d; ++j) f += w[j] * xi[j];
    const double s = data.y[i] ? 1.0 : -1.0;
    loss += softplus(-s * f);
  }
  double reg = 0.0;
  for (double wi : w) reg += wi * wi;
  return loss + 0.5 * lambda * reg;
}

inline void logreg_gradient(const DataView& data, const std::vector<double>& w,
                            double b, double lambda, std::vector<double>& gw,
                            double& gb) {
  gw.assign(data.d, 0.0);
  gb = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    double f = b;
    const auto xi = data.row(i);
    for (std::size_t j = 0; j < data.d; ++j) f += w[j] * xi[j];
    const double p = 1.0 / (1.0 + std::exp(-f));
    const double e = p - (data.y[i] ? 1.0 : 0.0);
    for (std::size_t j = 0; j < data.d; ++j) gw[j] += e * xi[j];
    gb += e;
  }
  for (std::size_t j = 0; j < data.d; ++j) gw[j] += lambda * w[j];
}

}  // namespace detail

// Deterministic full-batch gradient descent with Armijo backtracking.
// Monotone descent, so the exit loss never exceeds the initial loss.
inline LogRegModel train_logreg(const detail::DataView& data, double lambda,
                                std::uint32_t max_iters = 500,
                                double tol = 1e-4) {
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < data.n; ++i) (data.y[i] ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw SingleClassTrainingSet("training set has a single class");

  LogRegModel model;
  model.lambda = lambda;
  model.weights.assign(data.d, 0.0);
  // At w = 0 the optimal intercept is the class-prior logit; starting
  // there keeps the unregularized intercept from crawling when lambda
  // makes the weight block stiff.
  double prior = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) prior += data.y[i] ? 1.0 : 0.0;
  prior /= static_cast<double>(data.n);
  model.intercept = std::log(prior / (1.0 - prior));
  model.initial_loss =
      detail::logreg_loss(data, model.weights, model.intercept, lambda);

  double loss = model.initial_loss;
  std::vector<double> gw;
  double gb = 0.0;
  std::vector<double> trial_w(data.d);
  double step_hint = 1.0 / (1.0 + lambda);
  for (std::uint32_t it = 0; it < max_iters; ++it) {
    detail::logreg_gradient(data, model.weights, model.intercept, lambda, gw,
                            gb);
    double gnorm2 = gb * gb;
    for (double g : gw) gnorm2 += g * g;
    const double gnorm = std::sqrt(gnorm2);
    model.iterations = it;
    if (gnorm < tol) {
      model.converged = true;
      break;
    }
    // Backtracking line search along the negative gradient.
    double step = step_hint;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < data.d; ++j)
        trial_w[j] = model.weights[j] - step * gw[j];
      const double trial_b = model.intercept - step * gb;
      const double trial_loss =
          detail::logreg_loss(data, trial_w, trial_b, lambda);
      if (trial_loss <= loss - 1e-4 * step * gnorm2) {
        model.weights = trial_w;
        model.intercept = trial_b;
        loss = trial_loss;
        accepted = true;
        // Allow the step to grow back between iterations.
        step_hint = std::min(step * 2.0, 1e4);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      model.converged = gnorm < 1e2 * tol;
      break;
    }
  }
  model.final_loss = loss;
  for (double w : model.weights)
    if (!std::isfinite(w)) throw NonFiniteUpdate("non-finite weight");
  if (!model.converged)
    warn("logistic regression did not converge (lambda=" +
         std::to_string(lambda) + ")");
  return model;
}

inline LogRegModel train_logreg(const std::vector<double>& x, std::size_t cols,
                                const std::vector<std::int8_t>& y,
                                double lambda, std::uint32_t max_iters = 500,
                                double tol = 1e-4) {
  detail::DataView view{x.data(), y.size(), cols, cols, y.data()};
  return train_logreg(view, lambda, max_iters, tol);
}

// --- AUC-ROC ---------------------------------------------------------------

// P(score_pos > score_neg) + 0.5 P(tie), via the rank statistic with
// average ranks on ties.
inline double auc_roc(std::span<const double> scores,
                      std::span<const std::int8_t> labels) {
  if (scores.size() != labels.size())
    throw DimensionMismatch("scores and labels differ in length");
  std::size_t n_pos = 0, n_neg = 0;
  for (auto y : labels) (y ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw SingleClassEvalSet("evaluation set has a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) +
                                   static_cast<double>(j));  // 1-based
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// --- stratified splits and folds -------------------------------------------

// Row indices per (gender, age_group) stratum are shuffled with the
// seed, then the test fraction is peeled off each stratum.
inline void stratified_split(const FeatureMatrix& fm,
                             const SeedLabelSet& labels, double test_fraction,
                             std::uint64_t seed,
                             std::vector<std::size_t>& train,
                             std::vector<std::size_t>& test) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw ConfigInvalid("test_fraction must be in (0, 1)");
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t r = 0; r < fm.size(); ++r) {
    const SeedLabel* l = labels.find(fm.users[r]);
    strata[std::string(to_string(l->gender)) + "|" + to_string(l->age_group)]
        .push_back(r);
  }
  train.clear();
  test.clear();
  Rng rng(seed);
  for (auto& [_, rows] : strata) {
    shuffle(rows, rng);
    const std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(rows.size())));
    for (std::size_t i = 0; i < rows.size(); ++i)
      (i < n_test ? test : train).push_back(rows[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  if (train.empty() || test.empty())
    throw EmptyIntersection("degenerate train/test split");
}

// k stratified folds (round-robin within each class after a seeded
// shuffle). Throws if any fold would miss a class.
inline std::vector<std::vector<std::size_t>> stratified_folds(
    const std::vector<std::int8_t>& y, const std::vector<std::size_t>& rows,
    std::uint32_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigInvalid("k_folds must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (auto r : rows) (y[r] ? pos : neg).push_back(r);
  if (pos.size() < k || neg.size() < k)
    throw FoldClassStarvation("a class has fewer members than folds");
  Rng rng(seed);
  shuffle(pos, rng);
  shuffle(neg, rng);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < pos.size(); ++i) folds[i % k].push_back(pos[i]);
  for (std::size_t i = 0; i < neg.size(); ++i) folds[i % k].push_back(neg[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

// --- grid search -------------------------------------------------------------

struct CvCell {
  double lambda = 0.0;
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
};

struct CvResult {
  double best_lambda = 0.0;
  std::vector<CvCell> table;
};

namespace detail {

inline std::vector<double> gather_matrix(const FeatureMatrix& fm,
                                         const std::vector<std::size_t>& rows) {
  std::vector<double> out(rows.size() * fm.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(fm.row(rows[i]).begin(), fm.row(rows[i]).end(),
              out.begin() + i * fm.cols);
  return out;
}

inline std::vector<std::int8_t> gather_labels(
    const std::vector<std::int8_t>& y, const std::vector<std::size_t>& rows) {
  std::vector<std::int8_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
  return out;
}

}  // namespace detail

// Best lambda by mean validation AUC over stratified folds; exact ties
// go to the smaller lambda.
inline CvResult grid_search_cv(const FeatureMatrix& fm,
                               const std::vector<std::int8_t>& y,
                               const std::vector<std::size_t>& train_rows,
                               std::vector<double> lambda_grid,
                               std::uint32_t k_folds, std::uint64_t seed,
                               std::uint32_t max_iters = 500,
                               double tol = 1e-4) {
  if (lambda_grid.empty()) throw ConfigInvalid("empty lambda grid");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  lambda_grid.erase(std::unique(lambda_grid.begin(), lambda_grid.end()),
                    lambda_grid.end());
  auto folds = stratified_folds(y, train_rows, k_folds, seed);

  CvResult result;
  double best_auc = -1.0;
  for (double lambda : lambda_grid) {
    CvCell cell;
    cell.lambda = lambda;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> fit_rows;
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f)
          fit_rows.insert(fit_rows.end(), folds[g].begin(), folds[g].end());
      auto xf = detail::gather_matrix(fm, fit_rows);
      auto yf = detail::gather_labels(y, fit_rows);
      LogRegModel model = train_logreg(xf, fm.cols, yf, lambda, max_iters, tol);
      std::vector<double> scores(folds[f].size());
      std::vector<std::int8_t> yv(folds[f].size());
      for (std::size_t i = 0; i < folds[f].size(); ++i) {
        scores[i] = model.score(fm.row(folds[f][i]));
        yv[i] = y[folds[f][i]];
      }
      cell.fold_auc.push_back(auc_roc(scores, yv));
    }
    cell.mean_auc =
        std::accumulate(cell.fold_auc.begin(), cell.fold_auc.end(), 0.0) /
        static_cast<double>(cell.fold_auc.size());
    if (cell.mean_auc > best_auc) {
      best_auc = cell.mean_auc;
      result.best_lambda = lambda;
    }
    result.table.push_back(std::move(cell));
  }
  return result;
}

// --- suite -------------------------------------------------------------------

struct MethodSpec {
  std::string name;                  // e.g. "tfidf+d2v_cf+meta"
  std::vector<std::string> sources;  // representation names
  bool include_meta = false;
};

// "none" means baseline only; a trailing "+meta" adds the metadata
// feature block.
inline MethodSpec parse_method_spec(const std::string& name) {
  MethodSpec spec;
  spec.name = name;
  for (const auto& part : split(name, '+')) {
    std::string p = trim(part);
    if (p.empty()) throw ConfigInvalid("bad method name: " + name);
    if (p == "meta")
      spec.include_meta = true;
    else if (p != "none")
      spec.sources.push_back(p);
  }
  return spec;
}

struct SuiteOptions {
  std::vector<MethodSpec> methods;
  std::vector<double> lambda_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::uint32_t k_folds = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  std::uint32_t logreg_max_iters = 500;
  double logreg_tol = 1e-4;
};

struct ExperimentReport {
  std::vector<std::string> methods;            // "none" first
  std::vector<std::vector<double>> auc;        // [task][method]
  std::vector<std::vector<double>> delta;      // [task][method], vs none
  std::vector<std::vector<double>> best_lambda;
  std::vector<double> average_auc;             // per method
  std::vector<double> average_delta;
  std::vector<std::size_t> feature_width;      // per method, native dims
  std::string baseline_note =
      "zero-baseline 'none' = intercept + log(1 + #distinct apps); "
      "split and folds shared across methods";

  double mean_auc(const std::string& method) const {
    for (std::size_t m = 0; m < methods.size(); ++m)
      if (methods[m] == method) return average_auc[m];
    throw UnknownTag("method not in report: " + method);
  }

  void to_csv(std::ostream& out) const {
    out << "task";
    for (const auto& m : methods) out << ",auc:" << m;
    for (std::size_t m = 1; m < methods.size(); ++m)
      out << ",delta:" << methods[m];
    out << "\n";
    for (std::size_t t = 0; t < kAllTasks.size(); ++t) {
      out << to_string(kAllTasks[t]);
      for (std::size_t m = 0; m < methods.size(); ++m)
        out << ',' << auc[t][m];
      for (std::size_t m = 1; m < methods.size(); ++m)
        out << ',' << delta[t][m];
      out << "\n";
    }
    out << "average";
    for (std::size_t m = 0; m < methods.size(); ++m)
      out << ',' << average_auc[m];
    for (std::size_t m = 1; m < methods.size(); ++m)
      out << ',' << average_delta[m];
    out << "\n";
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["baseline_note"] = baseline_note;
    j["methods"] = methods;
    for (std::size_t t = 0; t < kAllTasks.size(); ++t) {
      nlohmann::json row;
      row["task"] = to_string(kAllTasks[t]);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        row["auc"][methods[m]] = auc[t][m];
        row["delta"][methods[m]] = delta[t][m];
        row["best_lambda"][methods[m]] = best_lambda[t][m];
      }
      j["tasks"].push_back(row);
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      j["average"]["auc"][methods[m]] = average_auc[m];
      j["average"]["delta"][methods[m]] = average_delta[m];
      if (m < feature_width.size())
        j["feature_width"][methods[m]] = feature_width[m];
    }
    return j;
  }

  static ExperimentReport from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.baseline_note = j.at("baseline_note").get<std::string>();
    r.methods = j.at("methods").get<std::vector<std::string>>();
    const auto& tasks = j.at("tasks");
    r.auc.assign(kAllTasks.size(), std::vector<double>(r.methods.size(), 0));
    r.delta = r.auc;
    r.best_lambda = r.auc;
    for (std::size_t t = 0; t < kAllTasks.size(); ++t)
      for (std::size_t m = 0; m < r.methods.size(); ++m) {
        r.auc[t][m] = tasks[t].at("auc").at(r.methods[m]).get<double>();
        r.delta[t][m] = tasks[t].at("delta").at(r.methods[m]).get<double>();
        r.best_lambda[t][m] =
            tasks[t].at("best_lambda").at(r.methods[m]).get<double>();
      }
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      r.average_auc.push_back(
          j.at("average").at("auc").at(r.methods[m]).get<double>());
      r.average_delta.push_back(
          j.at("average").at("delta").at(r.methods[m]).get<double>());
      if (j.contains("feature_width"))
        r.feature_width.push_back(
            j.at("feature_width").at(r.methods[m]).get<std::size_t>());
    }
    return r;
  }

  // Table layout mirrors the report convention: absolute AUC for the
  // zero-baseline column, absolute deltas for every other method.
  void to_table(std::ostream& out) const {
    out << "# " << baseline_note << "\n";
    auto cell = [&](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%8.2f%%", v * 100.0);
      out << buf;
    };
    char head[64];
    std::snprintf(head, sizeof(head), "%-8s", "AUC-ROC");
    out << head;
    for (const auto& m : methods) {
      std::snprintf(head, sizeof(head), " %12s",
                    m.size() > 12 ? m.substr(0, 12).c_str() : m.c_str());
      out << head;
    }
    out << "\n";
    for (std::size_t t = 0; t < kAllTasks.size(); ++t) {
      std::snprintf(head, sizeof(head), "%-8s", to_string(kAllTasks[t]));
      out << head;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        out << "    ";
        cell(m == 0 ? auc[t][m] : delta[t][m]);
      }
      out << "\n";
    }
    std::snprintf(head, sizeof(head), "%-8s", "average");
    out << head;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      out << "    ";
      cell(m == 0 ? average_auc[m] : average_delta[m]);
    }
    out << "\n";
  }
};

// Representation name -> per-user vectors.
using RepresentationBank =
    std::map<std::string, std::map<UserId, std::vector<double>>>;

// Runs every method x task cell on one shared stratified split. Feature
// rows are the seed users covered by every source any method uses, so
// comparisons are paired.
inline ExperimentReport run_suite(const SeedLabelSet& labels,
                                  const InteractionSet& interactions,
                                  const UserMetadataSet& user_meta,
                                  const AppCatalog& catalog,
                                  const RepresentationBank& bank,
                                  const SuiteOptions& options) {
  if (labels.empty()) throw EmptyDataset("no seed labels");
  std::vector<MethodSpec> methods = options.methods;
  if (methods.empty()) throw ConfigInvalid("no methods requested");
  if (methods.front().name != "none")
    methods.insert(methods.begin(), parse_method_spec("none"));

  // Union of sources fixes one row set for all methods.
  std::vector<NamedVectorSet> all_sources;
  std::set<std::string> seen;
  for (const auto& m : methods)
    for (const auto& s : m.sources) {
      if (!seen.insert(s).second) continue;
      auto it = bank.find(s);
      if (it == bank.end())
        throw ConfigInvalid("representation not available: " + s);
      all_sources.push_back({s, &it->second});
    }
  const std::vector<UserId> rows =
      feature_row_set(labels, interactions, all_sources);

  // The split is computed once, on row indices, and reused everywhere.
  FeatureMatrix probe = assemble_features(rows, labels, interactions, {},
                                          false, &user_meta, &catalog);
  std::vector<std::size_t> train, test;
  stratified_split(probe, labels, options.test_fraction, options.seed, train,
                   test);

  ExperimentReport report;
  for (const auto& m : methods) report.methods.push_back(m.name);
  report.auc.assign(kAllTasks.size(),
                    std::vector<double>(methods.size(), 0.0));
  report.delta = report.auc;
  report.best_lambda = report.auc;

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const MethodSpec& spec = methods[mi];
    std::vector<NamedVectorSet> sources;
    for (const auto& s : spec.sources)
      sources.push_back({s, &bank.at(s)});
    FeatureMatrix fm =
        assemble_features(rows, labels, interactions, sources,
                          spec.include_meta, &user_meta, &catalog);
    standardize_columns(fm, train);
    report.feature_width.push_back(fm.cols);

    for (std::size_t ti = 0; ti < kAllTasks.size(); ++ti) {
      const auto& y = fm.labels[ti];
      CvResult cv = grid_search_cv(fm, y, train, options.lambda_grid,
                                   options.k_folds, options.seed,
                                   options.logreg_max_iters,
                                   options.logreg_tol);
      auto xt = detail::gather_matrix(fm, train);
      auto yt = detail::gather_labels(y, train);
      LogRegModel model =
          train_logreg(xt, fm.cols, yt, cv.best_lambda,
                       options.logreg_max_iters, options.logreg_tol);
      std::vector<double> scores(test.size());
      std::vector<std::int8_t> ye(test.size());
      for (std::size_t i = 0; i < test.size(); ++i) {
        scores[i] = model.score(fm.row(test[i]));
        ye[i] = y[test[i]];
      }
      report.auc[ti][mi] = auc_roc(scores, ye);
      report.best_lambda[ti][mi] = cv.best_lambda;
    }
  }

  for (std::size_t ti = 0; ti < kAllTasks.size(); ++ti)
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      report.delta[ti][mi] = report.auc[ti][mi] - report.auc[ti][0];
  report.average_auc.assign(methods.size(), 0.0);
  report.average_delta.assign(methods.size(), 0.0);
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ti = 0; ti < kAllTasks.size(); ++ti) {
      report.average_auc[mi] += report.auc[ti][mi];
      report.average_delta[mi] += report.delta[ti][mi];
    }
    report.average_auc[mi] /= static_cast<double>(kAllTasks.size());
    report.average_delta[mi] /= static_cast<double>(kAllTasks.size());
  }
  return report;
}

}  // namespace hybridrec
