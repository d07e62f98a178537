// Classical representation baselines: TF-IDF, truncated SVD (LSA) via a
// randomized range finder, LDA by collapsed Gibbs sampling, and
// word-vector centroid aggregation. Item unit is the app description
// document; user vectors are centroids over used apps.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridrec/corpus.hpp"
#include "hybridrec/embedding.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/linalg.hpp"
#include "hybridrec/rng.hpp"

namespace hybridrec {

// Sorted (index, weight) pairs, no explicit zeros.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> items;
  std::uint32_t dim = 0;

  double norm() const {
    double s = 0.0;
    for (const auto& [_, w] : items) s += w * w;
    return std::sqrt(s);
  }
};

// --- TF-IDF -------------------------------------------------------------

struct TfidfOptions {
  bool smooth_idf = true;  // ln((1+D)/(1+df)) + 1; raw variant: ln(D/df) + 1
  bool l2_normalize = true;
};

struct TfidfModel {
  Vocabulary vocab;
  std::vector<double> idf;               // per vocab index
  std::vector<SparseVector> doc_vectors; // aligned with corpus docs
  std::map<std::string, std::size_t> tag_to_row;
  TfidfOptions options;

  // Weights an arbitrary token list with the fitted idf.
  SparseVector transform(const std::vector<std::string>& tokens) const {
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : tokens) {
      std::int32_t i = vocab.lookup(tok);
      if (i >= 0) counts[static_cast<std::uint32_t>(i)] += 1.0;
    }
    SparseVector v;
    v.dim = static_cast<std::uint32_t>(vocab.size());
    for (const auto& [i, tf] : counts) v.items.emplace_back(i, tf * idf[i]);
    if (options.l2_normalize) {
      double n = v.norm();
      if (n > 0.0)
        for (auto& [_, w] : v.items) w /= n;
    }
    return v;
  }
};

inline TfidfModel tfidf_fit(const DocCorpus& corpus,
                            TfidfOptions options = {}) {
  if (corpus.docs.empty()) throw EmptyCorpus("tfidf over empty corpus");
  TfidfModel model;
  model.options = options;
  model.vocab = build_vocab(corpus, 1);

  const double d = static_cast<double>(corpus.docs.size());
  std::vector<std::uint64_t> df(model.vocab.size(), 0);
  for (const auto& doc : corpus.docs) {
    std::vector<bool> seen(model.vocab.size(), false);
    for (const auto& tok : doc.tokens) {
      std::int32_t i = model.vocab.lookup(tok);
      if (i >= 0 && !seen[i]) {
        seen[i] = true;
        ++df[i];
      }
    }
  }
  model.idf.resize(model.vocab.size());
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    const double dfi = static_cast<double>(df[i]);
    model.idf[i] = options.smooth_idf
                       ? std::log((1.0 + d) / (1.0 + dfi)) + 1.0
                       : std::log(d / dfi) + 1.0;
  }
  model.doc_vectors.reserve(corpus.docs.size());
  for (std::size_t r = 0; r < corpus.docs.size(); ++r) {
    model.doc_vectors.push_back(model.transform(corpus.docs[r].tokens));
    model.tag_to_row[corpus.docs[r].tag] = r;
  }
  return model;
}

inline SparseVector sparse_mean(const std::vector<const SparseVector*>& vecs) {
  std::map<std::uint32_t, double> acc;
  std::uint32_t dim = 0;
  for (const auto* v : vecs) {
    dim = v->dim;
    for (const auto& [i, w] : v->items) acc[i] += w;
  }
  SparseVector out;
  out.dim = dim;
  const double inv = vecs.empty() ? 0.0 : 1.0 / static_cast<double>(vecs.size());
  for (const auto& [i, w] : acc)
    if (w != 0.0) out.items.emplace_back(i, w * inv);
  return out;
}

// User vector = arithmetic mean of the user's app TF-IDF vectors.
inline std::map<UserId, SparseVector> tfidf_user_vectors(
    const InteractionSet& interactions, const TfidfModel& apps) {
  std::map<UserId, SparseVector> out;
  for (const auto& h : interactions.users()) {
    std::vector<const SparseVector*> rows;
    for (const auto& app : h.apps) {
      auto it = apps.tag_to_row.find(app_tag(app));
      if (it == apps.tag_to_row.end())
        throw UnknownApp("no TF-IDF vector for app " + app);
      rows.push_back(&apps.doc_vectors[it->second]);
    }
    out[h.user] = sparse_mean(rows);
  }
  return out;
}

// --- LSA (randomized truncated SVD) --------------------------------------

struct LsaOptions {
  // 0 = auto: max(20, 3.5k). Random spectra decay slowly, so the sketch
  // has to be wide for the leading singular values to come out
  // near-exact with four power iterations; the extra columns cost
  // little at desk scale.
  std::uint32_t oversample = 0;
  std::uint32_t power_iterations = 4;
  std::uint64_t seed = 7;
};

struct LsaModel {
  std::size_t k = 0;
  std::vector<double> singular_values;     // descending, size k
  MatrixD doc_vectors;                     // #docs x k, rows = U_k * S_k
  MatrixD basis;                           // |V| x k, columns = V_k
  std::vector<std::string> doc_tags;

  // Term-space projection: x^T V_k. For a training doc this reproduces
  // its U_k * S_k row.
  std::vector<double> project(const SparseVector& x) const {
    std::vector<double> out(k, 0.0);
    for (const auto& [i, w] : x.items)
      for (std::size_t j = 0; j < k; ++j) out[j] += w * basis.at(i, j);
    return out;
  }
};

namespace detail {

// rows: sparse doc-term matrix A (n_docs x dim). Computes A * M.
inline MatrixD sparse_times_dense(const std::vector<SparseVector>& rows,
                                  const MatrixD& m) {
  MatrixD out(rows.size(), m.cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [i, w] : rows[r].items)
      for (std::size_t j = 0; j < m.cols; ++j)
        out.at(r, j) += w * m.at(i, j);
  return out;
}

// Computes A^T * M where M has one row per doc.
inline MatrixD sparse_transpose_times_dense(
    const std::vector<SparseVector>& rows, std::size_t dim, const MatrixD& m) {
  MatrixD out(dim, m.cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [i, w] : rows[r].items)
      for (std::size_t j = 0; j < m.cols; ++j)
        out.at(i, j) += w * m.at(r, j);
  return out;
}

}  // namespace detail

// Rank-k truncated SVD of the doc x term matrix via a Gaussian range
// finder with subspace (power) iterations; the small projected Gram
// matrix is diagonalized with the Jacobi eigensolver.
inline LsaModel lsa_fit(const std::vector<SparseVector>& doc_rows,
                        const std::vector<std::string>& doc_tags,
                        std::size_t k, LsaOptions options = {}) {
  if (doc_rows.empty()) throw EmptyCorpus("lsa over empty corpus");
  const std::size_t n_docs = doc_rows.size();
  const std::size_t dim = doc_rows.front().dim;
  if (k < 1 || k > std::min(n_docs, dim))
    throw ConfigInvalid("lsa rank k must be in [1, min(#docs, |V|)]");

  const std::size_t oversample =
      options.oversample > 0
          ? options.oversample
          : std::max<std::size_t>(20, (7 * k) / 2);
  const std::size_t p = std::min({dim, n_docs, k + oversample});
  Rng rng(options.seed);
  MatrixD omega(dim, p);
  // Gaussian test matrix via Box-Muller on the deterministic stream.
  for (std::size_t i = 0; i < omega.data.size(); i += 2) {
    double u1 = uniform_real(rng);
    double u2 = uniform_real(rng);
    while (u1 <= 1e-300) u1 = uniform_real(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    omega.data[i] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < omega.data.size())
      omega.data[i + 1] = r * std::sin(2.0 * M_PI * u2);
  }

  MatrixD q = detail::sparse_times_dense(doc_rows, omega);  // n_docs x p
  orthonormalize_columns(q);
  for (std::uint32_t it = 0; it < options.power_iterations; ++it) {
    MatrixD z = detail::sparse_transpose_times_dense(doc_rows, dim, q);
    orthonormalize_columns(z);
    q = detail::sparse_times_dense(doc_rows, z);
    orthonormalize_columns(q);
  }

  // B = Q^T A (p x dim); diagonalize B B^T (p x p).
  MatrixD b(p, dim);
  for (std::size_t r = 0; r < n_docs; ++r)
    for (const auto& [i, w] : doc_rows[r].items)
      for (std::size_t j = 0; j < p; ++j) b.at(j, i) += q.at(r, j) * w;
  MatrixD gram(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) s += b.at(i, c) * b.at(j, c);
      gram.at(i, j) = s;
      gram.at(j, i) = s;
    }
  SymmetricEigen eig = symmetric_eigen(std::move(gram));

  LsaModel model;
  model.k = k;
  model.doc_tags = doc_tags;
  model.singular_values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double lambda = std::max(0.0, eig.values[j]);
    model.singular_values[j] = std::sqrt(lambda);
    if (model.singular_values[j] < 1e-10)
      throw RankDeficient("singular value " + std::to_string(j) +
                          " below 1e-10; reduce k");
  }

  // V_k = B^T U_B S^-1; doc vectors = A V_k.
  model.basis = MatrixD(dim, k);
  for (std::size_t c = 0; c < dim; ++c)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i)
        s += b.at(i, c) * eig.vectors.at(i, j);
      model.basis.at(c, j) = s / model.singular_values[j];
    }
  model.doc_vectors = MatrixD(n_docs, k);
  for (std::size_t r = 0; r < n_docs; ++r) {
    auto row = model.project(doc_rows[r]);
    for (std::size_t j = 0; j < k; ++j) model.doc_vectors.at(r, j) = row[j];
  }
  return model;
}

// --- LDA (collapsed Gibbs) -----------------------------------------------

struct TopicModel {
  std::size_t num_topics = 0;
  double alpha = 1.0;
  double beta = 0.01;
  Vocabulary vocab;
  std::vector<std::uint32_t> topic_word;   // K x |V| counts
  std::vector<std::uint32_t> topic_total;  // K
  std::vector<std::uint32_t> doc_topic;    // #docs x K counts
  std::vector<std::size_t> doc_length;
  std::vector<std::string> doc_tags;
  std::uint64_t seed = 0;

  std::vector<double> doc_topics(std::size_t doc) const {
    std::vector<double> out(num_topics);
    const double denom =
        static_cast<double>(doc_length[doc]) + num_topics * alpha;
    for (std::size_t k = 0; k < num_topics; ++k)
      out[k] = (doc_topic[doc * num_topics + k] + alpha) / denom;
    return out;
  }
};

inline TopicModel lda_fit(const DocCorpus& corpus, std::size_t num_topics,
                          double alpha, double beta, std::uint32_t iters,
                          std::uint64_t seed) {
  if (num_topics < 2) throw ConfigInvalid("lda needs K >= 2");
  if (corpus.docs.empty()) throw EmptyCorpus("lda over empty corpus");

  TopicModel model;
  model.num_topics = num_topics;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = seed;
  model.vocab = build_vocab(corpus, 1);
  const std::size_t v = model.vocab.size();
  const std::size_t n_docs = corpus.docs.size();

  auto ids = corpus_token_ids(model.vocab, corpus);
  model.topic_word.assign(num_topics * v, 0);
  model.topic_total.assign(num_topics, 0);
  model.doc_topic.assign(n_docs * num_topics, 0);
  model.doc_length.resize(n_docs);
  model.doc_tags.reserve(n_docs);
  for (const auto& d : corpus.docs) model.doc_tags.push_back(d.tag);

  Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> assignment(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    model.doc_length[d] = ids[d].size();
    assignment[d].resize(ids[d].size());
    for (std::size_t t = 0; t < ids[d].size(); ++t) {
      const std::uint32_t z = uniform_u32(rng, static_cast<std::uint32_t>(num_topics));
      assignment[d][t] = z;
      ++model.topic_word[z * v + ids[d][t]];
      ++model.topic_total[z];
      ++model.doc_topic[d * num_topics + z];
    }
  }

  std::vector<double> weights(num_topics);
  const double vbeta = static_cast<double>(v) * beta;
  for (std::uint32_t sweep = 0; sweep < iters; ++sweep) {
    for (std::size_t d = 0; d < n_docs; ++d) {
      for (std::size_t t = 0; t < ids[d].size(); ++t) {
        const std::int32_t w = ids[d][t];
        const std::uint32_t old = assignment[d][t];
        --model.topic_word[old * v + w];
        --model.topic_total[old];
        --model.doc_topic[d * num_topics + old];

        double total = 0.0;
        for (std::size_t k = 0; k < num_topics; ++k) {
          weights[k] = (model.doc_topic[d * num_topics + k] + alpha) *
                       (model.topic_word[k * v + w] + beta) /
                       (model.topic_total[k] + vbeta);
          total += weights[k];
        }
        const std::uint32_t z =
            static_cast<std::uint32_t>(weighted_pick(rng, weights, total));
        assignment[d][t] = z;
        ++model.topic_word[z * v + w];
        ++model.topic_total[z];
        ++model.doc_topic[d * num_topics + z];
      }
    }
  }
  return model;
}

// Smoothed topic proportions for an arbitrary document: stored counts
// for training docs (by tag), otherwise fold-in sampling with frozen
// topic-word counts.
inline std::vector<double> lda_doc_topics(const TopicModel& model,
                                          const TokenDoc& doc,
                                          std::uint32_t fold_in_iters = 50) {
  for (std::size_t d = 0; d < model.doc_tags.size(); ++d)
    if (model.doc_tags[d] == doc.tag) return model.doc_topics(d);

  std::vector<std::int32_t> ids;
  for (const auto& tok : doc.tokens) {
    std::int32_t i = model.vocab.lookup(tok);
    if (i >= 0) ids.push_back(i);
  }
  const std::size_t kk = model.num_topics;
  std::vector<std::uint32_t> counts(kk, 0);
  if (ids.empty()) {
    std::vector<double> out(kk, 1.0 / static_cast<double>(kk));
    return out;
  }
  Rng rng(model.seed ^ 0x5851f42d4c957f2dULL);
  const std::size_t v = model.vocab.size();
  const double vbeta = static_cast<double>(v) * model.beta;
  std::vector<std::uint32_t> assignment(ids.size());
  for (std::size_t t = 0; t < ids.size(); ++t) {
    assignment[t] = uniform_u32(rng, static_cast<std::uint32_t>(kk));
    ++counts[assignment[t]];
  }
  std::vector<double> weights(kk);
  for (std::uint32_t sweep = 0; sweep < fold_in_iters; ++sweep) {
    for (std::size_t t = 0; t < ids.size(); ++t) {
      --counts[assignment[t]];
      double total = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        weights[k] = (counts[k] + model.alpha) *
                     (model.topic_word[k * v + ids[t]] + model.beta) /
                     (model.topic_total[k] + vbeta);
        total += weights[k];
      }
      assignment[t] = static_cast<std::uint32_t>(
          weighted_pick(rng, weights, total));
      ++counts[assignment[t]];
    }
  }
  std::vector<double> out(kk);
  const double denom = static_cast<double>(ids.size()) + kk * model.alpha;
  for (std::size_t k = 0; k < kk; ++k)
    out[k] = (counts[k] + model.alpha) / denom;
  return out;
}

// --- word2vec centroid ---------------------------------------------------

// User vector = mean of in-vocabulary word vectors over the
// concatenation of the user's app descriptions, multiplicity respected.
// Users with no in-vocabulary token are dropped with a warning.
inline std::map<UserId, std::vector<double>> w2v_centroid_user_vectors(
    const InteractionSet& interactions, const NormalizedCatalog& catalog,
    const EmbeddingModel& model) {
  if (uses_doc_vectors(model.mode))
    throw ConfigInvalid("centroid aggregation expects a word model (cbow/sg)");
  std::map<UserId, std::vector<double>> out;
  const std::size_t n = model.dim;
  for (const auto& h : interactions.users()) {
    std::vector<double> acc(n, 0.0);
    std::size_t count = 0;
    for (const auto& app : h.apps) {
      for (const auto& tok : catalog.description_tokens(app)) {
        std::int32_t i = model.vocab.lookup(tok);
        if (i < 0) continue;
        const auto row = model.word_vector(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < n; ++j) acc[j] += row[j];
        ++count;
      }
    }
    if (count == 0) {
      warn("user " + h.user + " dropped: all description tokens OOV");
      continue;
    }
    for (auto& x : acc) x /= static_cast<double>(count);
    out[h.user] = std::move(acc);
  }
  if (out.empty()) throw AllTokensOOV("no user has in-vocabulary tokens");
  return out;
}

}  // namespace hybridrec
