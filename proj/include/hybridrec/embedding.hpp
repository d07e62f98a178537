// Shallow neural embedding models over token documents: word models
// (cbow, sg) and document models (dm, dbow), trained by SGD against an
// exact-softmax or negative-sampling objective.
//
// Layout and conventions:
//   input   |V| x N   word vectors (one row per vocab index)
//   output  |V| x N   output vectors (row j = column j of the classic
//                     N x |V| output matrix; stored transposed so each
//                     output vector is contiguous)
//   docvecs |P| x N   document vectors (dm/dbow only)
//
// Weights are stored as f32 (the on-disk format) and all arithmetic is
// done in f64. Given a fixed seed and a single worker, training is
// bit-reproducible.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "hybridrec/corpus.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/rng.hpp"

namespace hybridrec {

enum class Mode : std::uint8_t { cbow = 0, sg = 1, dm = 2, dbow = 3 };
enum class Objective : std::uint8_t { softmax = 0, negative_sampling = 1 };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::cbow: return "cbow";
    case Mode::sg: return "sg";
    case Mode::dm: return "dm";
    default: return "dbow";
  }
}

inline Mode parse_mode(const std::string& s) {
  if (s == "cbow") return Mode::cbow;
  if (s == "sg") return Mode::sg;
  if (s == "dm") return Mode::dm;
  if (s == "dbow") return Mode::dbow;
  throw ConfigInvalid("unknown mode: " + s);
}

inline const char* to_string(Objective o) {
  return o == Objective::softmax ? "softmax" : "ns";
}

inline Objective parse_objective(const std::string& s) {
  if (s == "softmax") return Objective::softmax;
  if (s == "ns" || s == "negative_sampling") return Objective::negative_sampling;
  throw ConfigInvalid("unknown objective: " + s);
}

inline bool uses_doc_vectors(Mode m) {
  return m == Mode::dm || m == Mode::dbow;
}

// --- vocabulary -------------------------------------------------------

class Vocabulary {
 public:
  Vocabulary() = default;

  // Dense indices ordered by descending frequency, ties by token string.
  Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> entries,
             std::uint64_t min_count)
      : min_count_(min_count) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
    tokens_.reserve(entries.size());
    freqs_.reserve(entries.size());
    for (auto& [tok, freq] : entries) {
      index_.emplace(tok, static_cast<std::int32_t>(tokens_.size()));
      tokens_.push_back(std::move(tok));
      freqs_.push_back(freq);
    }
  }

  std::int32_t lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
  }

  const std::string& token(std::size_t i) const { return tokens_[i]; }
  std::uint64_t frequency(std::size_t i) const { return freqs_[i]; }
  std::size_t size() const { return tokens_.size(); }
  std::uint64_t min_count() const { return min_count_; }
  std::uint64_t total_count() const {
    std::uint64_t t = 0;
    for (auto f : freqs_) t += f;
    return t;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::uint64_t min_count_ = 1;
};

inline Vocabulary build_vocab(const DocCorpus& corpus,
                              std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (const auto& [tok, freq] : corpus.vocab_hint)
    if (freq >= min_count) entries.emplace_back(tok, freq);
  if (entries.empty())
    throw EmptyVocabulary("no token reaches min_count=" +
                          std::to_string(min_count));
  return Vocabulary(std::move(entries), min_count);
}

// --- model ------------------------------------------------------------

struct TrainConfig {
  Mode mode = Mode::dm;
  Objective objective = Objective::negative_sampling;
  std::uint32_t dim = 100;
  std::uint32_t window = 5;
  std::uint32_t epochs = 20;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::uint64_t min_count = 5;
  std::uint32_t negative = 5;
  double subsample = 0.0;  // frequent-token subsampling threshold, 0 = off
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;

  void validate() const {
    if (dim < 1) throw ConfigInvalid("dim must be >= 1");
    if (window < 1) throw ConfigInvalid("window must be >= 1");
    if (epochs < 1) throw ConfigInvalid("epochs must be >= 1");
    if (objective == Objective::negative_sampling && negative < 1)
      throw ConfigInvalid("negative must be >= 1 for negative sampling");
    if (!(lr_start > 0.0) || !(lr_end > 0.0) || lr_end > lr_start)
      throw ConfigInvalid("need lr_start >= lr_end > 0");
    if (subsample < 0.0) throw ConfigInvalid("subsample must be >= 0");
    if (workers < 1) throw ConfigInvalid("workers must be >= 1");
  }
};

struct EmbeddingModel {
  Mode mode = Mode::dm;
  Objective objective = Objective::negative_sampling;
  std::uint32_t dim = 0;
  Vocabulary vocab;
  std::vector<std::string> doc_tags;  // |P| entries, dm/dbow only
  std::vector<float> input;           // |V| x N
  std::vector<float> output;          // |V| x N (transposed W')
  std::vector<float> docvecs;         // |P| x N
  TrainConfig config;

  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t doc_count() const { return doc_tags.size(); }

  std::span<const float> word_vector(std::size_t i) const {
    return {input.data() + i * dim, dim};
  }
  std::span<const float> output_vector(std::size_t i) const {
    return {output.data() + i * dim, dim};
  }
  std::span<const float> doc_vector(std::size_t p) const {
    return {docvecs.data() + p * dim, dim};
  }

  std::int32_t doc_index(const std::string& tag) const {
    auto it = std::find(doc_tags.begin(), doc_tags.end(), tag);
    return it == doc_tags.end()
               ? -1
               : static_cast<std::int32_t>(it - doc_tags.begin());
  }
};

// One SGD example. For cbow/dm `input_words` is the context and `target`
// the middle word; for sg the single input word predicts each context
// word in turn; for dbow the document vector alone predicts each word.
struct TrainingPair {
  std::vector<std::int32_t> input_words;
  std::int32_t doc = -1;
  std::int32_t target = -1;
};

namespace detail {

inline void check_index(std::int64_t i, std::int64_t n, const char* what) {
  if (i < 0 || i >= n)
    throw IndexOutOfRange(std::string(what) + " index " + std::to_string(i) +
                          " out of range [0, " + std::to_string(n) + ")");
}

// h = mean of the referenced input rows (word rows, plus the doc row
// when present). Returns the number of inputs averaged.
inline std::size_t mean_hidden(const EmbeddingModel& model,
                               std::span<const std::int32_t> context,
                               std::int32_t doc, std::vector<double>& h) {
  const std::size_t n = model.dim;
  h.assign(n, 0.0);
  const auto v = static_cast<std::int64_t>(model.vocab_size());
  for (std::int32_t w : context) {
    check_index(w, v, "word");
    const float* row = model.input.data() + static_cast<std::size_t>(w) * n;
    for (std::size_t j = 0; j < n; ++j) h[j] += row[j];
  }
  std::size_t count = context.size();
  if (doc >= 0) {
    check_index(doc, static_cast<std::int64_t>(model.doc_count()), "doc");
    const float* row = model.docvecs.data() + static_cast<std::size_t>(doc) * n;
    for (std::size_t j = 0; j < n; ++j) h[j] += row[j];
    ++count;
  }
  if (count == 0) throw ConfigInvalid("forward pass needs at least one input");
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t j = 0; j < n; ++j) h[j] *= inv;
  return count;
}

inline double dot(std::span<const float> row, const std::vector<double>& h) {
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += row[j] * h[j];
  return s;
}

}  // namespace detail

// --- exact softmax forward / gradients --------------------------------

struct SoftmaxForward {
  std::vector<double> hidden;  // h, dimension N
  std::vector<double> logits;  // z, dimension |V|
  std::vector<double> probs;   // softmax(z)
  double log_z = 0.0;          // logsumexp(z)
  std::size_t input_count = 0;
};

inline SoftmaxForward softmax_forward(const EmbeddingModel& model,
                                      std::span<const std::int32_t> context,
                                      std::int32_t doc = -1) {
  SoftmaxForward fwd;
  fwd.input_count = detail::mean_hidden(model, context, doc, fwd.hidden);
  const std::size_t v = model.vocab_size();
  fwd.logits.resize(v);
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < v; ++j) {
    fwd.logits[j] = detail::dot(model.output_vector(j), fwd.hidden);
    zmax = std::max(zmax, fwd.logits[j]);
  }
  double sum = 0.0;
  fwd.probs.resize(v);
  for (std::size_t j = 0; j < v; ++j) {
    fwd.probs[j] = std::exp(fwd.logits[j] - zmax);
    sum += fwd.probs[j];
  }
  const double inv = 1.0 / sum;
  for (auto& p : fwd.probs) p *= inv;
  fwd.log_z = zmax + std::log(sum);
  return fwd;
}

// P(target | context, doc) for every target in the vocabulary.
inline std::vector<double> forward_softmax(const EmbeddingModel& model,
                                           std::span<const std::int32_t> context,
                                           std::int32_t doc = -1) {
  return softmax_forward(model, context, doc).probs;
}

inline double softmax_pair_loss(const EmbeddingModel& model,
                                const TrainingPair& pair) {
  detail::check_index(pair.target,
                      static_cast<std::int64_t>(model.vocab_size()), "target");
  SoftmaxForward fwd = softmax_forward(model, pair.input_words, pair.doc);
  return fwd.log_z - fwd.logits[pair.target];
}

// Dense per-parameter gradients of the exact-softmax pair loss; sized
// for unit-test fixtures, not the training path.
struct PairGradients {
  std::vector<double> d_input;    // |V| x N
  std::vector<double> d_output;   // |V| x N
  std::vector<double> d_docvecs;  // |P| x N
};

inline PairGradients softmax_pair_gradients(const EmbeddingModel& model,
                                            const TrainingPair& pair) {
  detail::check_index(pair.target,
                      static_cast<std::int64_t>(model.vocab_size()), "target");
  SoftmaxForward fwd = softmax_forward(model, pair.input_words, pair.doc);
  const std::size_t n = model.dim;
  const std::size_t v = model.vocab_size();
  PairGradients g;
  g.d_input.assign(model.input.size(), 0.0);
  g.d_output.assign(model.output.size(), 0.0);
  g.d_docvecs.assign(model.docvecs.size(), 0.0);

  std::vector<double> ghidden(n, 0.0);
  for (std::size_t j = 0; j < v; ++j) {
    const double e = fwd.probs[j] - (static_cast<std::int32_t>(j) == pair.target
                                         ? 1.0
                                         : 0.0);
    const auto row = model.output_vector(j);
    for (std::size_t d = 0; d < n; ++d) {
      g.d_output[j * n + d] += e * fwd.hidden[d];
      ghidden[d] += e * row[d];
    }
  }
  const double inv = 1.0 / static_cast<double>(fwd.input_count);
  for (std::int32_t w : pair.input_words)
    for (std::size_t d = 0; d < n; ++d)
      g.d_input[static_cast<std::size_t>(w) * n + d] += ghidden[d] * inv;
  if (pair.doc >= 0)
    for (std::size_t d = 0; d < n; ++d)
      g.d_docvecs[static_cast<std::size_t>(pair.doc) * n + d] +=
          ghidden[d] * inv;
  return g;
}

// --- pair enumeration -------------------------------------------------

namespace detail {

// Full-window pairs for one document, used by the likelihood. `emit` is
// called once per (input set, target).
template <typename Emit>
void enumerate_doc_pairs(Mode mode, const std::vector<std::int32_t>& ids,
                         std::int32_t doc_index, std::uint32_t window,
                         Emit&& emit) {
  const std::int64_t len = static_cast<std::int64_t>(ids.size());
  std::vector<std::int32_t> ctx;
  for (std::int64_t t = 0; t < len; ++t) {
    switch (mode) {
      case Mode::dbow:
        emit(std::span<const std::int32_t>{}, doc_index, ids[t]);
        break;
      case Mode::sg:
        for (std::int64_t c = std::max<std::int64_t>(0, t - window);
             c <= std::min(len - 1, t + window); ++c) {
          if (c == t) continue;
          std::int32_t in = ids[t];
          emit(std::span<const std::int32_t>{&in, 1}, -1, ids[c]);
        }
        break;
      case Mode::cbow:
      case Mode::dm: {
        ctx.clear();
        for (std::int64_t c = std::max<std::int64_t>(0, t - window);
             c <= std::min(len - 1, t + window); ++c)
          if (c != t) ctx.push_back(ids[c]);
        if (mode == Mode::cbow) {
          if (!ctx.empty()) emit(std::span<const std::int32_t>(ctx), -1, ids[t]);
        } else {
          emit(std::span<const std::int32_t>(ctx), doc_index, ids[t]);
        }
        break;
      }
    }
  }
}

}  // namespace detail

// Token streams restricted to the model vocabulary, in corpus order.
inline std::vector<std::vector<std::int32_t>> corpus_token_ids(
    const Vocabulary& vocab, const DocCorpus& corpus) {
  std::vector<std::vector<std::int32_t>> ids(corpus.docs.size());
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    for (const auto& tok : corpus.docs[d].tokens) {
      std::int32_t i = vocab.lookup(tok);
      if (i >= 0) ids[d].push_back(i);
    }
  }
  return ids;
}

// Sum of log P over all (target, context) pairs at the full window.
inline double corpus_log_likelihood(const EmbeddingModel& model,
                                    const DocCorpus& corpus) {
  auto ids = corpus_token_ids(model.vocab, corpus);
  double total = 0.0;
  for (std::size_t d = 0; d < ids.size(); ++d) {
    std::int32_t doc_index = -1;
    if (uses_doc_vectors(model.mode)) {
      doc_index = model.doc_index(corpus.docs[d].tag);
      if (doc_index < 0)
        throw IndexOutOfRange("document not in model: " + corpus.docs[d].tag);
    }
    detail::enumerate_doc_pairs(
        model.mode, ids[d], doc_index, model.config.window,
        [&](std::span<const std::int32_t> ctx, std::int32_t doc,
            std::int32_t target) {
          SoftmaxForward fwd = softmax_forward(model, ctx, doc);
          total += fwd.logits[target] - fwd.log_z;
        });
  }
  return total;
}

// --- training ---------------------------------------------------------

struct TrainStats {
  std::uint64_t pairs = 0;
  std::uint64_t output_updates = 0;  // output rows touched, with multiplicity
};

namespace detail {

// Unigram^0.75 noise table, word2vec-style.
inline std::vector<std::int32_t> build_noise_table(const Vocabulary& vocab,
                                                   std::size_t table_size) {
  std::vector<std::int32_t> table(table_size);
  double total = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    total += std::pow(static_cast<double>(vocab.frequency(i)), 0.75);
  std::size_t i = 0;
  double cum = std::pow(static_cast<double>(vocab.frequency(0)), 0.75) / total;
  for (std::size_t t = 0; t < table_size; ++t) {
    table[t] = static_cast<std::int32_t>(i);
    if (static_cast<double>(t + 1) / table_size > cum && i + 1 < vocab.size()) {
      ++i;
      cum += std::pow(static_cast<double>(vocab.frequency(i)), 0.75) / total;
    }
  }
  return table;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct UpdateContext {
  EmbeddingModel* model;
  const std::vector<std::int32_t>* noise;
  std::uint32_t negative = 0;
  std::vector<double> hidden;
  std::vector<double> ghidden;
  std::uint64_t step = 0;
  TrainStats stats;
};

inline void check_finite(double x, std::uint64_t step) {
  if (!std::isfinite(x))
    throw NonFiniteUpdate("non-finite value at update step " +
                          std::to_string(step) +
                          " (learning rate too large?)");
}

// Applies one SGD step for `pair` at rate `lr`. Shares the forward/
// gradient math with softmax_pair_gradients via softmax_forward.
inline void apply_softmax_update(UpdateContext& ctx, const TrainingPair& pair,
                                 double lr) {
  EmbeddingModel& m = *ctx.model;
  const std::size_t n = m.dim;
  const std::size_t v = m.vocab_size();
  SoftmaxForward fwd = softmax_forward(m, pair.input_words, pair.doc);
  auto& gh = ctx.ghidden;
  gh.assign(n, 0.0);
  double echeck = 0.0;
  for (std::size_t j = 0; j < v; ++j) {
    const double e =
        fwd.probs[j] -
        (static_cast<std::int32_t>(j) == pair.target ? 1.0 : 0.0);
    echeck += e;
    float* row = m.output.data() + j * n;
    for (std::size_t d = 0; d < n; ++d) {
      gh[d] += e * row[d];
      row[d] = static_cast<float>(row[d] - lr * e * fwd.hidden[d]);
    }
  }
  ctx.stats.output_updates += v;
  check_finite(echeck, ctx.step);
  const double scale = lr / static_cast<double>(fwd.input_count);
  for (std::int32_t w : pair.input_words) {
    float* row = m.input.data() + static_cast<std::size_t>(w) * n;
    for (std::size_t d = 0; d < n; ++d)
      row[d] = static_cast<float>(row[d] - scale * gh[d]);
  }
  if (pair.doc >= 0) {
    float* row = m.docvecs.data() + static_cast<std::size_t>(pair.doc) * n;
    for (std::size_t d = 0; d < n; ++d)
      row[d] = static_cast<float>(row[d] - scale * gh[d]);
  }
}

// Negative-sampling step: touches the target row plus `negative` noise
// rows, nothing else.
inline void apply_ns_update(UpdateContext& ctx, const TrainingPair& pair,
                            double lr, Rng& rng) {
  EmbeddingModel& m = *ctx.model;
  const std::size_t n = m.dim;
  auto& h = ctx.hidden;
  auto& gh = ctx.ghidden;
  const std::size_t count = mean_hidden(m, pair.input_words, pair.doc, h);
  gh.assign(n, 0.0);
  for (std::uint32_t s = 0; s <= ctx.negative; ++s) {
    std::int32_t w;
    double label;
    if (s == 0) {
      w = pair.target;
      label = 1.0;
    } else {
      do {
        w = (*ctx.noise)[uniform_u64(rng, ctx.noise->size())];
      } while (w == pair.target);
      label = 0.0;
    }
    float* row = m.output.data() + static_cast<std::size_t>(w) * n;
    double z = 0.0;
    for (std::size_t d = 0; d < n; ++d) z += row[d] * h[d];
    check_finite(z, ctx.step);
    const double g = label - sigmoid(z);
    for (std::size_t d = 0; d < n; ++d) {
      gh[d] += g * row[d];
      row[d] = static_cast<float>(row[d] + lr * g * h[d]);
    }
    ++ctx.stats.output_updates;
  }
  const double scale = lr / static_cast<double>(count);
  for (std::int32_t w : pair.input_words) {
    float* row = m.input.data() + static_cast<std::size_t>(w) * n;
    for (std::size_t d = 0; d < n; ++d)
      row[d] = static_cast<float>(row[d] + scale * gh[d]);
  }
  if (pair.doc >= 0) {
    float* row = m.docvecs.data() + static_cast<std::size_t>(pair.doc) * n;
    for (std::size_t d = 0; d < n; ++d)
      row[d] = static_cast<float>(row[d] + scale * gh[d]);
  }
}

// Pairs for one position with a sampled effective window b' in [1, n].
template <typename Apply>
void train_position(Mode mode, const std::vector<std::int32_t>& ids,
                    std::int32_t doc_index, std::size_t t,
                    std::uint32_t effective_window, TrainingPair& pair,
                    Apply&& apply) {
  const std::int64_t len = static_cast<std::int64_t>(ids.size());
  const std::int64_t ti = static_cast<std::int64_t>(t);
  const std::int64_t lo = std::max<std::int64_t>(0, ti - effective_window);
  const std::int64_t hi = std::min(len - 1, ti + effective_window);
  switch (mode) {
    case Mode::dbow:
      pair.input_words.clear();
      pair.doc = doc_index;
      pair.target = ids[t];
      apply(pair);
      break;
    case Mode::sg:
      pair.input_words.assign(1, ids[t]);
      pair.doc = -1;
      for (std::int64_t c = lo; c <= hi; ++c) {
        if (c == ti) continue;
        pair.target = ids[c];
        apply(pair);
      }
      break;
    case Mode::cbow:
    case Mode::dm:
      pair.input_words.clear();
      for (std::int64_t c = lo; c <= hi; ++c)
        if (c != ti) pair.input_words.push_back(ids[c]);
      pair.doc = mode == Mode::dm ? doc_index : -1;
      pair.target = ids[t];
      if (mode == Mode::cbow && pair.input_words.empty()) return;
      apply(pair);
      break;
  }
}

}  // namespace detail

inline EmbeddingModel train(const DocCorpus& corpus, const TrainConfig& config,
                            TrainStats* stats_out = nullptr) {
  config.validate();
  if (corpus.docs.empty()) throw EmptyDataset("empty corpus");

  EmbeddingModel model;
  model.mode = config.mode;
  model.objective = config.objective;
  model.dim = config.dim;
  model.config = config;
  model.vocab = build_vocab(corpus, config.min_count);
  if (uses_doc_vectors(config.mode)) {
    model.doc_tags.reserve(corpus.docs.size());
    for (const auto& d : corpus.docs) model.doc_tags.push_back(d.tag);
  }

  const std::size_t v = model.vocab_size();
  const std::size_t n = config.dim;
  const std::size_t p = model.doc_tags.size();

  Rng rng(config.seed);
  model.input.resize(v * n);
  for (auto& x : model.input)
    x = static_cast<float>((uniform_real(rng) - 0.5) / n);
  model.output.assign(v * n, 0.0f);
  model.docvecs.resize(p * n);
  for (auto& x : model.docvecs)
    x = static_cast<float>((uniform_real(rng) - 0.5) / n);

  std::vector<std::int32_t> noise;
  if (config.objective == Objective::negative_sampling)
    noise = detail::build_noise_table(model.vocab, 1 << 20);

  const auto base_ids = corpus_token_ids(model.vocab, corpus);
  std::uint64_t tokens_per_epoch = 0;
  for (const auto& ids : base_ids) tokens_per_epoch += ids.size();
  const std::uint64_t total_tokens =
      std::max<std::uint64_t>(1, tokens_per_epoch * config.epochs);
  const std::uint64_t corpus_total = model.vocab.total_count();

  std::atomic<std::uint64_t> processed{0};
  std::vector<TrainStats> worker_stats(config.workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_worker = [&](std::uint32_t worker) {
    try {
      detail::UpdateContext ctx;
      ctx.model = &model;
      ctx.noise = &noise;
      ctx.negative = config.negative;
      Rng wrng(config.seed + 0x9e3779b97f4a7c15ULL * (worker + 1));
      Rng& r = config.workers == 1 ? rng : wrng;
      TrainingPair pair;
      std::vector<std::int32_t> kept;
      for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t d = worker; d < base_ids.size(); d += config.workers) {
          const std::vector<std::int32_t>* ids = &base_ids[d];
          if (config.subsample > 0.0) {
            kept.clear();
            for (std::int32_t w : *ids) {
              const double freq =
                  static_cast<double>(model.vocab.frequency(w)) / corpus_total;
              const double keep =
                  (std::sqrt(freq / config.subsample) + 1.0) *
                  (config.subsample / freq);
              if (keep >= 1.0 || uniform_real(r) < keep) kept.push_back(w);
            }
            ids = &kept;
          }
          const std::int32_t doc_index = uses_doc_vectors(config.mode)
                                             ? static_cast<std::int32_t>(d)
                                             : -1;
          for (std::size_t t = 0; t < ids->size(); ++t) {
            const std::uint64_t done =
                processed.fetch_add(1, std::memory_order_relaxed);
            const double frac =
                static_cast<double>(done) / static_cast<double>(total_tokens);
            const double lr = std::max(
                config.lr_end,
                config.lr_start - (config.lr_start - config.lr_end) * frac);
            const std::uint32_t bprime = 1 + uniform_u32(r, config.window);
            detail::train_position(
                config.mode, *ids, doc_index, t, bprime, pair,
                [&](const TrainingPair& pr) {
                  ++ctx.step;
                  ++ctx.stats.pairs;
                  if (config.objective == Objective::softmax)
                    detail::apply_softmax_update(ctx, pr, lr);
                  else
                    detail::apply_ns_update(ctx, pr, lr, r);
                });
          }
        }
      }
      worker_stats[worker] = ctx.stats;
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (config.workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> threads;
    for (std::uint32_t w = 0; w < config.workers; ++w)
      threads.emplace_back(run_worker, w);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  if (stats_out) {
    TrainStats total;
    for (const auto& s : worker_stats) {
      total.pairs += s.pairs;
      total.output_updates += s.output_updates;
    }
    *stats_out = total;
  }
  for (float x : model.input)
    if (!std::isfinite(x)) throw NonFiniteUpdate("non-finite input weight");
  for (float x : model.output)
    if (!std::isfinite(x)) throw NonFiniteUpdate("non-finite output weight");
  for (float x : model.docvecs)
    if (!std::isfinite(x)) throw NonFiniteUpdate("non-finite document vector");
  return model;
}

// --- held-out document inference ---------------------------------------

// Optimizes a fresh document vector against the frozen model for
// `infer_epochs` passes. Deterministic given `seed`.
inline std::vector<float> infer_doc(const EmbeddingModel& model,
                                    const TokenDoc& doc,
                                    std::uint32_t infer_epochs,
                                    double infer_lr, std::uint64_t seed) {
  if (!uses_doc_vectors(model.mode))
    throw ConfigInvalid("inference needs a document model (dm or dbow)");
  if (infer_epochs < 1) throw ConfigInvalid("infer_epochs must be >= 1");

  std::vector<std::int32_t> ids;
  for (const auto& tok : doc.tokens) {
    std::int32_t i = model.vocab.lookup(tok);
    if (i >= 0) ids.push_back(i);
  }
  if (ids.empty())
    throw AllTokensOOV("no in-vocabulary token in document " + doc.tag);

  const std::size_t n = model.dim;
  Rng rng(seed);
  std::vector<float> vec(n);
  for (auto& x : vec) x = static_cast<float>((uniform_real(rng) - 0.5) / n);

  std::vector<std::int32_t> noise;
  if (model.objective == Objective::negative_sampling)
    noise = detail::build_noise_table(model.vocab, 1 << 20);

  const double lr_end = std::min(infer_lr, model.config.lr_end);
  const std::uint64_t total_steps =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(infer_epochs) *
                                     ids.size());
  std::uint64_t done = 0;
  std::vector<double> h(n), gh(n);
  TrainingPair pair;

  auto apply = [&](const TrainingPair& pr, double lr) {
    // Same forward math as training, but only the fresh vector moves.
    h.assign(n, 0.0);
    for (std::int32_t w : pr.input_words) {
      const float* row = model.input.data() + static_cast<std::size_t>(w) * n;
      for (std::size_t j = 0; j < n; ++j) h[j] += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) h[j] += vec[j];
    const std::size_t count = pr.input_words.size() + 1;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < n; ++j) h[j] *= inv;

    gh.assign(n, 0.0);
    if (model.objective == Objective::softmax) {
      double zmax = -std::numeric_limits<double>::infinity();
      std::vector<double> z(model.vocab_size());
      for (std::size_t j = 0; j < model.vocab_size(); ++j) {
        z[j] = detail::dot(model.output_vector(j), h);
        zmax = std::max(zmax, z[j]);
      }
      double sum = 0.0;
      for (auto& zj : z) {
        zj = std::exp(zj - zmax);
        sum += zj;
      }
      for (std::size_t j = 0; j < model.vocab_size(); ++j) {
        const double e =
            z[j] / sum -
            (static_cast<std::int32_t>(j) == pr.target ? 1.0 : 0.0);
        const auto row = model.output_vector(j);
        for (std::size_t d = 0; d < n; ++d) gh[d] += e * row[d];
      }
      for (std::size_t d = 0; d < n; ++d)
        vec[d] = static_cast<float>(vec[d] - lr * gh[d] * inv);
    } else {
      for (std::uint32_t s = 0; s <= model.config.negative; ++s) {
        std::int32_t w;
        double label;
        if (s == 0) {
          w = pr.target;
          label = 1.0;
        } else {
          do {
            w = noise[uniform_u64(rng, noise.size())];
          } while (w == pr.target);
          label = 0.0;
        }
        const auto row = model.output_vector(w);
        double zs = 0.0;
        for (std::size_t d = 0; d < n; ++d) zs += row[d] * h[d];
        detail::check_finite(zs, done);
        const double g = label - detail::sigmoid(zs);
        for (std::size_t d = 0; d < n; ++d) gh[d] += g * row[d];
      }
      for (std::size_t d = 0; d < n; ++d)
        vec[d] = static_cast<float>(vec[d] + lr * gh[d] * inv);
    }
  };

  for (std::uint32_t epoch = 0; epoch < infer_epochs; ++epoch) {
    for (std::size_t t = 0; t < ids.size(); ++t) {
      const double frac =
          static_cast<double>(done) / static_cast<double>(total_steps);
      const double lr =
          std::max(lr_end, infer_lr - (infer_lr - lr_end) * frac);
      ++done;
      const std::uint32_t bprime = 1 + uniform_u32(rng, model.config.window);
      detail::train_position(model.mode, ids, 0, t, bprime, pair,
                             [&](const TrainingPair& pr) { apply(pr, lr); });
    }
  }
  for (float x : vec)
    if (!std::isfinite(x)) throw NonFiniteUpdate("non-finite inferred vector");
  return vec;
}

// --- binary model format ------------------------------------------------
//
// Little-endian. Header: magic "NPLM", version u32, mode u8, objective
// u8, N u32, |V| u32, |P| u32. Then the vocabulary (u32 byte length +
// UTF-8 bytes + u64 frequency per token), W (|V| x N f32, row-major),
// W' (N x |V| f32, row-major), D (|P| x N f32, row-major), the document
// tags (length-prefixed strings) and the training config.

namespace detail {

template <typename T>
void write_pod(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoFailure("unexpected end of model file");
  return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw IoFailure("unexpected end of model file");
  return s;
}

}  // namespace detail

inline constexpr std::uint32_t kModelFormatVersion = 1;

inline void save_model(const EmbeddingModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  out.write("NPLM", 4);
  detail::write_pod<std::uint32_t>(out, kModelFormatVersion);
  detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(model.mode));
  detail::write_pod<std::uint8_t>(out,
                                  static_cast<std::uint8_t>(model.objective));
  detail::write_pod<std::uint32_t>(out, model.dim);
  detail::write_pod<std::uint32_t>(out,
                                   static_cast<std::uint32_t>(model.vocab_size()));
  detail::write_pod<std::uint32_t>(out,
                                   static_cast<std::uint32_t>(model.doc_count()));
  for (std::size_t i = 0; i < model.vocab_size(); ++i) {
    detail::write_string(out, model.vocab.token(i));
    detail::write_pod<std::uint64_t>(out, model.vocab.frequency(i));
  }
  out.write(reinterpret_cast<const char*>(model.input.data()),
            static_cast<std::streamsize>(model.input.size() * sizeof(float)));
  // W' is stored transposed in memory; the file keeps the N x |V| shape.
  for (std::uint32_t d = 0; d < model.dim; ++d)
    for (std::size_t j = 0; j < model.vocab_size(); ++j)
      detail::write_pod<float>(out, model.output[j * model.dim + d]);
  out.write(reinterpret_cast<const char*>(model.docvecs.data()),
            static_cast<std::streamsize>(model.docvecs.size() * sizeof(float)));
  for (const auto& tag : model.doc_tags) detail::write_string(out, tag);
  const TrainConfig& c = model.config;
  detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(c.mode));
  detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(c.objective));
  detail::write_pod<std::uint32_t>(out, c.dim);
  detail::write_pod<std::uint32_t>(out, c.window);
  detail::write_pod<std::uint32_t>(out, c.epochs);
  detail::write_pod<double>(out, c.lr_start);
  detail::write_pod<double>(out, c.lr_end);
  detail::write_pod<std::uint64_t>(out, c.min_count);
  detail::write_pod<std::uint32_t>(out, c.negative);
  detail::write_pod<double>(out, c.subsample);
  detail::write_pod<std::uint64_t>(out, c.seed);
  detail::write_pod<std::uint32_t>(out, c.workers);
  if (!out) throw IoFailure("write failed: " + path);
}

inline EmbeddingModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "NPLM", 4) != 0)
    throw FormatVersionMismatch("not a model file: " + path);
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != kModelFormatVersion)
    throw FormatVersionMismatch("unsupported model version " +
                                std::to_string(version));
  EmbeddingModel model;
  model.mode = static_cast<Mode>(detail::read_pod<std::uint8_t>(in));
  model.objective = static_cast<Objective>(detail::read_pod<std::uint8_t>(in));
  model.dim = detail::read_pod<std::uint32_t>(in);
  const auto v = detail::read_pod<std::uint32_t>(in);
  const auto p = detail::read_pod<std::uint32_t>(in);

  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(v);
  for (std::uint32_t i = 0; i < v; ++i) {
    std::string tok = detail::read_string(in);
    const auto freq = detail::read_pod<std::uint64_t>(in);
    entries.emplace_back(std::move(tok), freq);
  }

  model.input.resize(static_cast<std::size_t>(v) * model.dim);
  in.read(reinterpret_cast<char*>(model.input.data()),
          static_cast<std::streamsize>(model.input.size() * sizeof(float)));
  if (!in) throw IoFailure("unexpected end of model file");
  model.output.resize(static_cast<std::size_t>(v) * model.dim);
  for (std::uint32_t d = 0; d < model.dim; ++d)
    for (std::uint32_t j = 0; j < v; ++j)
      model.output[static_cast<std::size_t>(j) * model.dim + d] =
          detail::read_pod<float>(in);
  model.docvecs.resize(static_cast<std::size_t>(p) * model.dim);
  in.read(reinterpret_cast<char*>(model.docvecs.data()),
          static_cast<std::streamsize>(model.docvecs.size() * sizeof(float)));
  if (!in) throw IoFailure("unexpected end of model file");
  model.doc_tags.reserve(p);
  for (std::uint32_t i = 0; i < p; ++i)
    model.doc_tags.push_back(detail::read_string(in));

  TrainConfig c;
  c.mode = static_cast<Mode>(detail::read_pod<std::uint8_t>(in));
  c.objective = static_cast<Objective>(detail::read_pod<std::uint8_t>(in));
  c.dim = detail::read_pod<std::uint32_t>(in);
  c.window = detail::read_pod<std::uint32_t>(in);
  c.epochs = detail::read_pod<std::uint32_t>(in);
  c.lr_start = detail::read_pod<double>(in);
  c.lr_end = detail::read_pod<double>(in);
  c.min_count = detail::read_pod<std::uint64_t>(in);
  c.negative = detail::read_pod<std::uint32_t>(in);
  c.subsample = detail::read_pod<double>(in);
  c.seed = detail::read_pod<std::uint64_t>(in);
  c.workers = detail::read_pod<std::uint32_t>(in);
  model.config = c;
  model.vocab = Vocabulary(std::move(entries), c.min_count);
  return model;
}

inline bool models_equal(const EmbeddingModel& a, const EmbeddingModel& b) {
  if (a.mode != b.mode || a.objective != b.objective || a.dim != b.dim)
    return false;
  if (a.vocab_size() != b.vocab_size() || a.doc_tags != b.doc_tags)
    return false;
  for (std::size_t i = 0; i < a.vocab_size(); ++i)
    if (a.vocab.token(i) != b.vocab.token(i) ||
        a.vocab.frequency(i) != b.vocab.frequency(i))
      return false;
  return a.input == b.input && a.output == b.output && a.docvecs == b.docvecs;
}

}  // namespace hybridrec
