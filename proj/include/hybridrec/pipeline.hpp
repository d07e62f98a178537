// Glue between the modules: dataset loading, per-method representation
// construction, vector-space export, the end-to-end suite, and the
// embedding hyperparameter sweep that selects by mean task AUC.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hybridrec/baselines.hpp"
#include "hybridrec/corpus.hpp"
#include "hybridrec/embedding.hpp"
#include "hybridrec/ingest.hpp"
#include "hybridrec/lookalike.hpp"
#include "hybridrec/recsys.hpp"
#include "hybridrec/synth.hpp"

namespace hybridrec {

struct DataBundle {
  InteractionSet interactions;
  AppCatalog catalog;
  UserMetadataSet user_meta;
  SeedLabelSet labels;
};

struct DataPaths {
  std::string interactions;
  std::string app_meta;
  std::string user_meta;
  std::string labels;  // optional, may be empty
};

inline DataBundle load_bundle(const DataPaths& paths, std::size_t min_apps) {
  DataBundle bundle;
  InteractionSet raw = load_interactions(paths.interactions, min_apps);
  bundle.catalog = load_app_metadata(paths.app_meta);
  bundle.interactions = join_and_prune(raw, bundle.catalog, min_apps);
  bundle.user_meta = load_user_metadata(paths.user_meta);
  if (!paths.labels.empty())
    bundle.labels = load_seed_labels(paths.labels, bundle.interactions);
  return bundle;
}

inline DocCorpus build_corpus_for(Scheme scheme, const DataBundle& bundle,
                                  const NormalizedCatalog& norm) {
  switch (scheme) {
    case Scheme::cf: return build_cf_docs(bundle.interactions);
    case Scheme::user2vec:
      return build_user2vec_docs(bundle.interactions, norm);
    case Scheme::context2vec:
      return build_context2vec_docs(bundle.interactions, norm,
                                    bundle.user_meta);
    default: return build_descriptions_docs(norm);
  }
}

// Embedding settings shared by the doc2vec schemes; the cf corpus keeps
// every app id in vocabulary via min_count 1.
struct EmbedSettings {
  TrainConfig doc2vec;       // dm/dbow for cf, user2vec, context2vec
  TrainConfig word2vec;      // cbow/sg for the descriptions corpus
  std::uint32_t infer_epochs = 50;
  double infer_lr = 0.025;

  EmbedSettings() {
    // dbow by default: the doc-only objective forces content into the
    // document vector, which carries noticeably stronger topical signal
    // at desk scale; dm remains selectable.
    doc2vec.mode = Mode::dbow;
    doc2vec.objective = Objective::negative_sampling;
    word2vec.mode = Mode::sg;
    word2vec.objective = Objective::negative_sampling;
    word2vec.min_count = 5;
  }
};

inline TrainConfig corpus_train_config(Scheme scheme, const EmbedSettings& s) {
  TrainConfig cfg = scheme == Scheme::descriptions ? s.word2vec : s.doc2vec;
  if (scheme == Scheme::cf) cfg.min_count = 1;  // keep every item
  return cfg;
}

// Per-user vectors for one representation name. Baseline names: tfidf,
// lsa, lda, w2v; embedding names: d2v_cf, user2vec, context2vec.
inline std::map<UserId, std::vector<double>> build_representation(
    const std::string& name, const DataBundle& bundle,
    const NormalizedCatalog& norm, const EmbedSettings& settings) {
  std::map<UserId, std::vector<double>> out;
  if (name == "tfidf" || name == "lsa") {
    DocCorpus desc = build_descriptions_docs(norm);
    TfidfModel tfidf = tfidf_fit(desc);
    auto user_tfidf = tfidf_user_vectors(bundle.interactions, tfidf);
    if (name == "tfidf") {
      for (const auto& [user, sv] : user_tfidf) {
        std::vector<double> dense(sv.dim, 0.0);
        for (const auto& [i, w] : sv.items) dense[i] = w;
        out[user] = std::move(dense);
      }
      return out;
    }
    const std::size_t k =
        std::min<std::size_t>(100, std::min(tfidf.doc_vectors.size(),
                                            tfidf.vocab.size()));
    std::vector<std::string> tags;
    for (const auto& d : desc.docs) tags.push_back(d.tag);
    LsaOptions lsa_opts;
    lsa_opts.seed = settings.doc2vec.seed;
    LsaModel lsa = lsa_fit(tfidf.doc_vectors, tags, k, lsa_opts);
    for (const auto& [user, sv] : user_tfidf) out[user] = lsa.project(sv);
    return out;
  }
  if (name == "lda") {
    DocCorpus desc = build_descriptions_docs(norm);
    const std::size_t k = 50;
    TopicModel lda = lda_fit(desc, k, 50.0 / k, 0.01, 500,
                             settings.doc2vec.seed);
    std::map<AppId, std::vector<double>> app_topics;
    for (std::size_t d = 0; d < desc.docs.size(); ++d) {
      const std::string& tag = desc.docs[d].tag;
      app_topics[tag.substr(4)] = lda.doc_topics(d);  // strip "app:"
    }
    for (const auto& h : bundle.interactions.users()) {
      std::vector<double> acc(k, 0.0);
      std::size_t count = 0;
      for (const auto& app : h.apps) {
        auto it = app_topics.find(app);
        if (it == app_topics.end()) continue;
        for (std::size_t j = 0; j < k; ++j) acc[j] += it->second[j];
        ++count;
      }
      if (count == 0) continue;
      for (auto& x : acc) x /= static_cast<double>(count);
      out[h.user] = std::move(acc);
    }
    return out;
  }
  if (name == "w2v") {
    DocCorpus desc = build_descriptions_docs(norm);
    EmbeddingModel model =
        train(desc, corpus_train_config(Scheme::descriptions, settings));
    return w2v_centroid_user_vectors(bundle.interactions, norm, model);
  }
  Scheme scheme;
  if (name == "d2v_cf") scheme = Scheme::cf;
  else if (name == "user2vec") scheme = Scheme::user2vec;
  else if (name == "context2vec") scheme = Scheme::context2vec;
  else throw ConfigInvalid("unknown representation: " + name);

  DocCorpus corpus = build_corpus_for(scheme, bundle, norm);
  EmbeddingModel model = train(corpus, corpus_train_config(scheme, settings));
  for (std::size_t p = 0; p < model.doc_count(); ++p) {
    const std::string& tag = model.doc_tags[p];
    const auto v = model.doc_vector(p);
    out[tag.substr(5)] = std::vector<double>(v.begin(), v.end());  // "user:"
  }
  return out;
}

inline RepresentationBank build_bank(const std::vector<std::string>& names,
                                     const DataBundle& bundle,
                                     const NormalizedCatalog& norm,
                                     const EmbedSettings& settings) {
  RepresentationBank bank;
  for (const auto& name : names)
    bank[name] = build_representation(name, bundle, norm, settings);
  return bank;
}

inline std::uint64_t fnv1a64_str(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Vector space over users (trained doc vectors) and items for one
// scheme. cf items are the trained app-id word vectors; description
// schemes infer item vectors from single-item documents.
inline VectorSpace build_space(const EmbeddingModel& model, Scheme scheme,
                               const NormalizedCatalog& norm,
                               std::uint32_t infer_epochs, double infer_lr) {
  VectorSpace space;
  for (std::size_t p = 0; p < model.doc_count(); ++p) {
    const auto v = model.doc_vector(p);
    std::vector<double> vec(v.begin(), v.end());
    if (is_zero_vector(vec)) continue;
    space.insert(model.doc_tags[p], std::move(vec));
  }
  if (scheme == Scheme::cf) {
    for (std::size_t i = 0; i < model.vocab_size(); ++i) {
      const auto v = model.word_vector(i);
      std::vector<double> vec(v.begin(), v.end());
      if (is_zero_vector(vec)) continue;
      space.insert(app_tag(model.vocab.token(i)), std::move(vec));
    }
  } else {
    for (const auto& [app, _] : norm.catalog().apps()) {
      TokenDoc doc = build_item_doc(app, scheme, norm);
      try {
        auto vec32 = infer_doc(model, doc, infer_epochs, infer_lr,
                               model.config.seed ^ fnv1a64_str(doc.tag));
        std::vector<double> vec(vec32.begin(), vec32.end());
        if (is_zero_vector(vec)) continue;
        space.insert(doc.tag, std::move(vec));
      } catch (const AllTokensOOV&) {
        warn("item " + app + " skipped: all tokens OOV");
      }
    }
  }
  return space;
}

// Embedding hyperparameter sweep: run the suite once per candidate and
// keep the config whose method reaches the best mean AUC across the
// nine tasks.
struct TuneResult {
  std::size_t best_index = 0;
  std::vector<double> mean_auc;  // per candidate
};

inline TuneResult tune_embeddings(const std::vector<TrainConfig>& candidates,
                                  const std::string& method_name,
                                  const DataBundle& bundle,
                                  const NormalizedCatalog& norm,
                                  EmbedSettings settings,
                                  const SuiteOptions& suite_options) {
  if (candidates.empty()) throw ConfigInvalid("no tuning candidates");
  TuneResult result;
  double best = -1.0;
  MethodSpec spec = parse_method_spec(method_name);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    settings.doc2vec = candidates[i];
    RepresentationBank bank;
    for (const auto& s : spec.sources)
      bank[s] = build_representation(s, bundle, norm, settings);
    SuiteOptions opts = suite_options;
    opts.methods = {spec};
    ExperimentReport report = run_suite(bundle.labels, bundle.interactions,
                                        bundle.user_meta, bundle.catalog,
                                        bank, opts);
    const double auc = report.mean_auc(method_name);
    result.mean_auc.push_back(auc);
    if (auc > best) {
      best = auc;
      result.best_index = i;
    }
  }
  return result;
}

}  // namespace hybridrec
