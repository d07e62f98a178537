// Document corpus construction for the representation schemes.
//
//   cf           one doc per user, app ids as words
//   user2vec     one doc per user, concatenated app description tokens
//   context2vec  user2vec plus binned app metadata per item and user
//                metadata at the end of the document
//   descriptions one doc per app (baseline / word-model unit)
//
// Serialized form: one doc per line, `tag<TAB>token token ...`, UTF-8.
#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hybridrec/data.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/strings.hpp"
#include "hybridrec/text.hpp"

namespace hybridrec {

enum class Scheme : std::uint8_t { cf, user2vec, context2vec, descriptions };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::cf: return "cf";
    case Scheme::user2vec: return "user2vec";
    case Scheme::context2vec: return "context2vec";
    default: return "descriptions";
  }
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "cf") return Scheme::cf;
  if (s == "user2vec") return Scheme::user2vec;
  if (s == "context2vec") return Scheme::context2vec;
  if (s == "descriptions") return Scheme::descriptions;
  throw ConfigInvalid("unknown scheme: " + s);
}

inline std::string user_tag(const UserId& u) { return "user:" + u; }
inline std::string app_tag(const AppId& a) { return "app:" + a; }

struct TokenDoc {
  std::string tag;
  std::vector<std::string> tokens;
};

struct DocCorpus {
  std::vector<TokenDoc> docs;
  Scheme scheme = Scheme::cf;
  std::map<std::string, std::uint64_t> vocab_hint;

  void push(TokenDoc doc) {
    for (const auto& t : doc.tokens) ++vocab_hint[t];
    docs.push_back(std::move(doc));
  }

  std::size_t total_tokens() const {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.tokens.size();
    return n;
  }
};

// Normalized per-app token cache so the builders don't re-run the text
// pipeline per user.
class NormalizedCatalog {
 public:
  NormalizedCatalog(const AppCatalog& catalog, const TextOptions& opts)
      : catalog_(&catalog), opts_(&opts) {
    for (const auto& [app, meta] : catalog.apps()) {
      desc_[app] = normalize_text(meta.description, opts);
      meta_tokens_[app] = bin_app_metadata(meta, opts);
    }
  }

  const std::vector<std::string>& description_tokens(const AppId& app) const {
    auto it = desc_.find(app);
    if (it == desc_.end()) throw UnknownApp("app not in catalog: " + app);
    return it->second;
  }

  const std::vector<std::string>& meta_tokens(const AppId& app) const {
    return meta_tokens_.at(app);
  }

  const AppCatalog& catalog() const { return *catalog_; }
  const TextOptions& options() const { return *opts_; }

 private:
  const AppCatalog* catalog_;
  const TextOptions* opts_;
  std::map<AppId, std::vector<std::string>> desc_;
  std::map<AppId, std::vector<std::string>> meta_tokens_;
};

// Apps-as-words: one doc per user whose tokens are the AppId values
// verbatim.
inline DocCorpus build_cf_docs(const InteractionSet& interactions) {
  if (interactions.empty()) throw EmptyDataset("no interactions");
  DocCorpus corpus;
  corpus.scheme = Scheme::cf;
  for (const auto& h : interactions.users())
    corpus.push({user_tag(h.user), h.apps});
  return corpus;
}

// One doc per user: the concatenation of the normalized descriptions of
// the user's apps, in the user's stable app order. Users whose documents
// normalize to nothing are dropped with a warning.
inline DocCorpus build_user2vec_docs(const InteractionSet& interactions,
                                     const NormalizedCatalog& catalog) {
  if (interactions.empty()) throw EmptyDataset("no interactions");
  DocCorpus corpus;
  corpus.scheme = Scheme::user2vec;
  for (const auto& h : interactions.users()) {
    TokenDoc doc;
    doc.tag = user_tag(h.user);
    for (const auto& app : h.apps) {
      const auto& tokens = catalog.description_tokens(app);
      doc.tokens.insert(doc.tokens.end(), tokens.begin(), tokens.end());
    }
    if (doc.tokens.empty()) {
      warn("user " + h.user + " dropped: all descriptions normalize to empty");
      continue;
    }
    corpus.push(std::move(doc));
  }
  return corpus;
}

// Per used app: description tokens followed by the app's four metadata
// tokens; after all items, the user's two metadata tokens once.
inline DocCorpus build_context2vec_docs(const InteractionSet& interactions,
                                        const NormalizedCatalog& catalog,
                                        const UserMetadataSet& user_meta) {
  if (interactions.empty()) throw EmptyDataset("no interactions");
  DocCorpus corpus;
  corpus.scheme = Scheme::context2vec;
  for (const auto& h : interactions.users()) {
    const UserMetadata* meta = user_meta.find(h.user);
    if (!meta) throw MissingUserMetadata("user " + h.user);
    TokenDoc doc;
    doc.tag = user_tag(h.user);
    for (const auto& app : h.apps) {
      const auto& tokens = catalog.description_tokens(app);
      doc.tokens.insert(doc.tokens.end(), tokens.begin(), tokens.end());
      const auto& mt = catalog.meta_tokens(app);
      doc.tokens.insert(doc.tokens.end(), mt.begin(), mt.end());
    }
    const auto ut = bin_user_metadata(*meta);
    doc.tokens.insert(doc.tokens.end(), ut.begin(), ut.end());
    corpus.push(std::move(doc));
  }
  return corpus;
}

// One doc per app; the unit for TF-IDF/LSA/LDA and for word-vector
// training.
inline DocCorpus build_descriptions_docs(const NormalizedCatalog& catalog) {
  DocCorpus corpus;
  corpus.scheme = Scheme::descriptions;
  for (const auto& [app, _] : catalog.catalog().apps()) {
    const auto& tokens = catalog.description_tokens(app);
    if (tokens.empty()) {
      warn("app " + app + " dropped: description normalizes to empty");
      continue;
    }
    corpus.push({app_tag(app), tokens});
  }
  if (corpus.docs.empty()) throw EmptyDataset("no usable app descriptions");
  return corpus;
}

// Single-item document for held-out inference.
inline TokenDoc build_item_doc(const AppId& app, Scheme scheme,
                               const NormalizedCatalog& catalog) {
  if (!catalog.catalog().find(app))
    throw UnknownApp("app not in catalog: " + app);
  TokenDoc doc;
  doc.tag = app_tag(app);
  switch (scheme) {
    case Scheme::cf:
      doc.tokens = {app};
      break;
    case Scheme::user2vec:
    case Scheme::descriptions:
      doc.tokens = catalog.description_tokens(app);
      break;
    case Scheme::context2vec: {
      doc.tokens = catalog.description_tokens(app);
      const auto& mt = catalog.meta_tokens(app);
      doc.tokens.insert(doc.tokens.end(), mt.begin(), mt.end());
      break;
    }
  }
  return doc;
}

inline void save_corpus(const DocCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  for (const auto& doc : corpus.docs) {
    out << doc.tag << '\t';
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out.put(' ');
      out << doc.tokens[i];
    }
    out.put('\n');
  }
}

inline DocCorpus load_corpus(const std::string& path, Scheme scheme) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open corpus: " + path);
  DocCorpus corpus;
  corpus.scheme = scheme;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw MalformedRecord("line " + std::to_string(lineno) +
                            ": expected tag<TAB>tokens");
    TokenDoc doc;
    doc.tag = line.substr(0, tab);
    std::string rest = line.substr(tab + 1);
    for (auto& tok : split(rest, ' '))
      if (!tok.empty()) doc.tokens.push_back(tok);
    if (doc.tokens.empty())
      throw MalformedRecord("line " + std::to_string(lineno) +
                            ": document has no tokens");
    corpus.push(std::move(doc));
  }
  if (corpus.docs.empty()) throw EmptyDataset("empty corpus file: " + path);
  return corpus;
}

}  // namespace hybridrec
