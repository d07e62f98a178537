#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "hybridrec/corpus.hpp"
#include "hybridrec/synth.hpp"
#include "support/tmpdir.hpp"

using namespace hybridrec;
using testsupport::TempDir;

namespace {

struct Fixture {
  InteractionSet interactions;
  AppCatalog catalog;
  UserMetadataSet user_meta;
  TextOptions opts;

  Fixture() {
    std::vector<UserHistory> hist;
    hist.push_back({"u1", {"a1", "a2"}});
    hist.push_back({"u2", {"a2"}});
    interactions = InteractionSet(std::move(hist));
    catalog.add({"a1", "cats game fun", "Games", 4.4, 1200, 0.0, "google"});
    catalog.add({"a2", "dogs game", "Games", 3.0, 10, 0.99, "apple"});
    user_meta.add({"u1", "iOS", "London"});
    user_meta.add({"u2", "Android", "Leeds"});
  }
};

}  // namespace

TEST_CASE("cf docs treat app ids as words") {
  Fixture f;
  DocCorpus corpus = build_cf_docs(f.interactions);
  REQUIRE(corpus.docs.size() == 2);
  CHECK(corpus.scheme == Scheme::cf);
  CHECK(corpus.docs[0].tag == "user:u1");
  CHECK(corpus.docs[0].tokens == std::vector<std::string>{"a1", "a2"});
  CHECK(corpus.docs[1].tokens == std::vector<std::string>{"a2"});
  // vocabulary of the cf corpus is exactly the used app ids
  CHECK(corpus.vocab_hint.size() == 2);
  CHECK(corpus.total_tokens() == f.interactions.interaction_count());
}

TEST_CASE("user2vec docs concatenate descriptions in stable app order") {
  Fixture f;
  NormalizedCatalog norm(f.catalog, f.opts);
  DocCorpus corpus = build_user2vec_docs(f.interactions, norm);
  REQUIRE(corpus.docs.size() == 2);
  CHECK(corpus.docs[0].tokens ==
        std::vector<std::string>{"cat", "game", "fun", "dog", "game"});
  // single-app user doc equals that app's normalized description
  CHECK(corpus.docs[1].tokens == std::vector<std::string>{"dog", "game"});
}

TEST_CASE("context2vec docs append app metadata per item and user tokens once") {
  Fixture f;
  NormalizedCatalog norm(f.catalog, f.opts);
  DocCorpus corpus = build_context2vec_docs(f.interactions, norm, f.user_meta);
  REQUIRE(corpus.docs.size() == 2);
  const auto& u1 = corpus.docs[0].tokens;
  CHECK(u1 == std::vector<std::string>{
                  "cat", "game", "fun", "__genre=games", "__price=free",
                  "__rating=4.5", "__pop=3", "dog", "game", "__genre=games",
                  "__price=low", "__rating=3.0", "__pop=1", "__os=ios",
                  "__city=london"});
  // user tokens appear exactly once
  CHECK(std::count_if(u1.begin(), u1.end(), [](const std::string& t) {
          return t.rfind("__os=", 0) == 0;
        }) == 1);
}

TEST_CASE("context2vec without user metadata fails") {
  Fixture f;
  NormalizedCatalog norm(f.catalog, f.opts);
  UserMetadataSet missing;
  missing.add({"u1", "iOS", "London"});
  CHECK_THROWS_AS(build_context2vec_docs(f.interactions, norm, missing),
                  MissingUserMetadata);
}

TEST_CASE("context2vec docs minus metadata equal user2vec docs") {
  Fixture f;
  NormalizedCatalog norm(f.catalog, f.opts);
  DocCorpus ctx = build_context2vec_docs(f.interactions, norm, f.user_meta);
  DocCorpus u2v = build_user2vec_docs(f.interactions, norm);
  for (std::size_t d = 0; d < ctx.docs.size(); ++d) {
    std::vector<std::string> stripped;
    for (const auto& t : ctx.docs[d].tokens)
      if (t.rfind("__", 0) != 0) stripped.push_back(t);
    CHECK(stripped == u2v.docs[d].tokens);
  }
}

TEST_CASE("item docs follow the scheme") {
  Fixture f;
  NormalizedCatalog norm(f.catalog, f.opts);
  CHECK(build_item_doc("a1", Scheme::cf, norm).tokens ==
        std::vector<std::string>{"a1"});
  CHECK(build_item_doc("a1", Scheme::user2vec, norm).tokens ==
        std::vector<std::string>{"cat", "game", "fun"});
  auto ctx = build_item_doc("a1", Scheme::context2vec, norm).tokens;
  REQUIRE(ctx.size() == 7);
  CHECK(ctx[3] == "__genre=games");
  CHECK_THROWS_AS(build_item_doc("zz", Scheme::cf, norm), UnknownApp);
}

TEST_CASE("users whose documents normalize to empty are dropped with warning") {
  std::vector<UserHistory> hist;
  hist.push_back({"u1", {"a1"}});
  InteractionSet interactions{std::move(hist)};
  AppCatalog catalog;
  catalog.add({"a1", "the of and", "Games", 4.0, 1, 0.0, "google"});
  TextOptions opts;
  NormalizedCatalog norm(catalog, opts);
  std::vector<std::string> warnings;
  auto saved = warn_handler();
  warn_handler() = [&](const std::string& m) { warnings.push_back(m); };
  DocCorpus corpus = build_user2vec_docs(interactions, norm);
  warn_handler() = saved;
  CHECK(corpus.docs.empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("corpus serialization round-trips") {
  Fixture f;
  NormalizedCatalog norm(f.catalog, f.opts);
  DocCorpus corpus = build_context2vec_docs(f.interactions, norm, f.user_meta);
  TempDir dir("corpus_io");
  const auto path = dir.path("c.txt");
  save_corpus(corpus, path);
  DocCorpus loaded = load_corpus(path, Scheme::context2vec);
  REQUIRE(loaded.docs.size() == corpus.docs.size());
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    CHECK(loaded.docs[d].tag == corpus.docs[d].tag);
    CHECK(loaded.docs[d].tokens == corpus.docs[d].tokens);
  }
  CHECK(loaded.vocab_hint == corpus.vocab_hint);
}

TEST_CASE("builders are deterministic and recount on synthetic data") {
  SynthConfig config;
  config.n_users = 50;
  config.n_apps = 40;
  TempDir dir("corpus_synth");
  SynthData data = synth_generate(config);
  SynthPaths paths = synth_write_files(data, dir.root());

  AppCatalog catalog;
  for (const auto& a : data.apps) catalog.add(a);
  std::vector<UserHistory> hist;
  for (const auto& u : data.users) {
    UserHistory h;
    h.user = u.id;
    for (auto a : u.apps) h.apps.push_back(data.apps[a].app);
    std::sort(h.apps.begin(), h.apps.end());
    hist.push_back(std::move(h));
  }
  std::sort(hist.begin(), hist.end(),
            [](const auto& a, const auto& b) { return a.user < b.user; });
  InteractionSet interactions{std::move(hist)};
  TextOptions opts;
  NormalizedCatalog norm(catalog, opts);

  DocCorpus u2v = build_user2vec_docs(interactions, norm);
  REQUIRE(u2v.docs.size() == interactions.user_count());
  for (std::size_t d = 0; d < u2v.docs.size(); ++d) {
    const auto& h = interactions.users()[d];
    std::size_t expected = 0;
    for (const auto& app : h.apps)
      expected += norm.description_tokens(app).size();
    CHECK(u2v.docs[d].tokens.size() == expected);
  }

  UserMetadataSet user_meta;
  for (const auto& u : data.users) user_meta.add({u.id, u.os, u.city});
  DocCorpus ctx = build_context2vec_docs(interactions, norm, user_meta);
  for (std::size_t d = 0; d < ctx.docs.size(); ++d) {
    const auto& h = interactions.users()[d];
    std::size_t expected = 2;  // user tokens
    for (const auto& app : h.apps)
      expected += norm.description_tokens(app).size() + 4;
    CHECK(ctx.docs[d].tokens.size() == expected);
  }

  // byte-identical serialization across independent rebuilds
  DocCorpus again = build_context2vec_docs(interactions, norm, user_meta);
  const auto p1 = dir.path("c1.txt");
  const auto p2 = dir.path("c2.txt");
  save_corpus(ctx, p1);
  save_corpus(again, p2);
  CHECK(testsupport::read_file(p1) == testsupport::read_file(p2));
}
