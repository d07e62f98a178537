#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hybridrec/baselines.hpp"
#include "support/jacobi_svd.hpp"
#include "support/oracles.hpp"

using namespace hybridrec;

namespace {

DocCorpus make_corpus(std::vector<std::pair<std::string,
                                            std::vector<std::string>>> docs) {
  DocCorpus corpus;
  corpus.scheme = Scheme::descriptions;
  for (auto& [tag, tokens] : docs) corpus.push({tag, tokens});
  return corpus;
}

double weight_of(const SparseVector& v, std::uint32_t index) {
  for (const auto& [i, w] : v.items)
    if (i == index) return w;
  return 0.0;
}

std::vector<SparseVector> dense_rows_to_sparse(const std::vector<double>& a,
                                               std::size_t rows,
                                               std::size_t cols) {
  std::vector<SparseVector> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    out[r].dim = static_cast<std::uint32_t>(cols);
    for (std::size_t c = 0; c < cols; ++c)
      out[r].items.emplace_back(static_cast<std::uint32_t>(c),
                                a[r * cols + c]);
  }
  return out;
}

}  // namespace

TEST_CASE("tfidf reproduces the two-document fixture") {
  auto corpus = make_corpus({{"app:d1", {"a", "b"}}, {"app:d2", {"a"}}});
  TfidfModel model = tfidf_fit(corpus);
  // a occurs in both docs, b in one; smoothed idf with +1 offset.
  const std::int32_t ia = model.vocab.lookup("a");
  const std::int32_t ib = model.vocab.lookup("b");
  REQUIRE(ia == 0);  // higher frequency first
  REQUIRE(ib == 1);
  CHECK(model.idf[ia] == Catch::Approx(1.0).margin(1e-12));
  CHECK(model.idf[ib] ==
        Catch::Approx(std::log(3.0 / 2.0) + 1.0).margin(1e-12));

  const SparseVector& d1 = model.doc_vectors[0];
  const double idf_b = std::log(3.0 / 2.0) + 1.0;
  const double norm = std::sqrt(1.0 + idf_b * idf_b);
  CHECK(weight_of(d1, ia) == Catch::Approx(1.0 / norm).margin(1e-9));
  CHECK(weight_of(d1, ib) == Catch::Approx(idf_b / norm).margin(1e-9));
  // the frozen hand-computed values
  CHECK(weight_of(d1, ia) == Catch::Approx(0.5797).margin(5e-5));
  CHECK(weight_of(d1, ib) == Catch::Approx(0.8148).margin(5e-5));
}

TEST_CASE("tfidf edge cases and idf monotonicity") {
  auto corpus = make_corpus(
      {{"app:d1", {"only"}},
       {"app:d2", {"common", "rare"}},
       {"app:d3", {"common"}}});
  TfidfModel model = tfidf_fit(corpus);
  // single-token doc normalizes to weight 1
  CHECK(weight_of(model.doc_vectors[0],
                  static_cast<std::uint32_t>(model.vocab.lookup("only"))) ==
        Catch::Approx(1.0).margin(1e-12));
  CHECK(model.idf[model.vocab.lookup("common")] <
        model.idf[model.vocab.lookup("rare")]);
  CHECK_THROWS_AS(tfidf_fit(DocCorpus{}), EmptyCorpus);
}

TEST_CASE("tfidf is invariant to integer scaling of token multiplicities") {
  auto base = make_corpus({{"app:d1", {"x", "x", "y", "z"}},
                           {"app:d2", {"x", "w"}}});
  auto scaled = make_corpus(
      {{"app:d1", {"x", "x", "x", "x", "x", "x", "y", "y", "y", "z", "z", "z"}},
       {"app:d2", {"x", "w"}}});
  TfidfModel m1 = tfidf_fit(base);
  TfidfModel m2 = tfidf_fit(scaled);
  for (const auto& tok : {"x", "y", "z"}) {
    const auto i1 = static_cast<std::uint32_t>(m1.vocab.lookup(tok));
    const auto i2 = static_cast<std::uint32_t>(m2.vocab.lookup(tok));
    CHECK(weight_of(m1.doc_vectors[0], i1) ==
          Catch::Approx(weight_of(m2.doc_vectors[0], i2)).margin(1e-12));
  }
}

TEST_CASE("tfidf user vectors are app centroids") {
  auto corpus = make_corpus({{"app:a1", {"x"}}, {"app:a2", {"y"}}});
  TfidfModel model = tfidf_fit(corpus);
  std::vector<UserHistory> hist;
  hist.push_back({"u1", {"a1"}});
  hist.push_back({"u2", {"a1", "a2"}});
  InteractionSet interactions{std::move(hist)};
  auto users = tfidf_user_vectors(interactions, model);

  // centroid of one app equals the app vector
  const auto ix = static_cast<std::uint32_t>(model.vocab.lookup("x"));
  const auto iy = static_cast<std::uint32_t>(model.vocab.lookup("y"));
  CHECK(weight_of(users["u1"], ix) == Catch::Approx(1.0).margin(1e-12));
  // two orthogonal unit vectors: each weight halves
  CHECK(weight_of(users["u2"], ix) == Catch::Approx(0.5).margin(1e-12));
  CHECK(weight_of(users["u2"], iy) == Catch::Approx(0.5).margin(1e-12));

  // brute-force recount on a random corpus
  Rng rng(3);
  std::vector<std::pair<std::string, std::vector<std::string>>> docs;
  std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee", "ff"};
  for (int a = 0; a < 8; ++a) {
    std::vector<std::string> tokens;
    for (int t = 0; t < 6; ++t)
      tokens.push_back(vocab[uniform_u32(rng, vocab.size())]);
    docs.push_back({"app:r" + std::to_string(a), tokens});
  }
  TfidfModel rm = tfidf_fit(make_corpus(std::move(docs)));
  std::vector<UserHistory> rhist;
  rhist.push_back({"ru", {"r0", "r3", "r5"}});
  InteractionSet rint{std::move(rhist)};
  auto rusers = tfidf_user_vectors(rint, rm);
  for (std::uint32_t i = 0; i < rm.vocab.size(); ++i) {
    const double expected = (weight_of(rm.doc_vectors[0], i) +
                             weight_of(rm.doc_vectors[3], i) +
                             weight_of(rm.doc_vectors[5], i)) /
                            3.0;
    CHECK(weight_of(rusers["ru"], i) == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("lsa on the identity matrix finds unit singular values") {
  std::vector<double> eye(9, 0.0);
  eye[0] = eye[4] = eye[8] = 1.0;
  auto rows = dense_rows_to_sparse(eye, 3, 3);
  LsaModel model = lsa_fit(rows, {"a", "b", "c"}, 3);
  for (double s : model.singular_values)
    CHECK(s == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("lsa captures a rank-1 matrix exactly at k=1") {
  const std::vector<double> u = {1.0, -2.0, 0.5, 3.0};
  const std::vector<double> v = {2.0, 1.0, -1.0, 0.5, 4.0};
  std::vector<double> a(u.size() * v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) a[i * v.size() + j] = u[i] * v[j];
  auto rows = dense_rows_to_sparse(a, u.size(), v.size());
  LsaModel model = lsa_fit(rows, {"r0", "r1", "r2", "r3"}, 1);

  double frob = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double approx = model.doc_vectors.at(i, 0) * model.basis.at(j, 0);
      const double diff = a[i * v.size() + j] - approx;
      frob += diff * diff;
    }
  CHECK(std::sqrt(frob) <= 1e-8);

  // a second component would be numerically rank-deficient
  CHECK_THROWS_AS(lsa_fit(rows, {"r0", "r1", "r2", "r3"}, 2), RankDeficient);
}

TEST_CASE("lsa basis is orthonormal and projections match doc vectors") {
  Rng rng(11);
  std::vector<double> a(30 * 20);
  for (auto& x : a) x = uniform_range(rng, -1.0, 1.0);
  auto rows = dense_rows_to_sparse(a, 30, 20);
  std::vector<std::string> tags(30, "t");
  LsaModel model = lsa_fit(rows, tags, 6);
  for (std::size_t i = 0; i < model.k; ++i)
    for (std::size_t j = 0; j < model.k; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < 20; ++c)
        dot += model.basis.at(c, i) * model.basis.at(c, j);
      CHECK(dot == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-8));
    }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto proj = model.project(rows[r]);
    for (std::size_t j = 0; j < model.k; ++j)
      CHECK(proj[j] == Catch::Approx(model.doc_vectors.at(r, j)).margin(1e-8));
  }
}

TEST_CASE("randomized svd matches the dense jacobi oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> a(50 * 80);
    for (auto& x : a) x = uniform_range(rng, -1.0, 1.0);
    auto rows = dense_rows_to_sparse(a, 50, 80);
    std::vector<std::string> tags(50, "t");
    LsaOptions opts;
    opts.seed = rng();
    LsaModel model = lsa_fit(rows, tags, 10, opts);
    auto oracle = testsupport::jacobi_singular_values(a, 50, 80);
    for (std::size_t j = 0; j < 10; ++j)
      CHECK(testsupport::relative_error(model.singular_values[j], oracle[j]) <
            1e-6);
  }
}

TEST_CASE("lda doc-topic vectors are smoothed distributions") {
  auto corpus = make_corpus({{"app:d1", {"x", "y", "x"}},
                             {"app:d2", {"y", "z"}},
                             {"app:d3", {"z", "z", "z", "x"}}});
  TopicModel model = lda_fit(corpus, 3, 0.5, 0.01, 50, 7);
  for (std::size_t d = 0; d < 3; ++d) {
    auto theta = model.doc_topics(d);
    double total = 0.0;
    for (double p : theta) {
      CHECK(p > 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  // topic-word counts conserved: every token is assigned somewhere
  std::uint32_t assigned = 0;
  for (auto c : model.topic_total) assigned += c;
  CHECK(assigned == corpus.total_tokens());
}

TEST_CASE("single one-token doc stays strictly inside the simplex") {
  auto corpus = make_corpus({{"app:d1", {"x"}}, {"app:d2", {"x", "x"}}});
  TopicModel model = lda_fit(corpus, 2, 1.0, 1.0, 20, 3);
  auto theta = model.doc_topics(0);
  CHECK(theta[0] > 0.0);
  CHECK(theta[0] < 1.0);
  CHECK(theta[1] > 0.0);
  CHECK(theta[1] < 1.0);
}

TEST_CASE("lda separates planted disjoint-vocabulary clusters") {
  std::vector<std::pair<std::string, std::vector<std::string>>> docs;
  Rng rng(5);
  for (int d = 0; d < 20; ++d) {
    std::vector<std::string> a, b;
    for (int t = 0; t < 30; ++t) {
      a.push_back("a" + std::to_string(uniform_u32(rng, 10)));
      b.push_back("b" + std::to_string(uniform_u32(rng, 10)));
    }
    docs.push_back({"app:a" + std::to_string(d), a});
    docs.push_back({"app:b" + std::to_string(d), b});
  }
  auto corpus = make_corpus(std::move(docs));
  TopicModel model = lda_fit(corpus, 2, 1.0, 0.01, 200, 11);

  std::vector<std::vector<double>> thetas;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d)
    thetas.push_back(model.doc_topics(d));
  auto cos = [](const std::vector<double>& x, const std::vector<double>& y) {
    double dot = 0, nx = 0, ny = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      dot += x[i] * y[i];
      nx += x[i] * x[i];
      ny += y[i] * y[i];
    }
    return dot / std::sqrt(nx * ny);
  };
  double within = 0.0, cross = 0.0;
  std::size_t nw = 0, nc = 0;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    for (std::size_t j = i + 1; j < thetas.size(); ++j) {
      const bool same =
          (corpus.docs[i].tag[4] == corpus.docs[j].tag[4]);  // 'a' or 'b'
      (same ? within : cross) += cos(thetas[i], thetas[j]);
      (same ? nw : nc) += 1;
    }
  CHECK(within / nw > cross / nc);
}

TEST_CASE("lda fold-in gives a distribution for held-out docs") {
  auto corpus = make_corpus({{"app:d1", {"x", "y"}}, {"app:d2", {"z"}}});
  TopicModel model = lda_fit(corpus, 2, 1.0, 0.01, 30, 9);
  auto theta = lda_doc_topics(model, {"app:new", {"x", "z", "x"}});
  double total = 0.0;
  for (double p : theta) total += p;
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("w2v centroid user vectors respect multiplicity") {
  AppCatalog catalog;
  catalog.add({"a1", "racing cars racing", "Games", 4.0, 10, 0.0, "google"});
  catalog.add({"a2", "puzzle", "Games", 4.0, 10, 0.0, "google"});
  TextOptions opts;
  NormalizedCatalog norm(catalog, opts);
  DocCorpus corpus = build_descriptions_docs(norm);

  TrainConfig config;
  config.mode = Mode::sg;
  config.objective = Objective::negative_sampling;
  config.dim = 6;
  config.window = 2;
  config.epochs = 5;
  config.min_count = 1;
  config.seed = 1;
  EmbeddingModel model = train(corpus, config);

  std::vector<UserHistory> hist;
  hist.push_back({"u1", {"a2"}});
  hist.push_back({"u2", {"a1"}});
  InteractionSet interactions{std::move(hist)};
  auto users = w2v_centroid_user_vectors(interactions, norm, model);

  // single in-vocab token: user vector equals the word vector
  const auto pz = model.word_vector(model.vocab.lookup("puzzl"));
  for (std::size_t j = 0; j < model.dim; ++j)
    CHECK(users["u1"][j] == Catch::Approx(double(pz[j])).margin(1e-12));

  // "racing cars racing" -> race weighs twice against car
  const auto race = model.word_vector(model.vocab.lookup("race"));
  const auto car = model.word_vector(model.vocab.lookup("car"));
  for (std::size_t j = 0; j < model.dim; ++j) {
    const double expected = (2.0 * race[j] + car[j]) / 3.0;
    CHECK(users["u2"][j] == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("w2v centroid drops all-OOV users with a warning") {
  AppCatalog catalog;
  catalog.add({"a1", "wordy text here", "Games", 4.0, 10, 0.0, "google"});
  catalog.add({"a2", "unseen tokens only", "Games", 4.0, 10, 0.0, "google"});
  TextOptions opts;
  NormalizedCatalog norm(catalog, opts);

  DocCorpus only_a1;
  only_a1.scheme = Scheme::descriptions;
  only_a1.push({"app:a1", norm.description_tokens("a1")});
  TrainConfig config;
  config.mode = Mode::cbow;
  config.objective = Objective::negative_sampling;
  config.dim = 4;
  config.epochs = 2;
  config.min_count = 1;
  config.seed = 1;
  EmbeddingModel model = train(only_a1, config);

  std::vector<UserHistory> hist;
  hist.push_back({"u1", {"a2"}});  // description never trained
  hist.push_back({"u2", {"a1"}});
  InteractionSet interactions{std::move(hist)};
  std::vector<std::string> warnings;
  auto saved = warn_handler();
  warn_handler() = [&](const std::string& m) { warnings.push_back(m); };
  auto users = w2v_centroid_user_vectors(interactions, norm, model);
  warn_handler() = saved;
  CHECK(users.count("u1") == 0);
  CHECK(users.count("u2") == 1);
  CHECK(warnings.size() == 1);
}
