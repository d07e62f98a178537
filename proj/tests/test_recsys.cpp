#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hybridrec/recsys.hpp"
#include "hybridrec/rng.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"

using namespace hybridrec;
using testsupport::TempDir;

TEST_CASE("cosine basics") {
  std::vector<double> v = {1.0, 2.0, 3.0};
  std::vector<double> w = {4.0, 5.0, 6.0};
  CHECK(std::abs(cosine(v, v) - 1.0) < 1e-12);
  CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(cosine(v, w) ==
        Catch::Approx(32.0 / (std::sqrt(14.0) * std::sqrt(77.0)))
            .margin(1e-9));
  CHECK(cosine(v, w) == cosine(w, v));  // exact symmetry

  std::vector<double> scaled = {2.5, 5.0, 7.5};
  CHECK(std::abs(cosine(scaled, w) - cosine(v, w)) < 1e-12);

  CHECK_THROWS_AS(cosine(v, std::vector<double>{1.0, 2.0}),
                  DimensionMismatch);
  CHECK_THROWS_AS(cosine(v, std::vector<double>{0.0, 0.0, 0.0}), ZeroVector);
}

TEST_CASE("vector space rejects bad inserts and resolves tags") {
  VectorSpace space;
  space.insert("app:a", {1.0, 0.0});
  CHECK_THROWS_AS(space.insert("app:b", {1.0, 0.0, 0.0}), DimensionMismatch);
  CHECK_THROWS_AS(space.insert("app:c", {0.0, 0.0}), ZeroVector);
  CHECK_THROWS_AS(space.at("app:missing"), UnknownTag);
  CHECK(space.at("app:a")[0] == 1.0);
}

TEST_CASE("top_k ties break lexicographically and k clamps") {
  VectorSpace space;
  space.insert("e1", {1.0, 0.0, 0.0});
  space.insert("e2", {0.0, 1.0, 0.0});
  space.insert("e3", {0.0, 0.0, 1.0});
  auto res = top_k(space, std::string("e1"), 2, CandidateFilter::all);
  REQUIRE(res.size() == 2);
  CHECK(res[0].tag == "e2");
  CHECK(res[1].tag == "e3");
  CHECK(res[0].similarity == 0.0);

  auto all = top_k(space, std::string("e1"), 10, CandidateFilter::all);
  CHECK(all.size() == 2);  // query excluded, pool clamped

  CHECK_THROWS_AS(top_k(space, std::string("nope"), 1, CandidateFilter::all),
                  UnknownTag);
}

TEST_CASE("filters restrict candidates by tag kind") {
  VectorSpace space;
  space.insert("user:u1", {1.0, 0.1});
  space.insert("user:u2", {1.0, 0.2});
  space.insert("app:a1", {1.0, 0.3});
  auto users = top_k(space, std::string("app:a1"), 5, CandidateFilter::users);
  REQUIRE(users.size() == 2);
  for (const auto& r : users) CHECK(tag_kind(r.tag) == TagKind::user);
  auto apps = top_k(space, std::string("user:u1"), 5, CandidateFilter::apps);
  REQUIRE(apps.size() == 1);
  CHECK(apps[0].tag == "app:a1");
}

TEST_CASE("top_k equals the brute-force oracle on random spaces") {
  Rng rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + uniform_u32(rng, 50);
    const std::size_t dim = 2 + uniform_u32(rng, 6);
    VectorSpace space;
    std::map<std::string, std::vector<double>> mirror;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      bool zero = true;
      for (auto& x : v) {
        x = uniform_range(rng, -1.0, 1.0);
        if (x != 0.0) zero = false;
      }
      if (zero) v[0] = 1.0;
      // duplicate some vectors to force ties
      if (i > 0 && uniform_u32(rng, 4) == 0) v = mirror.begin()->second;
      const std::string tag =
          (uniform_u32(rng, 2) ? "user:" : "app:") + std::to_string(i);
      space.insert(tag, v);
      mirror[tag] = v;
    }
    const auto& [qtag, qvec] = *std::next(mirror.begin(),
                                          uniform_u32(rng, mirror.size()));
    const std::size_t k = 1 + uniform_u32(rng, n);
    const CandidateFilter filter = static_cast<CandidateFilter>(
        uniform_u32(rng, 3));
    const std::string prefix = filter == CandidateFilter::apps ? "app:"
                               : filter == CandidateFilter::users ? "user:"
                                                                  : "";
    auto got = top_k(space, qtag, k, filter);
    auto want = testsupport::brute_force_top_k(mirror, qvec, k, qtag, prefix);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].tag == want[i].tag);
      CHECK(got[i].similarity == want[i].similarity);
    }
  }
}

TEST_CASE("vector arithmetic") {
  VectorSpace space;
  space.insert("t1", {1.0, -2.0});
  space.insert("t2", {0.5, 0.5});

  auto zero = vector_arith(space, {{true, "t1"}, {false, "t1"}});
  CHECK(is_zero_vector(zero));
  CHECK_THROWS_AS(cosine(zero, space.at("t1")), ZeroVector);

  auto same = vector_arith(space, {{true, "t1"}});
  CHECK(same == space.at("t1"));

  auto sum = vector_arith(space, {{true, "t1"}, {true, "t2"}});
  CHECK(sum == std::vector<double>{1.5, -1.5});

  CHECK_THROWS_AS(vector_arith(space, {{true, "nope"}}), UnknownTag);
}

TEST_CASE("vector space text format round-trips") {
  VectorSpace space;
  space.insert("user:u1", {1.0, -0.25, 3.5e-7});
  space.insert("app:a1", {0.125, 2.0, -1.0});
  TempDir dir("space_io");
  const auto path = dir.path("v.txt");
  space.save(path);
  VectorSpace loaded = VectorSpace::load(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.dimension() == 3);
  CHECK(loaded.at("user:u1") == space.at("user:u1"));
  CHECK(loaded.at("app:a1") == space.at("app:a1"));

  const auto bad = dir.write("bad.txt", "2 3\nuser:u1 1 2\n");
  CHECK_THROWS_AS(VectorSpace::load(bad), MalformedRecord);
}
