#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "hybridrec/ingest.hpp"
#include "hybridrec/synth.hpp"
#include "support/tmpdir.hpp"

using namespace hybridrec;
using testsupport::TempDir;

namespace {

std::string serialize(const InteractionSet& set) {
  std::ostringstream out;
  set.to_csv(out);
  return out.str();
}

AppCatalog catalog_for(const std::vector<AppId>& apps) {
  AppCatalog catalog;
  for (const auto& a : apps)
    catalog.add({a, "some description text", "Tools", 4.0, 10, 0.0, "google"});
  return catalog;
}

}  // namespace

TEST_CASE("load_interactions dedups and applies the min_apps threshold") {
  TempDir dir("ingest_dedup");
  const auto path = dir.write("i.csv",
                              "ifa,bundle_id\n"
                              "u1,a1\n"
                              "u1,a1\n"
                              "u1,a2\n"
                              "u1,a3\n");
  InteractionSet set = load_interactions(path, 3);
  REQUIRE(set.user_count() == 1);
  const UserHistory* h = set.find("u1");
  REQUIRE(h != nullptr);
  CHECK(h->apps == std::vector<AppId>{"a1", "a2", "a3"});
}

TEST_CASE("users below min_apps are removed, empty result is an error") {
  TempDir dir("ingest_minapps");
  const auto path = dir.write("i.csv",
                              "ifa,bundle_id\n"
                              "u1,a1\n"
                              "u1,a2\n");
  CHECK_THROWS_AS(load_interactions(path, 3), EmptyDataset);
}

TEST_CASE("app lists are sorted regardless of row order") {
  TempDir dir("ingest_sort");
  const auto a = dir.write("a.csv",
                           "ifa,bundle_id\nu1,a3\nu1,a1\nu1,a2\nu2,a1\nu2,a2\nu2,a9\n");
  const auto b = dir.write("b.csv",
                           "ifa,bundle_id\nu2,a9\nu2,a2\nu1,a2\nu1,a1\nu1,a3\nu2,a1\n");
  InteractionSet sa = load_interactions(a, 3);
  InteractionSet sb = load_interactions(b, 3);
  CHECK(serialize(sa) == serialize(sb));
  CHECK(sa.find("u1")->apps == std::vector<AppId>{"a1", "a2", "a3"});
}

TEST_CASE("malformed interaction rows abort with the line number") {
  TempDir dir("ingest_malformed");
  const auto path = dir.write("i.csv",
                              "ifa,bundle_id\n"
                              "u1,a1\n"
                              "only_one_field\n");
  try {
    load_interactions(path, 1);
    FAIL("expected MalformedRecord");
  } catch (const MalformedRecord& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load_app_metadata accepts a quoted single record") {
  TempDir dir("meta_single");
  const auto path = dir.write(
      "m.csv",
      "bundle_id,description,genre,avg_rating,num_ratings,price,store\n"
      "a1,\"fast, free flashlight tool\",Tools,4.5,1200,0.0,google\n");
  AppCatalog catalog = load_app_metadata(path);
  REQUIRE(catalog.size() == 1);
  const AppMetadata& m = catalog.at("a1");
  CHECK(m.description == "fast, free flashlight tool");
  CHECK(m.avg_rating == 4.5);
  CHECK(m.num_ratings == 1200);
}

TEST_CASE("avg_rating outside [0,5] is rejected, not clamped") {
  TempDir dir("meta_range");
  const auto path = dir.write(
      "m.csv",
      "bundle_id,description,genre,avg_rating,num_ratings,price,store\n"
      "a1,something,Tools,7.2,10,0.0,google\n");
  CHECK_THROWS_AS(load_app_metadata(path), FieldOutOfRange);
}

TEST_CASE("duplicate bundle ids and empty descriptions are rejected") {
  TempDir dir("meta_dup");
  const auto dup = dir.write(
      "dup.csv",
      "bundle_id,description,genre,avg_rating,num_ratings,price,store\n"
      "a1,text,Tools,4.0,1,0.0,google\n"
      "a1,text2,Tools,4.0,1,0.0,google\n");
  CHECK_THROWS_AS(load_app_metadata(dup), DuplicateAppId);

  const auto empty = dir.write(
      "empty.csv",
      "bundle_id,description,genre,avg_rating,num_ratings,price,store\n"
      "a1,\"   \",Tools,4.0,1,0.0,google\n");
  CHECK_THROWS_AS(load_app_metadata(empty), FieldOutOfRange);
}

TEST_CASE("join_and_prune removes unknown apps then re-filters") {
  TempDir dir("join");
  const auto path = dir.write("i.csv",
                              "ifa,bundle_id\n"
                              "u1,a1\nu1,a2\nu1,a3\n"
                              "u2,a1\nu2,a2\nu2,a4\n");
  InteractionSet set = load_interactions(path, 3);

  SECTION("user loses an app and falls below the threshold") {
    AppCatalog catalog = catalog_for({"a1", "a2", "a4"});  // a3 missing
    InteractionSet joined = join_and_prune(set, catalog, 3);
    CHECK_FALSE(joined.contains("u1"));
    CHECK(joined.contains("u2"));
  }

  SECTION("full catalog is the identity") {
    AppCatalog catalog = catalog_for({"a1", "a2", "a3", "a4"});
    InteractionSet joined = join_and_prune(set, catalog, 3);
    CHECK(serialize(joined) == serialize(set));
  }

  SECTION("idempotence") {
    AppCatalog catalog = catalog_for({"a1", "a2", "a3"});
    InteractionSet once = join_and_prune(set, catalog, 3);
    InteractionSet twice = join_and_prune(once, catalog, 3);
    CHECK(serialize(once) == serialize(twice));
  }

  SECTION("nothing survives") {
    AppCatalog catalog = catalog_for({"zzz"});
    CHECK_THROWS_AS(join_and_prune(set, catalog, 3), EmptyDataset);
  }
}

TEST_CASE("seed labels: coarse groups, filtering, unknown values") {
  TempDir dir("labels");
  const auto ipath = dir.write("i.csv",
                               "ifa,bundle_id\nu1,a1\nu1,a2\nu1,a3\n");
  InteractionSet set = load_interactions(ipath, 3);

  SECTION("group membership by definition") {
    const auto lpath = dir.write("l.csv",
                                 "ifa,gender,age_group\nu1,male,25-34\n");
    SeedLabelSet labels = load_seed_labels(lpath, set);
    const SeedLabel* l = labels.find("u1");
    REQUIRE(l != nullptr);
    CHECK(task_positive(*l, Task::male));
    CHECK(task_positive(*l, Task::age_18_34));
    CHECK_FALSE(task_positive(*l, Task::age_35p));
    CHECK_FALSE(task_positive(*l, Task::female));
  }

  SECTION("labels of filtered-out users are dropped with a warning") {
    const auto lpath = dir.write(
        "l.csv", "ifa,gender,age_group\nu1,male,25-34\nu9,female,55+\n");
    std::vector<std::string> warnings;
    auto saved = warn_handler();
    warn_handler() = [&](const std::string& msg) { warnings.push_back(msg); };
    SeedLabelSet labels = load_seed_labels(lpath, set);
    warn_handler() = saved;
    CHECK(labels.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("u9") != std::string::npos);
  }

  SECTION("unknown enum values error") {
    const auto lpath =
        dir.write("l.csv", "ifa,gender,age_group\nu1,robot,25-34\n");
    CHECK_THROWS_AS(load_seed_labels(lpath, set), UnknownLabelValue);
  }
}

TEST_CASE("user metadata keeps the first occurrence per user") {
  TempDir dir("usermeta");
  const auto path = dir.write("u.csv",
                              "ifa,os,city\n"
                              "u1,iOS,London\n"
                              "u1,Android,Leeds\n");
  UserMetadataSet meta = load_user_metadata(path);
  REQUIRE(meta.size() == 1);
  CHECK(meta.find("u1")->os == "iOS");
  CHECK(meta.find("u1")->city == "London");
}

TEST_CASE("threshold exactness holds on random row sets") {
  Rng rng(2718);
  for (int trial = 0; trial < 40; ++trial) {
    std::ostringstream csv;
    csv << "ifa,bundle_id\n";
    std::map<std::string, std::set<std::string>> truth;
    const std::size_t rows = 1 + uniform_u32(rng, 120);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::string u = "u" + std::to_string(uniform_u32(rng, 12));
      const std::string a = "a" + std::to_string(uniform_u32(rng, 8));
      truth[u].insert(a);
      csv << u << ',' << a << '\n';
    }
    const std::size_t min_apps = 1 + uniform_u32(rng, 4);
    TempDir dir("thresh" + std::to_string(trial));
    const auto path = dir.write("i.csv", csv.str());
    std::size_t expect = 0;
    for (const auto& [_, apps] : truth)
      if (apps.size() >= min_apps) ++expect;
    if (expect == 0) {
      CHECK_THROWS_AS(load_interactions(path, min_apps), EmptyDataset);
      continue;
    }
    InteractionSet set = load_interactions(path, min_apps);
    CHECK(set.user_count() == expect);
    for (const auto& h : set.users()) {
      CHECK(h.apps.size() >= min_apps);
      CHECK(std::set<std::string>(h.apps.begin(), h.apps.end()) ==
            truth[h.user]);
    }
  }
}

TEST_CASE("synthetic corpus survives ingestion with expected counts") {
  SynthConfig config;
  config.n_users = 10;
  config.n_apps = 30;
  config.apps_per_user_min = 5;
  config.apps_per_user_max = 5;
  config.label_fraction = 1.0;
  TempDir dir("synth_ingest");
  SynthData data = synth_generate(config);
  SynthPaths paths = synth_write_files(data, dir.root());

  InteractionSet set = load_interactions(paths.interactions, 3);
  CHECK(set.user_count() == 10);
  CHECK(set.interaction_count() == 50);

  AppCatalog catalog = load_app_metadata(paths.app_meta);
  CHECK(catalog.size() == 30);
  for (const auto& [_, m] : catalog.apps()) {
    CHECK((m.genre == synth_genre(0) || m.genre == synth_genre(1) ||
           m.genre == synth_genre(2) || m.genre == synth_genre(3) ||
           m.genre == synth_genre(4) || m.genre == synth_genre(5)));
  }

  // Prune-then-filter matches a brute-force recount when apps vanish.
  AppCatalog partial;
  std::size_t kept_apps = 0;
  for (const auto& [id, m] : catalog.apps()) {
    if (kept_apps++ % 20 == 19) continue;  // drop 5%
    partial.add(m);
  }
  InteractionSet joined = join_and_prune(set, partial, 3);
  std::size_t expected_users = 0;
  for (const auto& h : set.users()) {
    std::size_t live = 0;
    for (const auto& a : h.apps)
      if (partial.find(a)) ++live;
    if (live >= 3) ++expected_users;
  }
  CHECK(joined.user_count() == expected_users);
}
