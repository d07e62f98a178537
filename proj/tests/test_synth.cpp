#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <map>

#include "hybridrec/ingest.hpp"
#include "hybridrec/lookalike.hpp"
#include "hybridrec/synth.hpp"
#include "support/bayes_oracle.hpp"
#include "support/tmpdir.hpp"

using namespace hybridrec;
using testsupport::TempDir;

TEST_CASE("same seed gives byte-identical output files") {
  SynthConfig config;
  config.n_users = 120;
  config.n_apps = 40;
  TempDir dir("synth_det");
  SynthPaths p1 = synth_write_files(synth_generate(config), dir.path("run1"));
  SynthPaths p2 = synth_write_files(synth_generate(config), dir.path("run2"));
  CHECK(testsupport::read_file(p1.interactions) ==
        testsupport::read_file(p2.interactions));
  CHECK(testsupport::read_file(p1.app_meta) ==
        testsupport::read_file(p2.app_meta));
  CHECK(testsupport::read_file(p1.user_meta) ==
        testsupport::read_file(p2.user_meta));
  CHECK(testsupport::read_file(p1.labels) ==
        testsupport::read_file(p2.labels));
  CHECK(testsupport::read_file(p1.manifest) ==
        testsupport::read_file(p2.manifest));

  SynthConfig other = config;
  other.seed += 1;
  SynthPaths p3 = synth_write_files(synth_generate(other), dir.path("run3"));
  CHECK(testsupport::read_file(p1.interactions) !=
        testsupport::read_file(p3.interactions));
}

TEST_CASE("identity affinity confines each user to one genre") {
  SynthConfig config;
  config.n_users = 40;
  config.n_apps = 40;
  config.n_genres = 5;
  config.apps_per_user_min = 3;
  config.apps_per_user_max = 5;
  config.archetypes = default_archetypes(5);
  for (std::size_t k = 0; k < config.archetypes.size(); ++k) {
    auto& a = config.archetypes[k];
    a.affinity.assign(5, 0.0);
    a.affinity[k % 5] = 1.0;
  }
  SynthData data = synth_generate(config);
  for (const auto& user : data.users) {
    REQUIRE_FALSE(user.apps.empty());
    const std::size_t genre = data.app_genre[user.apps[0]];
    for (auto app : user.apps) CHECK(data.app_genre[app] == genre);
  }
}

TEST_CASE("zero users produce empty files and a valid manifest") {
  SynthConfig config;
  config.n_users = 0;
  config.n_apps = 10;
  TempDir dir("synth_zero");
  SynthData data = synth_generate(config);
  SynthPaths paths = synth_write_files(data, dir.root());
  CHECK(testsupport::read_file(paths.interactions) == "ifa,bundle_id\n");
  CHECK(testsupport::read_file(paths.labels) == "ifa,gender,age_group\n");
  std::ifstream in(paths.manifest);
  nlohmann::json m;
  in >> m;
  CHECK(m.at("n_users") == 0);
  CHECK(m.at("app_genre").size() == 10);
}

TEST_CASE("infeasible configurations are rejected") {
  SynthConfig config;
  config.n_apps = 5;
  config.apps_per_user_max = 12;
  CHECK_THROWS_AS(synth_generate(config), InfeasibleConfig);

  SynthConfig low;
  low.apps_per_user_min = 2;
  CHECK_THROWS_AS(synth_generate(low), InfeasibleConfig);
}

TEST_CASE("every generated user satisfies the min-apps floor") {
  SynthConfig config;
  config.n_users = 200;
  config.n_apps = 50;
  SynthData data = synth_generate(config);
  for (const auto& user : data.users) {
    std::set<std::size_t> distinct(user.apps.begin(), user.apps.end());
    CHECK(distinct.size() >= 3);
    CHECK(distinct.size() == user.apps.size());
  }
}

TEST_CASE("manifest matches a recount of the emitted CSVs") {
  SynthConfig config;
  config.n_users = 300;
  config.n_apps = 60;
  TempDir dir("synth_manifest");
  SynthData data = synth_generate(config);
  SynthPaths paths = synth_write_files(data, dir.root());

  AppCatalog catalog = load_app_metadata(paths.app_meta);
  std::map<std::string, std::size_t> genre_csv;
  for (const auto& [_, m] : catalog.apps()) ++genre_csv[m.genre];
  std::map<std::string, std::size_t> genre_manifest;
  for (const auto& [app, genre] : data.manifest.at("app_genre").items())
    ++genre_manifest[genre.get<std::string>()];
  CHECK(genre_csv == genre_manifest);

  InteractionSet interactions = load_interactions(paths.interactions, 3);
  SeedLabelSet labels = load_seed_labels(paths.labels, interactions);
  std::size_t manifest_labeled = 0;
  for (const auto& [user, row] : data.manifest.at("users").items()) {
    if (!row.at("labeled").get<bool>()) continue;
    ++manifest_labeled;
    const SeedLabel* l = labels.find(user);
    REQUIRE(l != nullptr);
    CHECK(row.at("gender").get<std::string>() == to_string(l->gender));
    CHECK(row.at("age_group").get<std::string>() == to_string(l->age_group));
  }
  CHECK(manifest_labeled == labels.size());
}

TEST_CASE("default-config label marginals stay near archetype priors") {
  SynthConfig config;  // the documented default: 2000 users, 300 apps
  SynthData data = synth_generate(config);

  // data.config carries the validated archetype table with normalized
  // priors; the local config's table is only filled inside generate.
  std::map<std::string, double> prior, observed;
  for (const auto& a : data.config.archetypes) {
    prior[std::string(to_string(a.gender)) + "|" + to_string(a.age_group)] +=
        a.prior;
    observed.emplace(
        std::string(to_string(a.gender)) + "|" + to_string(a.age_group), 0.0);
  }

  std::size_t labeled = 0;
  for (const auto& u : data.users) {
    if (!u.labeled) continue;
    ++labeled;
    const auto& arch = data.config.archetypes[u.archetype];
    observed[std::string(to_string(arch.gender)) + "|" +
             to_string(arch.age_group)] += 1.0;
  }
  REQUIRE(labeled == 600);
  for (auto& [key, count] : observed) {
    const double frac = count / static_cast<double>(labeled);
    CHECK(std::abs(frac - prior[key]) <= 0.03);
  }
}

TEST_CASE("oracle ceiling on the default config is in the designed band") {
  SynthConfig config;
  SynthData data = synth_generate(config);

  double mean_auc = 0.0;
  for (Task task : kAllTasks) {
    std::vector<double> scores;
    std::vector<std::int8_t> y;
    for (const auto& u : data.users) {
      if (!u.labeled) continue;
      scores.push_back(testsupport::oracle_task_score(data, u, task));
      const auto& arch = data.config.archetypes[u.archetype];
      SeedLabel label{u.id, arch.gender, arch.age_group};
      y.push_back(task_positive(label, task) ? 1 : 0);
    }
    mean_auc += auc_roc(scores, y);
  }
  mean_auc /= 9.0;
  INFO("oracle mean AUC = " << mean_auc);
  CHECK(mean_auc >= 0.75);
  CHECK(mean_auc <= 0.95);
}
