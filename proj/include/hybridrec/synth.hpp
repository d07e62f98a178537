// Synthetic dataset generator with planted structure: apps carry
// genres, users draw apps through archetype (gender x age) genre
// affinities, and OS/city follow archetype-conditional distributions.
// Ground truth goes into a JSON manifest next to the CSVs.
#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridrec/config.hpp"
#include "hybridrec/csv.hpp"
#include "hybridrec/data.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/rng.hpp"

namespace hybridrec {

struct ArchetypeSpec {
  Gender gender;
  AgeGroup age_group;
  double prior = 0.1;
  std::vector<double> affinity;  // per genre, positive weights
};

struct SynthConfig {
  std::size_t n_users = 2000;
  std::size_t n_apps = 300;
  std::size_t n_genres = 6;
  std::size_t vocab_per_genre = 60;
  std::size_t noise_vocab = 150;
  std::size_t desc_len_min = 30;
  std::size_t desc_len_max = 60;
  std::size_t apps_per_user_min = 4;
  std::size_t apps_per_user_max = 12;
  double genre_word_fraction = 0.7;  // rest from the shared noise vocab
  double label_fraction = 0.3;
  double affinity_temperature = 1.0;  // >1 flattens, <1 sharpens
  double popularity_skew = 0.0;       // 0 = uniform app popularity
  std::uint64_t seed = 20240501;
  std::vector<ArchetypeSpec> archetypes;  // defaults filled on validate()

  void validate();
};

inline const std::vector<std::string>& synth_genre_names() {
  static const std::vector<std::string> names = {
      "Arcade", "Puzzle", "Tools",   "Social", "Sports",
      "Finance", "Music", "Travel", "Weather", "News"};
  return names;
}

inline std::string synth_genre(std::size_t g) {
  const auto& names = synth_genre_names();
  return g < names.size() ? names[g] : "Genre" + std::to_string(g);
}

// Default archetype table: gender anchors two genres, age group anchors
// one or two more. Boost magnitudes put the oracle ceiling of the
// look-alike tasks around 0.85 mean AUC at temperature 1.
inline std::vector<ArchetypeSpec> default_archetypes(std::size_t n_genres) {
  constexpr std::array<double, 5> age_priors = {0.20, 0.30, 0.20, 0.17, 0.13};
  std::vector<ArchetypeSpec> table;
  for (int gi = 0; gi < 2; ++gi) {
    const Gender gender = gi == 0 ? Gender::male : Gender::female;
    for (int ai = 0; ai < 5; ++ai) {
      ArchetypeSpec spec;
      spec.gender = gender;
      spec.age_group = static_cast<AgeGroup>(ai);
      spec.prior = 0.5 * age_priors[ai];
      spec.affinity.assign(n_genres, 1.0);
      auto boost = [&](std::size_t genre, double amount) {
        if (genre < n_genres) spec.affinity[genre] += amount;
      };
      if (gender == Gender::male) {
        boost(0, 2.2);  // arcade
        boost(4, 2.2);  // sports
      } else {
        boost(1, 2.2);  // puzzle
        boost(3, 2.2);  // social
      }
      switch (spec.age_group) {
        case AgeGroup::g18_24: boost(3, 1.8); boost(0, 0.9); break;
        case AgeGroup::g25_34: boost(4, 1.2); boost(3, 0.6); break;
        case AgeGroup::g35_44: boost(2, 1.8); break;
        case AgeGroup::g45_54: boost(5, 1.6); boost(2, 0.8); break;
        case AgeGroup::g55p:   boost(5, 2.2); boost(1, 1.0); break;
      }
      table.push_back(std::move(spec));
    }
  }
  return table;
}

inline void SynthConfig::validate() {
  if (n_apps == 0 && n_users > 0)
    throw InfeasibleConfig("users without apps");
  if (n_users > 0) {
    if (apps_per_user_min < 3)
      throw InfeasibleConfig("apps_per_user_min must be >= 3");
    if (apps_per_user_max < apps_per_user_min)
      throw InfeasibleConfig("apps_per_user range is empty");
    if (apps_per_user_max > n_apps)
      throw InfeasibleConfig("apps_per_user_max exceeds n_apps");
  }
  if (n_genres < 1 || n_genres > 10)
    throw InfeasibleConfig("n_genres must be in [1, 10]");
  if (vocab_per_genre < 1 || vocab_per_genre > 100)
    throw InfeasibleConfig("vocab_per_genre must be in [1, 100]");
  if (noise_vocab > 1000) throw InfeasibleConfig("noise_vocab too large");
  if (desc_len_min < 1 || desc_len_max < desc_len_min)
    throw InfeasibleConfig("description length range is empty");
  if (genre_word_fraction < 0.0 || genre_word_fraction > 1.0)
    throw InfeasibleConfig("genre_word_fraction must be in [0, 1]");
  if (label_fraction < 0.0 || label_fraction > 1.0)
    throw InfeasibleConfig("label_fraction must be in [0, 1]");
  if (affinity_temperature <= 0.0)
    throw InfeasibleConfig("affinity_temperature must be > 0");
  if (archetypes.empty()) archetypes = default_archetypes(n_genres);
  double total = 0.0;
  for (const auto& a : archetypes) {
    if (a.affinity.size() != n_genres)
      throw InfeasibleConfig("affinity row length != n_genres");
    for (double w : a.affinity)
      if (w < 0.0) throw InfeasibleConfig("negative affinity weight");
    if (a.prior < 0.0) throw InfeasibleConfig("negative archetype prior");
    total += a.prior;
  }
  if (n_users > 0 && total <= 0.0)
    throw InfeasibleConfig("archetype priors sum to zero");
  for (auto& a : archetypes) a.prior /= total > 0.0 ? total : 1.0;
}

inline SynthConfig synth_config_from_kv(const KeyValueConfig& kv) {
  SynthConfig c;
  c.n_users = static_cast<std::size_t>(kv.get_int("n_users", c.n_users));
  c.n_apps = static_cast<std::size_t>(kv.get_int("n_apps", c.n_apps));
  c.n_genres = static_cast<std::size_t>(kv.get_int("n_genres", c.n_genres));
  c.vocab_per_genre =
      static_cast<std::size_t>(kv.get_int("vocab_per_genre", c.vocab_per_genre));
  c.noise_vocab =
      static_cast<std::size_t>(kv.get_int("noise_vocab", c.noise_vocab));
  c.desc_len_min =
      static_cast<std::size_t>(kv.get_int("desc_len_min", c.desc_len_min));
  c.desc_len_max =
      static_cast<std::size_t>(kv.get_int("desc_len_max", c.desc_len_max));
  c.apps_per_user_min = static_cast<std::size_t>(
      kv.get_int("apps_per_user_min", c.apps_per_user_min));
  c.apps_per_user_max = static_cast<std::size_t>(
      kv.get_int("apps_per_user_max", c.apps_per_user_max));
  c.genre_word_fraction =
      kv.get_double("genre_word_fraction", c.genre_word_fraction);
  c.label_fraction = kv.get_double("label_fraction", c.label_fraction);
  c.affinity_temperature =
      kv.get_double("affinity_temperature", c.affinity_temperature);
  c.popularity_skew = kv.get_double("popularity_skew", c.popularity_skew);
  c.seed = kv.get_u64("seed", c.seed);
  return c;
}

namespace detail {

// Pronounceable pseudo-words from CV syllables. All syllables end in a
// vowel, so the stemmer leaves the words alone (no s/ed/ing endings)
// and every description word survives normalization as one token.
inline std::string synth_word(std::size_t id) {
  static const std::array<const char*, 10> syllables = {
      "ba", "de", "ki", "lo", "mu", "na", "po", "ra", "su", "ti"};
  std::string w;
  std::size_t v = id;
  for (int d = 0; d < 4; ++d) {
    w.insert(0, syllables[v % 10]);
    v /= 10;
  }
  return w;
}

inline std::string format_fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace detail

struct SynthUser {
  UserId id;
  std::size_t archetype;
  std::vector<std::size_t> apps;  // app indices, sorted
  std::string os;
  std::string city;
  bool labeled = false;
};

struct SynthData {
  SynthConfig config;
  std::vector<AppMetadata> apps;          // index-aligned
  std::vector<std::size_t> app_genre;     // genre index per app
  std::vector<SynthUser> users;
  nlohmann::json manifest;
};

inline SynthData synth_generate(SynthConfig config) {
  config.validate();
  Rng rng(config.seed);
  SynthData data;
  data.config = config;

  // Apps: genres round-robin, descriptions 70/30 genre/noise vocabulary.
  const std::size_t genre_word_base = 1000;
  const std::size_t noise_word_base = 8000;
  for (std::size_t a = 0; a < config.n_apps; ++a) {
    const std::size_t genre = a % config.n_genres;
    AppMetadata meta;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "com.synth.a%05zu", a);
    meta.app = idbuf;
    meta.genre = synth_genre(genre);
    const std::size_t len =
        config.desc_len_min +
        uniform_u64(rng, config.desc_len_max - config.desc_len_min + 1);
    std::string desc;
    for (std::size_t w = 0; w < len; ++w) {
      std::size_t word_id;
      if (uniform_real(rng) < config.genre_word_fraction ||
          config.noise_vocab == 0) {
        word_id = genre_word_base + genre * 100 +
                  uniform_u64(rng, config.vocab_per_genre);
      } else {
        word_id = noise_word_base + uniform_u64(rng, config.noise_vocab);
      }
      if (!desc.empty()) desc.push_back(' ');
      desc += detail::synth_word(word_id);
    }
    meta.description = desc;
    meta.price = uniform_real(rng) < 0.6
                     ? 0.0
                     : std::stod(detail::format_fixed(
                           uniform_range(rng, 0.5, 8.0), 2));
    meta.avg_rating =
        std::stod(detail::format_fixed(uniform_range(rng, 2.0, 5.0), 1));
    meta.num_ratings = static_cast<std::int64_t>(
        std::pow(10.0, uniform_range(rng, 0.0, 5.0)));
    meta.store = uniform_real(rng) < 0.5 ? "google" : "apple";
    data.apps.push_back(std::move(meta));
    data.app_genre.push_back(genre);
  }

  // Per-archetype app weights: affinity^(1/temperature), optional
  // popularity skew by app index.
  std::vector<std::vector<double>> app_weights(config.archetypes.size());
  for (std::size_t k = 0; k < config.archetypes.size(); ++k) {
    app_weights[k].resize(config.n_apps);
    for (std::size_t a = 0; a < config.n_apps; ++a) {
      double w = std::pow(config.archetypes[k].affinity[data.app_genre[a]],
                          1.0 / config.affinity_temperature);
      if (config.popularity_skew > 0.0)
        w /= std::pow(static_cast<double>(a + 1), config.popularity_skew);
      app_weights[k][a] = w;
    }
  }

  std::vector<double> archetype_prior;
  for (const auto& a : config.archetypes) archetype_prior.push_back(a.prior);

  static const std::array<const char*, 6> cities = {
      "London", "Manchester", "Leeds", "Bristol", "Glasgow", "Cardiff"};
  // City anchor per age group; anchors get weight 4, others 1.
  static const std::array<int, 5> city_anchor = {0, 1, 2, 3, 5};

  for (std::size_t u = 0; u < config.n_users; ++u) {
    SynthUser user;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "ifa%06zu", u);
    user.id = idbuf;
    user.archetype = weighted_pick(rng, archetype_prior, 1.0);
    const ArchetypeSpec& arch = config.archetypes[user.archetype];

    const std::size_t n_apps =
        config.apps_per_user_min +
        uniform_u64(rng,
                    config.apps_per_user_max - config.apps_per_user_min + 1);
    std::vector<double> weights = app_weights[user.archetype];
    double total = 0.0;
    for (double w : weights) total += w;
    std::set<std::size_t> picked;
    while (picked.size() < n_apps && total > 1e-12) {
      const std::size_t a = weighted_pick(rng, weights, total);
      if (weights[a] <= 0.0) break;
      picked.insert(a);
      total -= weights[a];
      weights[a] = 0.0;
    }
    user.apps.assign(picked.begin(), picked.end());

    const int age_index = static_cast<int>(arch.age_group);
    double p_ios = 0.65 - 0.09 * age_index;
    if (arch.gender == Gender::female) p_ios += 0.06;
    user.os = uniform_real(rng) < p_ios ? "iOS" : "Android";
    std::vector<double> city_w(cities.size(), 1.0);
    city_w[city_anchor[age_index]] = 4.0;
    double city_total = 0.0;
    for (double w : city_w) city_total += w;
    user.city = cities[weighted_pick(rng, city_w, city_total)];
    data.users.push_back(std::move(user));
  }

  // Labeled subset: seeded shuffle, first floor(fraction * n).
  std::vector<std::size_t> order(data.users.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);
  const std::size_t n_labeled = static_cast<std::size_t>(
      config.label_fraction * static_cast<double>(data.users.size()));
  for (std::size_t i = 0; i < n_labeled; ++i)
    data.users[order[i]].labeled = true;

  // Manifest: everything a verification pass needs.
  nlohmann::json m;
  m["seed"] = config.seed;
  m["n_users"] = config.n_users;
  m["n_apps"] = config.n_apps;
  m["n_genres"] = config.n_genres;
  m["label_fraction"] = config.label_fraction;
  m["affinity_temperature"] = config.affinity_temperature;
  for (std::size_t k = 0; k < config.archetypes.size(); ++k) {
    const auto& a = config.archetypes[k];
    nlohmann::json row;
    row["gender"] = to_string(a.gender);
    row["age_group"] = to_string(a.age_group);
    row["prior"] = a.prior;
    row["affinity"] = a.affinity;
    m["archetypes"].push_back(row);
  }
  for (std::size_t a = 0; a < data.apps.size(); ++a)
    m["app_genre"][data.apps[a].app] = synth_genre(data.app_genre[a]);
  for (const auto& user : data.users) {
    const auto& arch = config.archetypes[user.archetype];
    nlohmann::json row;
    row["archetype"] = user.archetype;
    row["gender"] = to_string(arch.gender);
    row["age_group"] = to_string(arch.age_group);
    row["labeled"] = user.labeled;
    m["users"][user.id] = row;
  }
  data.manifest = std::move(m);
  return data;
}

struct SynthPaths {
  std::string interactions;
  std::string app_meta;
  std::string user_meta;
  std::string labels;
  std::string manifest;
};

inline SynthPaths synth_write_files(const SynthData& data,
                                    const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  SynthPaths paths;
  paths.interactions = (fs::path(out_dir) / "interactions.csv").string();
  paths.app_meta = (fs::path(out_dir) / "app_meta.csv").string();
  paths.user_meta = (fs::path(out_dir) / "user_meta.csv").string();
  paths.labels = (fs::path(out_dir) / "labels.csv").string();
  paths.manifest = (fs::path(out_dir) / "manifest.json").string();

  {
    std::ofstream out(paths.interactions, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + paths.interactions);
    out << "ifa,bundle_id\n";
    for (const auto& u : data.users)
      for (auto a : u.apps) csv_write_row(out, {u.id, data.apps[a].app});
  }
  {
    std::ofstream out(paths.app_meta, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + paths.app_meta);
    out << "bundle_id,description,genre,avg_rating,num_ratings,price,store\n";
    for (const auto& app : data.apps)
      csv_write_row(out, {app.app, app.description, app.genre,
                          detail::format_fixed(app.avg_rating, 1),
                          std::to_string(app.num_ratings),
                          detail::format_fixed(app.price, 2), app.store});
  }
  {
    std::ofstream out(paths.user_meta, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + paths.user_meta);
    out << "ifa,os,city\n";
    for (const auto& u : data.users) csv_write_row(out, {u.id, u.os, u.city});
  }
  {
    std::ofstream out(paths.labels, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + paths.labels);
    out << "ifa,gender,age_group\n";
    for (const auto& u : data.users) {
      if (!u.labeled) continue;
      const auto& arch = data.config.archetypes[u.archetype];
      csv_write_row(out, {u.id, to_string(arch.gender),
                          to_string(arch.age_group)});
    }
  }
  {
    std::ofstream out(paths.manifest, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + paths.manifest);
    out << data.manifest.dump(2) << "\n";
  }
  return paths;
}

}  // namespace hybridrec
