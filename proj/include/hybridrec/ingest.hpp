// Loaders for the four CSV inputs plus the catalog join/prune pass.
//
// File formats (UTF-8, RFC-4180):
//   interactions:  ifa,bundle_id
//   app metadata:  bundle_id,description,genre,avg_rating,num_ratings,price,store
//   user metadata: ifa,os,city
//   seed labels:   ifa,gender,age_group
#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "hybridrec/csv.hpp"
#include "hybridrec/data.hpp"
#include "hybridrec/errors.hpp"
#include "hybridrec/strings.hpp"

namespace hybridrec {

namespace detail {

inline std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  return in;
}

inline void expect_header(CsvReader& reader,
                          const std::vector<std::string>& expected,
                          const std::string& path) {
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) want += ',';
      want += expected[i];
    }
    throw MalformedRecord(path + ": expected header '" + want + "'");
  }
}

inline double parse_double_field(const std::string& value,
                                 const std::string& field, std::size_t line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v))
      throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw MalformedRecord("line " + std::to_string(line) + ": field " + field +
                          " is not a number: '" + value + "'");
  }
}

inline std::int64_t parse_int_field(const std::string& value,
                                    const std::string& field,
                                    std::size_t line) {
  try {
    std::size_t pos = 0;
    std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw MalformedRecord("line " + std::to_string(line) + ": field " + field +
                          " is not an integer: '" + value + "'");
  }
}

}  // namespace detail

// Dedups (ifa, bundle_id) pairs, drops users with fewer than `min_apps`
// distinct apps, sorts app lists lexicographically.
inline InteractionSet load_interactions(const std::string& path,
                                        std::size_t min_apps) {
  auto in = detail::open_or_throw(path);
  CsvReader reader(in);
  detail::expect_header(reader, {"ifa", "bundle_id"}, path);

  std::vector<Interaction> pairs;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw MalformedRecord("line " + std::to_string(reader.line()) +
                            ": expected non-empty ifa,bundle_id");
    pairs.push_back({fields[0], fields[1]});
  }
  InteractionSet set = InteractionSet::from_pairs(pairs, min_apps);
  if (set.empty())
    throw EmptyDataset("no users with >= " + std::to_string(min_apps) +
                       " distinct apps in " + path);
  return set;
}

inline AppCatalog load_app_metadata(const std::string& path) {
  auto in = detail::open_or_throw(path);
  CsvReader reader(in);
  detail::expect_header(reader,
                        {"bundle_id", "description", "genre", "avg_rating",
                         "num_ratings", "price", "store"},
                        path);

  AppCatalog catalog;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const std::size_t line = reader.line();
    if (fields.size() != 7)
      throw MalformedRecord("line " + std::to_string(line) +
                            ": expected 7 fields, got " +
                            std::to_string(fields.size()));
    AppMetadata meta;
    meta.app = fields[0];
    meta.description = fields[1];
    meta.genre = fields[2];
    meta.avg_rating = detail::parse_double_field(fields[3], "avg_rating", line);
    meta.num_ratings = detail::parse_int_field(fields[4], "num_ratings", line);
    meta.price = detail::parse_double_field(fields[5], "price", line);
    meta.store = fields[6];

    if (meta.app.empty())
      throw MalformedRecord("line " + std::to_string(line) +
                            ": empty bundle_id");
    if (trim(meta.description).empty())
      throw FieldOutOfRange("description: empty for app " + meta.app);
    if (meta.avg_rating < 0.0 || meta.avg_rating > 5.0)
      throw FieldOutOfRange("avg_rating: " + fields[3] + " for app " +
                            meta.app);
    if (meta.num_ratings < 0)
      throw FieldOutOfRange("num_ratings: " + fields[4] + " for app " +
                            meta.app);
    if (meta.price < 0.0)
      throw FieldOutOfRange("price: " + fields[5] + " for app " + meta.app);
    if (meta.store != "google" && meta.store != "apple")
      throw FieldOutOfRange("store: '" + meta.store + "' for app " + meta.app);
    catalog.add(std::move(meta));
  }
  return catalog;
}

inline UserMetadataSet load_user_metadata(const std::string& path) {
  auto in = detail::open_or_throw(path);
  CsvReader reader(in);
  detail::expect_header(reader, {"ifa", "os", "city"}, path);

  UserMetadataSet set;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() ||
        fields[2].empty())
      throw MalformedRecord("line " + std::to_string(reader.line()) +
                            ": expected non-empty ifa,os,city");
    set.add({fields[0], fields[1], fields[2]});
  }
  return set;
}

// Drops interactions whose app is missing from the catalog, then
// re-applies the min_apps filter. Prune first, then filter.
inline InteractionSet join_and_prune(const InteractionSet& interactions,
                                     const AppCatalog& catalog,
                                     std::size_t min_apps) {
  std::vector<UserHistory> kept;
  for (const auto& h : interactions.users()) {
    UserHistory pruned;
    pruned.user = h.user;
    for (const auto& app : h.apps)
      if (catalog.find(app)) pruned.apps.push_back(app);
    if (pruned.apps.size() >= min_apps) kept.push_back(std::move(pruned));
  }
  if (kept.empty())
    throw EmptyDataset("no users survive the catalog join");
  return InteractionSet(std::move(kept));
}

// Labels of users absent from `interactions` are dropped with a warning.
inline SeedLabelSet load_seed_labels(const std::string& path,
                                     const InteractionSet& interactions) {
  auto in = detail::open_or_throw(path);
  CsvReader reader(in);
  detail::expect_header(reader, {"ifa", "gender", "age_group"}, path);

  SeedLabelSet set;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 3 || fields[0].empty())
      throw MalformedRecord("line " + std::to_string(reader.line()) +
                            ": expected ifa,gender,age_group");
    auto gender = parse_gender(fields[1]);
    if (!gender) throw UnknownLabelValue("gender: '" + fields[1] + "'");
    auto age = parse_age_group(fields[2]);
    if (!age) throw UnknownLabelValue("age_group: '" + fields[2] + "'");
    if (!interactions.contains(fields[0])) {
      warn("seed label for filtered-out user dropped: " + fields[0]);
      continue;
    }
    set.add({fields[0], *gender, *age});
  }
  return set;
}

}  // namespace hybridrec
