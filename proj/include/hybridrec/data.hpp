// Canonical in-memory data model: usage histories, the app catalog,
// user metadata and seed labels. Everything is immutable after load and
// ordered deterministically (users by id, apps per user by id).
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hybridrec/csv.hpp"
#include "hybridrec/errors.hpp"

namespace hybridrec {

using UserId = std::string;
using AppId = std::string;

struct Interaction {
  UserId user;
  AppId app;
};

struct UserHistory {
  UserId user;
  std::vector<AppId> apps;  // sorted, distinct
};

// Deduplicated (user, app) usage pairs in edge-list form.
class InteractionSet {
 public:
  InteractionSet() = default;

  // `histories` must be sorted by user with sorted distinct app lists;
  // use from_pairs() for raw data.
  explicit InteractionSet(std::vector<UserHistory> histories)
      : users_(std::move(histories)) {
    for (const auto& h : users_) total_ += h.apps.size();
  }

  static InteractionSet from_pairs(const std::vector<Interaction>& pairs,
                                   std::size_t min_apps) {
    std::map<UserId, std::map<AppId, bool>> grouped;
    for (const auto& p : pairs) grouped[p.user][p.app] = true;
    std::vector<UserHistory> hist;
    for (auto& [user, apps] : grouped) {
      if (apps.size() < min_apps) continue;
      UserHistory h;
      h.user = user;
      for (auto& [app, _] : apps) h.apps.push_back(app);
      hist.push_back(std::move(h));
    }
    return InteractionSet(std::move(hist));
  }

  const std::vector<UserHistory>& users() const { return users_; }
  std::size_t user_count() const { return users_.size(); }
  std::size_t interaction_count() const { return total_; }
  bool empty() const { return users_.empty(); }

  bool contains(const UserId& user) const { return find(user) != nullptr; }

  const UserHistory* find(const UserId& user) const {
    auto it = std::lower_bound(
        users_.begin(), users_.end(), user,
        [](const UserHistory& h, const UserId& u) { return h.user < u; });
    if (it == users_.end() || it->user != user) return nullptr;
    return &*it;
  }

  // Canonical CSV form; byte-identical for equal contents.
  void to_csv(std::ostream& out) const {
    out << "ifa,bundle_id\n";
    for (const auto& h : users_)
      for (const auto& a : h.apps) csv_write_row(out, {h.user, a});
  }

 private:
  std::vector<UserHistory> users_;
  std::size_t total_ = 0;
};

struct AppMetadata {
  AppId app;
  std::string description;
  std::string genre;
  double avg_rating = 0.0;   // [0, 5]
  std::int64_t num_ratings = 0;
  double price = 0.0;
  std::string store;         // google | apple
};

class AppCatalog {
 public:
  void add(AppMetadata meta) {
    auto [it, inserted] = apps_.emplace(meta.app, std::move(meta));
    if (!inserted) throw DuplicateAppId("duplicate bundle_id: " + it->first);
  }

  const AppMetadata* find(const AppId& app) const {
    auto it = apps_.find(app);
    return it == apps_.end() ? nullptr : &it->second;
  }

  const AppMetadata& at(const AppId& app) const {
    const AppMetadata* m = find(app);
    if (!m) throw UnknownApp("app not in catalog: " + app);
    return *m;
  }

  std::size_t size() const { return apps_.size(); }
  const std::map<AppId, AppMetadata>& apps() const { return apps_; }

 private:
  std::map<AppId, AppMetadata> apps_;
};

struct UserMetadata {
  UserId user;
  std::string os;
  std::string city;
};

class UserMetadataSet {
 public:
  // First occurrence per user wins; os/city vocabularies are whatever
  // the data contains.
  void add(UserMetadata meta) { users_.try_emplace(meta.user, std::move(meta)); }

  const UserMetadata* find(const UserId& user) const {
    auto it = users_.find(user);
    return it == users_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return users_.size(); }
  const std::map<UserId, UserMetadata>& users() const { return users_; }

  std::vector<std::string> os_vocab() const {
    std::map<std::string, bool> seen;
    for (const auto& [_, m] : users_) seen[m.os] = true;
    std::vector<std::string> out;
    for (const auto& [v, _] : seen) out.push_back(v);
    return out;
  }

  std::vector<std::string> city_vocab() const {
    std::map<std::string, bool> seen;
    for (const auto& [_, m] : users_) seen[m.city] = true;
    std::vector<std::string> out;
    for (const auto& [v, _] : seen) out.push_back(v);
    return out;
  }

 private:
  std::map<UserId, UserMetadata> users_;
};

enum class Gender : std::uint8_t { male, female };
enum class AgeGroup : std::uint8_t { g18_24, g25_34, g35_44, g45_54, g55p };

inline const char* to_string(Gender g) {
  return g == Gender::male ? "male" : "female";
}

inline const char* to_string(AgeGroup a) {
  switch (a) {
    case AgeGroup::g18_24: return "18-24";
    case AgeGroup::g25_34: return "25-34";
    case AgeGroup::g35_44: return "35-44";
    case AgeGroup::g45_54: return "45-54";
    default: return "55+";
  }
}

inline std::optional<Gender> parse_gender(const std::string& s) {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  return std::nullopt;
}

inline std::optional<AgeGroup> parse_age_group(const std::string& s) {
  if (s == "18-24") return AgeGroup::g18_24;
  if (s == "25-34") return AgeGroup::g25_34;
  if (s == "35-44") return AgeGroup::g35_44;
  if (s == "45-54") return AgeGroup::g45_54;
  if (s == "55+") return AgeGroup::g55p;
  return std::nullopt;
}

struct SeedLabel {
  UserId user;
  Gender gender;
  AgeGroup age_group;
};

// The nine binary prediction tasks: two genders, five fine age groups,
// two coarse groups (18-34 = 18-24 u 25-34, 35+ = the rest).
enum class Task : std::uint8_t {
  male, female, age_18_24, age_25_34, age_35_44, age_45_54, age_55p,
  age_18_34, age_35p
};

inline constexpr std::array<Task, 9> kAllTasks = {
    Task::male,      Task::female,    Task::age_18_24,
    Task::age_25_34, Task::age_35_44, Task::age_45_54,
    Task::age_55p,   Task::age_18_34, Task::age_35p};

inline const char* to_string(Task t) {
  switch (t) {
    case Task::male: return "male";
    case Task::female: return "female";
    case Task::age_18_24: return "18-24";
    case Task::age_25_34: return "25-34";
    case Task::age_35_44: return "35-44";
    case Task::age_45_54: return "45-54";
    case Task::age_55p: return "55+";
    case Task::age_18_34: return "18-34";
    default: return "35+";
  }
}

inline bool task_positive(const SeedLabel& label, Task t) {
  switch (t) {
    case Task::male: return label.gender == Gender::male;
    case Task::female: return label.gender == Gender::female;
    case Task::age_18_24: return label.age_group == AgeGroup::g18_24;
    case Task::age_25_34: return label.age_group == AgeGroup::g25_34;
    case Task::age_35_44: return label.age_group == AgeGroup::g35_44;
    case Task::age_45_54: return label.age_group == AgeGroup::g45_54;
    case Task::age_55p: return label.age_group == AgeGroup::g55p;
    case Task::age_18_34:
      return label.age_group == AgeGroup::g18_24 ||
             label.age_group == AgeGroup::g25_34;
    default:
      return label.age_group == AgeGroup::g35_44 ||
             label.age_group == AgeGroup::g45_54 ||
             label.age_group == AgeGroup::g55p;
  }
}

class SeedLabelSet {
 public:
  void add(SeedLabel label) { labels_[label.user] = label; }

  const std::map<UserId, SeedLabel>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  const SeedLabel* find(const UserId& user) const {
    auto it = labels_.find(user);
    return it == labels_.end() ? nullptr : &it->second;
  }

 private:
  std::map<UserId, SeedLabel> labels_;
};

}  // namespace hybridrec
