// Similarity queries over a tagged vector space: cosine, exact top-k
// with lexicographic tie-breaking, and signed vector arithmetic.
//
// Text vector format (shared across modules): first line `<count> <dim>`,
// then one `tag v1 ... vN` line per vector.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hybridrec/errors.hpp"

namespace hybridrec {

inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionMismatch("cosine of " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + " dims");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

enum class TagKind : std::uint8_t { user, app, other };

inline TagKind tag_kind(const std::string& tag) {
  if (tag.rfind("user:", 0) == 0) return TagKind::user;
  if (tag.rfind("app:", 0) == 0) return TagKind::app;
  return TagKind::other;
}

enum class CandidateFilter : std::uint8_t { apps, users, all };

inline CandidateFilter parse_filter(const std::string& s) {
  if (s == "apps") return CandidateFilter::apps;
  if (s == "users") return CandidateFilter::users;
  if (s == "all") return CandidateFilter::all;
  throw ConfigInvalid("unknown filter: " + s);
}

class VectorSpace {
 public:
  VectorSpace() = default;

  void insert(const std::string& tag, std::vector<double> vec) {
    if (vec.empty()) throw DimensionMismatch("empty vector for tag " + tag);
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_)
      throw DimensionMismatch("tag " + tag + " has dim " +
                              std::to_string(vec.size()) + ", space has " +
                              std::to_string(dim_));
    double norm = 0.0;
    for (double x : vec) {
      if (!std::isfinite(x))
        throw DimensionMismatch("non-finite component in vector " + tag);
      norm += x * x;
    }
    if (norm == 0.0) throw ZeroVector("zero vector rejected for tag " + tag);
    vectors_[tag] = std::move(vec);
  }

  bool contains(const std::string& tag) const { return vectors_.count(tag); }

  const std::vector<double>& at(const std::string& tag) const {
    auto it = vectors_.find(tag);
    if (it == vectors_.end()) throw UnknownTag("unknown tag: " + tag);
    return it->second;
  }

  std::size_t size() const { return vectors_.size(); }
  std::size_t dimension() const { return dim_; }
  const std::map<std::string, std::vector<double>>& vectors() const {
    return vectors_;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + path);
    out << vectors_.size() << ' ' << dim_ << '\n';
    char buf[64];
    for (const auto& [tag, vec] : vectors_) {
      out << tag;
      for (double x : vec) {
        auto res = std::to_chars(buf, buf + sizeof(buf), x);
        out.put(' ');
        out.write(buf, res.ptr - buf);
      }
      out.put('\n');
    }
  }

  static VectorSpace load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open vectors: " + path);
    std::size_t count = 0, dim = 0;
    if (!(in >> count >> dim) || dim == 0)
      throw MalformedRecord("bad vector file header in " + path);
    VectorSpace space;
    std::string tag;
    for (std::size_t i = 0; i < count; ++i) {
      if (!(in >> tag))
        throw MalformedRecord("truncated vector file: " + path);
      std::vector<double> vec(dim);
      for (auto& x : vec)
        if (!(in >> x))
          throw MalformedRecord("truncated vector line for tag " + tag);
      space.insert(tag, std::move(vec));
    }
    return space;
  }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::size_t dim_ = 0;
};

struct ScoredTag {
  std::string tag;
  double similarity;
};

namespace detail {

inline bool filter_admits(CandidateFilter f, const std::string& tag) {
  switch (f) {
    case CandidateFilter::apps: return tag_kind(tag) == TagKind::app;
    case CandidateFilter::users: return tag_kind(tag) == TagKind::user;
    default: return true;
  }
}

}  // namespace detail

// Exact scan: descending cosine, ties broken lexicographically by tag,
// `exclude_tag` (the query's own) skipped.
inline std::vector<ScoredTag> top_k(const VectorSpace& space,
                                    std::span<const double> query,
                                    std::size_t k, CandidateFilter filter,
                                    const std::string& exclude_tag = "") {
  if (k < 1) throw ConfigInvalid("k must be >= 1");
  std::vector<ScoredTag> scored;
  for (const auto& [tag, vec] : space.vectors()) {
    if (tag == exclude_tag) continue;
    if (!detail::filter_admits(filter, tag)) continue;
    scored.push_back({tag, cosine(query, vec)});
  }
  std::sort(scored.begin(), scored.end(),
            [](const ScoredTag& a, const ScoredTag& b) {
              if (a.similarity != b.similarity)
                return a.similarity > b.similarity;
              return a.tag < b.tag;
            });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

inline std::vector<ScoredTag> top_k(const VectorSpace& space,
                                    const std::string& query_tag,
                                    std::size_t k, CandidateFilter filter) {
  const auto& q = space.at(query_tag);
  return top_k(space, q, k, filter, query_tag);
}

// Signed sum of referenced vectors, e.g. {{+,"user:b"},{+,"app:x"}}.
// The result may be the zero vector; callers feeding it to cosine get
// ZeroVector.
inline std::vector<double> vector_arith(
    const VectorSpace& space,
    const std::vector<std::pair<bool, std::string>>& signed_tags) {
  if (signed_tags.empty()) throw ConfigInvalid("empty arithmetic expression");
  std::vector<double> acc(space.dimension(), 0.0);
  for (const auto& [positive, tag] : signed_tags) {
    const auto& v = space.at(tag);
    for (std::size_t i = 0; i < v.size(); ++i)
      acc[i] += positive ? v[i] : -v[i];
  }
  return acc;
}

inline bool is_zero_vector(std::span<const double> v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

}  // namespace hybridrec
