#pragma once

// Category vocabularies. Entries are ordered, unique, lowercase strings;
// indices are stable for the lifetime of a run and never written to disk.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "weakhoi/common.hpp"

namespace weakhoi {

using json = nlohmann::json;

namespace detail {

inline const json& need_key(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) fail(ctx + ": missing key '" + key + "'");
  return *it;
}

}  // namespace detail

enum class VocabRole { verb, object, preposition };

inline const char* vocab_role_name(VocabRole r) {
  switch (r) {
    case VocabRole::verb: return "verb";
    case VocabRole::object: return "object";
    case VocabRole::preposition: return "preposition";
  }
  return "?";
}

inline constexpr const char* kPersonCategory = "person";

class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(VocabRole role, std::vector<std::string> entries) : role_(role) {
    entries_ = std::move(entries);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const std::string& e = entries_[i];
      if (e.empty()) fail(std::string(vocab_role_name(role)) + " vocabulary: empty entry");
      if (e != lower_ascii(e))
        fail(std::string(vocab_role_name(role)) + " vocabulary: entry '" + e +
             "' is not lowercase");
      if (!index_.emplace(e, i).second)
        fail(std::string(vocab_role_name(role)) + " vocabulary: duplicate entry '" + e + "'");
    }
    if (role == VocabRole::object && !index_.count(kPersonCategory))
      fail("object vocabulary must contain 'person'");
  }

  static Vocabulary load(const fs::path& path, VocabRole role) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      fail(path.string() + ": not valid JSON: " + e.what());
    }
    if (!j.is_array()) fail(path.string() + ": vocabulary file must be a JSON list of strings");
    std::vector<std::string> entries;
    for (const auto& v : j) {
      if (!v.is_string()) fail(path.string() + ": vocabulary entries must be strings");
      entries.push_back(v.get<std::string>());
    }
    return Vocabulary(role, std::move(entries));
  }

  void save(const fs::path& path) const {
    atomic_write(path, json(entries_).dump() + "\n");
  }

  VocabRole role() const { return role_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }
  const std::string& name(std::size_t i) const { return entries_.at(i); }

  std::optional<std::size_t> find(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Resolve or die; `context` names the offending record for the error.
  std::size_t require(const std::string& s, const std::string& context) const {
    auto i = find(s);
    if (!i)
      fail(context + ": unknown " + vocab_role_name(role_) + " category '" + s + "'");
    return *i;
  }

  std::size_t person_index() const {
    auto i = find(kPersonCategory);
    if (!i) fail("object vocabulary must contain 'person'");
    return *i;
  }

  std::uint64_t hash() const {
    std::string all;
    for (const auto& e : entries_) {
      all += e;
      all += '\n';
    }
    return fnv1a64(all);
  }

 private:
  VocabRole role_ = VocabRole::verb;
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace weakhoi
