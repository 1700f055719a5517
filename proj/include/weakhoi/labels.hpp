#pragma once

// Image-level label extraction from pre-tagged captions and pre-parsed
// <subject, predicate, object> triplets. Tagging and parsing happen upstream;
// this module only applies the set-intersection rules.

#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "weakhoi/vocabulary.hpp"

namespace weakhoi {

enum class Pos { noun, verb, other };

struct TaggedToken {
  std::string surface;
  std::string lemma;  // lowercase, non-empty
  Pos pos = Pos::other;
};

struct TaggedCaption {
  std::string image_id;
  std::vector<TaggedToken> tokens;

  // Unique lemmas in first-occurrence order.
  std::vector<std::string> lemmas_with_pos(Pos p) const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens)
      if (t.pos == p && seen.insert(t.lemma).second) out.push_back(t.lemma);
    return out;
  }
  std::vector<std::string> verb_lemmas() const { return lemmas_with_pos(Pos::verb); }
  std::vector<std::string> noun_lemmas() const { return lemmas_with_pos(Pos::noun); }
};

struct Triplet {
  std::string subject;
  std::string predicate;
  std::string object;
};

class SynonymList {
 public:
  SynonymList() : SynonymList(default_entries()) {}

  explicit SynonymList(const std::vector<std::string>& entries) {
    for (const auto& e : entries) set_.insert(lower_ascii(e));
    if (!set_.count(kPersonCategory)) fail("person synonym list must contain 'person'");
  }

  static const std::vector<std::string>& default_entries() {
    static const std::vector<std::string> v = {
        "person", "man",    "woman", "boy",  "girl",   "child", "kid",
        "people", "guy",    "lady",  "player", "rider", "skier", "surfer"};
    return v;
  }

  static SynonymList load(const fs::path& path) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      fail(path.string() + ": not valid JSON: " + e.what());
    }
    if (!j.is_array()) fail(path.string() + ": synonym file must be a JSON list of strings");
    std::vector<std::string> entries;
    for (const auto& v : j) {
      if (!v.is_string()) fail(path.string() + ": synonym entries must be strings");
      entries.push_back(v.get<std::string>());
    }
    return SynonymList(entries);
  }

  bool contains(const std::string& s) const { return set_.count(s) > 0; }

 private:
  std::unordered_set<std::string> set_;
};

// The 32-entry default preposition vocabulary. Configurable; this is the
// shipped membership.
inline std::vector<std::string> default_preposition_entries() {
  return {"on",      "in",      "at",       "with",    "near",     "under",    "over",
          "behind",  "beside",  "above",    "below",   "against",  "across",   "along",
          "around",  "atop",    "inside",   "outside", "onto",     "into",     "by",
          "beneath", "between", "through",  "toward",  "upon",     "off",      "next_to",
          "in_front_of", "on_top_of", "down", "up"};
}

// Verb labels: the caption's verb lemmas intersected with the verb
// vocabulary, gated on some noun lemma matching the person synonym list.
inline std::set<std::size_t> extract_interaction_labels(const TaggedCaption& caption,
                                                        const Vocabulary& verbs,
                                                        const SynonymList& syn) {
  std::set<std::size_t> out;
  bool has_person = false;
  for (const auto& t : caption.tokens)
    if (t.pos == Pos::noun && syn.contains(t.lemma)) {
      has_person = true;
      break;
    }
  if (!has_person) return out;
  for (const auto& t : caption.tokens) {
    if (t.pos != Pos::verb) continue;
    if (auto i = verbs.find(t.lemma)) out.insert(*i);
  }
  return out;
}

// Preposition labels: unique predicates of triplets whose subject is a person
// synonym and whose predicate is in the preposition vocabulary.
inline std::set<std::size_t> extract_preposition_labels(const std::vector<Triplet>& triplets,
                                                        const Vocabulary& preps,
                                                        const SynonymList& syn) {
  std::set<std::size_t> out;
  for (const auto& t : triplets) {
    if (!syn.contains(t.subject)) continue;
    if (auto i = preps.find(t.predicate)) out.insert(*i);
  }
  return out;
}

// ---- file formats ----

inline Pos parse_pos(const std::string& tag) {
  if (tag == "NOUN") return Pos::noun;
  if (tag == "VERB") return Pos::verb;
  return Pos::other;
}

inline const char* pos_tag(Pos p) {
  switch (p) {
    case Pos::noun: return "NOUN";
    case Pos::verb: return "VERB";
    case Pos::other: return "other";
  }
  return "other";
}

inline std::vector<TaggedCaption> load_tagged_captions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open caption file " + path.string());
  std::vector<TaggedCaption> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = path.filename().string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ctx + ": malformed JSON: " + e.what());
    }
    TaggedCaption c;
    const json& id = detail::need_key(j, "image_id", ctx);
    if (!id.is_string() || id.get<std::string>().empty())
      fail(ctx + ": 'image_id' must be a non-empty string");
    c.image_id = id.get<std::string>();
    const json& tokens = detail::need_key(j, "tokens", ctx);
    if (!tokens.is_array()) fail(ctx + ": 'tokens' must be a list");
    for (const auto& t : tokens) {
      TaggedToken tok;
      const json& lemma = detail::need_key(t, "lemma", ctx);
      if (!lemma.is_string()) fail(ctx + ": token 'lemma' must be a string");
      tok.lemma = lower_ascii(lemma.get<std::string>());
      if (tok.lemma.empty()) fail(ctx + ": empty token lemma");
      tok.surface = t.value("surface", tok.lemma);
      const json& pos = detail::need_key(t, "pos", ctx);
      if (!pos.is_string()) fail(ctx + ": token 'pos' must be a string");
      tok.pos = parse_pos(pos.get<std::string>());
      c.tokens.push_back(std::move(tok));
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct TripletRecord {
  std::string image_id;
  std::vector<Triplet> triplets;
};

inline std::vector<TripletRecord> load_triplets(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open triplet file " + path.string());
  std::vector<TripletRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = path.filename().string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ctx + ": malformed JSON: " + e.what());
    }
    TripletRecord rec;
    const json& id = detail::need_key(j, "image_id", ctx);
    if (!id.is_string() || id.get<std::string>().empty())
      fail(ctx + ": 'image_id' must be a non-empty string");
    rec.image_id = id.get<std::string>();
    const json& trips = detail::need_key(j, "triplets", ctx);
    if (!trips.is_array()) fail(ctx + ": 'triplets' must be a list");
    for (const auto& t : trips) {
      if (!t.is_array() || t.size() != 3) fail(ctx + ": triplets must be [subject,predicate,object]");
      Triplet trip;
      for (std::size_t i = 0; i < 3; ++i)
        if (!t[i].is_string() || t[i].get<std::string>().empty())
          fail(ctx + ": triplet fields must be non-empty strings");
      trip.subject = lower_ascii(t[0].get<std::string>());
      trip.predicate = lower_ascii(t[1].get<std::string>());
      trip.object = lower_ascii(t[2].get<std::string>());
      rec.triplets.push_back(std::move(trip));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

struct ExtractedLabels {
  std::string image_id;
  std::set<std::size_t> verb_indices;
  std::set<std::size_t> prep_indices;
};

// Extract labels for every image seen in either input file. Labels from
// multiple captions or triplet records sharing an image_id are unioned.
// Output order is first appearance across captions then triplets.
inline std::vector<ExtractedLabels> extract_labels(
    const std::vector<TaggedCaption>& captions, const std::vector<TripletRecord>& triplets,
    const Vocabulary& verbs, const Vocabulary& preps, const SynonymList& syn) {
  std::vector<ExtractedLabels> out;
  std::unordered_map<std::string, std::size_t> slot;
  auto slot_of = [&](const std::string& id) -> ExtractedLabels& {
    auto it = slot.find(id);
    if (it == slot.end()) {
      it = slot.emplace(id, out.size()).first;
      out.push_back(ExtractedLabels{id, {}, {}});
    }
    return out[it->second];
  };
  for (const auto& c : captions) {
    auto labels = extract_interaction_labels(c, verbs, syn);
    auto& e = slot_of(c.image_id);
    e.verb_indices.insert(labels.begin(), labels.end());
  }
  for (const auto& t : triplets) {
    auto labels = extract_preposition_labels(t.triplets, preps, syn);
    auto& e = slot_of(t.image_id);
    e.prep_indices.insert(labels.begin(), labels.end());
  }
  return out;
}

inline std::string serialize_labels(const std::vector<ExtractedLabels>& labels,
                                    const Vocabulary& verbs, const Vocabulary& preps) {
  std::string out;
  for (const auto& e : labels) {
    json j;
    j["image_id"] = e.image_id;
    json v = json::array();
    for (std::size_t i : e.verb_indices) v.push_back(verbs.name(i));
    j["verb_labels"] = std::move(v);
    json p = json::array();
    for (std::size_t i : e.prep_indices) p.push_back(preps.name(i));
    j["prep_labels"] = std::move(p);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace weakhoi
