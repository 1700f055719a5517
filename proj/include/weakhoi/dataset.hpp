#pragma once

// Dataset records and the JSON-Lines on-disk format. One image per line.
// Category strings in files resolve to vocabulary indices at load; indices
// are never stored on disk. Out-of-bounds proposal boxes are clipped to the
// image at load, not rejected.

#include <string>
#include <vector>

#include <json.hpp>

#include "weakhoi/geometry.hpp"
#include "weakhoi/vocabulary.hpp"

namespace weakhoi {

enum class ProposalKind { human, object };

struct Proposal {
  BBox bbox;
  std::size_t category = 0;  // object-vocabulary index; person for humans
  double score = 0;          // detector confidence in [0,1]
  ProposalKind kind = ProposalKind::object;
  bool background = false;   // set by proposal pruning, nothing else

  bool operator==(const Proposal&) const = default;
};

struct GroundTruthInstance {
  BBox human_bbox;
  BBox object_bbox;
  std::size_t object_category = 0;
  std::size_t verb_category = 0;

  bool operator==(const GroundTruthInstance&) const = default;
};

struct ImageRecord {
  std::string id;
  int width = 0, height = 0;
  std::vector<Proposal> humans;
  std::vector<Proposal> objects;
  std::vector<std::uint8_t> verb_labels;  // binary, one per verb category
  std::vector<std::uint8_t> prep_labels;  // binary, one per preposition category
  bool has_prep_labels = false;
  std::vector<std::string> grounding_refs;  // paths relative to the maps dir
  std::vector<GroundTruthInstance> ground_truth;

  bool operator==(const ImageRecord&) const = default;
};

namespace detail {

inline BBox parse_box(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 4) fail(ctx + ": box must be [x1,y1,x2,y2]");
  for (const auto& v : j)
    if (!v.is_number()) fail(ctx + ": box coordinates must be numbers");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline BBox parse_clipped_box(const json& j, int width, int height, const std::string& ctx) {
  BBox raw = parse_box(j, ctx);
  for (double v : {raw.x1, raw.y1, raw.x2, raw.y2})
    if (!std::isfinite(v)) fail(ctx + ": non-finite box coordinate");
  BBox b = clip_bbox(raw, width, height);
  if (!bbox_valid(b)) fail(ctx + ": degenerate box after clipping to image bounds");
  return b;
}

inline double parse_score(const json& j, const std::string& ctx) {
  if (!j.is_number()) fail(ctx + ": score must be a number");
  double s = j.get<double>();
  if (!(s >= 0.0 && s <= 1.0)) fail(ctx + ": score must lie in [0,1]");
  return s;
}

inline std::vector<std::uint8_t> parse_label_set(const json& j, const Vocabulary& vocab,
                                                 const std::string& ctx) {
  if (!j.is_array()) fail(ctx + ": labels must be a list of strings");
  std::vector<std::uint8_t> bits(vocab.size(), 0);
  for (const auto& v : j) {
    if (!v.is_string()) fail(ctx + ": labels must be strings");
    bits[vocab.require(v.get<std::string>(), ctx)] = 1;
  }
  return bits;
}

inline json labels_to_json(const std::vector<std::uint8_t>& bits, const Vocabulary& vocab) {
  json out = json::array();
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(vocab.name(i));
  return out;
}

}  // namespace detail

inline ImageRecord record_from_json(const json& j, const Vocabulary& verbs,
                                    const Vocabulary& objects, const Vocabulary* preps,
                                    const std::string& ctx) {
  using detail::need_key;
  ImageRecord r;
  const json& id = need_key(j, "id", ctx);
  if (!id.is_string() || id.get<std::string>().empty())
    fail(ctx + ": 'id' must be a non-empty string");
  r.id = id.get<std::string>();
  const std::string rctx = ctx + " (id '" + r.id + "')";

  for (const char* key : {"width", "height"}) {
    const json& v = need_key(j, key, rctx);
    if (!v.is_number_integer() || v.get<int>() <= 0)
      fail(rctx + ": '" + std::string(key) + "' must be a positive integer");
  }
  r.width = j["width"].get<int>();
  r.height = j["height"].get<int>();

  const json& humans = need_key(j, "humans", rctx);
  if (!humans.is_array()) fail(rctx + ": 'humans' must be a list");
  for (const auto& h : humans) {
    Proposal p;
    p.bbox = detail::parse_clipped_box(detail::need_key(h, "box", rctx), r.width, r.height, rctx);
    p.score = detail::parse_score(detail::need_key(h, "score", rctx), rctx);
    p.kind = ProposalKind::human;
    p.category = objects.person_index();
    p.background = h.value("background", false);
    r.humans.push_back(p);
  }

  const json& objs = need_key(j, "objects", rctx);
  if (!objs.is_array()) fail(rctx + ": 'objects' must be a list");
  for (const auto& o : objs) {
    Proposal p;
    p.bbox = detail::parse_clipped_box(detail::need_key(o, "box", rctx), r.width, r.height, rctx);
    p.score = detail::parse_score(detail::need_key(o, "score", rctx), rctx);
    p.kind = ProposalKind::object;
    const json& cat = detail::need_key(o, "category", rctx);
    if (!cat.is_string()) fail(rctx + ": object 'category' must be a string");
    p.category = objects.require(cat.get<std::string>(), rctx);
    p.background = o.value("background", false);
    r.objects.push_back(p);
  }

  r.verb_labels = detail::parse_label_set(need_key(j, "verb_labels", rctx), verbs, rctx);

  if (auto it = j.find("prep_labels"); it != j.end()) {
    if (preps == nullptr) fail(rctx + ": record has prep_labels but no preposition vocabulary");
    r.prep_labels = detail::parse_label_set(*it, *preps, rctx);
    r.has_prep_labels = true;
  } else if (preps != nullptr) {
    r.prep_labels.assign(preps->size(), 0);
  }

  if (auto it = j.find("grounding_maps"); it != j.end()) {
    if (!it->is_array()) fail(rctx + ": 'grounding_maps' must be a list of paths");
    for (const auto& p : *it) {
      if (!p.is_string()) fail(rctx + ": grounding map paths must be strings");
      r.grounding_refs.push_back(p.get<std::string>());
    }
  }

  if (auto it = j.find("ground_truth"); it != j.end()) {
    if (!it->is_array()) fail(rctx + ": 'ground_truth' must be a list");
    for (const auto& g : *it) {
      GroundTruthInstance gt;
      gt.human_bbox = detail::parse_clipped_box(detail::need_key(g, "human_box", rctx), r.width,
                                                r.height, rctx);
      gt.object_bbox = detail::parse_clipped_box(detail::need_key(g, "object_box", rctx), r.width,
                                                 r.height, rctx);
      const json& cat = detail::need_key(g, "object_category", rctx);
      if (!cat.is_string()) fail(rctx + ": ground-truth 'object_category' must be a string");
      gt.object_category = objects.require(cat.get<std::string>(), rctx);
      const json& verb = detail::need_key(g, "verb", rctx);
      if (!verb.is_string()) fail(rctx + ": ground-truth 'verb' must be a string");
      gt.verb_category = verbs.require(verb.get<std::string>(), rctx);
      r.ground_truth.push_back(gt);
    }
  }

  return r;
}

inline json record_to_json(const ImageRecord& r, const Vocabulary& verbs,
                           const Vocabulary& objects, const Vocabulary* preps) {
  json j;
  j["id"] = r.id;
  j["width"] = r.width;
  j["height"] = r.height;
  auto box_json = [](const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); };
  json humans = json::array();
  for (const auto& p : r.humans) {
    json h;
    h["box"] = box_json(p.bbox);
    h["score"] = p.score;
    if (p.background) h["background"] = true;
    humans.push_back(std::move(h));
  }
  j["humans"] = std::move(humans);
  json objs = json::array();
  for (const auto& p : r.objects) {
    json o;
    o["box"] = box_json(p.bbox);
    o["category"] = objects.name(p.category);
    o["score"] = p.score;
    if (p.background) o["background"] = true;
    objs.push_back(std::move(o));
  }
  j["objects"] = std::move(objs);
  j["verb_labels"] = detail::labels_to_json(r.verb_labels, verbs);
  if (r.has_prep_labels) {
    if (preps == nullptr) fail("record '" + r.id + "' has prep_labels but no preposition vocabulary");
    j["prep_labels"] = detail::labels_to_json(r.prep_labels, *preps);
  }
  if (!r.grounding_refs.empty()) j["grounding_maps"] = r.grounding_refs;
  if (!r.ground_truth.empty()) {
    json gts = json::array();
    for (const auto& g : r.ground_truth) {
      json gt;
      gt["human_box"] = box_json(g.human_bbox);
      gt["object_box"] = box_json(g.object_bbox);
      gt["object_category"] = objects.name(g.object_category);
      gt["verb"] = verbs.name(g.verb_category);
      gts.push_back(std::move(gt));
    }
    j["ground_truth"] = std::move(gts);
  }
  return j;
}

inline std::vector<ImageRecord> load_dataset(const fs::path& path, const Vocabulary& verbs,
                                             const Vocabulary& objects,
                                             const Vocabulary* preps = nullptr) {
  std::ifstream in(path);
  if (!in) fail("cannot open dataset file " + path.string());
  std::vector<ImageRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
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
    ImageRecord r = record_from_json(j, verbs, objects, preps, ctx);
    if (!seen.emplace(r.id, line_no).second)
      fail(ctx + ": duplicate image id '" + r.id + "' (first seen on line " +
           std::to_string(seen[r.id]) + ")");
    records.push_back(std::move(r));
  }
  return records;
}

inline std::string serialize_dataset(const std::vector<ImageRecord>& records,
                                     const Vocabulary& verbs, const Vocabulary& objects,
                                     const Vocabulary* preps = nullptr) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r, verbs, objects, preps).dump();
    out += '\n';
  }
  return out;
}

inline void save_dataset(const fs::path& path, const std::vector<ImageRecord>& records,
                         const Vocabulary& verbs, const Vocabulary& objects,
                         const Vocabulary* preps = nullptr) {
  atomic_write(path, serialize_dataset(records, verbs, objects, preps));
}

}  // namespace weakhoi
