#pragma once

// Grounding-map ingestion, proposal scoring, and top-half pruning.
// Maps arrive at image resolution from an external grounding tool; this
// module never runs a vision-language model. Pruning is training-time only.

#include <algorithm>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "weakhoi/dataset.hpp"
#include "weakhoi/inflect.hpp"
#include "weakhoi/labels.hpp"

namespace weakhoi {

enum class MapOrigin { human_caption, object_caption };

struct RawGrid {
  int width = 0, height = 0;
  std::vector<double> values;  // row-major, top row first

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct GroundingMap {
  int width = 0, height = 0;
  std::vector<double> values;  // normalized to [0,1]
  MapOrigin origin = MapOrigin::human_caption;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// ---- GMAP binary format ----
// magic "GMAP", u32le width, u32le height, then width*height IEEE-754 f32le,
// row-major, top row first.

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32le(out, bits);
}

inline float get_f32le(const unsigned char* p) {
  std::uint32_t bits = get_u32le(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline std::string grid_payload(const char* magic, int width, int height,
                                const std::vector<double>& values) {
  std::string out(magic, 4);
  put_u32le(out, static_cast<std::uint32_t>(width));
  put_u32le(out, static_cast<std::uint32_t>(height));
  for (double v : values) put_f32le(out, static_cast<float>(v));
  return out;
}

}  // namespace detail

inline void write_gmap(const fs::path& path, const RawGrid& grid) {
  atomic_write(path, detail::grid_payload("GMAP", grid.width, grid.height, grid.values));
}

inline RawGrid read_gmap(const fs::path& path) {
  std::string bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "GMAP", 4) != 0)
    fail(path.string() + ": not a GMAP file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  RawGrid g;
  g.width = static_cast<int>(detail::get_u32le(p + 4));
  g.height = static_cast<int>(detail::get_u32le(p + 8));
  std::size_t n = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
  if (g.width <= 0 || g.height <= 0 || bytes.size() != 12 + 4 * n)
    fail(path.string() + ": GMAP size mismatch");
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.values[i] = static_cast<double>(detail::get_f32le(p + 12 + 4 * i));
  return g;
}

// Map origin is carried in the file name: "<stem>.gh<k>.gmap" grounds a human
// caption, "<stem>.go<k>.gmap" an object caption.
inline MapOrigin origin_from_path(const fs::path& path) {
  std::string name = path.filename().string();
  if (name.find(".gh") != std::string::npos) return MapOrigin::human_caption;
  if (name.find(".go") != std::string::npos) return MapOrigin::object_caption;
  fail(path.string() + ": cannot classify grounding map origin (expected '.gh' or '.go' in name)");
}

// Min-max normalization into [0,1]. A constant map carries no grounding
// evidence and normalizes to all zeros.
inline GroundingMap normalize_map(const RawGrid& raw, MapOrigin origin) {
  if (raw.values.empty() || raw.width <= 0 || raw.height <= 0) fail("normalize_map: empty grid");
  for (std::size_t i = 0; i < raw.values.size(); ++i)
    if (!std::isfinite(raw.values[i]))
      fail("normalize_map: non-finite value at (" + std::to_string(i % raw.width) + "," +
           std::to_string(i / raw.width) + ")");
  auto [lo_it, hi_it] = std::minmax_element(raw.values.begin(), raw.values.end());
  double lo = *lo_it, hi = *hi_it;
  GroundingMap m;
  m.width = raw.width;
  m.height = raw.height;
  m.origin = origin;
  m.values.resize(raw.values.size());
  if (hi > lo) {
    double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < raw.values.size(); ++i) m.values[i] = (raw.values[i] - lo) * inv;
  }  // else all zeros
  return m;
}

// Mean map value inside the proposal's rasterized box, averaged over the
// caption set. A box that rasterizes to no cells scores 0 with a warning.
inline double grounding_score(const Proposal& p, std::span<const GroundingMap> maps) {
  if (maps.empty()) fail("grounding_score: no maps supplied");
  double total = 0;
  for (const auto& m : maps) {
    CellRange r = raster_cells(p.bbox, m.width, m.height);
    if (r.count() == 0) {
      warn("grounding_score: box rasterizes to zero cells, scoring 0");
      continue;
    }
    double sum = 0;
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) sum += m.at(x, y);
    total += sum / r.count();
  }
  return total / static_cast<double>(maps.size());
}

inline double interaction_score(double g, double detector_score) {
  return g * detector_score;
}

struct InteractionScore {
  std::size_t proposal_index = 0;
  double g = 0;
  double score = 0;  // g * detector confidence
};

inline std::vector<InteractionScore> score_proposals(std::span<const Proposal> proposals,
                                                     std::span<const GroundingMap> maps) {
  std::vector<InteractionScore> out;
  out.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    double g = grounding_score(proposals[i], maps);
    out.push_back({i, g, interaction_score(g, proposals[i].score)});
  }
  return out;
}

namespace detail {

// Flags everything outside the top ceil(count/2) by interaction score as
// background. Ties break by higher detector score, then lower index.
inline void prune_kind(std::vector<Proposal>& proposals, std::span<const GroundingMap> maps) {
  if (proposals.empty()) return;
  auto scored = score_proposals(proposals, maps);
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
    if (proposals[a].score != proposals[b].score) return proposals[a].score > proposals[b].score;
    return a < b;
  });
  std::size_t keep = (proposals.size() + 1) / 2;
  for (std::size_t rank = keep; rank < order.size(); ++rank)
    proposals[order[rank]].background = true;
}

}  // namespace detail

// Top-50% pruning by interaction score, humans and objects independently.
// No proposal is removed; the bottom half is only flagged. Requires maps for
// both origins; with none available the record passes through unchanged.
inline ImageRecord prune_proposals(ImageRecord record, std::span<const GroundingMap> maps_h,
                                   std::span<const GroundingMap> maps_o) {
  if (maps_h.empty() && maps_o.empty()) {
    warn("prune_proposals: no grounding maps for image '" + record.id + "', left unpruned");
    return record;
  }
  for (const auto* maps : {&maps_h, &maps_o})
    for (const auto& m : *maps)
      if (m.width != record.width || m.height != record.height)
        fail("prune_proposals: map dimensions " + std::to_string(m.width) + "x" +
             std::to_string(m.height) + " do not match image '" + record.id + "' (" +
             std::to_string(record.width) + "x" + std::to_string(record.height) + ")");
  if (!maps_h.empty())
    detail::prune_kind(record.humans, maps_h);
  else
    warn("prune_proposals: no human-caption maps for image '" + record.id + "'");
  if (!maps_o.empty())
    detail::prune_kind(record.objects, maps_o);
  else
    warn("prune_proposals: no object-caption maps for image '" + record.id + "'");
  return record;
}

// Loads and normalizes this record's grounding maps, split by origin.
struct ImageMaps {
  std::vector<GroundingMap> human;
  std::vector<GroundingMap> object;
};

inline ImageMaps load_image_maps(const ImageRecord& record, const fs::path& maps_dir) {
  ImageMaps out;
  for (const auto& ref : record.grounding_refs) {
    fs::path path = maps_dir / ref;
    MapOrigin origin = origin_from_path(path);
    GroundingMap m = normalize_map(read_gmap(path), origin);
    (origin == MapOrigin::human_caption ? out.human : out.object).push_back(std::move(m));
  }
  return out;
}

// ---- grounding-caption manifests ----

struct CaptionManifest {
  std::string image_id;
  std::vector<std::string> human_captions;   // one per caption verb
  std::vector<std::string> object_captions;  // one per noun x verb combination
};

inline CaptionManifest build_caption_manifest(const TaggedCaption& caption,
                                              const InflectionTable& inflect = {}) {
  CaptionManifest m;
  m.image_id = caption.image_id;
  auto verbs = caption.verb_lemmas();
  auto nouns = caption.noun_lemmas();
  for (const auto& v : verbs) m.human_captions.push_back("a person is " + inflect.ing(v));
  for (const auto& n : nouns)
    for (const auto& v : verbs)
      m.object_captions.push_back("a " + n + " is being " + inflect.ed(v));
  return m;
}

inline std::string serialize_manifests(const std::vector<CaptionManifest>& manifests) {
  std::string out;
  for (const auto& m : manifests) {
    json j;
    j["image_id"] = m.image_id;
    j["human_captions"] = m.human_captions;
    j["object_captions"] = m.object_captions;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace weakhoi
