#pragma once

// Binary interaction-plausibility table over object x verb categories, built
// from verb-given-object probability distributions produced upstream by a
// language model. A verb is plausible for an object when its probability
// strictly exceeds the row mean; a fully uniform row marks every verb
// plausible so an uninformative prior never vetoes an object outright.

#include <string>
#include <vector>

#include <json.hpp>

#include "weakhoi/vocabulary.hpp"

namespace weakhoi {

struct VerbDistribution {
  std::size_t object_category = 0;
  std::vector<double> probs;  // over the verb vocabulary, sums to 1
};

class PlausibilityTable {
 public:
  PlausibilityTable() = default;
  PlausibilityTable(std::size_t n_objects, std::size_t n_verbs)
      : n_objects_(n_objects), n_verbs_(n_verbs), bits_(n_objects * n_verbs, 0) {}

  bool at(std::size_t object_cat, std::size_t verb_cat) const {
    return bits_.at(object_cat * n_verbs_ + verb_cat) != 0;
  }
  void set(std::size_t object_cat, std::size_t verb_cat, bool v) {
    bits_.at(object_cat * n_verbs_ + verb_cat) = v ? 1 : 0;
  }
  std::size_t n_objects() const { return n_objects_; }
  std::size_t n_verbs() const { return n_verbs_; }

 private:
  std::size_t n_objects_ = 0, n_verbs_ = 0;
  std::vector<std::uint8_t> bits_;
};

inline PlausibilityTable build_table(const std::vector<VerbDistribution>& dists,
                                     std::size_t n_objects, std::size_t n_verbs,
                                     const Vocabulary* objects = nullptr) {
  std::vector<const VerbDistribution*> by_cat(n_objects, nullptr);
  for (const auto& d : dists) {
    if (d.object_category >= n_objects) fail("build_table: object category index out of range");
    by_cat[d.object_category] = &d;
  }
  std::string missing;
  for (std::size_t c = 0; c < n_objects; ++c)
    if (by_cat[c] == nullptr) {
      if (!missing.empty()) missing += ", ";
      missing += objects ? "'" + objects->name(c) + "'" : std::to_string(c);
    }
  if (!missing.empty()) fail("build_table: missing distributions for object categories " + missing);

  PlausibilityTable table(n_objects, n_verbs);
  for (std::size_t c = 0; c < n_objects; ++c) {
    const auto& p = by_cat[c]->probs;
    if (p.size() != n_verbs) fail("build_table: distribution width mismatch");
    double mean = 0;
    for (double v : p) mean += v;
    mean /= static_cast<double>(n_verbs);
    bool any = false;
    for (std::size_t k = 0; k < n_verbs; ++k) {
      bool plausible = p[k] > mean;
      table.set(c, k, plausible);
      any = any || plausible;
    }
    if (!any)  // exactly uniform row: everything plausible
      for (std::size_t k = 0; k < n_verbs; ++k) table.set(c, k, true);
  }
  return table;
}

// Confidence doubling for plausible predictions; used only to rank detections.
inline double rescore(double score, std::size_t object_cat, std::size_t verb_cat,
                      const PlausibilityTable& table) {
  return score * (1.0 + (table.at(object_cat, verb_cat) ? 1.0 : 0.0));
}

// ---- files ----
// Distribution file: {"source": "mlm"|"mcqa"|"other",
//                     "objects": [{"category": ..., "probs": {"verb": p, ...}}]}
// Verbs absent from a probs map count as probability 0. Rows renormalize to
// sum 1 at load.

struct DistributionFile {
  std::string source;
  std::vector<VerbDistribution> dists;
};

inline DistributionFile load_distributions(const fs::path& path, const Vocabulary& objects,
                                           const Vocabulary& verbs) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(path.string() + ": not valid JSON: " + e.what());
  }
  const std::string ctx = path.filename().string();
  DistributionFile out;
  const json& source = detail::need_key(j, "source", ctx);
  if (!source.is_string()) fail(ctx + ": 'source' must be a string");
  out.source = source.get<std::string>();
  if (out.source != "mlm" && out.source != "mcqa" && out.source != "other")
    fail(ctx + ": 'source' must be one of mlm, mcqa, other");
  const json& objs = detail::need_key(j, "objects", ctx);
  if (!objs.is_array()) fail(ctx + ": 'objects' must be a list");
  std::vector<bool> seen(objects.size(), false);
  for (const auto& o : objs) {
    VerbDistribution d;
    const json& cat = detail::need_key(o, "category", ctx);
    if (!cat.is_string()) fail(ctx + ": 'category' must be a string");
    d.object_category = objects.require(cat.get<std::string>(), ctx);
    if (seen[d.object_category])
      fail(ctx + ": duplicate distribution for category '" + cat.get<std::string>() + "'");
    seen[d.object_category] = true;
    d.probs.assign(verbs.size(), 0.0);
    const json& probs = detail::need_key(o, "probs", ctx);
    if (!probs.is_object()) fail(ctx + ": 'probs' must be an object of verb -> probability");
    double sum = 0;
    for (auto it = probs.begin(); it != probs.end(); ++it) {
      std::size_t v = verbs.require(it.key(), ctx);
      if (!it.value().is_number()) fail(ctx + ": probabilities must be numbers");
      double p = it.value().get<double>();
      if (!(p >= 0.0) || !std::isfinite(p))
        fail(ctx + ": probability for verb '" + it.key() + "' must be finite and >= 0");
      d.probs[v] = p;
      sum += p;
    }
    if (sum <= 0) fail(ctx + ": distribution for '" + cat.get<std::string>() + "' sums to 0");
    for (double& p : d.probs) p /= sum;
    out.dists.push_back(std::move(d));
  }
  return out;
}

inline void save_table(const fs::path& path, const PlausibilityTable& table,
                       const Vocabulary& objects, const Vocabulary& verbs) {
  json objs = json::array();
  for (std::size_t c = 0; c < table.n_objects(); ++c) {
    json o;
    o["category"] = objects.name(c);
    json plausible = json::array();
    for (std::size_t k = 0; k < table.n_verbs(); ++k)
      if (table.at(c, k)) plausible.push_back(verbs.name(k));
    o["plausible"] = std::move(plausible);
    objs.push_back(std::move(o));
  }
  json j;
  j["objects"] = std::move(objs);
  atomic_write(path, j.dump(2) + "\n");
}

inline PlausibilityTable load_table(const fs::path& path, const Vocabulary& objects,
                                    const Vocabulary& verbs) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(path.string() + ": not valid JSON: " + e.what());
  }
  const std::string ctx = path.filename().string();
  PlausibilityTable table(objects.size(), verbs.size());
  const json& objs = detail::need_key(j, "objects", ctx);
  if (!objs.is_array()) fail(ctx + ": 'objects' must be a list");
  std::vector<bool> seen(objects.size(), false);
  for (const auto& o : objs) {
    const json& cat = detail::need_key(o, "category", ctx);
    std::size_t c = objects.require(cat.get<std::string>(), ctx);
    if (seen[c]) fail(ctx + ": duplicate table row for category '" + cat.get<std::string>() + "'");
    seen[c] = true;
    const json& plausible = detail::need_key(o, "plausible", ctx);
    if (!plausible.is_array()) fail(ctx + ": 'plausible' must be a list of verbs");
    for (const auto& v : plausible) table.set(c, verbs.require(v.get<std::string>(), ctx), true);
  }
  for (std::size_t c = 0; c < objects.size(); ++c)
    if (!seen[c]) fail(ctx + ": missing table row for object category '" + objects.name(c) + "'");
  return table;
}

}  // namespace weakhoi
