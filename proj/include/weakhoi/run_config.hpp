#pragma once

// One JSON config file drives every subcommand; command-line flags override
// individual fields. Relative paths resolve against the config file's
// directory so a run directory is self-contained.

#include <optional>
#include <string>

#include "weakhoi/synth.hpp"

namespace weakhoi {

struct FeatureToggles {
  bool pruning = true;
  bool plausibility = true;
  bool preposition = true;
};

struct EvalOptions {
  bool pr_curves = false;
  bool eleven_point = false;  // "interpolation": "all_point" | "11point"
};

struct RunConfig {
  std::uint64_t seed = 0;
  bool has_seed = false;

  fs::path dataset, test_dataset;
  fs::path maps_dir, features_dir;
  fs::path distributions;
  fs::path verb_vocab, object_vocab, prep_vocab;
  fs::path captions, triplets;
  fs::path person_synonyms, irregular_verbs;  // optional; built-in defaults otherwise
  fs::path plausibility_table, checkpoint, detections;
  fs::path pruned_dataset;
  fs::path output_dir;

  TrainConfig train;
  FeatureToggles toggles;
  EvalOptions eval;
  std::optional<SynthConfig> synth;

  // Fails unless `name` was given in the config.
  const fs::path& need(const fs::path& p, const char* name) const {
    if (p.empty()) fail(std::string("config: missing required path '") + name + "'");
    return p;
  }
};

inline RunConfig load_run_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(path.string() + ": not valid JSON: " + e.what());
  }
  const std::string ctx = path.filename().string();
  if (!j.is_object()) fail(ctx + ": config must be a JSON object");
  RunConfig c;
  fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const json& node, const char* key) -> fs::path {
    auto it = node.find(key);
    if (it == node.end()) return {};
    if (!it->is_string()) fail(ctx + ": path '" + key + "' must be a string");
    fs::path p = it->get<std::string>();
    return p.is_absolute() ? p : base / p;
  };

  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) fail(ctx + ": 'seed' must be a non-negative integer");
    c.seed = it->get<std::uint64_t>();
    c.has_seed = true;
  }

  if (auto it = j.find("paths"); it != j.end()) {
    const json& p = *it;
    c.dataset = resolve(p, "dataset");
    c.test_dataset = resolve(p, "test_dataset");
    c.maps_dir = resolve(p, "maps_dir");
    c.features_dir = resolve(p, "features_dir");
    c.distributions = resolve(p, "distributions");
    c.verb_vocab = resolve(p, "verb_vocab");
    c.object_vocab = resolve(p, "object_vocab");
    c.prep_vocab = resolve(p, "prep_vocab");
    c.captions = resolve(p, "captions");
    c.triplets = resolve(p, "triplets");
    c.person_synonyms = resolve(p, "person_synonyms");
    c.irregular_verbs = resolve(p, "irregular_verbs");
    c.plausibility_table = resolve(p, "plausibility_table");
    c.checkpoint = resolve(p, "checkpoint");
    c.detections = resolve(p, "detections");
    c.pruned_dataset = resolve(p, "pruned_dataset");
    c.output_dir = resolve(p, "output_dir");
  }
  if (c.output_dir.empty()) c.output_dir = base;
  if (c.plausibility_table.empty()) c.plausibility_table = c.output_dir / "plausibility.json";
  if (c.checkpoint.empty()) c.checkpoint = c.output_dir / "checkpoint.json";
  if (c.detections.empty()) c.detections = c.output_dir / "detections.jsonl";
  if (c.pruned_dataset.empty()) c.pruned_dataset = c.output_dir / "pruned.jsonl";

  if (auto it = j.find("train"); it != j.end()) c.train = train_config_from_json(*it);
  if (c.has_seed && !(j.contains("train") && j["train"].contains("seed"))) c.train.seed = c.seed;

  if (auto it = j.find("toggles"); it != j.end()) {
    c.toggles.pruning = it->value("pruning", true);
    c.toggles.plausibility = it->value("plausibility", true);
    c.toggles.preposition = it->value("preposition", true);
  }
  if (auto it = j.find("eval"); it != j.end()) {
    c.eval.pr_curves = it->value("pr_curves", false);
    std::string interp = it->value("interpolation", "all_point");
    if (interp == "11point")
      c.eval.eleven_point = true;
    else if (interp != "all_point")
      fail(ctx + ": 'interpolation' must be all_point or 11point");
  }
  if (auto it = j.find("synth"); it != j.end()) {
    SynthConfig s = synth_config_from_json(*it);
    if (!it->contains("seed") && c.has_seed) s.seed = c.seed;
    c.synth = s;
  }
  return c;
}

}  // namespace weakhoi
