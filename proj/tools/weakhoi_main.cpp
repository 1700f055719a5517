// weakhoi command-line interface.
//
// All subcommands read one JSON config file (see README); flags override
// individual fields. Machine-readable output (training epochs, evaluation
// reports) goes to stdout as JSON lines, human-readable progress to stderr.

#include <CLI11.hpp>

#include "weakhoi/run_config.hpp"
#include "weakhoi/train.hpp"

namespace wh = weakhoi;
using wh::fs::path;

namespace {

struct CliFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool no_pruning = false;
  bool no_plausibility = false;
  bool no_preposition = false;
  std::string mode = "role";
};

wh::RunConfig load_config(const CliFlags& flags) {
  wh::RunConfig c = wh::load_run_config(flags.config_path);
  if (flags.seed) {
    c.seed = *flags.seed;
    c.has_seed = true;
    c.train.seed = *flags.seed;
    if (c.synth) c.synth->seed = *flags.seed;
  }
  if (!c.has_seed) wh::fail("config: 'seed' is required (set it in the file or pass --seed)");
  if (flags.no_pruning) c.toggles.pruning = false;
  if (flags.no_plausibility) c.toggles.plausibility = false;
  if (flags.no_preposition) c.toggles.preposition = false;
  return c;
}

wh::Vocabulary load_preps(const wh::RunConfig& c) {
  if (!c.prep_vocab.empty())
    return wh::Vocabulary::load(c.prep_vocab, wh::VocabRole::preposition);
  return wh::Vocabulary(wh::VocabRole::preposition, wh::default_preposition_entries());
}

wh::SynonymList load_synonyms(const wh::RunConfig& c) {
  if (!c.person_synonyms.empty()) return wh::SynonymList::load(c.person_synonyms);
  return wh::SynonymList();
}

wh::InflectionTable load_inflections(const wh::RunConfig& c) {
  if (!c.irregular_verbs.empty()) return wh::InflectionTable::load(c.irregular_verbs);
  return wh::InflectionTable();
}

std::vector<wh::AppearanceSet> load_features(const wh::RunConfig& c,
                                             const std::vector<wh::ImageRecord>& records) {
  const path& dir = c.need(c.features_dir, "features_dir");
  std::vector<wh::AppearanceSet> out;
  out.reserve(records.size());
  std::size_t width = 0;
  for (const auto& r : records) {
    wh::AppearanceSet a = wh::read_feat(dir / (r.id + ".feat"), r.humans.size(), r.objects.size());
    if (out.empty())
      width = a.width;
    else if (a.width != width)
      wh::fail("appearance width mismatch for image '" + r.id + "'");
    out.push_back(std::move(a));
  }
  return out;
}

void apply_pruning(std::vector<wh::ImageRecord>& records, const wh::RunConfig& c) {
  if (c.maps_dir.empty()) {
    wh::warn("pruning requested but no maps_dir configured; skipping");
    return;
  }
  for (auto& r : records) {
    wh::ImageMaps maps = wh::load_image_maps(r, c.maps_dir);
    r = wh::prune_proposals(std::move(r), maps.human, maps.object);
  }
}

int cmd_synth(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  if (!c.synth) wh::fail("config: 'synth' section is required for the synth subcommand");
  wh::SynthOutput out = wh::generate_synthetic(*c.synth, c.output_dir);
  std::cerr << "synthetic dataset written to " << c.output_dir.string() << "\n";
  std::cout << wh::json{{"config", out.config.string()},
                        {"train", out.train_dataset.string()},
                        {"test", out.test_dataset.string()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_extract_labels(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto verbs = wh::Vocabulary::load(c.need(c.verb_vocab, "verb_vocab"), wh::VocabRole::verb);
  auto preps = load_preps(c);
  auto syn = load_synonyms(c);
  std::vector<wh::TaggedCaption> captions;
  if (!c.captions.empty()) captions = wh::load_tagged_captions(c.captions);
  std::vector<wh::TripletRecord> triplets;
  if (!c.triplets.empty()) triplets = wh::load_triplets(c.triplets);
  if (captions.empty() && triplets.empty())
    wh::fail("extract-labels: configure 'captions' and/or 'triplets' paths");
  auto labels = wh::extract_labels(captions, triplets, verbs, preps, syn);
  path out = c.output_dir / "labels.jsonl";
  wh::atomic_write(out, wh::serialize_labels(labels, verbs, preps));
  std::cerr << "labels for " << labels.size() << " images written to " << out.string() << "\n";
  return 0;
}

int cmd_manifest(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto captions = wh::load_tagged_captions(c.need(c.captions, "captions"));
  auto inflect = load_inflections(c);
  std::vector<wh::CaptionManifest> manifests;
  manifests.reserve(captions.size());
  for (const auto& cap : captions) manifests.push_back(wh::build_caption_manifest(cap, inflect));
  path out = c.output_dir / "manifest.jsonl";
  wh::atomic_write(out, wh::serialize_manifests(manifests));
  std::cerr << "grounding-caption manifests for " << manifests.size() << " captions written to "
            << out.string() << "\n";
  return 0;
}

int cmd_prune(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto verbs = wh::Vocabulary::load(c.need(c.verb_vocab, "verb_vocab"), wh::VocabRole::verb);
  auto objects = wh::Vocabulary::load(c.need(c.object_vocab, "object_vocab"), wh::VocabRole::object);
  auto preps = load_preps(c);
  auto records = wh::load_dataset(c.need(c.dataset, "dataset"), verbs, objects, &preps);
  c.need(c.maps_dir, "maps_dir");
  apply_pruning(records, c);
  wh::save_dataset(c.pruned_dataset, records, verbs, objects, &preps);
  std::cerr << "pruned dataset written to " << c.pruned_dataset.string() << "\n";
  return 0;
}

int cmd_build_plausibility(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto verbs = wh::Vocabulary::load(c.need(c.verb_vocab, "verb_vocab"), wh::VocabRole::verb);
  auto objects = wh::Vocabulary::load(c.need(c.object_vocab, "object_vocab"), wh::VocabRole::object);
  auto dists = wh::load_distributions(c.need(c.distributions, "distributions"), objects, verbs);
  auto table = wh::build_table(dists.dists, objects.size(), verbs.size(), &objects);
  wh::save_table(c.plausibility_table, table, objects, verbs);
  std::cerr << "plausibility table (" << dists.source << ") written to "
            << c.plausibility_table.string() << "\n";
  return 0;
}

int cmd_train(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto verbs = wh::Vocabulary::load(c.need(c.verb_vocab, "verb_vocab"), wh::VocabRole::verb);
  auto objects = wh::Vocabulary::load(c.need(c.object_vocab, "object_vocab"), wh::VocabRole::object);
  auto preps = load_preps(c);
  auto records = wh::load_dataset(c.need(c.dataset, "dataset"), verbs, objects, &preps);
  auto features = load_features(c, records);
  if (c.toggles.pruning) apply_pruning(records, c);
  wh::TrainConfig cfg = c.train;
  if (!c.toggles.preposition) cfg.lambda = 0.0;
  std::size_t width = features.empty() ? 0 : features.front().width;
  wh::TrainResult result = wh::train_model(records, features, width, cfg, verbs.size(),
                                           preps.size(), &std::cout, &std::cerr);
  wh::Checkpoint ck;
  ck.params = std::move(result.params);
  ck.config = cfg;
  ck.appearance_width = width;
  ck.verb_hash = wh::to_hex(verbs.hash());
  ck.object_hash = wh::to_hex(objects.hash());
  ck.prep_hash = wh::to_hex(preps.hash());
  wh::save_checkpoint(c.checkpoint, ck);
  std::cerr << "checkpoint written to " << c.checkpoint.string() << "\n";
  return 0;
}

int cmd_infer(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto verbs = wh::Vocabulary::load(c.need(c.verb_vocab, "verb_vocab"), wh::VocabRole::verb);
  auto objects = wh::Vocabulary::load(c.need(c.object_vocab, "object_vocab"), wh::VocabRole::object);
  auto preps = load_preps(c);
  const path& dataset = c.test_dataset.empty() ? c.need(c.dataset, "dataset") : c.test_dataset;
  auto records = wh::load_dataset(dataset, verbs, objects, &preps);
  auto features = load_features(c, records);
  wh::Checkpoint ck = wh::load_checkpoint(c.checkpoint);
  if (ck.verb_hash != wh::to_hex(verbs.hash()))
    wh::fail("checkpoint was trained with a different verb vocabulary");
  if (ck.object_hash != wh::to_hex(objects.hash()))
    wh::fail("checkpoint was trained with a different object vocabulary");
  if (!features.empty() && features.front().width != ck.appearance_width)
    wh::fail("checkpoint expects appearance width " + std::to_string(ck.appearance_width));
  std::optional<wh::PlausibilityTable> table;
  if (c.toggles.plausibility)
    table = wh::load_table(c.plausibility_table, objects, verbs);
  // inference never applies proposal pruning or the preposition head
  std::vector<wh::ImageDetections> all;
  all.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    all.push_back({records[i].id,
                   wh::detect(records[i], features[i], ck.params, table ? &*table : nullptr)});
  wh::atomic_write(c.detections, wh::serialize_detections(all, verbs, objects));
  std::cerr << "detections for " << all.size() << " images written to " << c.detections.string()
            << "\n";
  return 0;
}

int cmd_eval(const CliFlags& flags) {
  wh::RunConfig c = load_config(flags);
  auto verbs = wh::Vocabulary::load(c.need(c.verb_vocab, "verb_vocab"), wh::VocabRole::verb);
  auto objects = wh::Vocabulary::load(c.need(c.object_vocab, "object_vocab"), wh::VocabRole::object);
  auto preps = load_preps(c);
  const path& dataset = c.test_dataset.empty() ? c.need(c.dataset, "dataset") : c.test_dataset;
  auto records = wh::load_dataset(dataset, verbs, objects, &preps);
  auto detections = wh::load_detections(c.detections, verbs, objects);
  wh::EvalMode mode = wh::parse_eval_mode(flags.mode);
  wh::EvalResult result =
      wh::evaluate(detections, records, verbs, objects, mode, c.eval.eleven_point);
  if (result.role_agent_violations > 0)
    wh::warn(std::to_string(result.role_agent_violations) +
             " role true positives were not agent true positives");
  wh::json report = wh::report_to_json(result);
  path out = c.output_dir / ("report_" + std::string(wh::eval_mode_name(mode)) + ".json");
  wh::atomic_write(out, report.dump(2) + "\n");
  if (c.eval.pr_curves) {
    for (const auto& [name, curve] : result.per_class_curve) {
      std::string safe = name;
      for (char& ch : safe)
        if (ch == ' ' || ch == '/') ch = '_';
      wh::atomic_write(c.output_dir / ("pr_" + std::string(wh::eval_mode_name(mode)) + "_" + safe +
                                       ".csv"),
                       wh::pr_curve_csv(curve));
    }
  }
  std::cout << report.dump() << "\n";
  std::cerr << wh::eval_mode_name(mode) << " mean AP " << result.mean_ap << " over "
            << result.per_class_ap.size() << " classes; report written to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised human-object interaction detection pipeline"};
  app.require_subcommand(1);

  CliFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "run config JSON")->required();
    sub->add_option("--seed", flags.seed, "override the config seed");
    sub->add_flag("--no-pruning", flags.no_pruning, "disable proposal pruning");
    sub->add_flag("--no-plausibility", flags.no_plausibility, "disable plausibility rescoring");
    sub->add_flag("--no-preposition", flags.no_preposition, "disable the preposition task");
    return sub;
  };

  auto* synth = add_common(app.add_subcommand("synth", "generate a planted synthetic dataset"));
  auto* extract =
      add_common(app.add_subcommand("extract-labels", "extract image-level labels from captions"));
  auto* manifest =
      add_common(app.add_subcommand("manifest", "emit grounding-caption manifests for a VLM"));
  auto* prune = add_common(app.add_subcommand("prune", "flag bottom-half proposals as background"));
  auto* build = add_common(
      app.add_subcommand("build-plausibility", "build the plausibility table from distributions"));
  auto* train = add_common(app.add_subcommand("train", "train the two-stream model"));
  auto* infer = add_common(app.add_subcommand("infer", "detect interactions with a checkpoint"));
  auto* eval = add_common(app.add_subcommand("eval", "score detections against ground truth"));
  eval->add_option("--mode", flags.mode, "role | agent | full")->default_val("role");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(flags);
    if (extract->parsed()) return cmd_extract_labels(flags);
    if (manifest->parsed()) return cmd_manifest(flags);
    if (prune->parsed()) return cmd_prune(flags);
    if (build->parsed()) return cmd_build_plausibility(flags);
    if (train->parsed()) return cmd_train(flags);
    if (infer->parsed()) return cmd_infer(flags);
    if (eval->parsed()) return cmd_eval(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
