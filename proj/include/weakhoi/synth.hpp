#pragma once

// Synthetic planted-scene generator. Each image carries 1-3 interacting
// pairs with distinct verbs; interacting proposals draw their appearance
// vectors from verb-specific clusters while distractor proposals draw from a
// generic background cluster. Grounding maps are Gaussian bumps over the true
// participants, image-level labels are exactly the planted verbs and
// prepositions, and the emitted verb-given-object distributions concentrate
// on planted-compatible verbs. Everything is deterministic in the seed.

#include <string>
#include <vector>

#include "weakhoi/eval.hpp"

namespace weakhoi {

struct SynthConfig {
  std::size_t n_train = 200;
  std::size_t n_test = 50;
  std::size_t verbs = 3;
  std::size_t objects = 4;  // including "person"
  std::size_t prepositions = 3;
  std::size_t appearance_width = 16;
  double distractor_rate = 0.5;  // fraction of proposals that are distractors
  double noise = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_train == 0 || n_test == 0) fail("synth config: image counts must be >= 1");
    if (verbs == 0 || prepositions == 0) fail("synth config: vocabulary counts must be >= 1");
    if (objects < 2) fail("synth config: need at least one object category besides person");
    if (appearance_width == 0) fail("synth config: appearance_width must be >= 1");
    if (!(distractor_rate >= 0.0 && distractor_rate <= 1.0))
      fail("synth config: distractor_rate must lie in [0,1]");
    if (!(noise >= 0.0 && noise <= 1.0)) fail("synth config: noise must lie in [0,1]");
  }
};

inline constexpr int kSynthImageSize = 64;

struct SynthWorld {
  Vocabulary verbs, objects, preps;
  std::vector<std::vector<double>> human_centroids;   // per verb
  std::vector<std::vector<double>> object_centroids;  // per verb
  std::vector<double> bg_human, bg_object;
  std::vector<std::size_t> object_for_verb;  // planted-compatible object category
};

namespace detail {

inline std::vector<std::string> synth_names(std::size_t n, const std::vector<std::string>& pool,
                                            const char* prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(i < pool.size() ? pool[i] : prefix + std::to_string(i));
  return out;
}

inline std::vector<double> unit_centroid(Rng& rng, std::size_t width, double scale) {
  std::vector<double> v(width);
  double norm = 0;
  for (double& x : v) {
    x = rng.gaussian();
    norm += x * x;
  }
  norm = std::sqrt(std::max(norm, 1e-12));
  for (double& x : v) x = x / norm * scale;
  return v;
}

}  // namespace detail

inline SynthWorld plant_world(const SynthConfig& cfg) {
  cfg.validate();
  static const std::vector<std::string> verb_pool = {
      "ride", "eat", "kick", "hold", "throw", "carry", "cut", "read",
      "drink", "catch", "push", "pull", "lift", "wash", "wear"};
  static const std::vector<std::string> object_pool = {
      "horse", "pizza", "ball", "chair", "book", "cup",
      "bike",  "dog",   "bag",  "phone", "laptop", "umbrella"};
  SynthWorld w;
  w.verbs = Vocabulary(VocabRole::verb, detail::synth_names(cfg.verbs, verb_pool, "verb"));
  std::vector<std::string> objs = {kPersonCategory};
  auto rest = detail::synth_names(cfg.objects - 1, object_pool, "object");
  objs.insert(objs.end(), rest.begin(), rest.end());
  w.objects = Vocabulary(VocabRole::object, std::move(objs));
  auto preps = default_preposition_entries();
  preps.resize(std::min(preps.size(), cfg.prepositions));
  for (std::size_t i = preps.size(); i < cfg.prepositions; ++i)
    preps.push_back("prep" + std::to_string(i));
  w.preps = Vocabulary(VocabRole::preposition, std::move(preps));

  Rng rng(cfg.seed * 0x100000001b3ULL + 17);
  const double scale = 2.0;
  for (std::size_t k = 0; k < cfg.verbs; ++k) {
    w.human_centroids.push_back(detail::unit_centroid(rng, cfg.appearance_width, scale));
    w.object_centroids.push_back(detail::unit_centroid(rng, cfg.appearance_width, scale));
  }
  w.bg_human = detail::unit_centroid(rng, cfg.appearance_width, scale);
  w.bg_object = detail::unit_centroid(rng, cfg.appearance_width, scale);
  for (std::size_t k = 0; k < cfg.verbs; ++k)
    w.object_for_verb.push_back(1 + k % (cfg.objects - 1));
  return w;
}

struct SynthImage {
  ImageRecord record;
  AppearanceSet appearance;
  RawGrid human_map, object_map;
  TaggedCaption caption;
  TripletRecord triplets;
};

namespace detail {

inline BBox random_box(Rng& rng, double min_size, double max_size) {
  double bw = rng.uniform(min_size, max_size);
  double bh = rng.uniform(min_size, max_size);
  double cx = rng.uniform(bw / 2 + 1, kSynthImageSize - bw / 2 - 1);
  double cy = rng.uniform(bh / 2 + 1, kSynthImageSize - bh / 2 - 1);
  return {cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2};
}

inline BBox jitter_box(Rng& rng, const BBox& b, double amount) {
  BBox out = b;
  double dx = rng.gaussian() * amount, dy = rng.gaussian() * amount;
  out.x1 += dx;
  out.x2 += dx;
  out.y1 += dy;
  out.y2 += dy;
  out = clip_bbox(out, kSynthImageSize, kSynthImageSize);
  return bbox_valid(out) ? out : b;
}

inline std::vector<double> sample_around(Rng& rng, const std::vector<double>& centroid,
                                         double sigma) {
  std::vector<double> v(centroid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = centroid[i] + sigma * rng.gaussian();
  return v;
}

inline void add_bump(RawGrid& grid, const BBox& b) {
  double cx = 0.5 * (b.x1 + b.x2), cy = 0.5 * (b.y1 + b.y2);
  double sigma = std::max(2.0, 0.5 * std::max(b.width(), b.height()));
  for (int y = 0; y < grid.height; ++y)
    for (int x = 0; x < grid.width; ++x) {
      double dx = (x + 0.5) - cx, dy = (y + 0.5) - cy;
      grid.values[static_cast<std::size_t>(y) * grid.width + x] +=
          std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }
}

inline std::size_t planted_prep(const BBox& h, const BBox& o, std::size_t n_preps) {
  std::size_t cls;
  if (iou(h, o) > 0.05)
    cls = 0;
  else {
    double dx = 0.5 * (o.x1 + o.x2) - 0.5 * (h.x1 + h.x2);
    double dy = 0.5 * (o.y1 + o.y2) - 0.5 * (h.y1 + h.y2);
    cls = std::abs(dx) >= std::abs(dy) ? 1 : 2;
  }
  return cls % n_preps;
}

}  // namespace detail

inline SynthImage generate_image(const SynthWorld& world, const SynthConfig& cfg, Rng& rng,
                                 const std::string& id, bool with_gt) {
  SynthImage img;
  ImageRecord& rec = img.record;
  rec.id = id;
  rec.width = rec.height = kSynthImageSize;
  rec.verb_labels.assign(world.verbs.size(), 0);
  rec.prep_labels.assign(world.preps.size(), 0);
  rec.has_prep_labels = true;
  img.appearance.width = cfg.appearance_width;
  img.human_map = {kSynthImageSize, kSynthImageSize,
                   std::vector<double>(kSynthImageSize * kSynthImageSize, 0.0)};
  img.object_map = img.human_map;

  // distinct verbs per image so planted pairs never collide in feature space
  std::size_t max_pairs = std::min<std::size_t>(3, world.verbs.size());
  std::size_t n_pairs = 1 + rng.index(max_pairs);
  std::vector<std::size_t> verb_ids(world.verbs.size());
  std::iota(verb_ids.begin(), verb_ids.end(), 0);
  rng.shuffle(verb_ids);
  verb_ids.resize(n_pairs);

  const double appearance_sigma = cfg.noise * 0.8;
  const double box_jitter = cfg.noise * 2.0;

  std::vector<std::string> person_words = {"person", "man", "woman", "boy", "girl"};

  img.caption.image_id = id;
  img.caption.tokens.push_back({"a", "a", Pos::other});
  img.caption.tokens.push_back({person_words[rng.index(person_words.size())],
                                person_words[rng.index(person_words.size())], Pos::other});
  // the gate noun
  std::string person_word = person_words[rng.index(person_words.size())];
  img.caption.tokens.push_back({person_word, person_word, Pos::noun});
  img.caption.tokens.push_back({"is", "be", Pos::other});
  img.triplets.image_id = id;

  InflectionTable inflect;

  for (std::size_t p = 0; p < n_pairs; ++p) {
    std::size_t verb = verb_ids[p];
    std::size_t obj_cat = world.object_for_verb[verb];
    BBox human_box = detail::random_box(rng, 12, 22);
    // objects sit near their human, sometimes overlapping
    double angle = rng.uniform(0, 2 * 3.14159265358979323846);
    double dist = rng.uniform(6, 20);
    BBox object_box = detail::random_box(rng, 10, 20);
    double ow = object_box.width(), oh = object_box.height();
    double cx = 0.5 * (human_box.x1 + human_box.x2) + dist * std::cos(angle);
    double cy = 0.5 * (human_box.y1 + human_box.y2) + dist * std::sin(angle);
    cx = std::clamp(cx, ow / 2 + 1, kSynthImageSize - ow / 2 - 1);
    cy = std::clamp(cy, oh / 2 + 1, kSynthImageSize - oh / 2 - 1);
    object_box = {cx - ow / 2, cy - oh / 2, cx + ow / 2, cy + oh / 2};

    Proposal h;
    h.bbox = detail::jitter_box(rng, human_box, box_jitter);
    h.score = rng.uniform(0.75, 0.95);
    h.kind = ProposalKind::human;
    h.category = world.objects.person_index();
    rec.humans.push_back(h);
    img.appearance.humans.push_back(
        detail::sample_around(rng, world.human_centroids[verb], appearance_sigma));

    Proposal o;
    o.bbox = detail::jitter_box(rng, object_box, box_jitter);
    o.score = rng.uniform(0.75, 0.95);
    o.kind = ProposalKind::object;
    o.category = obj_cat;
    rec.objects.push_back(o);
    img.appearance.objects.push_back(
        detail::sample_around(rng, world.object_centroids[verb], appearance_sigma));

    rec.verb_labels[verb] = 1;
    std::size_t prep = detail::planted_prep(human_box, object_box, world.preps.size());
    rec.prep_labels[prep] = 1;
    if (with_gt)
      rec.ground_truth.push_back({human_box, object_box, obj_cat, verb});

    detail::add_bump(img.human_map, human_box);
    detail::add_bump(img.object_map, object_box);

    const std::string& verb_word = world.verbs.name(verb);
    const std::string& obj_word = world.objects.name(obj_cat);
    img.caption.tokens.push_back({inflect.ing(verb_word), verb_word, Pos::verb});
    img.caption.tokens.push_back({obj_word, obj_word, Pos::noun});
    img.triplets.triplets.push_back({person_word, world.preps.name(prep), obj_word});
  }

  // distractors: generic appearance, random boxes, random categories
  auto distractor_count = [&](std::size_t n_true) -> std::size_t {
    double rate = std::min(cfg.distractor_rate, 0.9);
    return static_cast<std::size_t>(std::llround(rate / (1.0 - rate) * n_true));
  };
  std::size_t extra = distractor_count(n_pairs);
  for (std::size_t i = 0; i < extra; ++i) {
    Proposal h;
    h.bbox = detail::random_box(rng, 10, 20);
    h.score = rng.uniform(0.5, 0.9);
    h.kind = ProposalKind::human;
    h.category = world.objects.person_index();
    rec.humans.push_back(h);
    img.appearance.humans.push_back(detail::sample_around(rng, world.bg_human, appearance_sigma));

    Proposal o;
    o.bbox = detail::random_box(rng, 10, 20);
    o.score = rng.uniform(0.5, 0.9);
    o.kind = ProposalKind::object;
    o.category = rng.index(world.objects.size());
    rec.objects.push_back(o);
    img.appearance.objects.push_back(detail::sample_around(rng, world.bg_object, appearance_sigma));
  }

  // light map noise plus occasional off-vocabulary caption tokens
  if (cfg.noise > 0) {
    for (double& v : img.human_map.values) v += cfg.noise * 0.05 * rng.uniform();
    for (double& v : img.object_map.values) v += cfg.noise * 0.05 * rng.uniform();
    if (rng.uniform() < 0.3) img.caption.tokens.push_back({"zooming", "zoom", Pos::verb});
    if (rng.uniform() < 0.3) img.caption.tokens.push_back({"cloud", "cloud", Pos::noun});
    if (rng.uniform() < 0.3) img.triplets.triplets.push_back({"dog", "under", "table"});
  }

  rec.grounding_refs = {id + ".gh0.gmap", id + ".go0.gmap"};
  return img;
}

// Nearest-centroid classifier on the planting centroids; used as the
// generator's own sanity oracle. On noise-free data every true pair scores
// exactly 1 and everything else strictly less.
inline std::vector<ImageDetections> oracle_detect(const SynthWorld& world,
                                                  const std::vector<ImageRecord>& records,
                                                  const std::vector<AppearanceSet>& features) {
  auto sq_dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };
  std::vector<ImageDetections> out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const ImageRecord& rec = records[r];
    const AppearanceSet& app = features[r];
    ImageDetections img;
    img.image_id = rec.id;
    for (std::size_t i = 0; i < rec.humans.size(); ++i)
      for (std::size_t j = 0; j < rec.objects.size(); ++j) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < world.verbs.size(); ++k) {
          double d = sq_dist(app.humans[i], world.human_centroids[k]) +
                     sq_dist(app.objects[j], world.object_centroids[k]);
          if (d < best_d) {
            best_d = d;
            best = k;
          }
        }
        Detection det;
        det.human_bbox = rec.humans[i].bbox;
        det.object_bbox = rec.objects[j].bbox;
        det.object_category = rec.objects[j].category;
        det.verb_category = best;
        det.score = 1.0 / (1.0 + best_d);
        img.detections.push_back(det);
      }
    out.push_back(std::move(img));
  }
  return out;
}

struct SynthOutput {
  fs::path train_dataset, test_dataset;
  fs::path verb_vocab, object_vocab, prep_vocab;
  fs::path maps_dir, features_dir;
  fs::path distributions, captions, triplets, config;
};

inline json synth_config_to_json(const SynthConfig& c) {
  json j;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["verbs"] = c.verbs;
  j["objects"] = c.objects;
  j["prepositions"] = c.prepositions;
  j["appearance_width"] = c.appearance_width;
  j["distractor_rate"] = c.distractor_rate;
  j["noise"] = c.noise;
  j["seed"] = c.seed;
  return j;
}

inline SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  c.n_train = j.value("n_train", c.n_train);
  c.n_test = j.value("n_test", c.n_test);
  c.verbs = j.value("verbs", c.verbs);
  c.objects = j.value("objects", c.objects);
  c.prepositions = j.value("prepositions", c.prepositions);
  c.appearance_width = j.value("appearance_width", c.appearance_width);
  c.distractor_rate = j.value("distractor_rate", c.distractor_rate);
  c.noise = j.value("noise", c.noise);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

// Generates the full fixture set under out_dir: train/test datasets,
// vocabularies, grounding maps, appearance sidecars, verb-given-object
// distributions, tagged captions and triplets for the training images, and a
// ready-to-run config.json wired to all of it.
inline SynthOutput generate_synthetic(const SynthConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  SynthWorld world = plant_world(cfg);
  fs::create_directories(out_dir);
  SynthOutput out;
  out.maps_dir = out_dir / "maps";
  out.features_dir = out_dir / "feats";
  fs::create_directories(out.maps_dir);
  fs::create_directories(out.features_dir);

  Rng rng(cfg.seed);
  std::vector<ImageRecord> train, test;
  std::vector<TaggedCaption> captions;
  std::vector<TripletRecord> triplets;
  auto emit_split = [&](std::size_t count, const char* prefix, bool with_gt,
                        std::vector<ImageRecord>& records, bool with_captions) {
    for (std::size_t i = 0; i < count; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%04zu", prefix, i);
      SynthImage img = generate_image(world, cfg, rng, id, with_gt);
      write_gmap(out.maps_dir / (img.record.id + ".gh0.gmap"), img.human_map);
      write_gmap(out.maps_dir / (img.record.id + ".go0.gmap"), img.object_map);
      write_feat(out.features_dir / (img.record.id + ".feat"), img.appearance);
      if (with_captions) {
        captions.push_back(std::move(img.caption));
        triplets.push_back(std::move(img.triplets));
      }
      records.push_back(std::move(img.record));
    }
  };
  emit_split(cfg.n_train, "train", false, train, true);
  emit_split(cfg.n_test, "test", true, test, false);

  out.train_dataset = out_dir / "train.jsonl";
  out.test_dataset = out_dir / "test.jsonl";
  save_dataset(out.train_dataset, train, world.verbs, world.objects, &world.preps);
  save_dataset(out.test_dataset, test, world.verbs, world.objects, &world.preps);

  out.verb_vocab = out_dir / "verbs.json";
  out.object_vocab = out_dir / "objects.json";
  out.prep_vocab = out_dir / "preps.json";
  world.verbs.save(out.verb_vocab);
  world.objects.save(out.object_vocab);
  world.preps.save(out.prep_vocab);

  // distributions: mass 0.9 on planted-compatible verbs, person row uniform
  {
    json objs = json::array();
    for (std::size_t c = 0; c < world.objects.size(); ++c) {
      std::vector<std::size_t> compat;
      for (std::size_t k = 0; k < world.verbs.size(); ++k)
        if (c != world.objects.person_index() && world.object_for_verb[k] == c)
          compat.push_back(k);
      json probs = json::object();
      if (compat.empty()) {
        for (std::size_t k = 0; k < world.verbs.size(); ++k)
          probs[world.verbs.name(k)] = 1.0 / static_cast<double>(world.verbs.size());
      } else {
        double in_p = 0.9 / static_cast<double>(compat.size());
        double out_p = 0.1 / static_cast<double>(world.verbs.size() - compat.size());
        for (std::size_t k = 0; k < world.verbs.size(); ++k) {
          bool is_compat = std::find(compat.begin(), compat.end(), k) != compat.end();
          probs[world.verbs.name(k)] = is_compat ? in_p : out_p;
        }
      }
      json o;
      o["category"] = world.objects.name(c);
      o["probs"] = std::move(probs);
      objs.push_back(std::move(o));
    }
    json j;
    j["source"] = "mlm";
    j["objects"] = std::move(objs);
    out.distributions = out_dir / "distributions.json";
    atomic_write(out.distributions, j.dump(2) + "\n");
  }

  // captions and triplets for the training split
  {
    std::string lines;
    for (const auto& c : captions) {
      json toks = json::array();
      for (const auto& t : c.tokens)
        toks.push_back({{"surface", t.surface}, {"lemma", t.lemma}, {"pos", pos_tag(t.pos)}});
      json j;
      j["image_id"] = c.image_id;
      j["tokens"] = std::move(toks);
      lines += j.dump();
      lines += '\n';
    }
    out.captions = out_dir / "captions.jsonl";
    atomic_write(out.captions, lines);
  }
  {
    std::string lines;
    for (const auto& t : triplets) {
      json trips = json::array();
      for (const auto& trip : t.triplets)
        trips.push_back(json::array({trip.subject, trip.predicate, trip.object}));
      json j;
      j["image_id"] = t.image_id;
      j["triplets"] = std::move(trips);
      lines += j.dump();
      lines += '\n';
    }
    out.triplets = out_dir / "triplets.jsonl";
    atomic_write(out.triplets, lines);
  }

  // a run config wired to the generated files, tuned for the planted task
  {
    json paths;
    paths["dataset"] = "train.jsonl";
    paths["test_dataset"] = "test.jsonl";
    paths["maps_dir"] = "maps";
    paths["features_dir"] = "feats";
    paths["distributions"] = "distributions.json";
    paths["verb_vocab"] = "verbs.json";
    paths["object_vocab"] = "objects.json";
    paths["prep_vocab"] = "preps.json";
    paths["captions"] = "captions.jsonl";
    paths["triplets"] = "triplets.jsonl";
    paths["plausibility_table"] = "plausibility.json";
    paths["checkpoint"] = "checkpoint.json";
    paths["detections"] = "detections.jsonl";
    paths["output_dir"] = ".";
    json train_cfg;
    train_cfg["d"] = 128;
    train_cfg["learning_rate"] = 1.0;
    train_cfg["decayed_rate"] = 0.1;
    train_cfg["decay_epoch"] = 22;
    train_cfg["epochs"] = 28;
    train_cfg["batch_size"] = 4;
    train_cfg["lambda"] = 0.1;
    train_cfg["focal_gamma"] = 2.0;
    train_cfg["focal_alpha"] = 0.5;
    train_cfg["seed"] = cfg.seed;
    json j;
    j["seed"] = cfg.seed;
    j["paths"] = std::move(paths);
    j["train"] = std::move(train_cfg);
    j["toggles"] = {{"pruning", true}, {"plausibility", true}, {"preposition", true}};
    j["eval"] = {{"pr_curves", false}, {"interpolation", "all_point"}};
    j["synth"] = synth_config_to_json(cfg);
    out.config = out_dir / "config.json";
    atomic_write(out.config, j.dump(2) + "\n");
  }
  return out;
}

}  // namespace weakhoi
