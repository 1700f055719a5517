#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "weakhoi/run_config.hpp"

using namespace weakhoi;
using testutil::TempDir;
using testutil::fixture;
using testutil::run_cli;

namespace {

void write_config(const fs::path& path, json j) { atomic_write(path, j.dump(2) + "\n"); }

json synth_base(std::uint64_t seed, std::size_t n_train = 24, std::size_t n_test = 10) {
  json j;
  j["seed"] = seed;
  j["paths"] = {{"output_dir", "."}};
  j["synth"] = {{"n_train", n_train}, {"n_test", n_test},     {"verbs", 3},
                {"objects", 4},       {"prepositions", 3},    {"appearance_width", 8},
                {"distractor_rate", 0.5}, {"noise", 0.1},     {"seed", seed}};
  return j;
}

// generate a small dataset and shrink the emitted training config
fs::path make_pipeline_dir(const TempDir& dir, std::uint64_t seed, std::size_t epochs = 6) {
  write_config(dir / "base.json", synth_base(seed));
  auto r = run_cli("synth --config " + (dir / "base.json").string(), dir.path());
  REQUIRE(r.exit_code == 0);
  fs::path cfg_path = dir / "config.json";
  json cfg = json::parse(read_file(cfg_path));
  cfg["train"]["epochs"] = epochs;
  cfg["train"]["decay_epoch"] = epochs > 2 ? epochs - 2 : epochs;
  cfg["train"]["d"] = 16;
  write_config(cfg_path, cfg);
  return cfg_path;
}

}  // namespace

TEST_CASE("cli rejects unknown flags, subcommands, and missing inputs") {
  TempDir dir("cli_err");
  CHECK(run_cli("frobnicate --config x.json", dir.path()).exit_code != 0);
  CHECK(run_cli("eval --config missing.json", dir.path()).exit_code != 0);
  auto r = run_cli("train --config nope.json --wat", dir.path());
  CHECK(r.exit_code != 0);
  write_config(dir / "cfg.json", {{"seed", 1}});
  auto missing = run_cli("train --config " + (dir / "cfg.json").string(), dir.path());
  CHECK(missing.exit_code != 0);
  CHECK(missing.err.find("error:") != std::string::npos);
  // seed is mandatory
  write_config(dir / "noseed.json", json::object());
  CHECK(run_cli("manifest --config " + (dir / "noseed.json").string(), dir.path()).exit_code != 0);
}

TEST_CASE("eval reproduces the hand-traced golden reports") {
  for (const std::string name : {"mixed", "perfect", "below_iou"}) {
    TempDir dir("golden_" + name);
    write_config(dir / "cfg.json",
                 {{"seed", 1},
                  {"paths",
                   {{"verb_vocab", fixture("ap_cases/verbs.json").string()},
                    {"object_vocab", fixture("ap_cases/objects.json").string()},
                    {"dataset", fixture("ap_cases/" + name + "_dataset.jsonl").string()},
                    {"detections", fixture("ap_cases/" + name + "_detections.jsonl").string()},
                    {"output_dir", "."}}}});
    auto r = run_cli("eval --config " + (dir / "cfg.json").string() + " --mode role", dir.path());
    REQUIRE(r.exit_code == 0);
    json produced = json::parse(read_file(dir / "report_role.json"));
    json golden = json::parse(read_file(fixture("ap_cases/" + name + "_golden.json")));
    CHECK(produced == golden);
    CHECK(produced["mean_ap"].get<double>() == golden["mean_ap"].get<double>());
  }
}

TEST_CASE("extract-labels reproduces the fixture expectations byte for byte") {
  TempDir dir("cli_labels");
  write_config(dir / "cfg.json",
               {{"seed", 1},
                {"paths",
                 {{"captions", fixture("captions/tagged_captions.jsonl").string()},
                  {"triplets", fixture("captions/triplets.jsonl").string()},
                  {"verb_vocab", fixture("captions/verbs.json").string()},
                  {"output_dir", "."}}}});
  auto r = run_cli("extract-labels --config " + (dir / "cfg.json").string(), dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(testutil::slurp(dir / "labels.jsonl") ==
        testutil::slurp(fixture("captions/expected_labels.jsonl")));
}

TEST_CASE("manifest emits inflected caption templates") {
  TempDir dir("cli_manifest");
  write_config(dir / "cfg.json",
               {{"seed", 1},
                {"paths",
                 {{"captions", fixture("captions/tagged_captions.jsonl").string()},
                  {"output_dir", "."}}}});
  auto r = run_cli("manifest --config " + (dir / "cfg.json").string(), dir.path());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(dir / "manifest.jsonl");
  std::string first_line;
  std::getline(in, first_line);
  json j = json::parse(first_line);
  CHECK(j["image_id"] == "c01");
  CHECK(j["human_captions"] == json::array({"a person is riding"}));
  CHECK(j["object_captions"] ==
        json::array({"a person is being ridden", "a horse is being ridden"}));
}

TEST_CASE("prune writes a dataset with exactly half the proposals flagged") {
  TempDir dir("cli_prune");
  fs::path cfg = make_pipeline_dir(dir, 3);
  auto r = run_cli("prune --config " + cfg.string(), dir.path());
  REQUIRE(r.exit_code == 0);
  RunConfig c = load_run_config(cfg);
  auto verbs = Vocabulary::load(c.verb_vocab, VocabRole::verb);
  auto objects = Vocabulary::load(c.object_vocab, VocabRole::object);
  auto preps = Vocabulary::load(c.prep_vocab, VocabRole::preposition);
  auto before = load_dataset(c.dataset, verbs, objects, &preps);
  auto after = load_dataset(dir / "pruned.jsonl", verbs, objects, &preps);
  REQUIRE(after.size() == before.size());
  for (std::size_t i = 0; i < after.size(); ++i) {
    std::size_t keep_h = 0, keep_o = 0;
    for (const auto& p : after[i].humans) keep_h += p.background ? 0 : 1;
    for (const auto& p : after[i].objects) keep_o += p.background ? 0 : 1;
    CHECK(keep_h == (after[i].humans.size() + 1) / 2);
    CHECK(keep_o == (after[i].objects.size() + 1) / 2);
    CHECK(after[i].humans.size() == before[i].humans.size());
    CHECK(after[i].objects.size() == before[i].objects.size());
  }
}

TEST_CASE("train is deterministic and honors the preposition toggle") {
  TempDir dir("cli_train");
  fs::path cfg = make_pipeline_dir(dir, 5, 4);
  REQUIRE(run_cli("build-plausibility --config " + cfg.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfg.string(), dir.path()).exit_code == 0);
  std::string first = testutil::slurp(dir / "checkpoint.json");
  REQUIRE(run_cli("train --config " + cfg.string(), dir.path()).exit_code == 0);
  CHECK(testutil::slurp(dir / "checkpoint.json") == first);

  // --no-preposition equals a lambda-zero config bit for bit
  REQUIRE(run_cli("train --config " + cfg.string() + " --no-preposition", dir.path()).exit_code ==
          0);
  std::string no_prep = testutil::slurp(dir / "checkpoint.json");
  json lambda0 = json::parse(read_file(cfg));
  lambda0["train"]["lambda"] = 0.0;
  write_config(dir / "lambda0.json", lambda0);
  REQUIRE(run_cli("train --config " + (dir / "lambda0.json").string(), dir.path()).exit_code == 0);
  std::string zero = testutil::slurp(dir / "checkpoint.json");
  json a = json::parse(no_prep), b = json::parse(zero);
  CHECK(a["blocks"] == b["blocks"]);
  CHECK(no_prep != first);  // and differs from the run with the aux task on
}

TEST_CASE("infer ignores grounding maps entirely") {
  TempDir dir("cli_nomaps");
  fs::path cfg = make_pipeline_dir(dir, 7, 4);
  REQUIRE(run_cli("build-plausibility --config " + cfg.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfg.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli("infer --config " + cfg.string(), dir.path()).exit_code == 0);
  std::string with_maps = testutil::slurp(dir / "detections.jsonl");
  fs::rename(dir / "maps", dir / "maps_hidden");
  REQUIRE(run_cli("infer --config " + cfg.string(), dir.path()).exit_code == 0);
  CHECK(testutil::slurp(dir / "detections.jsonl") == with_maps);
}

TEST_CASE("infer on a zero-weight checkpoint gives the symmetric scores") {
  TempDir dir("cli_zero");
  fs::path cfg_path = make_pipeline_dir(dir, 9, 4);
  RunConfig c = load_run_config(cfg_path);
  auto verbs = Vocabulary::load(c.verb_vocab, VocabRole::verb);
  auto objects = Vocabulary::load(c.object_vocab, VocabRole::object);
  auto preps = Vocabulary::load(c.prep_vocab, VocabRole::preposition);

  Checkpoint ck;
  ck.params.feat_w = Mat(2 * 8 + kSpatialWidth, 16);
  ck.params.feat_b.assign(16, 0.0);
  ck.params.hoi_w1 = Mat(16, verbs.size());
  ck.params.hoi_w2 = Mat(16, verbs.size());
  ck.params.prep_w1 = Mat(16, preps.size());
  ck.params.prep_w2 = Mat(16, preps.size());
  ck.config = c.train;
  ck.appearance_width = 8;
  ck.verb_hash = to_hex(verbs.hash());
  ck.object_hash = to_hex(objects.hash());
  ck.prep_hash = to_hex(preps.hash());
  save_checkpoint(dir / "checkpoint.json", ck);

  REQUIRE(run_cli("infer --config " + cfg_path.string() + " --no-plausibility", dir.path())
              .exit_code == 0);
  auto detections = load_detections(dir / "detections.jsonl", verbs, objects);
  auto records = load_dataset(c.test_dataset, verbs, objects, &preps);
  REQUIRE(detections.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    double pairs = static_cast<double>(records[i].humans.size() * records[i].objects.size());
    REQUIRE(detections[i].detections.size() == records[i].humans.size() *
                                                   records[i].objects.size());
    std::size_t d0 = 0;
    for (std::size_t hi = 0; hi < records[i].humans.size(); ++hi)
      for (std::size_t oj = 0; oj < records[i].objects.size(); ++oj, ++d0) {
        const Detection& det = detections[i].detections[d0];
        CHECK(det.verb_category == 0);  // uniform row: tie goes to the lowest index
        double expected = 1.0 / (verbs.size() * pairs) * records[i].humans[hi].score *
                          records[i].objects[oj].score;
        CHECK(det.score == Approx(expected).epsilon(1e-9));
      }
  }
}

TEST_CASE("all eight toggle combinations run to completion") {
  TempDir dir("cli_toggles");
  fs::path cfg = make_pipeline_dir(dir, 11, 3);
  REQUIRE(run_cli("build-plausibility --config " + cfg.string(), dir.path()).exit_code == 0);
  for (int mask = 0; mask < 8; ++mask) {
    std::string flags;
    if (mask & 1) flags += " --no-pruning";
    if (mask & 2) flags += " --no-plausibility";
    if (mask & 4) flags += " --no-preposition";
    CAPTURE(flags);
    REQUIRE(run_cli("train --config " + cfg.string() + flags, dir.path()).exit_code == 0);
    REQUIRE(run_cli("infer --config " + cfg.string() + flags, dir.path()).exit_code == 0);
    REQUIRE(run_cli("eval --config " + cfg.string() + " --mode role", dir.path()).exit_code == 0);
    REQUIRE(run_cli("eval --config " + cfg.string() + " --mode agent", dir.path()).exit_code == 0);
    REQUIRE(run_cli("eval --config " + cfg.string() + " --mode full", dir.path()).exit_code == 0);
  }
}

TEST_CASE("pr curve csv files appear when requested") {
  TempDir dir("cli_pr");
  fs::path cfg_path = make_pipeline_dir(dir, 13, 3);
  json cfg = json::parse(read_file(cfg_path));
  cfg["eval"] = {{"pr_curves", true}, {"interpolation", "all_point"}};
  write_config(cfg_path, cfg);
  REQUIRE(run_cli("build-plausibility --config " + cfg_path.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli("train --config " + cfg_path.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli("infer --config " + cfg_path.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli("eval --config " + cfg_path.string() + " --mode role", dir.path()).exit_code ==
          0);
  bool found = false;
  for (const auto& e : fs::directory_iterator(dir.path()))
    if (e.path().filename().string().starts_with("pr_role_")) {
      found = true;
      std::string csv = testutil::slurp(e.path());
      CHECK(csv.starts_with("recall,precision\n"));
    }
  CHECK(found);
}
