#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "weakhoi/grounding.hpp"

using namespace weakhoi;
using testutil::TempDir;

namespace {

GroundingMap uniform_map(int w, int h, double v, MapOrigin origin = MapOrigin::human_caption) {
  GroundingMap m;
  m.width = w;
  m.height = h;
  m.origin = origin;
  m.values.assign(static_cast<std::size_t>(w) * h, v);
  return m;
}

Proposal proposal(BBox b, double score) {
  Proposal p;
  p.bbox = b;
  p.score = score;
  return p;
}

}  // namespace

TEST_CASE("inflection rules cover e-drop, doubling, and y endings") {
  InflectionTable t;
  CHECK(t.ing("ride") == "riding");
  CHECK(t.ing("kick") == "kicking");
  CHECK(t.ing("sit") == "sitting");
  CHECK(t.ing("smile") == "smiling");
  CHECK(t.ing("ski") == "skiing");
  CHECK(t.ing("carry") == "carrying");
  CHECK(t.ing("see") == "seeing");
  CHECK(t.ed("kick") == "kicked");
  CHECK(t.ed("carry") == "carried");
  CHECK(t.ed("smile") == "smiled");
  CHECK(t.ed("stop") == "stopped");
  // irregular entries
  CHECK(t.ed("ride") == "ridden");
  CHECK(t.ed("eat") == "eaten");
  CHECK(t.ed("hold") == "held");
  CHECK(t.ed("sit") == "sat");
}

TEST_CASE("caption manifest inflects the template strings") {
  TaggedCaption c{"img", {{"person", "person", Pos::noun},
                          {"riding", "ride", Pos::verb},
                          {"horse", "horse", Pos::noun}}};
  CaptionManifest m = build_caption_manifest(c);
  CHECK(m.human_captions == std::vector<std::string>{"a person is riding"});
  CHECK(m.object_captions ==
        std::vector<std::string>{"a person is being ridden", "a horse is being ridden"});

  TaggedCaption horse_only{"img", {{"riding", "ride", Pos::verb}, {"horse", "horse", Pos::noun}}};
  CaptionManifest m2 = build_caption_manifest(horse_only);
  CHECK(m2.object_captions == std::vector<std::string>{"a horse is being ridden"});
}

TEST_CASE("caption manifest is empty without verbs and multiplies nouns by verbs") {
  TaggedCaption no_verbs{"img", {{"dog", "dog", Pos::noun}}};
  CaptionManifest empty = build_caption_manifest(no_verbs);
  CHECK(empty.human_captions.empty());
  CHECK(empty.object_captions.empty());

  TaggedCaption c{"img", {{"ball", "ball", Pos::noun},
                          {"eat", "eat", Pos::verb},
                          {"kick", "kick", Pos::verb},
                          {"cake", "cake", Pos::noun}}};
  CaptionManifest m = build_caption_manifest(c);
  CHECK(m.human_captions.size() == 2);
  CHECK(m.object_captions.size() == 4);
  CHECK(m.object_captions[0] == "a ball is being eaten");
  CHECK(m.object_captions[3] == "a cake is being kicked");
}

TEST_CASE("normalize_map is min-max with the constant-map convention") {
  GroundingMap con = normalize_map({2, 2, {5.0, 5.0, 5.0, 5.0}}, MapOrigin::human_caption);
  CHECK(con.values == std::vector<double>{0, 0, 0, 0});

  GroundingMap m = normalize_map({3, 1, {0.0, 5.0, 10.0}}, MapOrigin::human_caption);
  CHECK(m.values == std::vector<double>{0.0, 0.5, 1.0});

  GroundingMap two = normalize_map({2, 1, {2.0, 4.0}}, MapOrigin::object_caption);
  CHECK(two.values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("normalize_map rejects non-finite values naming the position") {
  RawGrid g{2, 2, {0.0, 1.0, std::nan(""), 2.0}};
  try {
    normalize_map(g, MapOrigin::human_caption);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("grounding score averages the box region over the caption set") {
  Proposal p = proposal({1, 1, 7, 7}, 0.9);
  std::vector<GroundingMap> one = {uniform_map(10, 10, 0.5)};
  CHECK(grounding_score(p, one) == Approx(0.5));

  std::vector<GroundingMap> two = {uniform_map(10, 10, 0.2), uniform_map(10, 10, 0.8)};
  CHECK(grounding_score(p, two) == Approx(0.5));

  GroundingMap right;  // [[0,1],[0,1]]
  right.width = right.height = 2;
  right.values = {0, 1, 0, 1};
  std::vector<GroundingMap> maps = {right};
  CHECK(grounding_score(proposal({1, 0, 2, 2}, 1.0), maps) == 1.0);
  CHECK(grounding_score(proposal({0, 0, 2, 2}, 1.0), maps) == Approx(0.5));
}

TEST_CASE("zero-cell boxes score 0 with a warning") {
  Proposal tiny = proposal({0.6, 0.6, 0.9, 0.9}, 1.0);
  std::vector<GroundingMap> maps = {uniform_map(4, 4, 1.0)};
  WarnCapture capture;
  CHECK(grounding_score(tiny, maps) == 0.0);
  CHECK(capture.text().find("zero cells") != std::string::npos);
}

TEST_CASE("grounding score is monotone under pointwise map increase") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int w = 6 + static_cast<int>(rng.index(6));
    int h = 6 + static_cast<int>(rng.index(6));
    GroundingMap lo = uniform_map(w, h, 0);
    GroundingMap hi = lo;
    for (std::size_t i = 0; i < lo.values.size(); ++i) {
      lo.values[i] = rng.uniform();
      hi.values[i] = lo.values[i] + rng.uniform();
    }
    double x1 = rng.uniform(0, w - 2), y1 = rng.uniform(0, h - 2);
    Proposal p = proposal({x1, y1, x1 + rng.uniform(1, w - x1), y1 + rng.uniform(1, h - y1)}, 1.0);
    std::vector<GroundingMap> lo_maps = {lo}, hi_maps = {hi};
    CHECK(grounding_score(p, hi_maps) >= grounding_score(p, lo_maps));
  }
}

TEST_CASE("interaction score is the product and never exceeds detector confidence") {
  CHECK(interaction_score(0.5, 0.8) == Approx(0.4));
  CHECK(interaction_score(0.0, 1.0) == 0.0);
  CHECK(interaction_score(1.0, 1.0) == 1.0);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    double g = rng.uniform(), s = rng.uniform();
    CHECK(interaction_score(g, s) <= s);
    CHECK(interaction_score(g, s) <= g);
  }
}

namespace {

// a record whose proposals share one box so interaction score is driven by s
ImageRecord uniform_record(std::vector<double> human_scores, std::vector<double> object_scores) {
  ImageRecord r;
  r.id = "img";
  r.width = r.height = 10;
  for (double s : human_scores) {
    Proposal p = proposal({2, 2, 8, 8}, s);
    p.kind = ProposalKind::human;
    r.humans.push_back(p);
  }
  for (double s : object_scores) {
    Proposal p = proposal({2, 2, 8, 8}, s);
    p.kind = ProposalKind::object;
    r.objects.push_back(p);
  }
  return r;
}

}  // namespace

TEST_CASE("pruning keeps the top half and flags the rest") {
  std::vector<GroundingMap> gh = {uniform_map(10, 10, 1.0)};
  std::vector<GroundingMap> go = {uniform_map(10, 10, 1.0, MapOrigin::object_caption)};

  ImageRecord four = prune_proposals(uniform_record({0.9, 0.7, 0.4, 0.1}, {0.5}), gh, go);
  CHECK_FALSE(four.humans[0].background);
  CHECK_FALSE(four.humans[1].background);
  CHECK(four.humans[2].background);
  CHECK(four.humans[3].background);

  ImageRecord five = prune_proposals(uniform_record({0.5}, {0.9, 0.8, 0.7, 0.6, 0.5}), gh, go);
  std::size_t kept = 0;
  for (const auto& p : five.objects) kept += p.background ? 0 : 1;
  CHECK(kept == 3);  // ceil(5/2)

  ImageRecord one = prune_proposals(uniform_record({0.3}, {0.3}), gh, go);
  CHECK_FALSE(one.humans[0].background);
  CHECK_FALSE(one.objects[0].background);
}

TEST_CASE("pruning breaks interaction-score ties by detector score then index") {
  // left half of the map is hot, right half cold
  GroundingMap split = uniform_map(10, 10, 0.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 5; ++x) split.values[y * 10 + x] = 1.0;
  std::vector<GroundingMap> gh = {split};
  std::vector<GroundingMap> go = {uniform_map(10, 10, 1.0, MapOrigin::object_caption)};

  ImageRecord r;
  r.id = "ties";
  r.width = r.height = 10;
  // both in the cold half, so interaction scores tie at 0 and s decides
  r.humans = {proposal({5, 0, 9, 4}, 0.5), proposal({5, 4, 9, 8}, 0.9)};
  r.humans[0].kind = r.humans[1].kind = ProposalKind::human;
  r.objects = {proposal({2, 2, 8, 8}, 0.5)};
  ImageRecord pruned = prune_proposals(r, gh, go);
  CHECK(pruned.humans[0].background);
  CHECK_FALSE(pruned.humans[1].background);

  // identical scores too: lower index wins
  r.humans[1].score = 0.5;
  pruned = prune_proposals(r, gh, go);
  CHECK_FALSE(pruned.humans[0].background);
  CHECK(pruned.humans[1].background);
}

TEST_CASE("pruning preserves the proposal multiset and exact keep counts") {
  Rng rng(31);
  std::vector<GroundingMap> gh = {uniform_map(16, 16, 0.0)};
  std::vector<GroundingMap> go = {uniform_map(16, 16, 0.0, MapOrigin::object_caption)};
  for (auto& v : gh[0].values) v = rng.uniform();
  for (auto& v : go[0].values) v = rng.uniform();
  for (int trial = 0; trial < 50; ++trial) {
    ImageRecord r;
    r.id = "rand";
    r.width = r.height = 16;
    std::size_t n = 1 + rng.index(7), m = 1 + rng.index(7);
    for (std::size_t i = 0; i < n; ++i) {
      double x1 = rng.uniform(0, 10), y1 = rng.uniform(0, 10);
      Proposal p = proposal({x1, y1, x1 + rng.uniform(2, 6), y1 + rng.uniform(2, 6)},
                            rng.uniform());
      p.kind = ProposalKind::human;
      r.humans.push_back(p);
    }
    for (std::size_t j = 0; j < m; ++j) {
      double x1 = rng.uniform(0, 10), y1 = rng.uniform(0, 10);
      Proposal p = proposal({x1, y1, x1 + rng.uniform(2, 6), y1 + rng.uniform(2, 6)},
                            rng.uniform());
      p.kind = ProposalKind::object;
      r.objects.push_back(p);
    }
    ImageRecord pruned = prune_proposals(r, gh, go);
    REQUIRE(pruned.humans.size() == n);
    REQUIRE(pruned.objects.size() == m);
    std::size_t keep_h = 0, keep_o = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Proposal expect = r.humans[i];
      expect.background = pruned.humans[i].background;
      CHECK(pruned.humans[i] == expect);  // only the flag may change
      keep_h += pruned.humans[i].background ? 0 : 1;
    }
    for (std::size_t j = 0; j < m; ++j) keep_o += pruned.objects[j].background ? 0 : 1;
    CHECK(keep_h == (n + 1) / 2);
    CHECK(keep_o == (m + 1) / 2);
  }
}

TEST_CASE("pruning without maps warns and returns the record unchanged") {
  ImageRecord r = uniform_record({0.9, 0.1}, {0.5});
  WarnCapture capture;
  ImageRecord out = prune_proposals(r, {}, {});
  CHECK(out == r);
  CHECK_FALSE(capture.empty());
}

TEST_CASE("pruning rejects maps whose dimensions disagree with the image") {
  std::vector<GroundingMap> gh = {uniform_map(5, 5, 1.0)};
  std::vector<GroundingMap> go = {uniform_map(10, 10, 1.0, MapOrigin::object_caption)};
  CHECK_THROWS_AS(prune_proposals(uniform_record({0.5}, {0.5}), gh, go), Error);
}

TEST_CASE("gmap files round-trip bit-exactly") {
  TempDir dir("gmap");
  RawGrid g{3, 2, {0.0, 0.25, 1.5, -2.0, 7.75, 0.125}};
  fs::path a = dir / "m.gh0.gmap";
  write_gmap(a, g);
  RawGrid back = read_gmap(a);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.values == g.values);
  fs::path b = dir / "copy.gh0.gmap";
  write_gmap(b, back);
  CHECK(testutil::slurp(a) == testutil::slurp(b));
}

TEST_CASE("gmap loader rejects corrupt files") {
  TempDir dir("gmap_bad");
  atomic_write(dir / "bad.gh0.gmap", "NOPE");
  CHECK_THROWS_AS(read_gmap(dir / "bad.gh0.gmap"), Error);
  std::string truncated("GMAP", 4);
  detail::put_u32le(truncated, 4);
  detail::put_u32le(truncated, 4);
  truncated += "xx";
  atomic_write(dir / "trunc.gh0.gmap", truncated);
  CHECK_THROWS_AS(read_gmap(dir / "trunc.gh0.gmap"), Error);
}

TEST_CASE("map origin comes from the file name") {
  CHECK(origin_from_path("maps/img_0001.gh0.gmap") == MapOrigin::human_caption);
  CHECK(origin_from_path("maps/img_0001.go3.gmap") == MapOrigin::object_caption);
  CHECK_THROWS_AS(origin_from_path("maps/img_0001.gmap"), Error);
}
