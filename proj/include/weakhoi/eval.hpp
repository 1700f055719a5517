#pragma once

// Detection from a trained model and average-precision evaluation with
// greedy IoU-0.5 matching.
//
// Role mode: a detection is a true positive when some unmatched ground-truth
// instance has the same verb, the same object category, and both the human
// and object boxes overlap it with IoU >= 0.5. Agent mode requires only the
// verb and the human box. Full mode scores role-style matches but averages
// over <verb, object> pair classes. Each ground truth matches at most one
// detection; detections claim in descending score order.

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "weakhoi/model.hpp"
#include "weakhoi/plausibility.hpp"

namespace weakhoi {

inline constexpr double kIouThreshold = 0.5;

struct Detection {
  BBox human_bbox;
  BBox object_bbox;
  std::size_t object_category = 0;
  std::size_t verb_category = 0;
  double score = 0;
};

struct ImageDetections {
  std::string image_id;
  std::vector<Detection> detections;
};

enum class EvalMode { role, agent, full };

inline const char* eval_mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::role: return "role";
    case EvalMode::agent: return "agent";
    case EvalMode::full: return "full";
  }
  return "?";
}

inline EvalMode parse_eval_mode(const std::string& s) {
  if (s == "role") return EvalMode::role;
  if (s == "agent") return EvalMode::agent;
  if (s == "full" || s == "full_map") return EvalMode::full;
  fail("unknown evaluation mode '" + s + "' (expected role, agent or full)");
}

// One detection per proposal pair: the argmax verb of the pair's instance row
// (ties to the lowest verb index) scored by the row maximum times both
// detector confidences, optionally doubled through the plausibility table.
// Proposal pruning is never applied here; background flags are ignored.
inline std::vector<Detection> detect(const ImageRecord& record, const AppearanceSet& appearance,
                                     const ModelParams& params,
                                     const PlausibilityTable* table = nullptr) {
  std::vector<Detection> out;
  PairFeatureMatrix pf = pair_features(record, appearance, params);
  if (pf.z.rows == 0) return out;
  Mat grid = forward_hoi(pf.z, params);
  out.reserve(grid.rows);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.cols; ++k)
      if (grid.at(r, k) > grid.at(r, best)) best = k;
    const Proposal& h = record.humans[pf.pair_index[r].human];
    const Proposal& o = record.objects[pf.pair_index[r].object];
    Detection d;
    d.human_bbox = h.bbox;
    d.object_bbox = o.bbox;
    d.object_category = o.category;
    d.verb_category = best;
    d.score = grid.at(r, best) * h.score * o.score;
    if (table) d.score = rescore(d.score, d.object_category, d.verb_category, *table);
    out.push_back(d);
  }
  return out;
}

namespace detail {

inline bool role_eligible(const Detection& d, const GroundTruthInstance& g) {
  return d.verb_category == g.verb_category && d.object_category == g.object_category &&
         iou(d.human_bbox, g.human_bbox) >= kIouThreshold &&
         iou(d.object_bbox, g.object_bbox) >= kIouThreshold;
}

inline bool agent_eligible(const Detection& d, const GroundTruthInstance& g) {
  return d.verb_category == g.verb_category &&
         iou(d.human_bbox, g.human_bbox) >= kIouThreshold;
}

}  // namespace detail

// Greedy matching over detections already sorted by descending score.
// A detection claims the eligible unmatched ground truth with the largest
// overlap (min of the two IoUs in role/full mode, human IoU in agent mode);
// ties go to the lowest ground-truth index.
inline std::vector<char> match_greedy(std::span<const Detection> sorted_dets,
                                      std::span<const GroundTruthInstance> gts, EvalMode mode) {
  std::vector<char> flags(sorted_dets.size(), 0);
  std::vector<char> taken(gts.size(), 0);
  for (std::size_t di = 0; di < sorted_dets.size(); ++di) {
    const Detection& d = sorted_dets[di];
    double best_ov = -1;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi]) continue;
      const GroundTruthInstance& g = gts[gi];
      bool ok = mode == EvalMode::agent ? detail::agent_eligible(d, g)
                                        : detail::role_eligible(d, g);
      if (!ok) continue;
      double ov = mode == EvalMode::agent
                      ? iou(d.human_bbox, g.human_bbox)
                      : std::min(iou(d.human_bbox, g.human_bbox), iou(d.object_bbox, g.object_bbox));
      if (ov > best_ov) {
        best_ov = ov;
        best_gt = gi;
      }
    }
    if (best_gt < gts.size()) {
      taken[best_gt] = 1;
      flags[di] = 1;
    }
  }
  return flags;
}

struct PRCurve {
  std::vector<std::pair<double, double>> points;  // (recall, precision) per detection
  double ap = 0;
};

// Area under the precision-envelope/recall curve (all-point interpolation);
// optionally the 11-point variant for cross-checking. Detections are ranked
// by descending score, ties keeping input order.
inline PRCurve average_precision(std::span<const char> flags, std::span<const double> scores,
                                 std::size_t n_gt, bool eleven_point = false) {
  if (flags.size() != scores.size()) fail("average_precision: size mismatch");
  PRCurve curve;
  if (n_gt == 0) return curve;  // defined as 0, caller excludes from means
  std::vector<std::size_t> order(flags.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0;
  std::vector<double> rec, prec;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (flags[order[i]]) ++tp;
    double r = static_cast<double>(tp) / static_cast<double>(n_gt);
    double p = static_cast<double>(tp) / static_cast<double>(i + 1);
    rec.push_back(r);
    prec.push_back(p);
    curve.points.emplace_back(r, p);
  }
  if (rec.empty()) return curve;
  if (eleven_point) {
    double total = 0;
    for (int t = 0; t <= 10; ++t) {
      double thresh = t / 10.0;
      double best = 0;
      for (std::size_t i = 0; i < rec.size(); ++i)
        if (rec[i] >= thresh) best = std::max(best, prec[i]);
      total += best;
    }
    curve.ap = total / 11.0;
    return curve;
  }
  // precision envelope over recall
  std::vector<double> mrec{0.0};
  mrec.insert(mrec.end(), rec.begin(), rec.end());
  mrec.push_back(rec.back());
  std::vector<double> mpre{0.0};
  mpre.insert(mpre.end(), prec.begin(), prec.end());
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i-- > 0;) mpre[i] = std::max(mpre[i], mpre[i + 1]);
  double ap = 0;
  for (std::size_t i = 0; i + 1 < mrec.size(); ++i)
    if (mrec[i + 1] != mrec[i]) ap += (mrec[i + 1] - mrec[i]) * mpre[i + 1];
  curve.ap = ap;
  return curve;
}

struct EvalResult {
  EvalMode mode = EvalMode::role;
  std::map<std::string, double> per_class_ap;   // classes with at least one GT
  std::map<std::string, PRCurve> per_class_curve;
  double mean_ap = 0;
  // Diagnostic (role mode only): detections flagged TP under role criteria
  // but FP under agent criteria. Greedy matching does not guarantee zero
  // adversarially, so this is reported, not enforced.
  std::size_t role_agent_violations = 0;
};

inline EvalResult evaluate(const std::vector<ImageDetections>& detections,
                           const std::vector<ImageRecord>& records, const Vocabulary& verbs,
                           const Vocabulary& objects, EvalMode mode, bool eleven_point = false) {
  std::map<std::string, std::size_t> record_of;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (record_of.count(records[i].id)) fail("evaluate: duplicate image id '" + records[i].id + "'");
    record_of[records[i].id] = i;
  }

  // class key: verb index, or verb * |objects| + object for pair classes
  auto class_key = [&](std::size_t verb, std::size_t obj) {
    return mode == EvalMode::full ? verb * objects.size() + obj : verb;
  };
  auto class_name = [&](std::size_t key) {
    if (mode == EvalMode::full)
      return verbs.name(key / objects.size()) + " " + objects.name(key % objects.size());
    return verbs.name(key);
  };

  std::map<std::size_t, std::size_t> n_gt;
  for (const auto& r : records)
    for (const auto& g : r.ground_truth) ++n_gt[class_key(g.verb_category, g.object_category)];

  // Pooled (score, flag) pairs per class across images.
  std::map<std::size_t, std::vector<std::pair<double, char>>> pooled;
  std::size_t violations = 0;

  for (const auto& img : detections) {
    auto it = record_of.find(img.image_id);
    if (it == record_of.end())
      fail("evaluate: detections reference unknown image id '" + img.image_id + "'");
    const ImageRecord& rec = records[it->second];

    // split this image's detections by class, keeping input order for ties
    std::map<std::size_t, std::vector<Detection>> by_class;
    for (const auto& d : img.detections)
      by_class[class_key(d.verb_category, d.object_category)].push_back(d);

    for (auto& [key, dets] : by_class) {
      std::stable_sort(dets.begin(), dets.end(),
                       [](const Detection& a, const Detection& b) { return a.score > b.score; });
      std::vector<GroundTruthInstance> gts;
      for (const auto& g : rec.ground_truth)
        if (class_key(g.verb_category, g.object_category) == key) gts.push_back(g);
      std::vector<char> flags = match_greedy(dets, gts, mode == EvalMode::agent
                                                            ? EvalMode::agent
                                                            : EvalMode::role);
      if (mode == EvalMode::role) {
        std::vector<char> agent_flags = match_greedy(dets, gts, EvalMode::agent);
        for (std::size_t i = 0; i < flags.size(); ++i)
          if (flags[i] && !agent_flags[i]) ++violations;
      }
      auto& pool = pooled[key];
      for (std::size_t i = 0; i < dets.size(); ++i) pool.emplace_back(dets[i].score, flags[i]);
    }
  }

  EvalResult result;
  result.mode = mode;
  result.role_agent_violations = violations;
  double sum = 0;
  std::size_t classes = 0;
  for (const auto& [key, count] : n_gt) {
    if (count == 0) continue;
    std::vector<char> flags;
    std::vector<double> scores;
    if (auto it = pooled.find(key); it != pooled.end()) {
      for (const auto& [s, f] : it->second) {
        scores.push_back(s);
        flags.push_back(f);
      }
    }
    PRCurve curve = average_precision(flags, scores, count, eleven_point);
    result.per_class_ap[class_name(key)] = curve.ap;
    result.per_class_curve[class_name(key)] = std::move(curve);
    sum += result.per_class_ap[class_name(key)];
    ++classes;
  }
  result.mean_ap = classes > 0 ? sum / static_cast<double>(classes) : 0.0;
  return result;
}

// ---- files ----

inline std::string serialize_detections(const std::vector<ImageDetections>& all,
                                        const Vocabulary& verbs, const Vocabulary& objects) {
  std::string out;
  for (const auto& img : all) {
    json dets = json::array();
    for (const auto& d : img.detections) {
      json e;
      e["human_box"] = json::array({d.human_bbox.x1, d.human_bbox.y1, d.human_bbox.x2,
                                    d.human_bbox.y2});
      e["object_box"] = json::array({d.object_bbox.x1, d.object_bbox.y1, d.object_bbox.x2,
                                     d.object_bbox.y2});
      e["object_category"] = objects.name(d.object_category);
      e["verb"] = verbs.name(d.verb_category);
      e["score"] = d.score;
      dets.push_back(std::move(e));
    }
    json j;
    j["image_id"] = img.image_id;
    j["detections"] = std::move(dets);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ImageDetections> load_detections(const fs::path& path, const Vocabulary& verbs,
                                                    const Vocabulary& objects) {
  std::ifstream in(path);
  if (!in) fail("cannot open detections file " + path.string());
  std::vector<ImageDetections> out;
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
    ImageDetections img;
    const json& id = detail::need_key(j, "image_id", ctx);
    if (!id.is_string()) fail(ctx + ": 'image_id' must be a string");
    img.image_id = id.get<std::string>();
    for (const auto& e : detail::need_key(j, "detections", ctx)) {
      Detection d;
      d.human_bbox = detail::parse_box(detail::need_key(e, "human_box", ctx), ctx);
      d.object_bbox = detail::parse_box(detail::need_key(e, "object_box", ctx), ctx);
      d.object_category =
          objects.require(detail::need_key(e, "object_category", ctx).get<std::string>(), ctx);
      d.verb_category = verbs.require(detail::need_key(e, "verb", ctx).get<std::string>(), ctx);
      const json& score = detail::need_key(e, "score", ctx);
      if (!score.is_number()) fail(ctx + ": 'score' must be a number");
      d.score = score.get<double>();
      if (!(d.score >= 0) || !std::isfinite(d.score)) fail(ctx + ": score must be finite and >= 0");
      img.detections.push_back(d);
    }
    out.push_back(std::move(img));
  }
  return out;
}

inline json report_to_json(const EvalResult& r) {
  json per_class = json::object();
  for (const auto& [name, ap] : r.per_class_ap) per_class[name] = ap;
  json j;
  j["mode"] = eval_mode_name(r.mode);
  j["per_class"] = std::move(per_class);
  j["mean_ap"] = r.mean_ap;
  return j;
}

inline std::string pr_curve_csv(const PRCurve& c) {
  std::string out = "recall,precision\n";
  for (const auto& [rec, prec] : c.points) {
    json r = rec, p = prec;  // shortest round-trip number formatting
    out += r.dump() + "," + p.dump() + "\n";
  }
  return out;
}

}  // namespace weakhoi
