#pragma once

// Seeded training loop: shuffled image order per epoch, gradients averaged
// over the images of each batch, one plain gradient-descent step per batch.
// Images without any human or object proposal are skipped and counted. The
// preposition term is skipped per image when the image carries no preposition
// labels, and globally when lambda is 0.

#include <chrono>
#include <numeric>

#include "weakhoi/model.hpp"

namespace weakhoi {

struct EpochStats {
  std::size_t epoch = 0;
  double mean_hoi_loss = 0;
  double mean_prep_loss = 0;  // over images that had a preposition term
  double mean_total_loss = 0;
  std::size_t images_used = 0;
  std::size_t images_skipped = 0;
  double seconds = 0;
};

inline ImageLabels labels_of(const ImageRecord& r) {
  ImageLabels l;
  l.verbs = r.verb_labels;
  if (r.has_prep_labels) l.preps = r.prep_labels;
  return l;
}

// One pass over the dataset in seeded shuffled order, updating params.
inline EpochStats train_epoch(const std::vector<ImageRecord>& records,
                              const std::vector<AppearanceSet>& features, ModelParams& params,
                              const TrainConfig& cfg, std::size_t epoch) {
  if (records.size() != features.size()) fail("train_epoch: features do not match records");
  auto t0 = std::chrono::steady_clock::now();
  EpochStats stats;
  stats.epoch = epoch;

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);

  double sum_hoi = 0, sum_prep = 0, sum_total = 0;
  std::size_t prep_images = 0;

  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    std::size_t end = std::min(order.size(), start + cfg.batch_size);
    GradientSet acc = zero_like(params);
    std::size_t contributing = 0;
    for (std::size_t it = start; it < end; ++it) {
      const ImageRecord& rec = records[order[it]];
      if (rec.humans.empty() || rec.objects.empty()) {
        ++stats.images_skipped;
        continue;
      }
      ImageLabels labels = labels_of(rec);
      ImageForward f = forward_image(rec, features[order[it]], params, cfg, labels);
      GradientSet g = backward_image(f, params, cfg, labels);
      accumulate(acc, g, 1.0);
      ++contributing;
      sum_hoi += f.hoi_loss;
      sum_total += f.loss;
      if (f.prep) {
        sum_prep += f.prep_loss;
        ++prep_images;
      }
    }
    if (contributing == 0) continue;
    GradientSet mean = zero_like(params);
    accumulate(mean, acc, 1.0 / static_cast<double>(contributing));
    optimizer_step(params, mean, cfg, epoch);
    stats.images_used += contributing;
  }

  if (stats.images_used > 0) {
    sum_hoi /= static_cast<double>(stats.images_used);
    sum_total /= static_cast<double>(stats.images_used);
  }
  stats.mean_hoi_loss = sum_hoi;
  stats.mean_prep_loss = prep_images > 0 ? sum_prep / static_cast<double>(prep_images) : 0.0;
  stats.mean_total_loss = sum_total;
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> epochs;
};

// Full run: seeded init then cfg.epochs passes. Epoch records go to
// `jsonl_log` as one JSON object per line; a short human-readable summary
// goes to `human_log`.
inline TrainResult train_model(const std::vector<ImageRecord>& records,
                               const std::vector<AppearanceSet>& features,
                               std::size_t appearance_width, const TrainConfig& cfg,
                               std::size_t n_verbs, std::size_t n_preps,
                               std::ostream* jsonl_log = nullptr,
                               std::ostream* human_log = nullptr) {
  cfg.validate();
  TrainResult result;
  std::size_t input_width = 2 * appearance_width + kSpatialWidth;
  result.params = init_params(input_width, cfg.d, n_verbs, n_preps, cfg.seed);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats s = train_epoch(records, features, result.params, cfg, epoch);
    result.epochs.push_back(s);
    if (jsonl_log) {
      json j;
      j["epoch"] = s.epoch;
      j["lr"] = lr_for_epoch(cfg, epoch);
      j["hoi_loss"] = s.mean_hoi_loss;
      j["prep_loss"] = s.mean_prep_loss;
      j["total_loss"] = s.mean_total_loss;
      j["images_used"] = s.images_used;
      j["images_skipped"] = s.images_skipped;
      j["seconds"] = s.seconds;
      *jsonl_log << j.dump() << "\n";
    }
    if (human_log)
      *human_log << "epoch " << s.epoch << "/" << cfg.epochs << "  loss " << s.mean_total_loss
                 << "  (hoi " << s.mean_hoi_loss << ", prep " << s.mean_prep_loss << ")  images "
                 << s.images_used << "\n";
  }
  return result;
}

}  // namespace weakhoi
