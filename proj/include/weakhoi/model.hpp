#pragma once

// The two-stream multiple-instance model.
//
// Per image, every (human, object) proposal pair becomes one row of a pair
// input [appearance(h) || appearance(o) || spatial(h,o)], lifted to a d-wide
// feature by a one-hidden-layer featurizer. Two linear heads map features to
// class logits; a softmax across classes (per pair) and a softmax across
// pairs (per class) multiply elementwise into the instance grid, and the
// per-class image score is the grid's column sum. The interaction head and
// the preposition head share this structure. Gradients are hand-derived for
// this fixed graph; there is no autodiff.

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakhoi/dataset.hpp"
#include "weakhoi/grounding.hpp"
#include "weakhoi/matrix.hpp"

namespace weakhoi {

inline constexpr std::size_t kSpatialWidth = 8;
inline constexpr double kProbEps = 1e-7;  // clamp for probabilities entering logs

struct TrainConfig {
  std::size_t d = 64;             // pair feature width
  double learning_rate = 1e-4;    // initial rate
  double decayed_rate = 1e-5;     // rate after decay_epoch
  std::size_t decay_epoch = 6;    // 1-based epoch after which the decayed rate applies
  std::size_t epochs = 8;
  std::size_t batch_size = 16;    // images per optimizer step
  double lambda = 0.1;            // preposition-loss weight
  double focal_gamma = 2.0;
  double focal_alpha = 0.5;
  std::uint64_t seed = 1;

  void validate() const {
    if (d == 0) fail("train config: d must be positive");
    if (!(learning_rate > 0) || !(decayed_rate > 0)) fail("train config: rates must be > 0");
    if (lambda < 0) fail("train config: lambda must be >= 0");
    if (batch_size == 0) fail("train config: batch_size must be positive");
  }
};

struct ModelParams {
  Mat feat_w;                  // input_width x d
  std::vector<double> feat_b;  // d
  Mat hoi_w1, hoi_w2;          // d x |verbs|
  Mat prep_w1, prep_w2;        // d x |preps|

  std::size_t input_width() const { return feat_w.rows; }
  std::size_t d() const { return feat_w.cols; }
  std::size_t n_verbs() const { return hoi_w1.cols; }
  std::size_t n_preps() const { return prep_w1.cols; }
};

using GradientSet = ModelParams;  // one block per parameter block, same shapes

// Seeded uniform init in [-1/sqrt(d), 1/sqrt(d)].
inline ModelParams init_params(std::size_t input_width, std::size_t d, std::size_t n_verbs,
                               std::size_t n_preps, std::uint64_t seed) {
  Rng rng(seed);
  double bound = 1.0 / std::sqrt(static_cast<double>(d));
  auto fill = [&](Mat& m, std::size_t r, std::size_t c) {
    m = Mat(r, c);
    for (double& v : m.a) v = rng.uniform(-bound, bound);
  };
  ModelParams p;
  fill(p.feat_w, input_width, d);
  p.feat_b.assign(d, 0.0);
  fill(p.hoi_w1, d, n_verbs);
  fill(p.hoi_w2, d, n_verbs);
  fill(p.prep_w1, d, n_preps);
  fill(p.prep_w2, d, n_preps);
  return p;
}

inline GradientSet zero_like(const ModelParams& p) {
  GradientSet g;
  g.feat_w = Mat(p.feat_w.rows, p.feat_w.cols);
  g.feat_b.assign(p.feat_b.size(), 0.0);
  g.hoi_w1 = Mat(p.hoi_w1.rows, p.hoi_w1.cols);
  g.hoi_w2 = Mat(p.hoi_w2.rows, p.hoi_w2.cols);
  g.prep_w1 = Mat(p.prep_w1.rows, p.prep_w1.cols);
  g.prep_w2 = Mat(p.prep_w2.rows, p.prep_w2.cols);
  return g;
}

// ---- appearance vectors ----
// Per-image binary sidecar: magic "FEAT", u32le row count, u32le width, then
// rows*width f32le. Rows are the image's humans in record order, then its
// objects in record order.

struct AppearanceSet {
  std::size_t width = 0;
  std::vector<std::vector<double>> humans;
  std::vector<std::vector<double>> objects;
};

inline void write_feat(const fs::path& path, const AppearanceSet& a) {
  std::string out("FEAT", 4);
  detail::put_u32le(out, static_cast<std::uint32_t>(a.humans.size() + a.objects.size()));
  detail::put_u32le(out, static_cast<std::uint32_t>(a.width));
  for (const auto* group : {&a.humans, &a.objects})
    for (const auto& v : *group) {
      if (v.size() != a.width) fail("write_feat: row width mismatch");
      for (double x : v) detail::put_f32le(out, static_cast<float>(x));
    }
  atomic_write(path, out);
}

inline AppearanceSet read_feat(const fs::path& path, std::size_t n_humans, std::size_t n_objects) {
  std::string bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "FEAT", 4) != 0)
    fail(path.string() + ": not a FEAT file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t rows = detail::get_u32le(p + 4);
  std::size_t width = detail::get_u32le(p + 8);
  if (bytes.size() != 12 + 4 * rows * width) fail(path.string() + ": FEAT size mismatch");
  if (rows != n_humans + n_objects)
    fail(path.string() + ": FEAT has " + std::to_string(rows) + " rows, expected " +
         std::to_string(n_humans + n_objects));
  AppearanceSet a;
  a.width = width;
  auto read_row = [&](std::size_t r) {
    std::vector<double> v(width);
    for (std::size_t i = 0; i < width; ++i)
      v[i] = static_cast<double>(detail::get_f32le(p + 12 + 4 * (r * width + i)));
    return v;
  };
  for (std::size_t i = 0; i < n_humans; ++i) a.humans.push_back(read_row(i));
  for (std::size_t j = 0; j < n_objects; ++j) a.objects.push_back(read_row(n_humans + j));
  return a;
}

// ---- pair inputs and featurizer ----

struct PairIndex {
  std::size_t human = 0, object = 0;
};

// X rows are [appearance(h_i) || appearance(o_j) || spatial(h_i, o_j)] over
// all pairs, i-major. Empty when the image has no humans or no objects.
inline Mat build_pair_inputs(const ImageRecord& record, const AppearanceSet& appearance,
                             std::vector<PairIndex>* pair_index = nullptr) {
  std::size_t n = record.humans.size(), m = record.objects.size();
  if (appearance.humans.size() != n || appearance.objects.size() != m)
    fail("appearance rows do not match proposals for image '" + record.id + "'");
  if (n == 0 || m == 0) return Mat(0, 2 * appearance.width + kSpatialWidth);
  std::size_t w = appearance.width;
  Mat x(n * m, 2 * w + kSpatialWidth);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t r = i * m + j;
      for (std::size_t k = 0; k < w; ++k) x.at(r, k) = appearance.humans[i][k];
      for (std::size_t k = 0; k < w; ++k) x.at(r, w + k) = appearance.objects[j][k];
      auto sp = pair_spatial(record.humans[i].bbox, record.objects[j].bbox, record.width,
                             record.height);
      for (std::size_t k = 0; k < kSpatialWidth; ++k) x.at(r, 2 * w + k) = sp[k];
      if (pair_index) pair_index->push_back({i, j});
    }
  return x;
}

struct FeaturizerForward {
  Mat x;     // pair inputs
  Mat hpre;  // x*W + b
  Mat z;     // relu(hpre)
  std::vector<PairIndex> pair_index;
};

inline FeaturizerForward featurize(Mat x, std::vector<PairIndex> pair_index,
                                   const ModelParams& params) {
  FeaturizerForward f;
  f.hpre = matmul(x, params.feat_w);
  for (std::size_t r = 0; r < f.hpre.rows; ++r)
    for (std::size_t c = 0; c < f.hpre.cols; ++c) f.hpre.at(r, c) += params.feat_b[c];
  f.z = f.hpre;
  for (double& v : f.z.a)
    if (v < 0) v = 0;
  f.x = std::move(x);
  f.pair_index = std::move(pair_index);
  return f;
}

struct PairFeatureMatrix {
  Mat z;  // n*m x d
  std::vector<PairIndex> pair_index;
};

inline PairFeatureMatrix pair_features(const ImageRecord& record, const AppearanceSet& appearance,
                                       const ModelParams& params) {
  std::vector<PairIndex> idx;
  Mat x = build_pair_inputs(record, appearance, &idx);
  auto f = featurize(std::move(x), std::move(idx), params);
  return {std::move(f.z), std::move(f.pair_index)};
}

// ---- softmax and heads ----

inline Mat softmax_rows(const Mat& logits) {
  Mat p(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < logits.cols; ++c) mx = std::max(mx, logits.at(r, c));
    double sum = 0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      double e = std::exp(logits.at(r, c) - mx);
      p.at(r, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < logits.cols; ++c) p.at(r, c) /= sum;
  }
  return p;
}

inline Mat softmax_cols(const Mat& logits) {
  Mat p(logits.rows, logits.cols);
  for (std::size_t c = 0; c < logits.cols; ++c) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < logits.rows; ++r) mx = std::max(mx, logits.at(r, c));
    double sum = 0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
      double e = std::exp(logits.at(r, c) - mx);
      p.at(r, c) = e;
      sum += e;
    }
    for (std::size_t r = 0; r < logits.rows; ++r) p.at(r, c) /= sum;
  }
  return p;
}

// Per-class image score: the instance grid's column sum. Bounded by the
// column-softmax normalization; sums a hair over 1 from roundoff clamp back.
inline std::vector<double> image_scores(const Mat& instance_grid) {
  std::vector<double> y(instance_grid.cols, 0.0);
  for (std::size_t r = 0; r < instance_grid.rows; ++r)
    for (std::size_t c = 0; c < instance_grid.cols; ++c) y[c] += instance_grid.at(r, c);
  for (double& v : y) v = std::clamp(v, 0.0, 1.0);
  return y;
}

struct HeadForward {
  Mat p;  // row softmax of z*w1 (class given pair)
  Mat q;  // column softmax of z*w2 (pair given class)
  Mat s;  // p .* q, the instance grid
  std::vector<double> yhat;  // column sums of s, in [0,1]
};

inline HeadForward forward_head(const Mat& z, const Mat& w1, const Mat& w2) {
  HeadForward f;
  f.p = softmax_rows(matmul(z, w1));
  f.q = softmax_cols(matmul(z, w2));
  f.s = Mat(f.p.rows, f.p.cols);
  for (std::size_t i = 0; i < f.s.a.size(); ++i) f.s.a[i] = f.p.a[i] * f.q.a[i];
  f.yhat = image_scores(f.s);
  return f;
}

inline Mat forward_hoi(const Mat& z, const ModelParams& params) {
  return forward_head(z, params.hoi_w1, params.hoi_w2).s;
}

inline Mat forward_prep(const Mat& z, const ModelParams& params) {
  return forward_head(z, params.prep_w1, params.prep_w2).s;
}

// ---- losses ----

inline double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

// Mean over classes of the binary focal loss
//   -alpha (1-p)^gamma y log p - (1-alpha) p^gamma (1-y) log(1-p).
inline double focal_loss(std::span<const double> yhat, std::span<const std::uint8_t> y,
                         double gamma, double alpha) {
  if (yhat.size() != y.size()) fail("focal_loss: size mismatch");
  double total = 0;
  for (std::size_t k = 0; k < yhat.size(); ++k) {
    double p = clamp_prob(yhat[k]);
    if (y[k])
      total += -alpha * std::pow(1.0 - p, gamma) * std::log(p);
    else
      total += -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
  }
  return total / static_cast<double>(yhat.size());
}

// d focal / d yhat, including the 1/K class mean and the clamp cutoff.
inline std::vector<double> focal_loss_grad(std::span<const double> yhat,
                                           std::span<const std::uint8_t> y, double gamma,
                                           double alpha) {
  std::vector<double> g(yhat.size(), 0.0);
  double inv_k = 1.0 / static_cast<double>(yhat.size());
  for (std::size_t k = 0; k < yhat.size(); ++k) {
    if (yhat[k] <= kProbEps || yhat[k] >= 1.0 - kProbEps) continue;  // clamp is flat
    double p = yhat[k];
    double d;
    if (y[k])
      d = alpha * gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p) -
          alpha * std::pow(1.0 - p, gamma) / p;
    else
      d = -(1.0 - alpha) * gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p) +
          (1.0 - alpha) * std::pow(p, gamma) / (1.0 - p);
    g[k] = d * inv_k;
  }
  return g;
}

inline double bce_loss(std::span<const double> yhat, std::span<const std::uint8_t> y) {
  if (yhat.size() != y.size()) fail("bce_loss: size mismatch");
  double total = 0;
  for (std::size_t k = 0; k < yhat.size(); ++k) {
    double p = clamp_prob(yhat[k]);
    total += y[k] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(yhat.size());
}

inline std::vector<double> bce_loss_grad(std::span<const double> yhat,
                                         std::span<const std::uint8_t> y) {
  std::vector<double> g(yhat.size(), 0.0);
  double inv_k = 1.0 / static_cast<double>(yhat.size());
  for (std::size_t k = 0; k < yhat.size(); ++k) {
    if (yhat[k] <= kProbEps || yhat[k] >= 1.0 - kProbEps) continue;
    double p = yhat[k];
    g[k] = (y[k] ? -1.0 / p : 1.0 / (1.0 - p)) * inv_k;
  }
  return g;
}

inline double total_loss(double hoi_loss, double prep_loss, double lambda) {
  return hoi_loss + lambda * prep_loss;
}

// ---- full image forward / backward ----

struct ImageForward {
  FeaturizerForward feat;
  HeadForward hoi;
  std::optional<HeadForward> prep;
  double hoi_loss = 0;
  double prep_loss = 0;
  double loss = 0;
};

struct ImageLabels {
  std::span<const std::uint8_t> verbs;
  std::span<const std::uint8_t> preps;  // empty when the image has no preposition labels
};

inline ImageForward forward_image(const ImageRecord& record, const AppearanceSet& appearance,
                                  const ModelParams& params, const TrainConfig& cfg,
                                  ImageLabels labels) {
  ImageForward f;
  std::vector<PairIndex> idx;
  Mat x = build_pair_inputs(record, appearance, &idx);
  f.feat = featurize(std::move(x), std::move(idx), params);
  f.hoi = forward_head(f.feat.z, params.hoi_w1, params.hoi_w2);
  f.hoi_loss = focal_loss(f.hoi.yhat, labels.verbs, cfg.focal_gamma, cfg.focal_alpha);
  bool with_prep = cfg.lambda > 0 && !labels.preps.empty() && params.n_preps() > 0;
  if (with_prep) {
    f.prep = forward_head(f.feat.z, params.prep_w1, params.prep_w2);
    f.prep_loss = bce_loss(f.prep->yhat, labels.preps);
  }
  f.loss = with_prep ? total_loss(f.hoi_loss, f.prep_loss, cfg.lambda) : f.hoi_loss;
  return f;
}

namespace detail {

// Backprop through s = p .* q with p a row softmax and q a column softmax of
// z-linear logits. dyhat is dL/d(column sums of s). Accumulates weight
// gradients and the feature gradient.
inline void backward_head(const Mat& z, const HeadForward& f, std::span<const double> dyhat,
                          const Mat& w1, const Mat& w2, double scale, Mat& dw1, Mat& dw2,
                          Mat& dz) {
  std::size_t rows = f.s.rows, cols = f.s.cols;
  // dL/ds[r,c] = dyhat[c]; dp = ds .* q, dq = ds .* p
  Mat da(rows, cols), db(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      da.at(r, c) = dyhat[c] * f.q.at(r, c);  // dL/dp
      db.at(r, c) = dyhat[c] * f.p.at(r, c);  // dL/dq
    }
  // row softmax jacobian: da_r <- p_r .* (da_r - <da_r, p_r>)
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0;
    for (std::size_t c = 0; c < cols; ++c) dot += da.at(r, c) * f.p.at(r, c);
    for (std::size_t c = 0; c < cols; ++c)
      da.at(r, c) = f.p.at(r, c) * (da.at(r, c) - dot);
  }
  // column softmax jacobian: db_c <- q_c .* (db_c - <db_c, q_c>)
  for (std::size_t c = 0; c < cols; ++c) {
    double dot = 0;
    for (std::size_t r = 0; r < rows; ++r) dot += db.at(r, c) * f.q.at(r, c);
    for (std::size_t r = 0; r < rows; ++r)
      db.at(r, c) = f.q.at(r, c) * (db.at(r, c) - dot);
  }
  add_scaled(dw1, matmul_at_b(z, da), scale);
  add_scaled(dw2, matmul_at_b(z, db), scale);
  add_scaled(dz, matmul_a_bt(da, w1), scale);
  add_scaled(dz, matmul_a_bt(db, w2), scale);
}

inline void check_finite(const Mat& m, const char* block) {
  for (double v : m.a)
    if (!std::isfinite(v)) fail(std::string("non-finite gradient in block ") + block);
}

}  // namespace detail

// Exact gradients of the combined objective for one image. Requires the
// cached forward pass.
inline GradientSet backward_image(const ImageForward& f, const ModelParams& params,
                                  const TrainConfig& cfg, ImageLabels labels) {
  GradientSet g = zero_like(params);
  std::size_t rows = f.feat.z.rows;
  if (rows == 0) return g;
  Mat dz(rows, params.d());

  auto dy_hoi = focal_loss_grad(f.hoi.yhat, labels.verbs, cfg.focal_gamma, cfg.focal_alpha);
  detail::backward_head(f.feat.z, f.hoi, dy_hoi, params.hoi_w1, params.hoi_w2, 1.0, g.hoi_w1,
                        g.hoi_w2, dz);
  if (f.prep) {
    auto dy_prep = bce_loss_grad(f.prep->yhat, labels.preps);
    detail::backward_head(f.feat.z, *f.prep, dy_prep, params.prep_w1, params.prep_w2, cfg.lambda,
                          g.prep_w1, g.prep_w2, dz);
  }

  // relu, then the linear featurizer
  Mat dh = dz;
  for (std::size_t i = 0; i < dh.a.size(); ++i)
    if (f.feat.hpre.a[i] <= 0) dh.a[i] = 0;
  g.feat_w = matmul_at_b(f.feat.x, dh);
  for (std::size_t r = 0; r < dh.rows; ++r)
    for (std::size_t c = 0; c < dh.cols; ++c) g.feat_b[c] += dh.at(r, c);

  detail::check_finite(g.feat_w, "feat_w");
  for (double v : g.feat_b)
    if (!std::isfinite(v)) fail("non-finite gradient in block feat_b");
  detail::check_finite(g.hoi_w1, "hoi_w1");
  detail::check_finite(g.hoi_w2, "hoi_w2");
  detail::check_finite(g.prep_w1, "prep_w1");
  detail::check_finite(g.prep_w2, "prep_w2");
  return g;
}

inline void accumulate(GradientSet& acc, const GradientSet& g, double scale) {
  add_scaled(acc.feat_w, g.feat_w, scale);
  for (std::size_t i = 0; i < acc.feat_b.size(); ++i) acc.feat_b[i] += scale * g.feat_b[i];
  add_scaled(acc.hoi_w1, g.hoi_w1, scale);
  add_scaled(acc.hoi_w2, g.hoi_w2, scale);
  add_scaled(acc.prep_w1, g.prep_w1, scale);
  add_scaled(acc.prep_w2, g.prep_w2, scale);
}

// ---- optimizer ----

inline double lr_for_epoch(const TrainConfig& cfg, std::size_t epoch) {
  return epoch > cfg.decay_epoch ? cfg.decayed_rate : cfg.learning_rate;
}

// Plain gradient descent, w <- w - eta * g.
inline void optimizer_step(ModelParams& params, const GradientSet& grads, const TrainConfig& cfg,
                           std::size_t epoch) {
  double eta = lr_for_epoch(cfg, epoch);
  add_scaled(params.feat_w, grads.feat_w, -eta);
  for (std::size_t i = 0; i < params.feat_b.size(); ++i) params.feat_b[i] -= eta * grads.feat_b[i];
  add_scaled(params.hoi_w1, grads.hoi_w1, -eta);
  add_scaled(params.hoi_w2, grads.hoi_w2, -eta);
  add_scaled(params.prep_w1, grads.prep_w1, -eta);
  add_scaled(params.prep_w2, grads.prep_w2, -eta);
}

// ---- checkpoints ----
// Self-describing JSON: config echo, vocabulary hashes, weight blocks as flat
// 64-bit float arrays with shape headers.

inline json train_config_to_json(const TrainConfig& c) {
  json j;
  j["d"] = c.d;
  j["learning_rate"] = c.learning_rate;
  j["decayed_rate"] = c.decayed_rate;
  j["decay_epoch"] = c.decay_epoch;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lambda"] = c.lambda;
  j["focal_gamma"] = c.focal_gamma;
  j["focal_alpha"] = c.focal_alpha;
  j["seed"] = c.seed;
  return j;
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.d = j.value("d", c.d);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.decayed_rate = j.value("decayed_rate", c.decayed_rate);
  c.decay_epoch = j.value("decay_epoch", c.decay_epoch);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lambda = j.value("lambda", c.lambda);
  c.focal_gamma = j.value("focal_gamma", c.focal_gamma);
  c.focal_alpha = j.value("focal_alpha", c.focal_alpha);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  std::size_t appearance_width = 0;
  std::string verb_hash, object_hash, prep_hash;
};

inline void save_checkpoint(const fs::path& path, const Checkpoint& ck) {
  auto block = [](const char* name, const Mat& m) {
    json b;
    b["name"] = name;
    b["rows"] = m.rows;
    b["cols"] = m.cols;
    b["data"] = m.a;
    return b;
  };
  json blocks = json::array();
  blocks.push_back(block("feat_w", ck.params.feat_w));
  {
    json b;
    b["name"] = "feat_b";
    b["rows"] = 1;
    b["cols"] = ck.params.feat_b.size();
    b["data"] = ck.params.feat_b;
    blocks.push_back(std::move(b));
  }
  blocks.push_back(block("hoi_w1", ck.params.hoi_w1));
  blocks.push_back(block("hoi_w2", ck.params.hoi_w2));
  blocks.push_back(block("prep_w1", ck.params.prep_w1));
  blocks.push_back(block("prep_w2", ck.params.prep_w2));
  json j;
  j["appearance_width"] = ck.appearance_width;
  j["blocks"] = std::move(blocks);
  j["config"] = train_config_to_json(ck.config);
  j["vocab"] = {{"verb_hash", ck.verb_hash},
                {"object_hash", ck.object_hash},
                {"prep_hash", ck.prep_hash}};
  atomic_write(path, j.dump() + "\n");
}

inline Checkpoint load_checkpoint(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(path.string() + ": not valid JSON: " + e.what());
  }
  const std::string ctx = path.filename().string();
  Checkpoint ck;
  ck.appearance_width = detail::need_key(j, "appearance_width", ctx).get<std::size_t>();
  ck.config = train_config_from_json(detail::need_key(j, "config", ctx));
  const json& vocab = detail::need_key(j, "vocab", ctx);
  ck.verb_hash = vocab.value("verb_hash", "");
  ck.object_hash = vocab.value("object_hash", "");
  ck.prep_hash = vocab.value("prep_hash", "");
  std::map<std::string, Mat> mats;
  for (const auto& b : detail::need_key(j, "blocks", ctx)) {
    Mat m(b["rows"].get<std::size_t>(), b["cols"].get<std::size_t>());
    const auto& data = b["data"];
    if (data.size() != m.a.size()) fail(ctx + ": block size mismatch");
    for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] = data[i].get<double>();
    mats[b["name"].get<std::string>()] = std::move(m);
  }
  for (const char* name : {"feat_w", "feat_b", "hoi_w1", "hoi_w2", "prep_w1", "prep_w2"})
    if (!mats.count(name)) fail(ctx + ": missing weight block '" + std::string(name) + "'");
  ck.params.feat_w = std::move(mats["feat_w"]);
  ck.params.feat_b = std::move(mats["feat_b"].a);
  ck.params.hoi_w1 = std::move(mats["hoi_w1"]);
  ck.params.hoi_w2 = std::move(mats["hoi_w2"]);
  ck.params.prep_w1 = std::move(mats["prep_w1"]);
  ck.params.prep_w2 = std::move(mats["prep_w2"]);
  return ck;
}

}  // namespace weakhoi
