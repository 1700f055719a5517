#pragma once

// Minimal dense row-major double matrix. The model is small enough that
// plain triple loops are all it needs.

#include <cstddef>
#include <vector>

#include "weakhoi/common.hpp"

namespace weakhoi {

struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  bool operator==(const Mat&) const = default;
};

inline Mat matmul(const Mat& x, const Mat& w) {
  if (x.cols != w.rows) fail("matmul: shape mismatch");
  Mat out(x.rows, w.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < w.cols; ++j) out.at(i, j) += xv * w.at(k, j);
    }
  return out;
}

// A^T * B, for weight gradients.
inline Mat matmul_at_b(const Mat& x, const Mat& d) {
  if (x.rows != d.rows) fail("matmul_at_b: shape mismatch");
  Mat out(x.cols, d.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < d.cols; ++j) out.at(k, j) += xv * d.at(i, j);
    }
  return out;
}

// A * B^T, for input gradients.
inline Mat matmul_a_bt(const Mat& d, const Mat& w) {
  if (d.cols != w.cols) fail("matmul_a_bt: shape mismatch");
  Mat out(d.rows, w.rows);
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t k = 0; k < w.rows; ++k) {
      double s = 0;
      for (std::size_t j = 0; j < d.cols; ++j) s += d.at(i, j) * w.at(k, j);
      out.at(i, k) = s;
    }
  return out;
}

inline void add_scaled(Mat& dst, const Mat& src, double scale) {
  if (dst.rows != src.rows || dst.cols != src.cols) fail("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < dst.a.size(); ++i) dst.a[i] += scale * src.a[i];
}

}  // namespace weakhoi
