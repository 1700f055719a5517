#pragma once

// Box geometry. Boxes are continuous-coordinate, corners (x1,y1) top-left and
// (x2,y2) bottom-right, in pixels. Area is (x2-x1)*(y2-y1).

#include <algorithm>
#include <array>
#include <cmath>

#include "weakhoi/common.hpp"

namespace weakhoi {

struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const BBox&) const = default;
};

inline bool bbox_valid(const BBox& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x1 >= 0 && b.y1 >= 0 && b.x1 < b.x2 && b.y1 < b.y2;
}

inline BBox clip_bbox(const BBox& b, double width, double height) {
  BBox c;
  c.x1 = std::clamp(b.x1, 0.0, width);
  c.y1 = std::clamp(b.y1, 0.0, height);
  c.x2 = std::clamp(b.x2, 0.0, width);
  c.y2 = std::clamp(b.y2, 0.0, height);
  return c;
}

inline double intersection_area(const BBox& a, const BBox& b) {
  double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0 || h <= 0) return 0.0;
  return w * h;
}

// Intersection over union. Degenerate (zero-area) inputs give 0 rather than
// failing so evaluation can consume arbitrary detector output.
inline double iou(const BBox& a, const BBox& b) {
  double inter = intersection_area(a, b);
  double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return inter / uni;
}

// Integer cell range of a continuous box over a width x height grid: the cells
// whose centers (i+0.5, j+0.5) lie in the half-open box [x1,x2) x [y1,y2).
struct CellRange {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // half-open [x0,x1) x [y0,y1)

  int count() const { return std::max(0, x1 - x0) * std::max(0, y1 - y0); }
};

inline CellRange raster_cells(const BBox& b, int grid_w, int grid_h) {
  CellRange r;
  r.x0 = std::max(0, static_cast<int>(std::ceil(b.x1 - 0.5)));
  r.y0 = std::max(0, static_cast<int>(std::ceil(b.y1 - 0.5)));
  r.x1 = std::min(grid_w, static_cast<int>(std::ceil(b.x2 - 0.5)));
  r.y1 = std::min(grid_h, static_cast<int>(std::ceil(b.y2 - 0.5)));
  return r;
}

// Pairwise spatial descriptor for a (human, object) box pair: normalized
// center deltas, log size ratios, iou, and the three areas relative to the
// image. Width 8.
inline std::array<double, 8> pair_spatial(const BBox& h, const BBox& o, double img_w,
                                          double img_h) {
  double hcx = 0.5 * (h.x1 + h.x2), hcy = 0.5 * (h.y1 + h.y2);
  double ocx = 0.5 * (o.x1 + o.x2), ocy = 0.5 * (o.y1 + o.y2);
  double img_area = img_w * img_h;
  BBox uni{std::min(h.x1, o.x1), std::min(h.y1, o.y1), std::max(h.x2, o.x2),
           std::max(h.y2, o.y2)};
  return {
      (ocx - hcx) / img_w,
      (ocy - hcy) / img_h,
      std::log(h.width() / o.width()),
      std::log(h.height() / o.height()),
      iou(h, o),
      h.area() / img_area,
      o.area() / img_area,
      uni.area() / img_area,
  };
}

}  // namespace weakhoi
