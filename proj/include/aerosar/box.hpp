#pragma once

#include <optional>
#include <string>

namespace aerosar {

enum class Spectrum { optical, thermal };

std::string to_string(Spectrum s);
Spectrum spectrum_from_string(const std::string& s);

/// Axis-aligned box with continuous (sub-pixel) coordinates and half-open
/// [min, max) semantics: area = (x_max - x_min) * (y_max - y_min).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_max >= x_min && y_max >= y_min; }

  BoundingBox translated(double dx, double dy) const {
    return {x_min + dx, y_min + dy, x_max + dx, y_max + dy};
  }

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  }
};

/// Intersection over union. 0 when disjoint or when the union is degenerate.
double iou(const BoundingBox& a, const BoundingBox& b);

/// All coordinates divided by factor (association runs on half-sampled images).
BoundingBox downsample_bbox(const BoundingBox& b, double factor);

struct Detection {
  BoundingBox bbox;
  double score = 0.0;
  Spectrum spectrum = Spectrum::optical;
  int frame = 0;
  double t = 0.0;  // seconds
  std::optional<int> human_id;
};

}  // namespace aerosar
