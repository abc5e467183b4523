#include "aerosar/box.hpp"

#include <algorithm>

#include "aerosar/errors.hpp"

namespace aerosar {

std::string to_string(Spectrum s) {
  return s == Spectrum::optical ? "optical" : "thermal";
}

Spectrum spectrum_from_string(const std::string& s) {
  if (s == "optical") return Spectrum::optical;
  if (s == "thermal") return Spectrum::thermal;
  throw SchemaError("spectrum", "unknown value '" + s + "'");
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

BoundingBox downsample_bbox(const BoundingBox& b, double factor) {
  return {b.x_min / factor, b.y_min / factor, b.x_max / factor, b.y_max / factor};
}

}  // namespace aerosar
