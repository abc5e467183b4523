#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "aerosar/box.hpp"

namespace aerosar {

/// Anchor generation parameters for a feature pyramid. For level l, every
/// grid cell gets one anchor per (aspect_ratio, scale_multiplier) pair with
/// area (base_size * multiplier)^2 and height/width ratio aspect.
struct AnchorConfig {
  std::vector<double> base_sizes;                        // px, one per pyramid level
  std::vector<double> aspect_ratios;                     // h / w
  std::vector<double> scale_multipliers{0.25, 0.5, 1.0};  // small-target default

  /// Scales of the original detector: {2^0, 2^(1/3), 2^(2/3)}.
  static std::vector<double> standard_scales();
  /// Small-target scales: {2^-2, 2^-1, 2^0}.
  static std::vector<double> custom_scales();

  static AnchorConfig retinanet(std::vector<double> scales = standard_scales());
};

/// Strides matching AnchorConfig::retinanet levels P3..P7.
std::vector<int> retinanet_strides();

/// Level-major, row-major, ratio-major, scale-minor anchor grid.
/// Throws EmptyConfig when any config list is empty.
std::vector<BoundingBox> generate_anchors(const AnchorConfig& config, int image_width,
                                          int image_height, const std::vector<int>& strides);

enum class GtStatus { assigned, ignored, background_only };
enum class AnchorStatus { assigned, ignored, background };

struct AssignmentReport {
  int total_gt = 0;
  int assigned = 0;
  int ignored = 0;
  int background_only = 0;
  double coverage = 0.0;  // assigned / total_gt
};

struct AssignmentResult {
  AssignmentReport report;
  std::vector<GtStatus> gt_status;          // per ground-truth box
  std::vector<int> gt_best_anchor;          // argmax-IOU anchor per gt, -1 if IOU 0
  std::vector<std::optional<int>> anchor_to_gt;  // matched gt per anchor
  std::vector<AnchorStatus> anchor_status;
};

/// Dual-threshold rule: a gt is assigned when some anchor reaches IOU >= 0.5,
/// ignored when its best anchor falls in [0.4, 0.5), background otherwise.
/// Each anchor is matched to at most one gt (highest IOU, ties to the lower
/// gt index).
AssignmentResult assign_retinanet(const std::vector<BoundingBox>& gt,
                                  const std::vector<BoundingBox>& anchors);

/// Best-match rule: every gt overlapping any anchor (IOU > 0) is assigned its
/// argmax-IOU anchor, ties to the lower anchor index. Non-best anchors with
/// IOU > 0.5 are ignored on the anchor side.
AssignmentResult assign_yolo(const std::vector<BoundingBox>& gt,
                             const std::vector<BoundingBox>& anchors);

/// IOU of two boxes aligned at the origin, i.e. of their (w, h) shapes only.
double shape_iou(double w1, double h1, double w2, double h2);

/// k-means over gt box dimensions with 1 - IOU distance and component-wise
/// median updates. Centroids are returned sorted by area ascending.
/// Deterministic for a fixed seed. Throws TooFewSamples.
std::vector<std::pair<double, double>> kmeans_anchors(const std::vector<BoundingBox>& gt,
                                                      int k, std::uint64_t seed);

/// Mean (1 - IOU) from each box to its nearest centroid.
double kmeans_objective(const std::vector<BoundingBox>& gt,
                        const std::vector<std::pair<double, double>>& centroids);

/// Cross-entropy scaled by the modulating factor (1 - p_t)^gamma; alpha
/// omitted means 1. Throws DomainError outside 0 < p_t <= 1.
double focal_loss(double p_t, double gamma, std::optional<double> alpha = std::nullopt);

}  // namespace aerosar
