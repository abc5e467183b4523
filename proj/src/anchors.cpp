#include "aerosar/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aerosar/errors.hpp"
#include "aerosar/rng.hpp"

namespace aerosar {

std::vector<double> AnchorConfig::standard_scales() {
  return {1.0, std::pow(2.0, 1.0 / 3.0), std::pow(2.0, 2.0 / 3.0)};
}

std::vector<double> AnchorConfig::custom_scales() { return {0.25, 0.5, 1.0}; }

AnchorConfig AnchorConfig::retinanet(std::vector<double> scales) {
  AnchorConfig cfg;
  cfg.base_sizes = {32.0, 64.0, 128.0, 256.0, 512.0};  // P3..P7
  cfg.aspect_ratios = {0.5, 1.0, 2.0};
  cfg.scale_multipliers = std::move(scales);
  return cfg;
}

std::vector<int> retinanet_strides() { return {8, 16, 32, 64, 128}; }

std::vector<BoundingBox> generate_anchors(const AnchorConfig& config, int image_width,
                                          int image_height, const std::vector<int>& strides) {
  if (config.base_sizes.empty() || config.aspect_ratios.empty() ||
      config.scale_multipliers.empty() || strides.empty()) {
    throw EmptyConfig();
  }
  if (strides.size() != config.base_sizes.size()) {
    throw Error("strides and base_sizes must have one entry per pyramid level");
  }

  std::vector<BoundingBox> anchors;
  for (std::size_t level = 0; level < config.base_sizes.size(); ++level) {
    const int stride = strides[level];
    const int cols = image_width / stride;
    const int rows = image_height / stride;
    const double base = config.base_sizes[level];
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        const double cx = (col + 0.5) * stride;
        const double cy = (row + 0.5) * stride;
        for (double ratio : config.aspect_ratios) {
          for (double scale : config.scale_multipliers) {
            const double side = base * scale;
            const double w = side / std::sqrt(ratio);
            const double h = side * std::sqrt(ratio);
            anchors.push_back(BoundingBox::from_center(cx, cy, w, h));
          }
        }
      }
    }
  }
  return anchors;
}

namespace {

AssignmentReport make_report(const std::vector<GtStatus>& status) {
  AssignmentReport report;
  report.total_gt = static_cast<int>(status.size());
  for (GtStatus s : status) {
    if (s == GtStatus::assigned) ++report.assigned;
    else if (s == GtStatus::ignored) ++report.ignored;
    else ++report.background_only;
  }
  report.coverage = report.total_gt > 0
                        ? static_cast<double>(report.assigned) / report.total_gt
                        : 0.0;
  return report;
}

}  // namespace

AssignmentResult assign_retinanet(const std::vector<BoundingBox>& gt,
                                  const std::vector<BoundingBox>& anchors) {
  AssignmentResult result;
  const std::size_t n_gt = gt.size();
  result.gt_status.assign(n_gt, GtStatus::background_only);
  result.gt_best_anchor.assign(n_gt, -1);
  result.anchor_to_gt.assign(anchors.size(), std::nullopt);
  result.anchor_status.assign(anchors.size(), AnchorStatus::background);

  std::vector<double> gt_best_iou(n_gt, 0.0);
  for (std::size_t ai = 0; ai < anchors.size(); ++ai) {
    double best = 0.0;
    int best_gt = -1;
    for (std::size_t gi = 0; gi < n_gt; ++gi) {
      const double v = iou(anchors[ai], gt[gi]);
      if (v > best) {  // ties keep the lower gt index
        best = v;
        best_gt = static_cast<int>(gi);
      }
      if (v > gt_best_iou[gi]) {
        gt_best_iou[gi] = v;
        result.gt_best_anchor[gi] = static_cast<int>(ai);
      }
    }
    if (best_gt >= 0 && best >= 0.5) {
      result.anchor_to_gt[ai] = best_gt;
      result.anchor_status[ai] = AnchorStatus::assigned;
    } else if (best >= 0.4) {
      result.anchor_status[ai] = AnchorStatus::ignored;
    }
  }

  for (std::size_t gi = 0; gi < n_gt; ++gi) {
    if (gt_best_iou[gi] >= 0.5) result.gt_status[gi] = GtStatus::assigned;
    else if (gt_best_iou[gi] >= 0.4) result.gt_status[gi] = GtStatus::ignored;
  }
  result.report = make_report(result.gt_status);
  return result;
}

AssignmentResult assign_yolo(const std::vector<BoundingBox>& gt,
                             const std::vector<BoundingBox>& anchors) {
  AssignmentResult result;
  const std::size_t n_gt = gt.size();
  result.gt_status.assign(n_gt, GtStatus::background_only);
  result.gt_best_anchor.assign(n_gt, -1);
  result.anchor_to_gt.assign(anchors.size(), std::nullopt);
  result.anchor_status.assign(anchors.size(), AnchorStatus::background);

  for (std::size_t gi = 0; gi < n_gt; ++gi) {
    double best = 0.0;
    int best_anchor = -1;
    for (std::size_t ai = 0; ai < anchors.size(); ++ai) {
      const double v = iou(anchors[ai], gt[gi]);
      if (v > best) {  // ties keep the lower anchor index
        best = v;
        best_anchor = static_cast<int>(ai);
      }
      // Non-best anchors above 0.5 have their predictions ignored.
      if (v > 0.5 && result.anchor_status[ai] == AnchorStatus::background) {
        result.anchor_status[ai] = AnchorStatus::ignored;
      }
    }
    if (best_anchor >= 0) {
      result.gt_status[gi] = GtStatus::assigned;
      result.gt_best_anchor[gi] = best_anchor;
      result.anchor_status[best_anchor] = AnchorStatus::assigned;
      if (!result.anchor_to_gt[best_anchor].has_value()) {
        result.anchor_to_gt[best_anchor] = static_cast<int>(gi);
      }
    }
  }
  result.report = make_report(result.gt_status);
  return result;
}

double shape_iou(double w1, double h1, double w2, double h2) {
  const double inter = std::min(w1, w2) * std::min(h1, h2);
  const double uni = w1 * h1 + w2 * h2 - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double kmeans_objective(const std::vector<BoundingBox>& gt,
                        const std::vector<std::pair<double, double>>& centroids) {
  double sum = 0.0;
  for (const auto& box : gt) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [w, h] : centroids) {
      best = std::min(best, 1.0 - shape_iou(box.width(), box.height(), w, h));
    }
    sum += best;
  }
  return gt.empty() ? 0.0 : sum / static_cast<double>(gt.size());
}

namespace {

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<std::pair<double, double>> kmeans_anchors(const std::vector<BoundingBox>& gt,
                                                      int k, std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > gt.size()) throw TooFewSamples();

  // Seed with k distinct samples chosen by a seeded shuffle.
  Rng rng(seed);
  std::vector<std::size_t> order(gt.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  std::vector<std::pair<double, double>> centroids;
  centroids.reserve(k);
  for (int i = 0; i < k; ++i) {
    centroids.emplace_back(gt[order[i]].width(), gt[order[i]].height());
  }

  double objective = kmeans_objective(gt, centroids);
  std::vector<int> assignment(gt.size(), -1);
  for (int iter = 0; iter < 100; ++iter) {
    // Assignment step.
    bool changed = false;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d =
            1.0 - shape_iou(gt[i].width(), gt[i].height(), centroids[c].first, centroids[c].second);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      if (assignment[i] != best_c) {
        assignment[i] = best_c;
        changed = true;
      }
    }

    // Median update; empty clusters keep their centroid.
    std::vector<std::pair<double, double>> updated = centroids;
    for (int c = 0; c < k; ++c) {
      std::vector<double> ws, hs;
      for (std::size_t i = 0; i < gt.size(); ++i) {
        if (assignment[i] == c) {
          ws.push_back(gt[i].width());
          hs.push_back(gt[i].height());
        }
      }
      if (!ws.empty()) updated[c] = {median(std::move(ws)), median(std::move(hs))};
    }

    // The median does not minimize the 1-IOU objective, so guard the update:
    // if it would raise the objective, keep the previous centroids and stop.
    const double updated_objective = kmeans_objective(gt, updated);
    if (updated_objective > objective) break;
    const bool converged = !changed && updated == centroids;
    centroids = std::move(updated);
    objective = updated_objective;
    if (converged) break;
  }

  std::sort(centroids.begin(), centroids.end(), [](const auto& a, const auto& b) {
    return a.first * a.second < b.first * b.second;
  });
  return centroids;
}

double focal_loss(double p_t, double gamma, std::optional<double> alpha) {
  if (p_t <= 0.0) throw DomainError("focal_loss requires p_t > 0");
  if (p_t > 1.0) throw DomainError("focal_loss requires p_t <= 1");
  const double a = alpha.value_or(1.0);
  return -a * std::pow(1.0 - p_t, gamma) * std::log(p_t);
}

}  // namespace aerosar
