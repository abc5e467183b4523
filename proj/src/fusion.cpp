#include "aerosar/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aerosar/errors.hpp"

namespace aerosar {

BoundingBox map_bbox(const Detection& d, const RigExtrinsics& rig,
                     const CameraIntrinsics& intr_src, const CameraIntrinsics& intr_dst) {
  const BoundingBox& b = d.bbox;
  const Pixel corners[4] = {{b.x_min, b.y_min}, {b.x_max, b.y_min},
                            {b.x_max, b.y_max}, {b.x_min, b.y_max}};
  const Pose identity;  // box transfer happens in camera frames
  BoundingBox hull{1e30, 1e30, -1e30, -1e30};
  for (const Pixel& c : corners) {
    const Eigen::Vector3d p_src = backproject(c, rig.assumed_scene_depth, identity, intr_src);
    const Eigen::Vector3d p_dst = d.spectrum == Spectrum::optical
                                      ? rig.optical_to_thermal(p_src)
                                      : rig.thermal_to_optical(p_src);
    const Pixel q = project(p_dst, identity, intr_dst);
    hull.x_min = std::min(hull.x_min, q.x());
    hull.y_min = std::min(hull.y_min, q.y());
    hull.x_max = std::max(hull.x_max, q.x());
    hull.y_max = std::max(hull.y_max, q.y());
  }
  if (hull.x_max <= 0.0 || hull.y_max <= 0.0 || hull.x_min >= intr_dst.width ||
      hull.y_min >= intr_dst.height) {
    throw OutsideImage();
  }
  hull.x_min = std::clamp(hull.x_min, 0.0, static_cast<double>(intr_dst.width));
  hull.x_max = std::clamp(hull.x_max, 0.0, static_cast<double>(intr_dst.width));
  hull.y_min = std::clamp(hull.y_min, 0.0, static_cast<double>(intr_dst.height));
  hull.y_max = std::clamp(hull.y_max, 0.0, static_cast<double>(intr_dst.height));
  return hull;
}

WindowMatch sliding_window_match(const BoundingBox& mapped,
                                 const std::vector<Detection>& candidates,
                                 const WindowMatchOptions& opts) {
  const double w = mapped.width();
  const double h = mapped.height();
  const double cx = mapped.center_x();
  const double cy = mapped.center_y();

  WindowMatch result;
  result.window = BoundingBox::from_center(cx, cy, 3.0 * w, 3.0 * h);

  // Per-axis center offsets: the unslid position plus `grid` uniform steps
  // spanning [-w, +w], so the placements cover the 3w x 3h region. The
  // product grid keeps a zero row and column: a purely horizontal mapping
  // offset (stereo-disparity error) must be absorbable without paying a
  // vertical misalignment. Its grid x grid dual-axis placements are the
  // sliding steps proper; grid == 1 degenerates to plain matching against
  // the mapped box itself.
  auto axis_offsets = [&](double extent) {
    std::vector<double> offsets{0.0};
    if (opts.grid > 1) {
      for (int i = 0; i < opts.grid; ++i) {
        const double off = -extent + 2.0 * extent * i / (opts.grid - 1);
        if (off != 0.0) offsets.push_back(off);
      }
    }
    return offsets;
  };
  std::vector<BoundingBox> placements;
  for (double dy : axis_offsets(h)) {
    for (double dx : axis_offsets(w)) {
      placements.push_back(BoundingBox::from_center(cx + dx, cy + dy, w, h));
    }
  }

  double best_iou = 0.0;
  int best_index = -1;
  double best_score = 0.0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    double cand_best = 0.0;
    for (const BoundingBox& window : placements) {
      cand_best = std::max(cand_best, iou(window, candidates[ci].bbox));
    }
    if (cand_best < opts.iou_threshold) continue;
    const bool better = cand_best > best_iou ||
                        (cand_best == best_iou && candidates[ci].score > best_score);
    if (best_index < 0 || better) {
      best_iou = cand_best;
      best_index = static_cast<int>(ci);
      best_score = candidates[ci].score;
    }
  }
  if (best_index >= 0) {
    result.index = best_index;
    result.iou_at_match = best_iou;
  }
  return result;
}

FrameMatches cross_match(const std::vector<Detection>& optical,
                         const std::vector<Detection>& thermal, const RigExtrinsics& rig,
                         const CameraIntrinsics& intr_optical,
                         const CameraIntrinsics& intr_thermal, const WindowMatchOptions& opts) {
  FrameMatches out;
  out.thermal_in_optical.assign(thermal.size(), std::nullopt);

  struct Candidate {
    int optical;
    int thermal;
    double iou;
  };
  std::vector<Candidate> candidates;

  for (std::size_t i = 0; i < optical.size(); ++i) {
    MatchResult mr;
    mr.source = optical[i];
    try {
      const BoundingBox mapped = map_bbox(optical[i], rig, intr_optical, intr_thermal);
      const WindowMatch wm = sliding_window_match(mapped, thermal, opts);
      mr.window = wm.window;
      if (wm.index) {
        mr.matched = thermal[*wm.index];
        mr.iou_at_match = wm.iou_at_match;
        candidates.push_back({static_cast<int>(i), *wm.index, wm.iou_at_match});
      }
    } catch (const OutsideImage&) {
      // box transfers outside the thermal image: nothing to match against
    }
    out.optical_to_thermal.push_back(std::move(mr));
  }

  for (std::size_t j = 0; j < thermal.size(); ++j) {
    MatchResult mr;
    mr.source = thermal[j];
    try {
      const BoundingBox mapped = map_bbox(thermal[j], rig, intr_thermal, intr_optical);
      out.thermal_in_optical[j] = mapped;
      const WindowMatch wm = sliding_window_match(mapped, optical, opts);
      mr.window = wm.window;
      if (wm.index) {
        mr.matched = optical[*wm.index];
        mr.iou_at_match = wm.iou_at_match;
        candidates.push_back({*wm.index, static_cast<int>(j), wm.iou_at_match});
      }
    } catch (const OutsideImage&) {
    }
    out.thermal_to_optical.push_back(std::move(mr));
  }

  // Resolve to one-to-one pairs so no detection is fused twice.
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.optical != b.optical) return a.optical < b.optical;
    return a.thermal < b.thermal;
  });
  std::set<int> used_optical, used_thermal;
  for (const auto& c : candidates) {
    if (used_optical.count(c.optical) || used_thermal.count(c.thermal)) continue;
    used_optical.insert(c.optical);
    used_thermal.insert(c.thermal);
    out.pairs.push_back({c.optical, c.thermal, c.iou});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.optical < b.optical; });
  return out;
}

namespace {

Detection fuse_pair(const Detection& opt, const Detection& thm) {
  Detection fused = opt;  // optical-frame box and timing
  fused.score = 0.5 * (opt.score + thm.score);
  return fused;
}

}  // namespace

std::vector<Detection> merge_or(const std::vector<Detection>& optical,
                                const std::vector<Detection>& thermal,
                                const FrameMatches& matches) {
  std::vector<bool> opt_used(optical.size(), false), thm_used(thermal.size(), false);
  std::vector<Detection> out;
  for (const MatchedPair& p : matches.pairs) {
    opt_used[p.optical] = true;
    thm_used[p.thermal] = true;
  }
  for (std::size_t i = 0; i < optical.size(); ++i) {
    if (!opt_used[i]) {
      out.push_back(optical[i]);
      continue;
    }
    for (const MatchedPair& p : matches.pairs) {
      if (p.optical == static_cast<int>(i)) {
        out.push_back(fuse_pair(optical[i], thermal[p.thermal]));
        break;
      }
    }
  }
  for (std::size_t j = 0; j < thermal.size(); ++j) {
    if (thm_used[j]) continue;
    Detection d = thermal[j];
    // Unmatched thermal boxes are carried over in optical coordinates when
    // the transfer succeeded; the score stays untouched.
    if (j < matches.thermal_in_optical.size() && matches.thermal_in_optical[j]) {
      d.bbox = *matches.thermal_in_optical[j];
    }
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> merge_and(const std::vector<Detection>& optical,
                                 const std::vector<Detection>& thermal,
                                 const FrameMatches& matches) {
  std::vector<Detection> out;
  out.reserve(matches.pairs.size());
  for (const MatchedPair& p : matches.pairs) {
    out.push_back(fuse_pair(optical[p.optical], thermal[p.thermal]));
  }
  return out;
}

}  // namespace aerosar
