#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "aerosar/box.hpp"
#include "aerosar/geometry.hpp"

namespace aerosar {

/// Rigid transform between the two cameras of the sensor rig
/// (thermal <- optical) plus the scene depth assumed when transferring
/// bounding boxes between the spectra.
struct RigExtrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double assumed_scene_depth = 100.0;  // meters

  Eigen::Vector3d optical_to_thermal(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  Eigen::Vector3d thermal_to_optical(const Eigen::Vector3d& p) const {
    return rotation.transpose() * (p - translation);
  }
};

/// Transfer a detection's box into the other spectrum: corners are
/// back-projected at the assumed scene depth, moved through the rig
/// transform and reprojected; the result is the axis-aligned hull clamped
/// to the destination image. Throws OutsideImage when the hull misses the
/// destination image entirely. The direction is taken from d.spectrum.
BoundingBox map_bbox(const Detection& d, const RigExtrinsics& rig,
                     const CameraIntrinsics& intr_src, const CameraIntrinsics& intr_dst);

struct WindowMatchOptions {
  double iou_threshold = 0.5;
  int grid = 6;  // grid x grid window placements (36 total by default)
};

struct WindowMatch {
  std::optional<int> index;   // matched candidate, absent when none reaches the threshold
  double iou_at_match = 0.0;  // best placement IOU of the winning candidate
  BoundingBox window;         // the 3w x 3h search region
};

/// Search a 3w x 3h region centered on the mapped box with a grid of
/// mapped-box-sized windows; a candidate matches when any placement reaches
/// the IOU threshold. The winner maximizes placement IOU, ties prefer the
/// higher score and then the lower index.
WindowMatch sliding_window_match(const BoundingBox& mapped,
                                 const std::vector<Detection>& candidates,
                                 const WindowMatchOptions& opts = {});

struct MatchResult {
  Detection source;
  std::optional<Detection> matched;
  BoundingBox window;
  double iou_at_match = 0.0;
};

struct MatchedPair {
  int optical = -1;
  int thermal = -1;
  double iou = 0.0;
};

struct FrameMatches {
  std::vector<MatchedPair> pairs;  // one-to-one, sorted by optical index
  std::vector<MatchResult> optical_to_thermal;            // one per optical detection
  std::vector<MatchResult> thermal_to_optical;            // one per thermal detection
  std::vector<std::optional<BoundingBox>> thermal_in_optical;  // mapped boxes for passthrough
};

/// Match one frame's detections in both directions and resolve them into
/// one-to-one pairs (greedy by descending IOU, ties to lower indices).
FrameMatches cross_match(const std::vector<Detection>& optical,
                         const std::vector<Detection>& thermal, const RigExtrinsics& rig,
                         const CameraIntrinsics& intr_optical,
                         const CameraIntrinsics& intr_thermal,
                         const WindowMatchOptions& opts = {});

/// Keep everything: matched pairs fuse into one detection in optical
/// coordinates with the mean of the two scores; unmatched detections from
/// both spectra pass through with their original score.
std::vector<Detection> merge_or(const std::vector<Detection>& optical,
                                const std::vector<Detection>& thermal,
                                const FrameMatches& matches);

/// Keep only matched pairs, score = mean of the pair.
std::vector<Detection> merge_and(const std::vector<Detection>& optical,
                                 const std::vector<Detection>& thermal,
                                 const FrameMatches& matches);

}  // namespace aerosar
