#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "aerosar/box.hpp"

namespace aerosar {

/// UTM east / north / altitude, meters.
using WorldPoint = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;

/// Pinhole intrinsics with 4-coefficient radial-tangential distortion
/// (k1, k2, p1, p2).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Vector4d distortion = Eigen::Vector4d::Zero();
  int width = 0;
  int height = 0;

  bool has_distortion() const { return distortion.cwiseAbs().maxCoeff() > 0.0; }
};

/// Rigid camera pose: rotation maps camera axes into the world frame,
/// translation is the camera origin in world/UTM coordinates.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world <- camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double timestamp = 0.0;

  Eigen::Vector3d to_camera(const WorldPoint& p) const {
    return rotation.transpose() * (p - translation);
  }
  WorldPoint to_world(const Eigen::Vector3d& p_cam) const {
    return rotation * p_cam + translation;
  }
  bool is_valid(double tol = 1e-9) const;
};

/// Apply radial-tangential distortion to a normalized image point.
Eigen::Vector2d distort_normalized(const Eigen::Vector2d& p, const CameraIntrinsics& intr);

/// Invert the distortion by fixed-point iteration (max 20 iterations, 1e-8).
Eigen::Vector2d undistort_normalized(const Eigen::Vector2d& p, const CameraIntrinsics& intr);

/// World point -> pixel. Throws PointBehindCamera for camera-frame z <= 0.
Pixel project(const WorldPoint& point, const Pose& pose, const CameraIntrinsics& intr);

/// Pixel + camera-frame depth (z) -> world point. Throws NonPositiveDepth.
WorldPoint backproject(const Pixel& pixel, double depth, const Pose& pose,
                       const CameraIntrinsics& intr);

/// Unit ray through a pixel, in world coordinates.
Eigen::Vector3d pixel_ray(const Pixel& pixel, const Pose& pose, const CameraIntrinsics& intr);

struct PixelObservation {
  Pixel pixel;
  Pose pose;
};

struct TriangulationOptions {
  double min_baseline = 1e-6;     // meters
  double min_ray_angle_deg = 0.1;
};

/// Midpoint of the common perpendicular between the two back-projected rays.
/// Throws DegenerateBaseline / ParallelRays.
WorldPoint triangulate(const PixelObservation& a, const PixelObservation& b,
                       const CameraIntrinsics& intr, const TriangulationOptions& opts = {});

/// Euclidean distance between the UAV and the localized human.
double depth_of(const WorldPoint& human, const Pose& uav);

/// Metric area of a bounding box whose corners (clockwise: top-left,
/// top-right, bottom-right, bottom-left) are back-projected at the given
/// depth: A = 0.5 * |(p2-p1)x(p3-p1) + (p3-p1)x(p4-p1)|.
double metric_bbox_area(const BoundingBox& bbox, double depth, const Pose& pose,
                        const CameraIntrinsics& intr);

/// true = reject: the detection is an outlier because area > t_area (strict).
bool reject_by_area(double area, double t_area);

/// Default metric-area gate: a lying adult spans about 1.6 m^2.
inline constexpr double kDefaultAreaThreshold = 3.0;  // square meters

}  // namespace aerosar
