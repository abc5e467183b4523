#include "aerosar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aerosar/errors.hpp"

namespace aerosar {

bool Pose::is_valid(double tol) const {
  const Eigen::Matrix3d should_be_identity = rotation.transpose() * rotation;
  if ((should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Eigen::Vector2d distort_normalized(const Eigen::Vector2d& p, const CameraIntrinsics& intr) {
  const double k1 = intr.distortion[0], k2 = intr.distortion[1];
  const double p1 = intr.distortion[2], p2 = intr.distortion[3];
  const double x = p.x(), y = p.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + k1 * r2 + k2 * r2 * r2;
  return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
          y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

Eigen::Vector2d undistort_normalized(const Eigen::Vector2d& p, const CameraIntrinsics& intr) {
  if (!intr.has_distortion()) return p;
  Eigen::Vector2d x = p;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d distorted = distort_normalized(x, intr);
    const Eigen::Vector2d next = x + (p - distorted);
    if ((next - x).cwiseAbs().maxCoeff() < 1e-8) return next;
    x = next;
  }
  return x;
}

Pixel project(const WorldPoint& point, const Pose& pose, const CameraIntrinsics& intr) {
  const Eigen::Vector3d pc = pose.to_camera(point);
  if (pc.z() <= 0.0) throw PointBehindCamera();
  const Eigen::Vector2d d = distort_normalized(pc.hnormalized(), intr);
  return {intr.fx * d.x() + intr.cx, intr.fy * d.y() + intr.cy};
}

WorldPoint backproject(const Pixel& pixel, double depth, const Pose& pose,
                       const CameraIntrinsics& intr) {
  if (depth <= 0.0) throw NonPositiveDepth();
  const Eigen::Vector2d n = undistort_normalized(
      {(pixel.x() - intr.cx) / intr.fx, (pixel.y() - intr.cy) / intr.fy}, intr);
  return pose.to_world({n.x() * depth, n.y() * depth, depth});
}

Eigen::Vector3d pixel_ray(const Pixel& pixel, const Pose& pose, const CameraIntrinsics& intr) {
  const Eigen::Vector2d n = undistort_normalized(
      {(pixel.x() - intr.cx) / intr.fx, (pixel.y() - intr.cy) / intr.fy}, intr);
  return (pose.rotation * Eigen::Vector3d(n.x(), n.y(), 1.0)).normalized();
}

WorldPoint triangulate(const PixelObservation& a, const PixelObservation& b,
                       const CameraIntrinsics& intr, const TriangulationOptions& opts) {
  const Eigen::Vector3d c1 = a.pose.translation;
  const Eigen::Vector3d c2 = b.pose.translation;
  if ((c1 - c2).norm() <= opts.min_baseline) throw DegenerateBaseline();

  const Eigen::Vector3d d1 = pixel_ray(a.pixel, a.pose, intr);
  const Eigen::Vector3d d2 = pixel_ray(b.pixel, b.pose, intr);

  const double cos_angle = std::clamp(std::abs(d1.dot(d2)), 0.0, 1.0);
  const double angle_deg = std::acos(cos_angle) * 180.0 / std::numbers::pi;
  if (angle_deg < opts.min_ray_angle_deg) throw ParallelRays();

  // Closest points p1 = c1 + s*d1, p2 = c2 + t*d2 of the two skew rays.
  const Eigen::Vector3d w = c1 - c2;
  const double bb = d1.dot(d2);
  const double d = d1.dot(w);
  const double e = d2.dot(w);
  const double denom = 1.0 - bb * bb;
  const double s = (bb * e - d) / denom;
  const double t = (e - bb * d) / denom;
  return 0.5 * ((c1 + s * d1) + (c2 + t * d2));
}

double depth_of(const WorldPoint& human, const Pose& uav) {
  return (uav.translation - human).norm();
}

double metric_bbox_area(const BoundingBox& bbox, double depth, const Pose& pose,
                        const CameraIntrinsics& intr) {
  const WorldPoint p1 = backproject({bbox.x_min, bbox.y_min}, depth, pose, intr);
  const WorldPoint p2 = backproject({bbox.x_max, bbox.y_min}, depth, pose, intr);
  const WorldPoint p3 = backproject({bbox.x_max, bbox.y_max}, depth, pose, intr);
  const WorldPoint p4 = backproject({bbox.x_min, bbox.y_max}, depth, pose, intr);
  const Eigen::Vector3d u = p2 - p1;
  const Eigen::Vector3d v = p3 - p1;
  const Eigen::Vector3d w = p4 - p1;
  return 0.5 * (u.cross(v) + v.cross(w)).norm();
}

bool reject_by_area(double area, double t_area) { return area > t_area; }

}  // namespace aerosar
