#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "aerosar/evaluation.hpp"
#include "aerosar/io.hpp"

namespace aerosar {

/// A ground-truth person: a colored rectangle on the ground plane moving
/// along a waypoint polyline at constant speed.
struct HumanSpec {
  int id = 0;
  std::vector<Eigen::Vector2d> waypoints;  // UTM ground positions
  double speed = 0.0;                      // m/s along the polyline
  Eigen::Vector2d size_m{1.7, 0.6};        // ground extent, meters
  Rgb color{200, 40, 40};
  Posture posture = Posture::lying;
  double appear_time = 0.0;
  double disappear_time = std::numeric_limits<double>::infinity();
};

/// Static non-human scene object that the simulated detector fires on;
/// produces consistent (trackable) false detections with a metric footprint.
struct ClutterSpec {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d size_m{3.0, 3.0};
  Rgb color{128, 128, 128};
};

struct NoiseModel {
  double miss_rate = 0.0;      // per-frame probability of dropping a true detection
  double fp_rate = 0.0;        // expected spurious detections per frame, in [0, 1]
  double jitter_sigma = 0.0;   // px, applied independently to each box coordinate
  double true_score_min = 0.5, true_score_max = 1.0;
  double fp_score_min = 0.1, fp_score_max = 0.9;
  double fp_size_min = 20.0, fp_size_max = 60.0;  // px
};

struct ScenarioSpec {
  std::uint64_t seed = 0;
  double frame_rate_hz = 4.0;
  int frames = 40;
  std::vector<Eigen::Vector3d> camera_waypoints{{0.0, 0.0, 100.0}};
  double camera_speed = 10.0;
  CameraIntrinsics optical;
  CameraIntrinsics thermal;
  RigExtrinsics rig;
  std::vector<HumanSpec> humans;
  std::vector<ClutterSpec> clutter;
  NoiseModel noise;
};

/// Intrinsics/rig defaults matching the scenario files shipped with the
/// project: 1280x960 optical, 640x480 thermal, 0.1 m rig baseline.
ScenarioSpec default_scenario();

ScenarioSpec load_scenario(const std::filesystem::path& yaml_path);

struct SimulationOutput {
  std::vector<Pose> poses;  // optical camera, one per frame
  std::vector<Annotation> annotations;
  std::vector<DetectionRecord> optical;
  std::vector<DetectionRecord> thermal;
  PatchHistograms patch_histograms;
  std::vector<TruthRecord> truth;
  Calibration calibration;
};

/// Ground-truth humans projected through both cameras, perturbed by the
/// noise model. Deterministic for a fixed seed.
SimulationOutput simulate(const ScenarioSpec& spec);

/// Write every simulate() artifact into a directory (calibration.yaml,
/// poses.csv, annotations.jsonl, detections_{optical,thermal}.jsonl,
/// patches.csv, truth.jsonl).
void write_simulation(const std::filesystem::path& out_dir, const SimulationOutput& sim);

/// Position along a waypoint polyline after traveling speed * t meters;
/// clamps at the last waypoint.
Eigen::Vector3d polyline_at(const std::vector<Eigen::Vector3d>& waypoints, double speed,
                            double t);

/// Nadir pose (camera looks straight down, x east-aligned) at a position.
Pose nadir_pose(const Eigen::Vector3d& position, double timestamp);

}  // namespace aerosar
