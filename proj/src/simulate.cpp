#include "aerosar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <yaml-cpp/yaml.h>

#include "aerosar/errors.hpp"
#include "aerosar/rng.hpp"

namespace aerosar {

ScenarioSpec default_scenario() {
  ScenarioSpec spec;
  spec.optical.fx = spec.optical.fy = 1000.0;
  spec.optical.cx = 640.0;
  spec.optical.cy = 480.0;
  spec.optical.width = 1280;
  spec.optical.height = 960;
  spec.thermal.fx = spec.thermal.fy = 800.0;
  spec.thermal.cx = 320.0;
  spec.thermal.cy = 240.0;
  spec.thermal.width = 640;
  spec.thermal.height = 480;
  spec.rig.translation = {0.1, 0.0, 0.0};
  spec.rig.assumed_scene_depth = 100.0;
  return spec;
}

Eigen::Vector3d polyline_at(const std::vector<Eigen::Vector3d>& waypoints, double speed,
                            double t) {
  if (waypoints.empty()) throw Error("polyline needs at least one waypoint");
  if (waypoints.size() == 1 || speed <= 0.0) return waypoints.front();
  double remaining = speed * t;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Eigen::Vector3d seg = waypoints[i + 1] - waypoints[i];
    const double len = seg.norm();
    if (remaining <= len || len == 0.0) {
      return len == 0.0 ? waypoints[i] : Eigen::Vector3d(waypoints[i] + seg * (remaining / len));
    }
    remaining -= len;
  }
  return waypoints.back();
}

Pose nadir_pose(const Eigen::Vector3d& position, double timestamp) {
  Pose pose;
  // 180 deg about the x axis: camera z looks down, image y runs south.
  pose.rotation << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  pose.translation = position;
  pose.timestamp = timestamp;
  return pose;
}

namespace {

Eigen::Vector3d human_position(const HumanSpec& h, double t) {
  std::vector<Eigen::Vector3d> wp;
  wp.reserve(h.waypoints.size());
  for (const auto& w : h.waypoints) wp.emplace_back(w.x(), w.y(), 0.0);
  if (wp.empty()) wp.emplace_back(0.0, 0.0, 0.0);
  return polyline_at(wp, h.speed, t);
}

/// Axis-aligned hull of a ground rectangle projected into a camera; empty
/// optional when any corner is outside the image (or behind the camera).
std::optional<BoundingBox> project_ground_rect(const Eigen::Vector3d& center,
                                               const Eigen::Vector2d& size, const Pose& pose,
                                               const CameraIntrinsics& intr) {
  const double hw = 0.5 * size.x(), hh = 0.5 * size.y();
  const Eigen::Vector3d corners[4] = {center + Eigen::Vector3d(-hw, -hh, 0.0),
                                      center + Eigen::Vector3d(hw, -hh, 0.0),
                                      center + Eigen::Vector3d(hw, hh, 0.0),
                                      center + Eigen::Vector3d(-hw, hh, 0.0)};
  BoundingBox hull{1e30, 1e30, -1e30, -1e30};
  for (const Eigen::Vector3d& c : corners) {
    Pixel p;
    try {
      p = project(c, pose, intr);
    } catch (const PointBehindCamera&) {
      return std::nullopt;
    }
    if (p.x() < 0.0 || p.x() > intr.width || p.y() < 0.0 || p.y() > intr.height) {
      return std::nullopt;
    }
    hull.x_min = std::min(hull.x_min, p.x());
    hull.y_min = std::min(hull.y_min, p.y());
    hull.x_max = std::max(hull.x_max, p.x());
    hull.y_max = std::max(hull.y_max, p.y());
  }
  return hull;
}

ColorHistogram color_histogram(const Rgb& color) {
  Patch patch;
  patch.width = patch.height = 9;
  patch.pixels.assign(81, color);
  const PatchMask mask = center_prior_mask(9, 9);
  return histogram_of(patch, &mask);
}

struct DetectionBuilder {
  const ScenarioSpec& spec;
  SimulationOutput& out;
  Rng rng;
  std::vector<DetectionRecord>& sink;
  Spectrum spectrum;
  int per_frame_index = 0;

  void start_frame() { per_frame_index = 0; }

  void emit(const BoundingBox& gt_box, int frame, double t, const std::string& source,
            const Rgb& color) {
    if (rng.uniform01() < spec.noise.miss_rate) return;
    BoundingBox box = gt_box;
    if (spec.noise.jitter_sigma > 0.0) {
      box.x_min += rng.normal(0.0, spec.noise.jitter_sigma);
      box.y_min += rng.normal(0.0, spec.noise.jitter_sigma);
      box.x_max += rng.normal(0.0, spec.noise.jitter_sigma);
      box.y_max += rng.normal(0.0, spec.noise.jitter_sigma);
      if (box.x_max < box.x_min) std::swap(box.x_min, box.x_max);
      if (box.y_max < box.y_min) std::swap(box.y_min, box.y_max);
    }
    push(box, frame, t, rng.uniform(spec.noise.true_score_min, spec.noise.true_score_max),
         source, color);
  }

  void maybe_emit_fp(int frame, double t, const CameraIntrinsics& intr) {
    if (rng.uniform01() >= spec.noise.fp_rate) return;
    const double w = rng.uniform(spec.noise.fp_size_min, spec.noise.fp_size_max);
    const double h = rng.uniform(spec.noise.fp_size_min, spec.noise.fp_size_max);
    const double cx = rng.uniform(0.5 * w, intr.width - 0.5 * w);
    const double cy = rng.uniform(0.5 * h, intr.height - 0.5 * h);
    const Rgb color{static_cast<std::uint8_t>(rng.below(256)),
                    static_cast<std::uint8_t>(rng.below(256)),
                    static_cast<std::uint8_t>(rng.below(256))};
    push(BoundingBox::from_center(cx, cy, w, h), frame, t,
         rng.uniform(spec.noise.fp_score_min, spec.noise.fp_score_max), "fp", color);
  }

  void push(const BoundingBox& box, int frame, double t, double score,
            const std::string& source, const Rgb& color) {
    DetectionRecord rec;
    rec.det.bbox = box;
    rec.det.score = score;
    rec.det.spectrum = spectrum;
    rec.det.frame = frame;
    rec.det.t = t;
    if (spectrum == Spectrum::optical) rec.src_optical = per_frame_index;
    else rec.src_thermal = per_frame_index;
    sink.push_back(std::move(rec));
    out.truth.push_back({frame, spectrum, per_frame_index, source});
    out.patch_histograms[{frame, spectrum, per_frame_index}] = color_histogram(color);
    ++per_frame_index;
  }
};

}  // namespace

SimulationOutput simulate(const ScenarioSpec& spec) {
  SimulationOutput out;
  out.calibration = {spec.optical, spec.thermal, spec.rig};

  DetectionBuilder optical{spec, out, Rng(derive_seed(spec.seed, 1)), out.optical,
                           Spectrum::optical};
  DetectionBuilder thermal{spec, out, Rng(derive_seed(spec.seed, 2)), out.thermal,
                           Spectrum::thermal};

  for (int frame = 0; frame < spec.frames; ++frame) {
    const double t = frame / spec.frame_rate_hz;
    const Pose cam_optical = nadir_pose(polyline_at(spec.camera_waypoints, spec.camera_speed, t), t);
    out.poses.push_back(cam_optical);

    // world <- thermal from (world <- optical) and (thermal <- optical)
    Pose cam_thermal;
    cam_thermal.rotation = cam_optical.rotation * spec.rig.rotation.transpose();
    cam_thermal.translation =
        cam_optical.translation - cam_thermal.rotation * spec.rig.translation;
    cam_thermal.timestamp = t;

    optical.start_frame();
    thermal.start_frame();

    for (const HumanSpec& h : spec.humans) {
      if (t < h.appear_time || t >= h.disappear_time) continue;
      const Eigen::Vector3d pos = human_position(h, t);
      const auto gt_optical = project_ground_rect(pos, h.size_m, cam_optical, spec.optical);
      if (gt_optical) {
        out.annotations.push_back({frame, *gt_optical, h.id, h.posture, false});
        optical.emit(*gt_optical, frame, t, "human:" + std::to_string(h.id), h.color);
      }
      const auto gt_thermal = project_ground_rect(pos, h.size_m, cam_thermal, spec.thermal);
      if (gt_thermal) {
        thermal.emit(*gt_thermal, frame, t, "human:" + std::to_string(h.id), h.color);
      }
    }

    for (std::size_t k = 0; k < spec.clutter.size(); ++k) {
      const ClutterSpec& c = spec.clutter[k];
      const Eigen::Vector3d pos(c.position.x(), c.position.y(), 0.0);
      const std::string source = "clutter:" + std::to_string(k);
      const auto box_optical = project_ground_rect(pos, c.size_m, cam_optical, spec.optical);
      if (box_optical) optical.emit(*box_optical, frame, t, source, c.color);
      const auto box_thermal = project_ground_rect(pos, c.size_m, cam_thermal, spec.thermal);
      if (box_thermal) thermal.emit(*box_thermal, frame, t, source, c.color);
    }

    optical.maybe_emit_fp(frame, t, spec.optical);
    thermal.maybe_emit_fp(frame, t, spec.thermal);
  }
  return out;
}

void write_simulation(const std::filesystem::path& out_dir, const SimulationOutput& sim) {
  std::filesystem::create_directories(out_dir);
  write_calibration(out_dir / "calibration.yaml", sim.calibration);
  write_poses_csv(out_dir / "poses.csv", sim.poses);
  write_annotations(out_dir / "annotations.jsonl", sim.annotations);
  write_detections(out_dir / "detections_optical.jsonl", sim.optical);
  write_detections(out_dir / "detections_thermal.jsonl", sim.thermal);
  write_patch_histograms(out_dir / "patches.csv", sim.patch_histograms);
  write_truth(out_dir / "truth.jsonl", sim.truth);
}

namespace {

template <typename T>
T yaml_get(const YAML::Node& n, const char* field, T fallback) {
  return n[field] ? n[field].as<T>() : fallback;
}

CameraIntrinsics yaml_intrinsics(const YAML::Node& n, const CameraIntrinsics& fallback) {
  if (!n) return fallback;
  CameraIntrinsics intr = fallback;
  intr.fx = yaml_get(n, "fx", intr.fx);
  intr.fy = yaml_get(n, "fy", intr.fy);
  intr.cx = yaml_get(n, "cx", intr.cx);
  intr.cy = yaml_get(n, "cy", intr.cy);
  intr.width = yaml_get(n, "width", intr.width);
  intr.height = yaml_get(n, "height", intr.height);
  if (n["distortion"]) {
    const auto d = n["distortion"].as<std::vector<double>>();
    if (d.size() != 4) throw SchemaError("distortion", "expected 4 coefficients");
    intr.distortion = Eigen::Vector4d(d[0], d[1], d[2], d[3]);
  }
  return intr;
}

Rgb yaml_color(const YAML::Node& n, const Rgb& fallback) {
  if (!n) return fallback;
  const auto v = n.as<std::vector<int>>();
  if (v.size() != 3) throw SchemaError("color", "expected [r, g, b]");
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]),
          static_cast<std::uint8_t>(v[2])};
}

}  // namespace

ScenarioSpec load_scenario(const std::filesystem::path& yaml_path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(yaml_path.string());
  } catch (const YAML::BadFile&) {
    throw InputError("cannot open '" + yaml_path.string() + "' for reading");
  } catch (const YAML::Exception& e) {
    throw ParseError(e.mark.line + 1, e.msg);
  }

  ScenarioSpec spec = default_scenario();
  try {
    spec.seed = yaml_get<std::uint64_t>(root, "seed", spec.seed);
    spec.frame_rate_hz = yaml_get(root, "frame_rate_hz", spec.frame_rate_hz);
    spec.frames = yaml_get(root, "frames", spec.frames);
    if (const YAML::Node cam = root["camera"]) {
      if (cam["waypoints"]) {
        spec.camera_waypoints.clear();
        for (const auto& wp : cam["waypoints"]) {
          const auto v = wp.as<std::vector<double>>();
          if (v.size() != 3) throw SchemaError("camera.waypoints", "expected [x, y, z]");
          spec.camera_waypoints.emplace_back(v[0], v[1], v[2]);
        }
      }
      spec.camera_speed = yaml_get(cam, "speed", spec.camera_speed);
    }
    spec.optical = yaml_intrinsics(root["optical"], spec.optical);
    spec.thermal = yaml_intrinsics(root["thermal"], spec.thermal);
    if (const YAML::Node rig = root["rig"]) {
      if (rig["translation"]) {
        const auto v = rig["translation"].as<std::vector<double>>();
        if (v.size() != 3) throw SchemaError("rig.translation", "expected [x, y, z]");
        spec.rig.translation = {v[0], v[1], v[2]};
      }
      spec.rig.assumed_scene_depth =
          yaml_get(rig, "assumed_scene_depth", spec.rig.assumed_scene_depth);
    }
    for (const auto& hn : root["humans"]) {
      HumanSpec h;
      h.id = hn["id"].as<int>();
      for (const auto& wp : hn["waypoints"]) {
        const auto v = wp.as<std::vector<double>>();
        if (v.size() != 2) throw SchemaError("humans.waypoints", "expected [x, y]");
        h.waypoints.emplace_back(v[0], v[1]);
      }
      if (h.waypoints.empty()) throw SchemaError("humans.waypoints", "missing");
      h.speed = yaml_get(hn, "speed", 0.0);
      if (hn["size"]) {
        const auto v = hn["size"].as<std::vector<double>>();
        if (v.size() != 2) throw SchemaError("humans.size", "expected [w, h]");
        h.size_m = {v[0], v[1]};
      }
      h.color = yaml_color(hn["color"], h.color);
      h.posture = hn["posture"] ? posture_from_string(hn["posture"].as<std::string>())
                                : Posture::lying;
      h.appear_time = yaml_get(hn, "appear_time", 0.0);
      h.disappear_time =
          yaml_get(hn, "disappear_time", std::numeric_limits<double>::infinity());
      spec.humans.push_back(std::move(h));
    }
    for (const auto& cn : root["clutter"]) {
      ClutterSpec c;
      const auto v = cn["position"].as<std::vector<double>>();
      if (v.size() != 2) throw SchemaError("clutter.position", "expected [x, y]");
      c.position = {v[0], v[1]};
      if (cn["size"]) {
        const auto s = cn["size"].as<std::vector<double>>();
        if (s.size() != 2) throw SchemaError("clutter.size", "expected [w, h]");
        c.size_m = {s[0], s[1]};
      }
      c.color = yaml_color(cn["color"], c.color);
      spec.clutter.push_back(c);
    }
    if (const YAML::Node n = root["noise"]) {
      spec.noise.miss_rate = yaml_get(n, "miss_rate", 0.0);
      spec.noise.fp_rate = yaml_get(n, "fp_rate", 0.0);
      spec.noise.jitter_sigma = yaml_get(n, "jitter_sigma", 0.0);
      if (n["true_score"]) {
        const auto v = n["true_score"].as<std::vector<double>>();
        spec.noise.true_score_min = v.at(0);
        spec.noise.true_score_max = v.at(1);
      }
      if (n["fp_score"]) {
        const auto v = n["fp_score"].as<std::vector<double>>();
        spec.noise.fp_score_min = v.at(0);
        spec.noise.fp_score_max = v.at(1);
      }
      if (n["fp_size"]) {
        const auto v = n["fp_size"].as<std::vector<double>>();
        spec.noise.fp_size_min = v.at(0);
        spec.noise.fp_size_max = v.at(1);
      }
      if (spec.noise.miss_rate < 0.0 || spec.noise.miss_rate > 1.0) {
        throw SchemaError("noise.miss_rate", "outside [0, 1]");
      }
      if (spec.noise.fp_rate < 0.0 || spec.noise.fp_rate > 1.0) {
        throw SchemaError("noise.fp_rate", "outside [0, 1]");
      }
      if (spec.noise.jitter_sigma < 0.0) throw SchemaError("noise.jitter_sigma", "negative");
    }
  } catch (const YAML::Exception& e) {
    throw SchemaError("scenario", e.what());
  }
  return spec;
}

}  // namespace aerosar
