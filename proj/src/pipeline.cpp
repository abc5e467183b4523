#include "aerosar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <yaml-cpp/yaml.h>

#include "aerosar/errors.hpp"
#include "aerosar/io.hpp"

namespace aerosar {

using ordered_json = nlohmann::ordered_json;

namespace {

struct FrameDetections {
  double t = 0.0;
  std::vector<DetectionRecord> records;
};

std::map<int, FrameDetections> group_by_frame(const std::vector<DetectionRecord>& records) {
  std::map<int, FrameDetections> frames;
  for (const DetectionRecord& r : records) {
    FrameDetections& f = frames[r.det.frame];
    if (f.records.empty()) f.t = r.det.t;
    f.records.push_back(r);
  }
  return frames;
}

std::vector<Detection> plain(const std::vector<DetectionRecord>& records) {
  std::vector<Detection> out;
  out.reserve(records.size());
  for (const DetectionRecord& r : records) out.push_back(r.det);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json config_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["fuse_mode"] = cfg.fuse_mode;
  j["window"] = {{"iou_threshold", cfg.window.iou_threshold}, {"grid", cfg.window.grid}};
  j["tracker"] = {{"downsample_factor", cfg.tracker.downsample_factor},
                  {"iou_gate", cfg.tracker.iou_gate},
                  {"max_missed_frames", cfg.tracker.max_missed_frames},
                  {"frame_rate_hz", cfg.tracker.frame_rate_hz}};
  j["triangulation"] = {{"min_baseline", cfg.triangulation.min_baseline},
                        {"min_ray_angle_deg", cfg.triangulation.min_ray_angle_deg}};
  j["t_area"] = cfg.t_area;
  j["pf"] = {{"sigma_z", cfg.pf.sigma_z},
             {"v_max", cfg.pf.v_max},
             {"n", cfg.pf.n},
             {"resample_by_ess", cfg.pf.resample_by_ess},
             {"ess_fraction", cfg.pf.ess_fraction}};
  j["reid"] = {{"t_redetect", cfg.reid.t_redetect},
               {"sigmoid_scale", cfg.reid.sigmoid_scale},
               {"sigmoid_center", cfg.reid.sigmoid_center},
               {"metric", to_string(cfg.reid.metric)},
               {"max_reference_histograms", cfg.reid.max_reference_histograms}};
  j["eval"] = {{"iou_threshold", cfg.eval.iou_threshold},
               {"exclude_occluded", cfg.eval.exclude_occluded}};
  j["pair_tolerance"] = cfg.pair_tolerance;
  j["dump_particles"] = cfg.dump_particles;
  return j;
}

PipelineConfig config_from_json(const ordered_json& j) {
  PipelineConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.fuse_mode = j.value("fuse_mode", cfg.fuse_mode);
  if (j.contains("window")) {
    cfg.window.iou_threshold = j["window"].value("iou_threshold", cfg.window.iou_threshold);
    cfg.window.grid = j["window"].value("grid", cfg.window.grid);
  }
  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    cfg.tracker.downsample_factor = t.value("downsample_factor", cfg.tracker.downsample_factor);
    cfg.tracker.iou_gate = t.value("iou_gate", cfg.tracker.iou_gate);
    cfg.tracker.max_missed_frames = t.value("max_missed_frames", cfg.tracker.max_missed_frames);
    cfg.tracker.frame_rate_hz = t.value("frame_rate_hz", cfg.tracker.frame_rate_hz);
  }
  if (j.contains("triangulation")) {
    const auto& t = j["triangulation"];
    cfg.triangulation.min_baseline = t.value("min_baseline", cfg.triangulation.min_baseline);
    cfg.triangulation.min_ray_angle_deg =
        t.value("min_ray_angle_deg", cfg.triangulation.min_ray_angle_deg);
  }
  cfg.t_area = j.value("t_area", cfg.t_area);
  if (j.contains("pf")) {
    const auto& p = j["pf"];
    cfg.pf.sigma_z = p.value("sigma_z", cfg.pf.sigma_z);
    cfg.pf.v_max = p.value("v_max", cfg.pf.v_max);
    cfg.pf.n = p.value("n", cfg.pf.n);
    cfg.pf.resample_by_ess = p.value("resample_by_ess", cfg.pf.resample_by_ess);
    cfg.pf.ess_fraction = p.value("ess_fraction", cfg.pf.ess_fraction);
  }
  if (j.contains("reid")) {
    const auto& r = j["reid"];
    cfg.reid.t_redetect = r.value("t_redetect", cfg.reid.t_redetect);
    cfg.reid.sigmoid_scale = r.value("sigmoid_scale", cfg.reid.sigmoid_scale);
    cfg.reid.sigmoid_center = r.value("sigmoid_center", cfg.reid.sigmoid_center);
    if (r.contains("metric")) cfg.reid.metric = metric_from_string(r["metric"]);
    cfg.reid.max_reference_histograms =
        r.value("max_reference_histograms", cfg.reid.max_reference_histograms);
  }
  if (j.contains("eval")) {
    cfg.eval.iou_threshold = j["eval"].value("iou_threshold", cfg.eval.iou_threshold);
    cfg.eval.exclude_occluded = j["eval"].value("exclude_occluded", cfg.eval.exclude_occluded);
  }
  cfg.pair_tolerance = j.value("pair_tolerance", cfg.pair_tolerance);
  cfg.dump_particles = j.value("dump_particles", cfg.dump_particles);
  return cfg;
}

std::optional<ColorHistogram> lookup_histogram(const PatchHistograms& patches, int frame,
                                               const std::optional<int>& src_optical,
                                               const std::optional<int>& src_thermal) {
  if (src_optical) {
    const auto it = patches.find({frame, Spectrum::optical, *src_optical});
    if (it != patches.end()) return it->second;
  }
  if (src_thermal) {
    const auto it = patches.find({frame, Spectrum::thermal, *src_thermal});
    if (it != patches.end()) return it->second;
  }
  return std::nullopt;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& yaml_path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(yaml_path.string());
  } catch (const YAML::BadFile&) {
    throw InputError("cannot open '" + yaml_path.string() + "' for reading");
  } catch (const YAML::Exception& e) {
    throw ParseError(e.mark.line + 1, e.msg);
  }
  // YAML and the manifest JSON share the schema; convert and reuse.
  ordered_json j;
  std::function<ordered_json(const YAML::Node&)> to_json = [&](const YAML::Node& n) {
    ordered_json out;
    if (n.IsMap()) {
      for (const auto& kv : n) out[kv.first.as<std::string>()] = to_json(kv.second);
    } else if (n.IsSequence()) {
      out = ordered_json::array();
      for (const auto& item : n) out.push_back(to_json(item));
    } else if (n.IsScalar()) {
      const std::string& s = n.Scalar();
      if (s == "true") return ordered_json(true);
      if (s == "false") return ordered_json(false);
      try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size()) return ordered_json(v);
      } catch (const std::exception&) {
      }
      try {
        std::size_t pos = 0;
        const double d = std::stod(s, &pos);
        if (pos == s.size()) return ordered_json(d);
      } catch (const std::exception&) {
      }
      return ordered_json(s);
    }
    return out;
  };
  try {
    j = to_json(root);
  } catch (const YAML::Exception& e) {
    throw SchemaError("pipeline_config", e.what());
  }
  return config_from_json(j);
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineInputs& inputs,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  PipelineResult result;

  // ---- inputs ----
  const Calibration calib = read_calibration(inputs.calibration);
  const std::vector<Pose> poses = read_poses_csv(inputs.poses);
  std::vector<DetectionRecord> optical = read_detections(inputs.detections_optical);
  assign_source_indices(optical);
  std::vector<DetectionRecord> thermal;
  if (!inputs.detections_thermal.empty()) {
    thermal = read_detections(inputs.detections_thermal);
    assign_source_indices(thermal);
  }
  PatchHistograms patches;
  if (!inputs.patches.empty()) patches = read_patch_histograms(inputs.patches);

  // ---- fuse ----
  // Frames are paired across the spectra by nearest timestamp within the
  // tolerance; unpaired frames run against an empty counterpart.
  std::map<int, FrameDetections> frames_optical = group_by_frame(optical);
  std::map<int, FrameDetections> frames_thermal = group_by_frame(thermal);

  std::map<int, int> pairing;  // optical frame -> thermal frame
  std::set<int> thermal_taken;
  for (const auto& [of, fo] : frames_optical) {
    int best = -1;
    double best_dt = cfg.pair_tolerance;
    for (const auto& [tf, ft] : frames_thermal) {
      if (thermal_taken.count(tf)) continue;
      const double dt = std::abs(ft.t - fo.t);
      if (dt <= best_dt) {
        best_dt = dt;
        best = tf;
      }
    }
    if (best >= 0) {
      pairing[of] = best;
      thermal_taken.insert(best);
    }
  }

  std::map<int, FrameDetections> fused_frames;
  for (const auto& [of, fo] : frames_optical) {
    const std::vector<Detection> opt = plain(fo.records);
    std::vector<Detection> thm;
    const FrameDetections* ft = nullptr;
    if (const auto it = pairing.find(of); it != pairing.end()) {
      ft = &frames_thermal.at(it->second);
      thm = plain(ft->records);
    }
    const FrameMatches matches =
        cross_match(opt, thm, calib.rig, calib.optical, calib.thermal, cfg.window);
    const std::vector<Detection> merged = cfg.fuse_mode == "and"
                                              ? merge_and(opt, thm, matches)
                                              : merge_or(opt, thm, matches);

    // Rebuild source indices: pairs carry both; passthroughs carry their own.
    FrameDetections& out = fused_frames[of];
    out.t = fo.t;
    std::size_t cursor = 0;
    std::vector<bool> opt_in_pair(opt.size(), false), thm_in_pair(thm.size(), false);
    for (const MatchedPair& p : matches.pairs) {
      opt_in_pair[p.optical] = true;
      thm_in_pair[p.thermal] = true;
    }
    for (std::size_t i = 0; i < opt.size() && cursor < merged.size(); ++i) {
      if (cfg.fuse_mode == "and" && !opt_in_pair[i]) continue;
      DetectionRecord rec;
      rec.det = merged[cursor++];
      rec.src_optical = fo.records[i].src_optical;
      if (opt_in_pair[i]) {
        for (const MatchedPair& p : matches.pairs) {
          if (p.optical == static_cast<int>(i)) {
            rec.src_thermal = ft->records[p.thermal].src_thermal;
            break;
          }
        }
      }
      out.records.push_back(std::move(rec));
    }
    if (cfg.fuse_mode != "and") {
      for (std::size_t j = 0; j < thm.size() && cursor < merged.size(); ++j) {
        if (thm_in_pair[j]) continue;
        DetectionRecord rec;
        rec.det = merged[cursor++];
        rec.src_thermal = ft ? ft->records[j].src_thermal : std::nullopt;
        out.records.push_back(std::move(rec));
      }
    }
  }
  // Thermal-only frames (no optical partner) pass through in OR mode.
  if (cfg.fuse_mode != "and") {
    for (const auto& [tf, ft] : frames_thermal) {
      if (thermal_taken.count(tf)) continue;
      FrameDetections& out = fused_frames[tf];
      out.t = ft.t;
      for (const DetectionRecord& r : ft.records) {
        DetectionRecord rec = r;
        try {
          rec.det.bbox = map_bbox(r.det, calib.rig, calib.thermal, calib.optical);
        } catch (const OutsideImage&) {
          // keep thermal coordinates when the transfer fails
        }
        out.records.push_back(std::move(rec));
      }
    }
  }

  std::vector<DetectionRecord> fused_flat;
  for (const auto& [frame, f] : fused_frames) {
    for (const DetectionRecord& r : f.records) fused_flat.push_back(r);
  }
  write_detections(out_dir / "fused.jsonl", fused_flat, "detections");
  result.fused_detections = static_cast<int>(fused_flat.size());
  result.frames = static_cast<int>(fused_frames.size());

  // ---- track ----
  TrackStore store(cfg.tracker);
  std::map<int, std::vector<DetectionRecord>> track_obs;  // track id -> observations
  std::vector<DetectionRecord> tracked_flat;
  for (auto& [frame, f] : fused_frames) {
    const std::vector<int> ids = store.step(plain(f.records), frame);
    for (std::size_t i = 0; i < f.records.size(); ++i) {
      DetectionRecord rec = f.records[i];
      rec.det.human_id = ids[i];
      track_obs[ids[i]].push_back(rec);
      tracked_flat.push_back(std::move(rec));
    }
  }
  write_detections(out_dir / "tracks.jsonl", tracked_flat, "tracks");
  result.tracks = store.created();

  // ---- localize: triangulate consecutive observations, reject by area ----
  std::vector<LocalizationRecord> localizations;
  for (const auto& [track_id, obs] : track_obs) {
    for (std::size_t k = 1; k < obs.size(); ++k) {
      const DetectionRecord& prev = obs[k - 1];
      const DetectionRecord& cur = obs[k];
      const Pose* pose_prev = find_pose(poses, prev.det.t, cfg.pair_tolerance);
      const Pose* pose_cur = find_pose(poses, cur.det.t, cfg.pair_tolerance);
      if (!pose_prev || !pose_cur) continue;
      WorldPoint position;
      try {
        position = triangulate(
            {{prev.det.bbox.center_x(), prev.det.bbox.center_y()}, *pose_prev},
            {{cur.det.bbox.center_x(), cur.det.bbox.center_y()}, *pose_cur}, calib.optical,
            cfg.triangulation);
      } catch (const Error&) {
        continue;  // degenerate pair; skip, do not fail the stage
      }
      LocalizationRecord rec;
      rec.frame = cur.det.frame;
      rec.t = cur.det.t;
      rec.track_id = track_id;
      rec.position = position;
      rec.depth = depth_of(position, *pose_cur);
      rec.metric_area = metric_bbox_area(cur.det.bbox, rec.depth, *pose_cur, calib.optical);
      rec.kept = !reject_by_area(rec.metric_area, cfg.t_area);
      rec.src_optical = cur.src_optical;
      rec.src_thermal = cur.src_thermal;
      localizations.push_back(rec);
      if (rec.kept) ++result.localized;
      else ++result.rejected;
    }
  }
  std::stable_sort(localizations.begin(), localizations.end(),
                   [](const LocalizationRecord& a, const LocalizationRecord& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.track_id < b.track_id;
                   });

  // ---- per-human particle filters + re-identification ----
  HumanRegistry registry(cfg.reid, cfg.pf, cfg.seed);
  std::map<int, int> track_to_human;
  std::vector<HumanAssignmentRecord> assignments;
  std::ofstream particle_dump;
  if (cfg.dump_particles) {
    particle_dump.open(out_dir / "particles.csv");
    particle_dump << "step,track_id,human_id,frame,particle,x,y,weight\n";
  }
  int pf_step = 0;
  for (LocalizationRecord& rec : localizations) {
    if (!rec.kept) continue;
    ReidObservation obs;
    obs.position = rec.position.head<2>();
    obs.time = rec.t;
    obs.frame = rec.frame;
    obs.histogram = lookup_histogram(patches, rec.frame, rec.src_optical, rec.src_thermal);

    int human_id = 0;
    if (const auto it = track_to_human.find(rec.track_id); it != track_to_human.end()) {
      human_id = it->second;
      registry.update(human_id, obs);
    } else {
      human_id = registry.associate(obs);
      track_to_human[rec.track_id] = human_id;
    }
    for (const HumanRecord& h : registry.humans()) {
      if (h.human_id != human_id) continue;
      const PfEstimate est = pf_estimate(h.filter);
      rec.pf_mean = est.mean;
      if (cfg.dump_particles) {
        for (int i = 0; i < h.filter.size(); ++i) {
          particle_dump << pf_step << ',' << rec.track_id << ',' << human_id << ',' << rec.frame
                        << ',' << i << ',' << format_double(h.filter.particles(i, 0)) << ','
                        << format_double(h.filter.particles(i, 1)) << ','
                        << format_double(h.filter.weights[i]) << "\n";
        }
      }
    }
    assignments.push_back(
        {rec.frame, rec.t, rec.track_id, human_id, rec.position.x(), rec.position.y()});
    ++pf_step;
  }
  write_localizations(out_dir / "localizations.jsonl", localizations);
  write_human_assignments(out_dir / "humans.jsonl", assignments);
  result.humans = static_cast<int>(registry.humans().size());

  // ---- evaluate ----
  ordered_json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["frames"] = result.frames;
  summary["fused_detections"] = result.fused_detections;
  summary["tracks"] = result.tracks;
  summary["localization"] = {{"localized", result.localized}, {"rejected", result.rejected}};
  summary["humans"] = result.humans;

  if (!inputs.annotations.empty()) {
    const std::vector<Annotation> annotations = read_annotations(inputs.annotations);
    std::map<int, FrameData> eval_frames;
    for (const auto& [frame, f] : fused_frames) eval_frames[frame].detections = plain(f.records);
    for (const Annotation& a : annotations) eval_frames[a.frame].annotations.push_back(a);
    std::vector<FrameData> frame_list;
    frame_list.reserve(eval_frames.size());
    for (const auto& [frame, f] : eval_frames) frame_list.push_back(f);

    const EvalCurve curve =
        fppi_missrate_curve(frame_list, score_thresholds(frame_list), cfg.eval);
    {
      std::ofstream csv(out_dir / "eval_curve.csv");
      csv << "threshold,fppi,miss_rate\n";
      for (const CurvePoint& p : curve.points) {
        csv << format_double(p.threshold) << ',' << format_double(p.fppi) << ','
            << format_double(p.miss_rate) << "\n";
      }
    }
    // Operating point: the lowest threshold keeping fppi <= 1.
    const CurvePoint* op = nullptr;
    for (const CurvePoint& p : curve.points) {
      if (p.fppi <= 1.0 && (!op || p.threshold < op->threshold)) op = &p;
    }
    result.log_average_miss_rate = curve.log_average_miss_rate;
    result.evaluated = true;
    if (op) {
      result.operating_threshold = op->threshold;
      result.operating_fppi = op->fppi;
      result.box_missrate = op->miss_rate;
      result.per_id_missrate = per_id_missrate(frame_list, op->threshold, cfg.eval);
    }
    summary["eval"] = {{"log_average_miss_rate", curve.log_average_miss_rate},
                       {"operating_threshold", result.operating_threshold},
                       {"operating_fppi", result.operating_fppi},
                       {"box_missrate", result.box_missrate},
                       {"per_id_missrate", result.per_id_missrate}};
  }

  {
    std::ofstream out(out_dir / "summary.json");
    out << summary.dump(2) << "\n";
  }

  // ---- manifest: everything needed to reproduce this run ----
  ordered_json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["tool"] = "aerosar";
  manifest["version"] = kToolVersion;
  manifest["seed"] = cfg.seed;
  manifest["config"] = config_to_json(cfg);
  manifest["inputs"] = {{"detections_optical", inputs.detections_optical.string()},
                        {"detections_thermal", inputs.detections_thermal.string()},
                        {"annotations", inputs.annotations.string()},
                        {"poses", inputs.poses.string()},
                        {"calibration", inputs.calibration.string()},
                        {"patches", inputs.patches.string()}};
  manifest["outputs"] = ordered_json::array(
      {"fused.jsonl", "tracks.jsonl", "localizations.jsonl", "humans.jsonl", "summary.json"});
  {
    std::ofstream out(out_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return result;
}

PipelineResult rerun_from_manifest(const std::filesystem::path& manifest_path,
                                   const std::filesystem::path& out_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot open '" + manifest_path.string() + "' for reading");
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, e.what());
  }
  if (!manifest.contains("config") || !manifest.contains("inputs")) {
    throw SchemaError("manifest", "missing config or inputs");
  }
  const PipelineConfig cfg = config_from_json(manifest["config"]);
  const auto& in_j = manifest["inputs"];
  PipelineInputs inputs;
  inputs.detections_optical = in_j.value("detections_optical", std::string{});
  inputs.detections_thermal = in_j.value("detections_thermal", std::string{});
  inputs.annotations = in_j.value("annotations", std::string{});
  inputs.poses = in_j.value("poses", std::string{});
  inputs.calibration = in_j.value("calibration", std::string{});
  inputs.patches = in_j.value("patches", std::string{});
  return run_pipeline(cfg, inputs, out_dir);
}

}  // namespace aerosar
