// aerosar command line: post-detector pipeline for optical-infrared aerial
// human detection (fusion, tracking, geo-localization, re-identification,
// evaluation) plus the scenario simulator used for end-to-end checks.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>

#include "aerosar/anchors.hpp"
#include "aerosar/errors.hpp"
#include "aerosar/evaluation.hpp"
#include "aerosar/io.hpp"
#include "aerosar/pipeline.hpp"
#include "aerosar/simulate.hpp"

using namespace aerosar;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitStage = 3;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- analyze-anchors ----

struct AnalyzeArgs {
  std::vector<std::string> annotations;
  int width = 2048;
  int height = 1536;
};

void print_report(const char* label, const AssignmentReport& r) {
  std::printf("  %-22s assigned %5d  ignored %5d  background %5d  coverage %6.1f%%\n", label,
              r.assigned, r.ignored, r.background_only, 100.0 * r.coverage);
}

int run_analyze(const AnalyzeArgs& args) {
  std::vector<BoundingBox> gt;
  for (const std::string& file : args.annotations) {
    for (const Annotation& a : read_annotations(file)) gt.push_back(a.bbox);
  }

  const auto strides = retinanet_strides();
  const auto standard = generate_anchors(
      AnchorConfig::retinanet(AnchorConfig::standard_scales()), args.width, args.height, strides);
  const auto custom = generate_anchors(AnchorConfig::retinanet(AnchorConfig::custom_scales()),
                                       args.width, args.height, strides);

  std::printf("%zu ground-truth boxes, image %dx%d, %zu standard / %zu custom anchors\n",
              gt.size(), args.width, args.height, standard.size(), custom.size());
  std::printf("dual-threshold rule:\n");
  print_report("standard scales", assign_retinanet(gt, standard).report);
  print_report("custom scales", assign_retinanet(gt, custom).report);
  std::printf("best-match rule:\n");
  print_report("standard scales", assign_yolo(gt, standard).report);
  print_report("custom scales", assign_yolo(gt, custom).report);
  return kExitOk;
}

// ---- fuse ----

struct FuseArgs {
  std::string optical, thermal, calibration, out = "fused.jsonl";
  std::string mode = "or";
  WindowMatchOptions window;
};

int run_fuse(const FuseArgs& args) {
  const Calibration calib = read_calibration(args.calibration);
  std::vector<DetectionRecord> optical = read_detections(args.optical);
  std::vector<DetectionRecord> thermal = read_detections(args.thermal);
  assign_source_indices(optical);
  assign_source_indices(thermal);

  std::map<int, std::vector<DetectionRecord>> by_frame_o, by_frame_t;
  for (const auto& r : optical) by_frame_o[r.det.frame].push_back(r);
  for (const auto& r : thermal) by_frame_t[r.det.frame].push_back(r);

  std::vector<DetectionRecord> fused;
  std::set<int> frames;
  for (const auto& [f, v] : by_frame_o) frames.insert(f);
  for (const auto& [f, v] : by_frame_t) frames.insert(f);
  for (int frame : frames) {
    std::vector<Detection> opt, thm;
    if (const auto it = by_frame_o.find(frame); it != by_frame_o.end()) {
      for (const auto& r : it->second) opt.push_back(r.det);
    }
    if (const auto it = by_frame_t.find(frame); it != by_frame_t.end()) {
      for (const auto& r : it->second) thm.push_back(r.det);
    }
    const FrameMatches matches =
        cross_match(opt, thm, calib.rig, calib.optical, calib.thermal, args.window);
    const std::vector<Detection> merged =
        args.mode == "and" ? merge_and(opt, thm, matches) : merge_or(opt, thm, matches);
    for (const Detection& d : merged) {
      DetectionRecord rec;
      rec.det = d;
      fused.push_back(std::move(rec));
    }
  }
  assign_source_indices(fused);
  write_detections(args.out, fused);
  std::printf("fused %zu optical + %zu thermal -> %zu detections (%s)\n", optical.size(),
              thermal.size(), fused.size(), args.mode.c_str());
  return kExitOk;
}

// ---- track ----

struct TrackArgs {
  std::string detections, out = "tracks.jsonl";
  TrackerConfig cfg;
};

int run_track(const TrackArgs& args) {
  const std::vector<DetectionRecord> records = read_detections(args.detections);
  std::map<int, std::vector<DetectionRecord>> by_frame;
  for (const auto& r : records) by_frame[r.det.frame].push_back(r);

  TrackStore store(args.cfg);
  std::vector<DetectionRecord> out;
  for (auto& [frame, dets] : by_frame) {
    std::vector<Detection> plain;
    plain.reserve(dets.size());
    for (const auto& r : dets) plain.push_back(r.det);
    const std::vector<int> ids = store.step(plain, frame);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      DetectionRecord rec = dets[i];
      rec.det.human_id = ids[i];
      out.push_back(std::move(rec));
    }
  }
  write_detections(args.out, out, "tracks");
  std::printf("%zu detections -> %d tracks\n", records.size(), store.created());
  return kExitOk;
}

// ---- localize ----

struct LocalizeArgs {
  std::string tracks, poses, calibration, out = "localizations.jsonl";
  std::string particles_out;
  double t_area = kDefaultAreaThreshold;
  double pair_tolerance = 0.125;
  TriangulationOptions triangulation;
  PfConfig pf;
  std::uint64_t seed = 0;
};

int run_localize(const LocalizeArgs& args) {
  const Calibration calib = read_calibration(args.calibration);
  const std::vector<Pose> poses = read_poses_csv(args.poses);
  const std::vector<DetectionRecord> records = read_detections(args.tracks);

  std::map<int, std::vector<DetectionRecord>> tracks;
  for (const auto& r : records) {
    if (!r.det.human_id) throw SchemaError("id", "track records need assigned ids");
    tracks[*r.det.human_id].push_back(r);
  }

  std::ofstream dump;
  if (!args.particles_out.empty()) {
    dump.open(args.particles_out);
    dump << "step,track_id,frame,particle,x,y,weight\n";
  }

  std::vector<LocalizationRecord> out;
  for (const auto& [track_id, obs] : tracks) {
    std::optional<ParticleSet> filter;
    double last_time = 0.0;
    int step = 0;
    for (std::size_t k = 1; k < obs.size(); ++k) {
      const DetectionRecord& prev = obs[k - 1];
      const DetectionRecord& cur = obs[k];
      const Pose* pose_prev = find_pose(poses, prev.det.t, args.pair_tolerance);
      const Pose* pose_cur = find_pose(poses, cur.det.t, args.pair_tolerance);
      if (!pose_prev || !pose_cur) continue;
      WorldPoint position;
      try {
        position = triangulate(
            {{prev.det.bbox.center_x(), prev.det.bbox.center_y()}, *pose_prev},
            {{cur.det.bbox.center_x(), cur.det.bbox.center_y()}, *pose_cur}, calib.optical,
            args.triangulation);
      } catch (const Error&) {
        continue;  // degenerate pair: skipped, not fatal
      }
      LocalizationRecord rec;
      rec.frame = cur.det.frame;
      rec.t = cur.det.t;
      rec.track_id = track_id;
      rec.position = position;
      rec.depth = depth_of(position, *pose_cur);
      rec.metric_area = metric_bbox_area(cur.det.bbox, rec.depth, *pose_cur, calib.optical);
      rec.kept = !reject_by_area(rec.metric_area, args.t_area);
      rec.src_optical = cur.src_optical;
      rec.src_thermal = cur.src_thermal;
      if (rec.kept) {
        const Eigen::Vector2d z = position.head<2>();
        if (!filter) {
          filter = pf_init(z, args.pf, derive_seed(args.seed, track_id));
        } else {
          *filter = pf_propagate(*filter, rec.t - last_time, args.pf);
          try {
            *filter = pf_measure(*filter, z, args.pf);
            const bool resample =
                !args.pf.resample_by_ess ||
                effective_sample_size(*filter) < args.pf.ess_fraction * filter->size();
            if (resample) *filter = pf_resample(*filter);
          } catch (const DegenerateWeights&) {
            filter = pf_init(z, args.pf, derive_seed(args.seed, track_id * 7919 + rec.frame));
          }
        }
        last_time = rec.t;
        rec.pf_mean = pf_estimate(*filter).mean;
        if (dump.is_open()) {
          for (int i = 0; i < filter->size(); ++i) {
            dump << step << ',' << track_id << ',' << rec.frame << ',' << i << ','
                 << fmt(filter->particles(i, 0)) << ',' << fmt(filter->particles(i, 1)) << ','
                 << fmt(filter->weights[i]) << "\n";
          }
        }
        ++step;
      }
      out.push_back(std::move(rec));
    }
  }
  write_localizations(args.out, out);
  int kept = 0;
  for (const auto& r : out) kept += r.kept;
  std::printf("%zu triangulated observations, %d kept, %d rejected\n", out.size(), kept,
              static_cast<int>(out.size()) - kept);
  return kExitOk;
}

// ---- reid ----

struct ReidArgs {
  std::string localizations, patches, patch_dir, out = "humans.jsonl";
  ReidConfig cfg;
  PfConfig pf;
  std::uint64_t seed = 0;
};

int run_reid(const ReidArgs& args) {
  std::vector<LocalizationRecord> locs = read_localizations(args.localizations);
  PatchHistograms patches;
  if (!args.patches.empty()) patches = read_patch_histograms(args.patches);
  if (!args.patch_dir.empty()) {
    // patch files named frame<F>_<spectrum><index>.png, e.g. frame12_optical0.png
    for (const auto& entry : fs::directory_iterator(args.patch_dir)) {
      if (entry.path().extension() != ".png") continue;
      int frame = 0, index = 0;
      char spectrum[16] = {0};
      if (std::sscanf(entry.path().filename().string().c_str(), "frame%d_%15[a-z]%d.png",
                      &frame, spectrum, &index) == 3) {
        const Patch patch = read_png(entry.path());
        const PatchMask mask = center_prior_mask(patch.width, patch.height);
        patches[{frame, spectrum_from_string(spectrum), index}] = histogram_of(patch, &mask);
      }
    }
  }

  std::stable_sort(locs.begin(), locs.end(),
                   [](const LocalizationRecord& a, const LocalizationRecord& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.track_id < b.track_id;
                   });

  HumanRegistry registry(args.cfg, args.pf, args.seed);
  std::map<int, int> track_to_human;
  std::vector<HumanAssignmentRecord> out;
  for (const LocalizationRecord& rec : locs) {
    if (!rec.kept) continue;
    ReidObservation obs;
    obs.position = rec.position.head<2>();
    obs.time = rec.t;
    obs.frame = rec.frame;
    if (rec.src_optical) {
      const auto it = patches.find({rec.frame, Spectrum::optical, *rec.src_optical});
      if (it != patches.end()) obs.histogram = it->second;
    }
    if (!obs.histogram && rec.src_thermal) {
      const auto it = patches.find({rec.frame, Spectrum::thermal, *rec.src_thermal});
      if (it != patches.end()) obs.histogram = it->second;
    }
    int human_id;
    if (const auto it = track_to_human.find(rec.track_id); it != track_to_human.end()) {
      human_id = it->second;
      registry.update(human_id, obs);
    } else {
      human_id = registry.associate(obs);
      track_to_human[rec.track_id] = human_id;
    }
    out.push_back(
        {rec.frame, rec.t, rec.track_id, human_id, rec.position.x(), rec.position.y()});
  }
  write_human_assignments(args.out, out);
  std::printf("%zu observations -> %zu humans\n", out.size(), registry.humans().size());

  // similarity report against the first patch, patch-table style
  if (patches.size() >= 2) {
    std::vector<const ColorHistogram*> hists;
    for (const auto& [key, h] : patches) {
      hists.push_back(&h);
      if (hists.size() == 4) break;
    }
    std::printf("\nhistogram similarity (query = patch 1)\n%-14s", "metric");
    for (std::size_t i = 0; i < hists.size(); ++i) std::printf("  patch %zu", i + 1);
    std::printf("\n");
    for (HistMetric m : {HistMetric::correlation, HistMetric::chi_square,
                         HistMetric::intersection, HistMetric::bhattacharyya}) {
      std::printf("%-14s", to_string(m).c_str());
      for (const ColorHistogram* h : hists) std::printf("  %7.3f", compare(*hists[0], *h, m));
      std::printf("\n");
    }
  }
  return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string annotations, detections;
  std::string out_curve = "eval_curve.csv";
  std::string out_summary = "summary.json";
  std::string plot;
  EvalOptions opts;
  double size_bin = 500.0;
};

void write_svg_curve(const std::string& path, const EvalCurve& curve) {
  const double width = 640, height = 480, margin = 60;
  std::ofstream svg(path);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // log-x fppi in [1e-3, 10], linear-y miss rate in [0, 1]
  auto sx = [&](double fppi) {
    const double lx = std::log10(std::clamp(fppi, 1e-3, 10.0));
    return margin + (lx + 3.0) / 4.0 * (width - 2 * margin);
  };
  auto sy = [&](double mr) { return height - margin - mr * (height - 2 * margin); };
  svg << "<line x1=\"" << margin << "\" y1=\"" << sy(0) << "\" x2=\"" << width - margin
      << "\" y2=\"" << sy(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << sy(0) << "\" x2=\"" << margin << "\" y2=\""
      << sy(1) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">false positives per image</text>\n";
  svg << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
      << ")\" text-anchor=\"middle\">miss rate</text>\n";
  svg << "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"";
  std::vector<CurvePoint> pts = curve.points;
  std::sort(pts.begin(), pts.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.fppi < b.fppi; });
  for (const CurvePoint& p : pts) svg << sx(p.fppi) << ',' << sy(p.miss_rate) << ' ';
  svg << "\"/>\n</svg>\n";
}

int run_evaluate(const EvaluateArgs& args) {
  const std::vector<Annotation> annotations = read_annotations(args.annotations);
  const std::vector<DetectionRecord> detections = read_detections(args.detections);

  std::map<int, FrameData> by_frame;
  for (const Annotation& a : annotations) by_frame[a.frame].annotations.push_back(a);
  for (const DetectionRecord& r : detections) by_frame[r.det.frame].detections.push_back(r.det);
  std::vector<FrameData> frames;
  frames.reserve(by_frame.size());
  for (const auto& [f, data] : by_frame) frames.push_back(data);

  const EvalCurve curve = fppi_missrate_curve(frames, score_thresholds(frames), args.opts);
  {
    std::ofstream csv(args.out_curve);
    csv << "threshold,fppi,miss_rate\n";
    for (const CurvePoint& p : curve.points) {
      csv << fmt(p.threshold) << ',' << fmt(p.fppi) << ',' << fmt(p.miss_rate) << "\n";
    }
  }

  const CurvePoint* op = nullptr;
  for (const CurvePoint& p : curve.points) {
    if (p.fppi <= 1.0 && (!op || p.threshold < op->threshold)) op = &p;
  }
  nlohmann::ordered_json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["frames"] = frames.size();
  summary["log_average_miss_rate"] = curve.log_average_miss_rate;
  if (op) {
    summary["operating_threshold"] = op->threshold;
    summary["operating_fppi"] = op->fppi;
    summary["box_missrate"] = op->miss_rate;
    summary["per_id_missrate"] = per_id_missrate(frames, op->threshold, args.opts);
    const auto buckets = size_histogram(frames, args.size_bin, op->threshold, args.opts);
    auto& sizes = summary["size_histogram"] = nlohmann::ordered_json::array();
    for (const SizeBucket& b : buckets) {
      sizes.push_back({{"area_lo", b.area_lo}, {"tp", b.tp}, {"fn", b.fn}});
    }
  }
  {
    std::ofstream out(args.out_summary);
    out << summary.dump(2) << "\n";
  }
  if (!args.plot.empty()) write_svg_curve(args.plot, curve);
  std::printf("%zu frames, log-average miss rate %.4f\n", frames.size(),
              curve.log_average_miss_rate);
  if (op) {
    std::printf("at fppi <= 1: threshold %.3f, fppi %.3f, box miss rate %.4f\n", op->threshold,
                op->fppi, op->miss_rate);
  }
  return kExitOk;
}

// ---- simulate / pipeline ----

struct SimulateArgs {
  std::string config;
  std::string out_dir = "sim";
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
  ScenarioSpec spec = args.config.empty() ? default_scenario() : load_scenario(args.config);
  if (args.seed) spec.seed = *args.seed;
  const SimulationOutput sim = simulate(spec);
  write_simulation(args.out_dir, sim);
  std::printf("simulated %d frames: %zu annotations, %zu optical + %zu thermal detections\n",
              spec.frames, sim.annotations.size(), sim.optical.size(), sim.thermal.size());
  return kExitOk;
}

struct PipelineArgs {
  std::string config;
  std::string manifest;
  std::string in_dir;
  PipelineInputs inputs;
  std::string out_dir = "run";
  std::optional<std::uint64_t> seed;
};

int run_pipeline_cmd(const PipelineArgs& args) {
  if (!args.manifest.empty()) {
    rerun_from_manifest(args.manifest, args.out_dir);
    std::printf("re-ran manifest %s into %s\n", args.manifest.c_str(), args.out_dir.c_str());
    return kExitOk;
  }
  PipelineConfig cfg = args.config.empty() ? PipelineConfig{} : load_pipeline_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  PipelineInputs inputs = args.inputs;
  if (!args.in_dir.empty()) {
    const fs::path dir = args.in_dir;
    if (inputs.detections_optical.empty()) {
      inputs.detections_optical = dir / "detections_optical.jsonl";
    }
    if (inputs.detections_thermal.empty()) {
      if (const fs::path p = dir / "detections_thermal.jsonl"; fs::exists(p)) {
        inputs.detections_thermal = p;
      }
    }
    if (inputs.annotations.empty()) {
      if (const fs::path p = dir / "annotations.jsonl"; fs::exists(p)) inputs.annotations = p;
    }
    if (inputs.poses.empty()) inputs.poses = dir / "poses.csv";
    if (inputs.calibration.empty()) inputs.calibration = dir / "calibration.yaml";
    if (inputs.patches.empty()) {
      if (const fs::path p = dir / "patches.csv"; fs::exists(p)) inputs.patches = p;
    }
  }
  const PipelineResult r = run_pipeline(cfg, inputs, args.out_dir);
  std::printf("frames %d, fused %d, tracks %d, localized %d (+%d rejected), humans %d\n",
              r.frames, r.fused_detections, r.tracks, r.localized, r.rejected, r.humans);
  if (r.evaluated) {
    std::printf("eval: per-id miss rate %.4f, box miss rate %.4f at fppi %.3f\n",
                r.per_id_missrate, r.box_missrate, r.operating_fppi);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aerosar: optical-infrared aerial search-and-rescue detection pipeline"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* cmd_analyze = app.add_subcommand(
      "analyze-anchors", "anchor assignment coverage, standard vs custom scales");
  cmd_analyze->add_option("--annotations", analyze.annotations, "annotation JSONL file(s)")
      ->required();
  cmd_analyze->add_option("--width", analyze.width, "image width, px");
  cmd_analyze->add_option("--height", analyze.height, "image height, px");

  FuseArgs fuse;
  auto* cmd_fuse = app.add_subcommand("fuse", "cross-spectral detection merging");
  cmd_fuse->add_option("--optical", fuse.optical, "optical detections JSONL")->required();
  cmd_fuse->add_option("--thermal", fuse.thermal, "thermal detections JSONL")->required();
  cmd_fuse->add_option("--calibration", fuse.calibration, "calibration YAML")->required();
  cmd_fuse->add_option("--mode", fuse.mode, "or | and")->check(CLI::IsMember({"or", "and"}));
  cmd_fuse->add_option("--out", fuse.out, "output JSONL");
  cmd_fuse->add_option("--window-grid", fuse.window.grid, "sliding steps per axis");
  cmd_fuse->add_option("--window-iou", fuse.window.iou_threshold, "match IOU threshold");

  TrackArgs track;
  auto* cmd_track = app.add_subcommand("track", "frame-to-frame identity assignment");
  cmd_track->add_option("--detections", track.detections, "detections JSONL")->required();
  cmd_track->add_option("--out", track.out, "output JSONL");
  cmd_track->add_option("--iou-gate", track.cfg.iou_gate, "association gate");
  cmd_track->add_option("--max-missed", track.cfg.max_missed_frames, "frames until lost");
  cmd_track->add_option("--downsample", track.cfg.downsample_factor, "coordinate downsampling");

  LocalizeArgs localize;
  auto* cmd_localize =
      app.add_subcommand("localize", "two-view triangulation, outlier rejection, filtering");
  cmd_localize->add_option("--tracks", localize.tracks, "tracked detections JSONL")->required();
  cmd_localize->add_option("--poses", localize.poses, "pose CSV")->required();
  cmd_localize->add_option("--calibration", localize.calibration, "calibration YAML")->required();
  cmd_localize->add_option("--out", localize.out, "output JSONL");
  cmd_localize->add_option("--t-area", localize.t_area, "metric area gate, m^2");
  cmd_localize->add_option("--pf-sigma", localize.pf.sigma_z, "measurement noise std, m");
  cmd_localize->add_option("--pf-n", localize.pf.n, "particle count");
  cmd_localize->add_option("--pf-vmax", localize.pf.v_max, "max human velocity, m/s");
  cmd_localize->add_option("--seed", localize.seed, "RNG seed");
  cmd_localize->add_option("--particles-out", localize.particles_out, "per-step particle CSV");

  ReidArgs reid;
  auto* cmd_reid = app.add_subcommand("reid", "re-identification across revisits");
  cmd_reid->add_option("--localizations", reid.localizations, "localizations JSONL")->required();
  cmd_reid->add_option("--patches", reid.patches, "patch histograms CSV");
  cmd_reid->add_option("--patch-dir", reid.patch_dir, "directory of patch PNGs");
  cmd_reid->add_option("--out", reid.out, "output JSONL");
  cmd_reid->add_option("--t-redetect", reid.cfg.t_redetect, "new-human threshold");
  cmd_reid->add_option("--sigmoid-scale", reid.cfg.sigmoid_scale, "appearance sigmoid a");
  cmd_reid->add_option("--sigmoid-center", reid.cfg.sigmoid_center, "appearance sigmoid b");
  cmd_reid->add_option("--pf-sigma", reid.pf.sigma_z, "measurement noise std, m");
  cmd_reid->add_option("--seed", reid.seed, "RNG seed");

  EvaluateArgs evaluate;
  auto* cmd_evaluate = app.add_subcommand("evaluate", "fppi / miss-rate scoring");
  cmd_evaluate->add_option("--annotations", evaluate.annotations, "annotation JSONL")->required();
  cmd_evaluate->add_option("--detections", evaluate.detections, "detections JSONL")->required();
  cmd_evaluate->add_option("--out-curve", evaluate.out_curve, "curve CSV");
  cmd_evaluate->add_option("--out-summary", evaluate.out_summary, "summary JSON");
  cmd_evaluate->add_option("--plot", evaluate.plot, "SVG curve path");
  cmd_evaluate->add_option("--iou", evaluate.opts.iou_threshold, "match IOU threshold");
  cmd_evaluate->add_flag("--exclude-occluded", evaluate.opts.exclude_occluded,
                         "treat occluded boxes as ignore regions");
  cmd_evaluate->add_option("--size-bin", evaluate.size_bin, "size histogram bin, px^2");

  SimulateArgs simulate_args;
  auto* cmd_simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
  cmd_simulate->add_option("--config", simulate_args.config, "scenario YAML");
  cmd_simulate->add_option("--out-dir", simulate_args.out_dir, "output directory");
  cmd_simulate->add_option("--seed", simulate_args.seed, "RNG seed (overrides config)");

  PipelineArgs pipeline_args;
  auto* cmd_pipeline = app.add_subcommand("pipeline", "full run: fuse through evaluate");
  cmd_pipeline->add_option("--config", pipeline_args.config, "pipeline YAML");
  cmd_pipeline->add_option("--manifest", pipeline_args.manifest, "re-run a manifest JSON");
  cmd_pipeline->add_option("--in-dir", pipeline_args.in_dir,
                           "directory with simulate-layout inputs");
  cmd_pipeline->add_option("--optical", pipeline_args.inputs.detections_optical,
                           "optical detections JSONL");
  cmd_pipeline->add_option("--thermal", pipeline_args.inputs.detections_thermal,
                           "thermal detections JSONL");
  cmd_pipeline->add_option("--annotations", pipeline_args.inputs.annotations,
                           "annotation JSONL");
  cmd_pipeline->add_option("--poses", pipeline_args.inputs.poses, "pose CSV");
  cmd_pipeline->add_option("--calibration", pipeline_args.inputs.calibration,
                           "calibration YAML");
  cmd_pipeline->add_option("--patches", pipeline_args.inputs.patches, "patch histograms CSV");
  cmd_pipeline->add_option("--out-dir", pipeline_args.out_dir, "output directory");
  cmd_pipeline->add_option("--seed", pipeline_args.seed, "RNG seed (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_analyze->parsed()) return run_analyze(analyze);
    if (cmd_fuse->parsed()) return run_fuse(fuse);
    if (cmd_track->parsed()) return run_track(track);
    if (cmd_localize->parsed()) return run_localize(localize);
    if (cmd_reid->parsed()) return run_reid(reid);
    if (cmd_evaluate->parsed()) return run_evaluate(evaluate);
    if (cmd_simulate->parsed()) return run_simulate(simulate_args);
    if (cmd_pipeline->parsed()) return run_pipeline_cmd(pipeline_args);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitOk;
}
