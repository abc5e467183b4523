// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aerosar/anchors.hpp"
#include "aerosar/errors.hpp"
#include "aerosar/evaluation.hpp"
#include "aerosar/fusion.hpp"
#include "aerosar/io.hpp"
#include "aerosar/pipeline.hpp"
#include "aerosar/reid.hpp"
#include "aerosar/simulate.hpp"

using namespace aerosar;
namespace fs = std::filesystem;

namespace {

fs::path g_data_dir = "data";
fs::path g_work_dir;

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------- criterion 1

std::vector<BoundingBox> synthesize_anchor_dataset(Rng& rng, int n_small, int n_medium) {
  // Small boxes (12-20 px) snapped near stride-8 anchor centers: below every
  // standard anchor's assignment band but square in the custom 16 px anchor.
  std::vector<BoundingBox> gt;
  for (int i = 0; i < n_small; ++i) {
    const double s = rng.uniform(12.0, 20.0);
    const double cx = 8.0 * (4 + rng.below(56)) + 4.0 + rng.uniform(-1.0, 1.0);
    const double cy = 8.0 * (4 + rng.below(56)) + 4.0 + rng.uniform(-1.0, 1.0);
    gt.push_back(BoundingBox::from_center(cx, cy, s, s));
  }
  for (int i = 0; i < n_medium; ++i) {
    const double s = rng.uniform(24.0, 45.0);
    const double cx = rng.uniform(50.0, 462.0);
    const double cy = rng.uniform(50.0, 462.0);
    gt.push_back(BoundingBox::from_center(cx, cy, s, s));
  }
  return gt;
}

Check criterion_anchor_coverage() {
  Check c;
  const auto strides = retinanet_strides();
  const auto standard = generate_anchors(
      AnchorConfig::retinanet(AnchorConfig::standard_scales()), 512, 512, strides);
  const auto custom =
      generate_anchors(AnchorConfig::retinanet(AnchorConfig::custom_scales()), 512, 512, strides);

  // packaged dataset: coverage rises from <= 60% to >= 95%
  const auto annotations = read_annotations(g_data_dir / "anchor_coverage_synthetic.jsonl");
  std::vector<BoundingBox> gt;
  for (const Annotation& a : annotations) gt.push_back(a.bbox);
  const double cov_standard = assign_retinanet(gt, standard).report.coverage;
  const double cov_custom = assign_retinanet(gt, custom).report.coverage;
  c.expect(cov_standard <= 0.60, "packaged dataset: standard coverage > 0.60");
  c.expect(cov_custom >= 0.95, "packaged dataset: custom coverage < 0.95");

  // property: datasets with sub-anchor boxes strictly gain coverage
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto random_gt =
        synthesize_anchor_dataset(rng, 20 + static_cast<int>(rng.below(40)),
                                  20 + static_cast<int>(rng.below(40)));
    const double cs = assign_retinanet(random_gt, standard).report.coverage;
    const double cc = assign_retinanet(random_gt, custom).report.coverage;
    if (cc <= cs) {
      c.expect(false, "coverage did not strictly increase (seed " + std::to_string(seed) + ")");
      break;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "packaged %.1f%% -> %.1f%%, strict increase on 20 random sets",
                100.0 * cov_standard, 100.0 * cov_custom);
  if (c.ok) c.detail = buf;
  return c;
}

// ---------------------------------------------------------------- criterion 2

ScenarioSpec fusion_scenario() {
  ScenarioSpec spec = default_scenario();
  spec.frames = 6;
  spec.camera_waypoints = {{-2.0, 0.0, 100.0}, {2.0, 0.0, 100.0}};
  spec.camera_speed = 2.0;
  HumanSpec a;
  a.id = 1;
  a.waypoints = {{0.0, 5.0}};
  spec.humans.push_back(a);
  HumanSpec b;
  b.id = 2;
  b.waypoints = {{8.0, -6.0}};
  b.color = {40, 60, 220};
  spec.humans.push_back(b);
  return spec;
}

Check criterion_fusion_oracle() {
  Check c;
  const ScenarioSpec spec = fusion_scenario();
  const SimulationOutput sim = simulate(spec);
  const Calibration& calib = sim.calibration;

  std::map<int, std::vector<Detection>> optical, thermal;
  for (const auto& r : sim.optical) optical[r.det.frame].push_back(r.det);
  for (const auto& r : sim.thermal) thermal[r.det.frame].push_back(r.det);

  int pairs = 0;
  for (const auto& [frame, opt] : optical) {
    const auto& thm = thermal.at(frame);
    const FrameMatches matches =
        cross_match(opt, thm, calib.rig, calib.optical, calib.thermal);
    c.expect(matches.pairs.size() == opt.size(), "an optical detection found no counterpart");
    for (const MatchedPair& p : matches.pairs) {
      c.expect(p.iou >= 0.99, "iou_at_match below 0.99");
      ++pairs;
    }
    const auto fused = merge_or(opt, thm, matches);
    for (const MatchedPair& p : matches.pairs) {
      const double expected = 0.5 * (opt[p.optical].score + thm[p.thermal].score);
      c.expect(fused[p.optical].score == expected, "fused score is not the exact pair mean");
    }
  }
  c.expect(pairs > 0, "no cross-spectral pairs formed");

  // 0.8w mapping offset: plain IOU matching fails, the sliding window recovers
  WindowMatchOptions plain;
  plain.grid = 1;
  int recovered = 0, plain_hits = 0, injected = 0;
  for (const auto& [frame, opt] : optical) {
    const auto& thm = thermal.at(frame);
    for (const Detection& d : opt) {
      BoundingBox mapped = map_bbox(d, calib.rig, calib.optical, calib.thermal);
      mapped = mapped.translated(0.8 * mapped.width(), 0.0);
      plain_hits += sliding_window_match(mapped, thm, plain).index.has_value();
      recovered += sliding_window_match(mapped, thm).index.has_value();
      ++injected;
    }
  }
  c.expect(plain_hits == 0, "plain IOU-0.5 matching survived the 0.8w offset");
  c.expect(recovered == injected, "sliding-window matching missed an offset counterpart");
  if (c.ok) {
    c.detail = std::to_string(pairs) + " exact pairs; offset recovery " +
               std::to_string(recovered) + "/" + std::to_string(injected);
  }
  return c;
}

// ---------------------------------------------------------------- criterion 3

Check criterion_localization() {
  Check c;

  // zero pixel noise, 100 m altitude, 10 m frame baseline
  ScenarioSpec fast = default_scenario();
  fast.frames = 4;
  fast.camera_waypoints = {{-15.0, 0.0, 100.0}, {25.0, 0.0, 100.0}};
  fast.camera_speed = 40.0;  // 10 m between frames at 4 Hz
  HumanSpec h;
  h.id = 1;
  h.waypoints = {{0.0, 5.0}};
  fast.humans.push_back(h);

  {
    const SimulationOutput sim = simulate(fast);
    const auto& d0 = sim.optical[0].det;
    const auto& d1 = sim.optical[1].det;
    const WorldPoint p = triangulate(
        {{d0.bbox.center_x(), d0.bbox.center_y()}, sim.poses[d0.frame]},
        {{d1.bbox.center_x(), d1.bbox.center_y()}, sim.poses[d1.frame]}, fast.optical);
    const double err = (p - WorldPoint(0.0, 5.0, 0.0)).norm();
    c.expect(err < 1e-3, "zero-noise triangulation error " + std::to_string(err));
  }

  // 1 px jitter: 2 m RMS over 100 seeds
  double sq_sum = 0.0;
  int used = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ScenarioSpec noisy = fast;
    noisy.seed = seed;
    noisy.noise.jitter_sigma = 1.0;
    const SimulationOutput sim = simulate(noisy);
    if (sim.optical.size() < 2) continue;
    const auto& d0 = sim.optical[0].det;
    const auto& d1 = sim.optical[1].det;
    try {
      const WorldPoint p = triangulate(
          {{d0.bbox.center_x(), d0.bbox.center_y()}, sim.poses[d0.frame]},
          {{d1.bbox.center_x(), d1.bbox.center_y()}, sim.poses[d1.frame]}, fast.optical);
      sq_sum += (p - WorldPoint(0.0, 5.0, 0.0)).squaredNorm();
      ++used;
    } catch (const Error&) {
    }
  }
  const double rms = std::sqrt(sq_sum / used);
  c.expect(used >= 95, "too few jittered triangulations");
  c.expect(rms < 2.0, "jittered RMS " + std::to_string(rms) + " m");

  // metric-area rejection: all clutter out, all humans kept
  ScenarioSpec area = default_scenario();
  area.frames = 8;
  area.camera_waypoints = {{-2.0, 0.0, 100.0}, {2.0, 0.0, 100.0}};
  area.camera_speed = 2.0;
  area.humans.push_back(h);                          // 1.7 x 0.6 = 1.02 m^2
  HumanSpec h2 = h;
  h2.id = 2;
  h2.waypoints = {{-4.0, -6.0}};
  h2.size_m = {1.6, 1.0};                            // 1.6 m^2, boundary-sized adult
  area.humans.push_back(h2);
  area.clutter.push_back({{6.0, -3.0}, {3.0, 3.0}, {128, 128, 128}});  // 9 m^2
  area.clutter.push_back({{-8.0, 2.0}, {2.5, 1.6}, {110, 110, 110}});  // 4 m^2

  const fs::path dir = g_work_dir / "c3";
  write_simulation(dir / "sim", simulate(area));
  PipelineConfig cfg;
  PipelineInputs inputs;
  inputs.detections_optical = dir / "sim/detections_optical.jsonl";
  inputs.detections_thermal = dir / "sim/detections_thermal.jsonl";
  inputs.annotations = dir / "sim/annotations.jsonl";
  inputs.poses = dir / "sim/poses.csv";
  inputs.calibration = dir / "sim/calibration.yaml";
  inputs.patches = dir / "sim/patches.csv";
  run_pipeline(cfg, inputs, dir / "run");

  std::map<std::tuple<int, Spectrum, int>, std::string> truth;
  for (const TruthRecord& t : read_truth(dir / "sim/truth.jsonl")) {
    truth[{t.frame, t.spectrum, t.index}] = t.source;
  }
  int clutter_seen = 0, human_seen = 0;
  for (const LocalizationRecord& l : read_localizations(dir / "run/localizations.jsonl")) {
    if (!l.src_optical) continue;
    const std::string& source = truth.at({l.frame, Spectrum::optical, *l.src_optical});
    if (source.rfind("clutter", 0) == 0) {
      ++clutter_seen;
      c.expect(!l.kept, "a clutter localization survived the area gate");
      c.expect(l.metric_area > 3.0, "clutter metric area not above the threshold");
    } else if (source.rfind("human", 0) == 0) {
      ++human_seen;
      c.expect(l.kept, "a true human was rejected by the area gate");
      c.expect(l.metric_area <= 1.7, "human metric area above 1.7 m^2");
    }
  }
  c.expect(clutter_seen > 0, "no clutter localizations formed");
  c.expect(human_seen > 0, "no human localizations formed");
  if (c.ok) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "zero-noise ok, jitter RMS %.3f m, rejected %d/%d clutter, kept %d humans",
                  rms, clutter_seen, clutter_seen, human_seen);
    c.detail = buf;
  }
  return c;
}

// ---------------------------------------------------------------- criterion 4

Check criterion_particle_filter() {
  Check c;
  const PfConfig cfg;  // sigma_z 3, v_max 1.2, N 100

  // stationary target, 100 steps at dt = 0.1 s, 200 seeds
  int good = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ParticleSet s = pf_init({0.0, 0.0}, cfg, seed);
    Rng measurement_noise(derive_seed(9000, seed));
    for (int step = 0; step < 100; ++step) {
      s = pf_propagate(s, 0.1, cfg);
      s = pf_measure(s,
                     {measurement_noise.normal(0.0, cfg.sigma_z),
                      measurement_noise.normal(0.0, cfg.sigma_z)},
                     cfg);
      if (std::abs(s.weights.sum() - 1.0) >= 1e-9) {
        c.expect(false, "weight normalization drifted past 1e-9");
      }
      s = pf_resample(s);
    }
    if (pf_estimate(s).mean.norm() < 1.5) ++good;
  }
  c.expect(good >= 190, "final error < 1.5 m for only " + std::to_string(good) + "/200 seeds");

  // systematic resampling copy counts within {floor(Nw), ceil(Nw)}
  Rng rng(13);
  const int n = 100;
  for (int trial = 0; trial < 10000; ++trial) {
    ParticleSet s;
    s.particles.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      s.particles(i, 0) = i;  // identity tags
      s.particles(i, 1) = 0.0;
    }
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = rng.uniform01();
    w /= w.sum();
    s.weights = w;
    s.rng = Rng(derive_seed(31, trial));
    const ParticleSet r = pf_resample(s);
    std::vector<int> copies(n, 0);
    for (int i = 0; i < n; ++i) ++copies[static_cast<int>(r.particles(i, 0))];
    for (int i = 0; i < n; ++i) {
      if (copies[i] < std::floor(n * w[i]) || copies[i] > std::ceil(n * w[i])) {
        c.expect(false, "copy count outside the floor/ceil bound (trial " +
                            std::to_string(trial) + ")");
        trial = 10000;
        break;
      }
    }
  }
  if (c.ok) {
    c.detail = std::to_string(good) + "/200 seeds within 1.5 m; 10^4 resampling bounds hold";
  }
  return c;
}

// ---------------------------------------------------------------- criterion 5

Check criterion_reid() {
  Check c;

  // compare(a, a) pattern over 1000 random histograms
  Rng rng(99);
  for (int i = 0; i < 1000 && c.ok; ++i) {
    ColorHistogram h;
    h.bins = Eigen::MatrixXd::Zero(kDefaultHueBins, kDefaultSatBins);
    const int hits = 1 + static_cast<int>(rng.below(40));
    for (int k = 0; k < hits; ++k) {
      h.bins(rng.below(kDefaultHueBins), rng.below(kDefaultSatBins)) += rng.uniform01();
    }
    const bool normalize = rng.uniform01() < 0.5;
    if (normalize) h.bins /= h.bins.sum();
    h.total = h.bins.sum();
    c.expect(std::abs(compare(h, h, HistMetric::correlation) - 1.0) < 1e-9,
             "self correlation != 1");
    c.expect(compare(h, h, HistMetric::chi_square) == 0.0, "self chi-square != 0");
    c.expect(std::abs(compare(h, h, HistMetric::intersection) - h.total) < 1e-12,
             "self intersection != self-mass");
    c.expect(compare(h, h, HistMetric::bhattacharyya) < 1e-7, "self bhattacharyya != 0");
  }

  // exact background invariance of masked histograms
  const PatchMask mask = center_prior_mask(16, 12, 0.8);
  for (int i = 0; i < 100 && c.ok; ++i) {
    Patch a, b;
    a.width = b.width = 16;
    a.height = b.height = 12;
    a.pixels.resize(16 * 12);
    for (Rgb& px : a.pixels) {
      px = {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
            static_cast<std::uint8_t>(rng.below(256))};
    }
    b.pixels = a.pixels;
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (!mask.at(x, y)) {
          b.pixels[y * 16 + x] = {static_cast<std::uint8_t>(rng.below(256)),
                                  static_cast<std::uint8_t>(rng.below(256)),
                                  static_cast<std::uint8_t>(rng.below(256))};
        }
      }
    }
    const ColorHistogram ha = histogram_of(a, &mask);
    const ColorHistogram hb = histogram_of(b, &mask);
    c.expect((ha.bins - hb.bins).cwiseAbs().maxCoeff() == 0.0,
             "masked histograms differ despite equal foreground");
  }

  // simulated revisit: the returning human keeps its id, a differently
  // colored newcomer 25 m away gets a fresh one. 2.5 m/s keeps the per-frame
  // displacement associable; the excursion past x = 63 m pushes the person
  // out of the field of view long enough for the tracker to drop the track.
  ScenarioSpec spec = default_scenario();
  spec.frames = 256;
  spec.camera_waypoints = {{-5.0, 0.0, 100.0}, {75.0, 0.0, 100.0}, {-5.0, 0.0, 100.0}};
  spec.camera_speed = 2.5;
  HumanSpec a;
  a.id = 1;
  a.waypoints = {{0.0, 5.0}};
  a.color = {220, 30, 30};
  spec.humans.push_back(a);
  HumanSpec b;
  b.id = 2;
  b.waypoints = {{25.0, 5.0}};
  b.color = {40, 40, 220};
  b.appear_time = 36.0;  // second pass only
  spec.humans.push_back(b);

  const fs::path dir = g_work_dir / "c5";
  write_simulation(dir / "sim", simulate(spec));
  PipelineConfig cfg;
  PipelineInputs inputs;
  inputs.detections_optical = dir / "sim/detections_optical.jsonl";
  inputs.detections_thermal = dir / "sim/detections_thermal.jsonl";
  inputs.annotations = dir / "sim/annotations.jsonl";
  inputs.poses = dir / "sim/poses.csv";
  inputs.calibration = dir / "sim/calibration.yaml";
  inputs.patches = dir / "sim/patches.csv";
  const PipelineResult result = run_pipeline(cfg, inputs, dir / "run");

  std::map<std::tuple<int, Spectrum, int>, std::string> truth;
  for (const TruthRecord& t : read_truth(dir / "sim/truth.jsonl")) {
    truth[{t.frame, t.spectrum, t.index}] = t.source;
  }
  std::map<std::pair<int, int>, std::string> obs_source;  // (frame, track) -> source
  for (const LocalizationRecord& l : read_localizations(dir / "run/localizations.jsonl")) {
    if (l.src_optical) {
      obs_source[{l.frame, l.track_id}] = truth.at({l.frame, Spectrum::optical, *l.src_optical});
    }
  }
  std::set<int> ids_a, ids_b;
  std::set<int> tracks_a;
  int last_frame_a = 0, first_frame_a2 = 1 << 30;
  for (const HumanAssignmentRecord& h : read_human_assignments(dir / "run/humans.jsonl")) {
    const auto it = obs_source.find({h.frame, h.track_id});
    if (it == obs_source.end()) continue;
    if (it->second == "human:1") {
      ids_a.insert(h.human_id);
      tracks_a.insert(h.track_id);
      if (h.frame < 128) last_frame_a = std::max(last_frame_a, h.frame);
      else first_frame_a2 = std::min(first_frame_a2, h.frame);
    } else if (it->second == "human:2") {
      ids_b.insert(h.human_id);
    }
  }
  c.expect(tracks_a.size() >= 2, "the revisit did not break the tracker id (no gap formed)");
  c.expect(last_frame_a > 0 && first_frame_a2 < (1 << 30) &&
               first_frame_a2 - last_frame_a > TrackerConfig{}.max_missed_frames,
           "the camera never actually left and returned");
  c.expect(ids_a.size() == 1, "the returning human did not keep a single global id");
  c.expect(ids_b.size() == 1, "the newcomer did not get a single global id");
  c.expect(!ids_a.empty() && !ids_b.empty() && *ids_a.begin() != *ids_b.begin(),
           "the differently colored human shares the returning human's id");
  c.expect(result.humans == 2, "registry sizes " + std::to_string(result.humans) + " != 2");
  if (c.ok) {
    c.detail = "self-similarity pattern on 1000 histograms, exact mask invariance, revisit keeps id " +
               std::to_string(*ids_a.begin()) + ", newcomer id " + std::to_string(*ids_b.begin());
  }
  return c;
}

// ---------------------------------------------------------------- criterion 6

Check criterion_evaluation() {
  Check c;
  Rng rng(7);

  // bookkeeping on random frames
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    std::vector<Annotation> gts;
    std::vector<Detection> dets;
    for (std::uint64_t g = 0; g < rng.below(7); ++g) {
      Annotation a;
      const double x = rng.uniform(0.0, 80.0), y = rng.uniform(0.0, 80.0);
      a.bbox = {x, y, x + rng.uniform(5.0, 30.0), y + rng.uniform(5.0, 30.0)};
      a.human_id = static_cast<int>(g);
      gts.push_back(a);
    }
    for (std::uint64_t d = 0; d < rng.below(7); ++d) {
      Detection det;
      const double x = rng.uniform(0.0, 80.0), y = rng.uniform(0.0, 80.0);
      det.bbox = {x, y, x + rng.uniform(5.0, 30.0), y + rng.uniform(5.0, 30.0)};
      det.score = rng.uniform01();
      dets.push_back(det);
    }
    const FrameMatchStats s = match_frame(dets, gts);
    c.expect(s.tp + s.fn == static_cast<int>(gts.size()), "TP+FN != |gt|");
    c.expect(s.tp + s.fp == static_cast<int>(dets.size()), "TP+FP != |detections|");
  }

  // the hand-counted curve point
  {
    std::vector<FrameData> frames(4);
    int made = 0;
    for (int f = 0; f < 4; ++f) {
      const int gts_here = f < 2 ? 3 : 2;
      for (int g = 0; g < gts_here; ++g) {
        Annotation a;
        a.frame = f;
        a.bbox = {g * 50.0, 0.0, g * 50.0 + 20.0, 20.0};
        a.human_id = f * 10 + g;
        frames[f].annotations.push_back(a);
        if (made < 8) {
          Detection d;
          d.bbox = a.bbox;
          d.score = 0.9;
          frames[f].detections.push_back(d);
          ++made;
        }
      }
    }
    for (int f : {0, 1}) {
      Detection fp;
      fp.bbox = {300, 300, 320, 320};
      fp.score = 0.9;
      frames[f].detections.push_back(fp);
    }
    const EvalCurve curve = fppi_missrate_curve(frames, {0.5});
    c.expect(curve.points[0].fppi == 0.5, "hand case fppi != 0.5");
    c.expect(curve.points[0].miss_rate == 0.2, "hand case miss rate != 0.2");
  }

  // per-id <= box miss rate on 100 random sequences (equal boxes per id)
  for (int trial = 0; trial < 100 && c.ok; ++trial) {
    const int ids = 2 + static_cast<int>(rng.below(5));
    const int nframes = 3 + static_cast<int>(rng.below(5));
    std::vector<FrameData> frames(nframes);
    int total_fn = 0;
    for (int f = 0; f < nframes; ++f) {
      for (int id = 0; id < ids; ++id) {
        Annotation a;
        a.frame = f;
        a.bbox = {id * 60.0, 0.0, id * 60.0 + 25.0, 25.0};
        a.human_id = id;
        frames[f].annotations.push_back(a);
        if (rng.uniform01() < 0.55) {
          Detection d;
          d.bbox = a.bbox;
          d.score = 0.9;
          frames[f].detections.push_back(d);
        } else {
          ++total_fn;
        }
      }
    }
    const double box_missrate = static_cast<double>(total_fn) / (ids * nframes);
    c.expect(per_id_missrate(frames, 0.0) <= box_missrate + 1e-12,
             "per-id miss rate exceeded the box miss rate");
  }

  // greedy matcher within 1 TP of the exhaustive bipartite optimum
  for (int trial = 0; trial < 300 && c.ok; ++trial) {
    std::vector<Annotation> gts;
    std::vector<Detection> dets;
    std::vector<BoundingBox> gt_boxes, det_boxes;
    for (std::uint64_t g = 0; g < 1 + rng.below(6); ++g) {
      const double x = rng.uniform(0.0, 50.0), y = rng.uniform(0.0, 50.0);
      const BoundingBox b{x, y, x + rng.uniform(8.0, 25.0), y + rng.uniform(8.0, 25.0)};
      Annotation a;
      a.bbox = b;
      a.human_id = static_cast<int>(g);
      gts.push_back(a);
      gt_boxes.push_back(b);
    }
    for (std::uint64_t d = 0; d < 1 + rng.below(6); ++d) {
      const double x = rng.uniform(0.0, 50.0), y = rng.uniform(0.0, 50.0);
      const BoundingBox b{x, y, x + rng.uniform(8.0, 25.0), y + rng.uniform(8.0, 25.0)};
      Detection det;
      det.bbox = b;
      det.score = rng.uniform01();
      dets.push_back(det);
      det_boxes.push_back(b);
    }
    // exhaustive maximum matching via augmenting paths
    std::vector<std::vector<int>> adj(det_boxes.size());
    for (std::size_t d = 0; d < det_boxes.size(); ++d) {
      for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
        if (iou(det_boxes[d], gt_boxes[g]) >= 0.5) adj[d].push_back(static_cast<int>(g));
      }
    }
    std::vector<int> match_gt(gt_boxes.size(), -1);
    std::vector<bool> visited;
    std::function<bool(int)> augment = [&](int d) -> bool {
      for (int g : adj[d]) {
        if (visited[g]) continue;
        visited[g] = true;
        if (match_gt[g] < 0 || augment(match_gt[g])) {
          match_gt[g] = d;
          return true;
        }
      }
      return false;
    };
    int optimal = 0;
    for (std::size_t d = 0; d < det_boxes.size(); ++d) {
      visited.assign(gt_boxes.size(), false);
      if (augment(static_cast<int>(d))) ++optimal;
    }
    const int greedy = match_frame(dets, gts).tp;
    c.expect(greedy <= optimal && greedy >= optimal - 1,
             "greedy TP outside optimal-1..optimal");
  }

  // end-to-end: zero noise, then the documented noise model
  ScenarioSpec spec = default_scenario();
  spec.frames = 30;
  spec.camera_waypoints = {{-4.0, 0.0, 100.0}, {4.0, 0.0, 100.0}};
  spec.camera_speed = 1.0;
  for (int id = 1; id <= 3; ++id) {
    HumanSpec h;
    h.id = id;
    h.waypoints = {{id * 6.0 - 12.0, id % 2 ? 5.0 : -6.0}};
    h.color = {static_cast<std::uint8_t>(60 * id), 40, static_cast<std::uint8_t>(250 - 60 * id)};
    spec.humans.push_back(h);
  }

  {
    const fs::path dir = g_work_dir / "c6_clean";
    write_simulation(dir / "sim", simulate(spec));
    PipelineConfig cfg;
    PipelineInputs inputs;
    inputs.detections_optical = dir / "sim/detections_optical.jsonl";
    inputs.detections_thermal = dir / "sim/detections_thermal.jsonl";
    inputs.annotations = dir / "sim/annotations.jsonl";
    inputs.poses = dir / "sim/poses.csv";
    inputs.calibration = dir / "sim/calibration.yaml";
    inputs.patches = dir / "sim/patches.csv";
    const PipelineResult r = run_pipeline(cfg, inputs, dir / "run");
    c.expect(r.evaluated, "clean pipeline produced no evaluation");
    c.expect(r.operating_fppi == 0.0, "clean pipeline fppi != 0");
    c.expect(r.per_id_missrate == 0.0, "clean pipeline per-id miss rate != 0");
  }

  double noisy_missrate = 1.0;
  {
    ScenarioSpec noisy = spec;
    noisy.seed = 2024;
    noisy.noise.miss_rate = 0.5;
    noisy.noise.fp_rate = 0.5;
    const fs::path dir = g_work_dir / "c6_noisy";
    write_simulation(dir / "sim", simulate(noisy));
    PipelineConfig cfg;
    PipelineInputs inputs;
    inputs.detections_optical = dir / "sim/detections_optical.jsonl";
    inputs.detections_thermal = dir / "sim/detections_thermal.jsonl";
    inputs.annotations = dir / "sim/annotations.jsonl";
    inputs.poses = dir / "sim/poses.csv";
    inputs.calibration = dir / "sim/calibration.yaml";
    inputs.patches = dir / "sim/patches.csv";
    const PipelineResult r = run_pipeline(cfg, inputs, dir / "run");
    c.expect(r.evaluated, "noisy pipeline produced no evaluation");
    c.expect(r.operating_fppi <= 1.0, "noisy pipeline has no <=1 fppi operating point");
    c.expect(r.per_id_missrate <= 0.3,
             "noisy per-id miss rate " + std::to_string(r.per_id_missrate) + " > 0.3");
    noisy_missrate = r.per_id_missrate;
  }
  if (c.ok) {
    char buf[120];
    std::snprintf(buf, sizeof(buf), "all invariants hold; noisy per-id miss rate %.3f <= 0.3",
                  noisy_missrate);
    c.detail = buf;
  }
  return c;
}

// ---------------------------------------------------------------- criterion 7

Check criterion_determinism() {
  Check c;
  ScenarioSpec spec = default_scenario();
  spec.frames = 12;
  spec.seed = 42;
  spec.camera_waypoints = {{-3.0, 0.0, 100.0}, {3.0, 0.0, 100.0}};
  spec.camera_speed = 2.0;
  HumanSpec h;
  h.id = 1;
  h.waypoints = {{0.0, 5.0}};
  spec.humans.push_back(h);
  spec.noise.miss_rate = 0.2;
  spec.noise.fp_rate = 0.4;
  spec.noise.jitter_sigma = 0.8;

  // identical seeds over identical inputs: simulate twice (bit-compared),
  // then run the pipeline twice over one input set and byte-compare.
  const fs::path dir = g_work_dir / "c7";
  write_simulation(dir / "sim", simulate(spec));
  write_simulation(dir / "sim_twin", simulate(spec));
  PipelineConfig cfg;
  cfg.seed = 42;
  PipelineInputs inputs;
  inputs.detections_optical = dir / "sim/detections_optical.jsonl";
  inputs.detections_thermal = dir / "sim/detections_thermal.jsonl";
  inputs.annotations = dir / "sim/annotations.jsonl";
  inputs.poses = dir / "sim/poses.csv";
  inputs.calibration = dir / "sim/calibration.yaml";
  inputs.patches = dir / "sim/patches.csv";
  run_pipeline(cfg, inputs, dir / "run_a");
  run_pipeline(cfg, inputs, dir / "run_b");

  int compared = 0;
  auto compare_dirs = [&](const fs::path& lhs, const fs::path& rhs) {
    for (const auto& entry : fs::recursive_directory_iterator(lhs)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), lhs);
      const fs::path other = rhs / rel;
      if (!fs::exists(other)) {
        c.expect(false, "missing twin file " + rel.string());
        continue;
      }
      if (read_file(entry.path()) != read_file(other)) {
        c.expect(false, "byte difference in " + rel.string());
      }
      ++compared;
    }
  };
  compare_dirs(dir / "sim", dir / "sim_twin");
  compare_dirs(dir / "run_a", dir / "run_b");
  c.expect(compared >= 12, "too few files compared");
  if (c.ok) c.detail = std::to_string(compared) + " files byte-identical across twin runs";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--data-dir") g_data_dir = argv[i + 1];
  }
  g_work_dir = fs::temp_directory_path() / "aerosar_acceptance";
  fs::remove_all(g_work_dir);
  fs::create_directories(g_work_dir);

  struct Entry {
    int id;
    const char* name;
    double budget_s;
    std::function<Check()> fn;
  };
  const std::vector<Entry> criteria{
      {1, "anchor coverage: custom scales strictly beat standard on sub-anchor boxes", 5.0,
       criterion_anchor_coverage},
      {2, "fusion oracle: exact cross-matches, mean scores, sliding window beats plain IOU", 5.0,
       criterion_fusion_oracle},
      {3, "localization: mm-exact triangulation, 2 m RMS under jitter, area gate", 60.0,
       criterion_localization},
      {4, "particle filter: 1.5 m on 95% of seeds, resampling copy bounds, normalization", 30.0,
       criterion_particle_filter},
      {5, "re-identification: metric self-similarity, mask invariance, revisit identity", 60.0,
       criterion_reid},
      {6, "evaluation: bookkeeping, hand counts, oracle gap, end-to-end miss rates", 60.0,
       criterion_evaluation},
      {7, "determinism: identical seeds give byte-identical pipeline outputs", 60.0,
       criterion_determinism},
  };

  int failures = 0;
  for (const Entry& e : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = e.fn();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > e.budget_s) {
      c.ok = false;
      c.detail = "runtime " + std::to_string(elapsed) + " s over budget";
    }
    std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", e.id, e.name,
                elapsed, c.detail.empty() ? "" : " -- ", c.detail.c_str());
    failures += !c.ok;
  }
  return failures;
}
