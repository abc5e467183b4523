#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "aerosar/evaluation.hpp"
#include "aerosar/fusion.hpp"
#include "aerosar/geometry.hpp"
#include "aerosar/particle_filter.hpp"
#include "aerosar/reid.hpp"
#include "aerosar/tracking.hpp"

namespace aerosar {

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string fuse_mode = "or";  // "or" | "and"
  WindowMatchOptions window;
  TrackerConfig tracker;
  TriangulationOptions triangulation;
  double t_area = kDefaultAreaThreshold;
  PfConfig pf;
  ReidConfig reid;
  EvalOptions eval;
  double pair_tolerance = 0.125;  // seconds; half the 4 Hz frame period
  bool dump_particles = false;
};

struct PipelineInputs {
  std::filesystem::path detections_optical;
  std::filesystem::path detections_thermal;  // optional; empty = optical only
  std::filesystem::path annotations;         // optional; empty = skip evaluation
  std::filesystem::path poses;
  std::filesystem::path calibration;
  std::filesystem::path patches;             // optional
};

struct PipelineResult {
  int frames = 0;
  int fused_detections = 0;
  int tracks = 0;
  int localized = 0;
  int rejected = 0;
  int humans = 0;
  double log_average_miss_rate = 1.0;
  // operating point: lowest threshold with fppi <= 1
  double operating_threshold = 0.0;
  double operating_fppi = 0.0;
  double box_missrate = 1.0;
  double per_id_missrate = 1.0;
  bool evaluated = false;
};

/// Run fuse -> track -> triangulate -> reject -> particle filter -> reid ->
/// evaluate, writing one artifact file per stage plus a run manifest into
/// out_dir. Deterministic for fixed seed and inputs.
PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineInputs& inputs,
                            const std::filesystem::path& out_dir);

/// Pipeline parameters from a YAML file (missing fields keep defaults).
PipelineConfig load_pipeline_config(const std::filesystem::path& yaml_path);

/// Re-run the configuration and inputs recorded in a manifest.
PipelineResult rerun_from_manifest(const std::filesystem::path& manifest_path,
                                   const std::filesystem::path& out_dir);

}  // namespace aerosar
