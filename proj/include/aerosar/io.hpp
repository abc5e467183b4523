#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "aerosar/box.hpp"
#include "aerosar/evaluation.hpp"
#include "aerosar/fusion.hpp"
#include "aerosar/geometry.hpp"
#include "aerosar/reid.hpp"

namespace aerosar {

inline constexpr int kSchemaVersion = 1;
inline constexpr char kToolVersion[] = "0.1.0";

/// A detection as it travels through the pipeline files: the core fields
/// plus the per-frame source indices fused records keep so that downstream
/// stages can look up the originating patch.
struct DetectionRecord {
  Detection det;
  std::optional<int> src_optical;
  std::optional<int> src_thermal;
};

void write_detections(const std::filesystem::path& path,
                      const std::vector<DetectionRecord>& records,
                      const std::string& kind = "detections");
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);

/// Number detections within each (frame, spectrum) group in file order,
/// filling src_optical/src_thermal for records that lack them.
void assign_source_indices(std::vector<DetectionRecord>& records);

void write_annotations(const std::filesystem::path& path, const std::vector<Annotation>& annotations);
std::vector<Annotation> read_annotations(const std::filesystem::path& path);

struct LocalizationRecord {
  int frame = 0;
  double t = 0.0;
  int track_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // UTM
  double depth = 0.0;
  double metric_area = 0.0;
  bool kept = true;
  std::optional<Eigen::Vector2d> pf_mean;
  std::optional<int> src_optical;
  std::optional<int> src_thermal;
};

void write_localizations(const std::filesystem::path& path,
                         const std::vector<LocalizationRecord>& records);
std::vector<LocalizationRecord> read_localizations(const std::filesystem::path& path);

struct HumanAssignmentRecord {
  int frame = 0;
  double t = 0.0;
  int track_id = 0;
  int human_id = 0;
  double x = 0.0;
  double y = 0.0;
};

void write_human_assignments(const std::filesystem::path& path,
                             const std::vector<HumanAssignmentRecord>& records);
std::vector<HumanAssignmentRecord> read_human_assignments(const std::filesystem::path& path);

/// Which scene object produced a simulated detection; sidecar data for
/// tests, never read by the pipeline itself.
struct TruthRecord {
  int frame = 0;
  Spectrum spectrum = Spectrum::optical;
  int index = 0;        // within (frame, spectrum)
  std::string source;   // "human:<id>" | "clutter:<k>" | "fp"
};

void write_truth(const std::filesystem::path& path, const std::vector<TruthRecord>& records);
std::vector<TruthRecord> read_truth(const std::filesystem::path& path);

// Pose CSV: timestamp,tx,ty,tz,qw,qx,qy,qz in UTM.
void write_poses_csv(const std::filesystem::path& path, const std::vector<Pose>& poses);
std::vector<Pose> read_poses_csv(const std::filesystem::path& path);

/// Nearest pose by timestamp within the tolerance; poses must be sorted.
const Pose* find_pose(const std::vector<Pose>& poses, double t, double tolerance);

struct Calibration {
  CameraIntrinsics optical;
  CameraIntrinsics thermal;
  RigExtrinsics rig;  // thermal <- optical
};

void write_calibration(const std::filesystem::path& path, const Calibration& calib);
Calibration read_calibration(const std::filesystem::path& path);

/// Patch histograms keyed by (frame, spectrum, index-within-frame), stored
/// as sparse CSV rows frame,spectrum,index,h,s,value.
using PatchKey = std::tuple<int, Spectrum, int>;
using PatchHistograms = std::map<PatchKey, ColorHistogram>;

void write_patch_histograms(const std::filesystem::path& path, const PatchHistograms& hists,
                            int hue_bins = kDefaultHueBins, int sat_bins = kDefaultSatBins);
PatchHistograms read_patch_histograms(const std::filesystem::path& path);

/// Decode an RGB8 PNG (other PNG layouts are converted on the fly).
Patch read_png(const std::filesystem::path& path);

}  // namespace aerosar
