#pragma once

#include <string>
#include <vector>

#include "aerosar/box.hpp"

namespace aerosar {

enum class Posture { upright, sitting, lying };

std::string to_string(Posture p);
Posture posture_from_string(const std::string& s);

struct Annotation {
  int frame = 0;
  BoundingBox bbox;
  int human_id = 0;
  Posture posture = Posture::upright;
  bool occluded = false;
};

struct EvalOptions {
  double iou_threshold = 0.5;
  /// Occluded boxes are evaluated by default; when excluded they turn into
  /// ignore regions (detections matching them are neither TP nor FP).
  bool exclude_occluded = false;
};

enum class DetVerdict { tp, fp, ignored };

struct FrameMatchStats {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<bool> gt_matched;
  std::vector<bool> gt_ignored;
  std::vector<DetVerdict> det_verdict;  // per detection, input order
};

/// Greedy matching: detections in descending score order each take the
/// unmatched ground-truth box of highest IOU above the threshold.
FrameMatchStats match_frame(const std::vector<Detection>& detections,
                            const std::vector<Annotation>& annotations,
                            const EvalOptions& opts = {});

struct FrameData {
  std::vector<Detection> detections;
  std::vector<Annotation> annotations;
};

struct CurvePoint {
  double threshold = 0.0;
  double fppi = 0.0;
  double miss_rate = 0.0;
};

struct EvalCurve {
  std::vector<CurvePoint> points;  // ordered by ascending threshold
  double log_average_miss_rate = 0.0;
};

/// Score sweep -> (fppi, miss rate) pairs plus the log-average miss rate
/// over 9 geometrically spaced fppi reference points in [0.01, 1].
/// Throws EmptyGroundTruth.
EvalCurve fppi_missrate_curve(const std::vector<FrameData>& frames,
                              const std::vector<double>& thresholds,
                              const EvalOptions& opts = {});

/// Ascending list of every distinct detection score, prefixed with 0.
std::vector<double> score_thresholds(const std::vector<FrameData>& frames);

/// Fraction of annotated human ids without a single true positive anywhere
/// in the sequence, at the given score threshold. Throws EmptyGroundTruth.
double per_id_missrate(const std::vector<FrameData>& frames, double score_threshold,
                       const EvalOptions& opts = {});

struct SizeBucket {
  double area_lo = 0.0;  // bucket covers [area_lo, area_lo + bin_width)
  int tp = 0;
  int fn = 0;
};

/// Ground-truth boxes bucketed by pixel area with per-bucket TP/FN counts at
/// the given score threshold. Buckets are sorted by area and sparse.
std::vector<SizeBucket> size_histogram(const std::vector<FrameData>& frames,
                                       double bin_width_px2, double score_threshold,
                                       const EvalOptions& opts = {});

}  // namespace aerosar
