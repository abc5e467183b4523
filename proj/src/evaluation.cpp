#include "aerosar/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "aerosar/errors.hpp"

namespace aerosar {

std::string to_string(Posture p) {
  switch (p) {
    case Posture::upright: return "upright";
    case Posture::sitting: return "sitting";
    case Posture::lying: return "lying";
  }
  return "upright";
}

Posture posture_from_string(const std::string& s) {
  if (s == "upright") return Posture::upright;
  if (s == "sitting") return Posture::sitting;
  if (s == "lying") return Posture::lying;
  throw SchemaError("posture", "unknown value '" + s + "'");
}

FrameMatchStats match_frame(const std::vector<Detection>& detections,
                            const std::vector<Annotation>& annotations,
                            const EvalOptions& opts) {
  FrameMatchStats stats;
  stats.gt_matched.assign(annotations.size(), false);
  stats.gt_ignored.assign(annotations.size(), false);
  stats.det_verdict.assign(detections.size(), DetVerdict::fp);
  for (std::size_t g = 0; g < annotations.size(); ++g) {
    stats.gt_ignored[g] = opts.exclude_occluded && annotations[g].occluded;
  }

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });

  for (std::size_t di : order) {
    double best = 0.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < annotations.size(); ++g) {
      if (stats.gt_ignored[g] || stats.gt_matched[g]) continue;
      const double v = iou(detections[di].bbox, annotations[g].bbox);
      if (v >= opts.iou_threshold && v > best) {
        best = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      stats.gt_matched[best_gt] = true;
      stats.det_verdict[di] = DetVerdict::tp;
      ++stats.tp;
      continue;
    }
    // Ignore regions may absorb any number of detections.
    bool on_ignored = false;
    for (std::size_t g = 0; g < annotations.size() && !on_ignored; ++g) {
      on_ignored = stats.gt_ignored[g] &&
                   iou(detections[di].bbox, annotations[g].bbox) >= opts.iou_threshold;
    }
    if (on_ignored) {
      stats.det_verdict[di] = DetVerdict::ignored;
    } else {
      ++stats.fp;
    }
  }

  for (std::size_t g = 0; g < annotations.size(); ++g) {
    if (!stats.gt_ignored[g] && !stats.gt_matched[g]) ++stats.fn;
  }
  return stats;
}

namespace {

std::vector<Detection> above_threshold(const std::vector<Detection>& dets, double threshold) {
  std::vector<Detection> out;
  for (const Detection& d : dets) {
    if (d.score >= threshold) out.push_back(d);
  }
  return out;
}

int countable_gt(const std::vector<FrameData>& frames, const EvalOptions& opts) {
  int total = 0;
  for (const FrameData& f : frames) {
    for (const Annotation& a : f.annotations) {
      if (!(opts.exclude_occluded && a.occluded)) ++total;
    }
  }
  return total;
}

}  // namespace

std::vector<double> score_thresholds(const std::vector<FrameData>& frames) {
  std::set<double> scores{0.0};
  for (const FrameData& f : frames) {
    for (const Detection& d : f.detections) scores.insert(d.score);
  }
  return {scores.begin(), scores.end()};
}

EvalCurve fppi_missrate_curve(const std::vector<FrameData>& frames,
                              const std::vector<double>& thresholds, const EvalOptions& opts) {
  if (frames.empty()) throw EmptyGroundTruth();
  const int total_gt = countable_gt(frames, opts);
  if (total_gt == 0) throw EmptyGroundTruth();

  std::vector<double> sorted_thresholds = thresholds;
  std::sort(sorted_thresholds.begin(), sorted_thresholds.end());

  EvalCurve curve;
  for (double t : sorted_thresholds) {
    int fp = 0, fn = 0;
    for (const FrameData& f : frames) {
      const FrameMatchStats stats =
          match_frame(above_threshold(f.detections, t), f.annotations, opts);
      fp += stats.fp;
      fn += stats.fn;
    }
    CurvePoint p;
    p.threshold = t;
    p.fppi = static_cast<double>(fp) / static_cast<double>(frames.size());
    p.miss_rate = static_cast<double>(fn) / static_cast<double>(total_gt);
    curve.points.push_back(p);
  }

  // Log-average miss rate over 9 geometrically spaced fppi points in
  // [1e-2, 1]: for each reference take the miss rate at the largest fppi
  // not exceeding it, or 1 when the curve never gets that low.
  double log_sum = 0.0;
  for (int j = 0; j < 9; ++j) {
    const double ref = std::pow(10.0, -2.0 + 0.25 * j);
    double mr = 1.0;
    double best_fppi = -1.0;
    for (const CurvePoint& p : curve.points) {
      if (p.fppi <= ref && p.fppi > best_fppi) {
        best_fppi = p.fppi;
        mr = p.miss_rate;
      } else if (p.fppi == best_fppi) {
        mr = std::min(mr, p.miss_rate);
      }
    }
    log_sum += std::log(std::max(mr, 1e-10));
  }
  curve.log_average_miss_rate = std::exp(log_sum / 9.0);
  return curve;
}

double per_id_missrate(const std::vector<FrameData>& frames, double score_threshold,
                       const EvalOptions& opts) {
  std::set<int> all_ids;
  std::set<int> detected_ids;
  for (const FrameData& f : frames) {
    const FrameMatchStats stats =
        match_frame(above_threshold(f.detections, score_threshold), f.annotations, opts);
    for (std::size_t g = 0; g < f.annotations.size(); ++g) {
      if (stats.gt_ignored[g]) continue;
      all_ids.insert(f.annotations[g].human_id);
      if (stats.gt_matched[g]) detected_ids.insert(f.annotations[g].human_id);
    }
  }
  if (all_ids.empty()) throw EmptyGroundTruth();
  const int missed = static_cast<int>(all_ids.size() - detected_ids.size());
  return static_cast<double>(missed) / static_cast<double>(all_ids.size());
}

std::vector<SizeBucket> size_histogram(const std::vector<FrameData>& frames,
                                       double bin_width_px2, double score_threshold,
                                       const EvalOptions& opts) {
  std::map<long, SizeBucket> buckets;
  for (const FrameData& f : frames) {
    const FrameMatchStats stats =
        match_frame(above_threshold(f.detections, score_threshold), f.annotations, opts);
    for (std::size_t g = 0; g < f.annotations.size(); ++g) {
      if (stats.gt_ignored[g]) continue;
      const long idx = static_cast<long>(f.annotations[g].bbox.area() / bin_width_px2);
      SizeBucket& b = buckets[idx];
      b.area_lo = idx * bin_width_px2;
      if (stats.gt_matched[g]) ++b.tp;
      else ++b.fn;
    }
  }
  std::vector<SizeBucket> out;
  out.reserve(buckets.size());
  for (const auto& [idx, bucket] : buckets) out.push_back(bucket);
  return out;
}

}  // namespace aerosar
