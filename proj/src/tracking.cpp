#include "aerosar/tracking.hpp"

#include <algorithm>

#include "aerosar/errors.hpp"

namespace aerosar {

BoundingBox TrackStore::predict(const Track& t, int frame) const {
  const auto& obs = t.observations;
  const BoundingBox last = downsample_bbox(obs.back().bbox, cfg_.downsample_factor);
  double vx = 0.0, vy = 0.0;
  if (obs.size() >= 2) {
    const BoundingBox prev =
        downsample_bbox(obs[obs.size() - 2].bbox, cfg_.downsample_factor);
    const double df = obs.back().frame - obs[obs.size() - 2].frame;
    vx = (last.center_x() - prev.center_x()) / df;
    vy = (last.center_y() - prev.center_y()) / df;
  }
  const double steps = frame - obs.back().frame;
  return BoundingBox::from_center(last.center_x() + vx * steps, last.center_y() + vy * steps,
                                  last.width(), last.height());
}

std::vector<int> TrackStore::step(const std::vector<Detection>& detections, int frame) {
  if (last_frame_ && frame <= *last_frame_) throw NonMonotonicFrame();
  last_frame_ = frame;

  // Frames without detections produce no step() call, so staleness must be
  // re-checked against the incoming frame index before association.
  for (Track& t : tracks_) {
    if (t.state != TrackState::active) continue;
    t.frames_since_seen = frame - t.observations.back().frame;
    if (t.frames_since_seen >= cfg_.max_missed_frames) t.state = TrackState::lost;
  }

  struct Candidate {
    double iou;
    int track;  // index into tracks_
    int det;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
    if (tracks_[ti].state != TrackState::active) continue;
    const BoundingBox predicted = predict(tracks_[ti], frame);
    for (std::size_t di = 0; di < detections.size(); ++di) {
      const double v =
          iou(predicted, downsample_bbox(detections[di].bbox, cfg_.downsample_factor));
      if (v >= cfg_.iou_gate) candidates.push_back({v, static_cast<int>(ti), static_cast<int>(di)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.track != b.track) return a.track < b.track;
    return a.det < b.det;
  });

  std::vector<int> assignment(detections.size(), -1);
  std::vector<bool> track_used(tracks_.size(), false);
  for (const Candidate& c : candidates) {
    if (track_used[c.track] || assignment[c.det] >= 0) continue;
    track_used[c.track] = true;
    assignment[c.det] = c.track;
  }

  std::vector<int> ids(detections.size(), 0);
  for (std::size_t di = 0; di < detections.size(); ++di) {
    const Detection& d = detections[di];
    int ti = assignment[di];
    if (ti < 0) {
      Track t;
      t.human_id = next_id_++;
      tracks_.push_back(std::move(t));
      ti = static_cast<int>(tracks_.size() - 1);
    }
    tracks_[ti].observations.push_back({frame, d.bbox, d.score, d.t});
    ids[di] = tracks_[ti].human_id;
  }

  for (Track& t : tracks_) {
    if (t.state != TrackState::active) continue;
    t.frames_since_seen = frame - t.observations.back().frame;
    if (t.frames_since_seen >= cfg_.max_missed_frames) t.state = TrackState::lost;
  }
  return ids;
}

}  // namespace aerosar
