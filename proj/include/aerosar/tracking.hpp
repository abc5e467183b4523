#pragma once

#include <optional>
#include <vector>

#include "aerosar/box.hpp"

namespace aerosar {

struct TrackerConfig {
  double downsample_factor = 2.0;  // association runs on half-sampled coordinates
  double iou_gate = 0.3;
  int max_missed_frames = 8;       // ~2 s at 4 Hz
  double frame_rate_hz = 4.0;
};

enum class TrackState { active, lost };

struct TrackObservation {
  int frame = 0;
  BoundingBox bbox;
  double score = 0.0;
  double timestamp = 0.0;
};

struct Track {
  int human_id = 0;
  std::vector<TrackObservation> observations;  // frame indices strictly increasing
  TrackState state = TrackState::active;
  int frames_since_seen = 0;
};

/// Frame-to-frame identity: greedy IOU association between constant-velocity
/// predictions of the stored tracks and the incoming detections. One store
/// per sequence; ids are never reused within a run.
class TrackStore {
 public:
  explicit TrackStore(TrackerConfig cfg = {}) : cfg_(cfg) {}

  /// Associate one frame's detections. Returns the human id assigned to each
  /// detection, in input order. Throws NonMonotonicFrame.
  std::vector<int> step(const std::vector<Detection>& detections, int frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  int created() const { return next_id_ - 1; }

 private:
  BoundingBox predict(const Track& t, int frame) const;

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::optional<int> last_frame_;
  int next_id_ = 1;
};

}  // namespace aerosar
