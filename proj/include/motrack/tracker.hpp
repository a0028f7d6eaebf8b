#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "motrack/appearance.hpp"
#include "motrack/association.hpp"
#include "motrack/geometry.hpp"
#include "motrack/kalman.hpp"

namespace motrack {

using FrameIndex = std::int64_t;

struct Detection {
  Box box;
  double score = 1.0;
  std::optional<Embedding> embedding;
};

enum class TrackStatus { kTentative, kConfirmed, kRemoved };

struct Observation {
  FrameIndex frame = 0;
  Box box;
};

struct Track {
  int id = 0;
  KalmanState kf;
  /// Posterior at the time of the last observation; the starting point for
  /// online smoothing once the track is re-found. Kept in current-frame
  /// coordinates like everything else.
  KalmanState kf_at_last_obs;
  std::optional<Embedding> embedding;
  Observation last_obs;
  /// Last measurement in filter layout. Under camera motion only its center
  /// is moved; area and aspect keep their observed values.
  StateBox last_measurement;
  double last_score = 0.0;
  /// Most recent observations, oldest first, at most delta_t + 1 entries.
  std::deque<Observation> history;
  int hits = 0;
  int age_since_update = 0;
  TrackStatus status = TrackStatus::kTentative;

  std::vector<Box> history_boxes() const;
};

struct TrackerConfig {
  double sigma = 0.4;
  int min_hits = 3;
  int max_age = 30;
  AssociationParams association;
  AppearanceParams appearance;
  FilterParams filter;
  bool cmc_enabled = true;
  bool appearance_enabled = true;
  /// Adaptive weighting of the appearance term.
  bool aw_enabled = true;
  /// Confidence-dependent EMA factor; with it off the EMA uses alpha_f.
  bool da_enabled = true;
  /// Report the matched detection box instead of the filter posterior.
  bool report_detections = false;

  /// Throws ContractError for out-of-range values.
  void validate() const;
};

struct FrameOutputEntry {
  int track_id = 0;
  Box box;
  double score = 0.0;
};

struct FrameOutput {
  FrameIndex frame = 0;
  std::vector<FrameOutputEntry> entries;
};

/// Per-frame association bookkeeping; summed over a run for reporting.
struct TrackerStats {
  std::int64_t tracks_created = 0;
  std::int64_t primary_matches = 0;
  std::int64_t ocr_recoveries = 0;
  std::int64_t oos_reupdates = 0;
  std::int64_t ema_updates = 0;
  double alpha_sum = 0.0;
  std::int64_t degenerate_ema = 0;

  double mean_alpha() const { return ema_updates > 0 ? alpha_sum / ema_updates : 0.0; }
  TrackerStats& operator+=(const TrackerStats& o);
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig config);

  /// Processes one frame. Frames must arrive in strictly increasing order.
  FrameOutput step(std::span<const Detection> dets, const CameraTransform& cmc,
                   FrameIndex frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }
  const TrackerStats& stats() const { return stats_; }
  const TrackerStats& last_frame_stats() const { return frame_stats_; }

 private:
  void correct_for_camera(const CameraTransform& cmc);
  void associate(std::span<const Detection> dets, std::vector<std::pair<int, int>>& matches,
                 std::vector<int>& unmatched_tracks, std::vector<int>& unmatched_dets);
  void recover(std::span<const Detection> dets, std::vector<std::pair<int, int>>& matches,
               std::vector<int>& unmatched_tracks, std::vector<int>& unmatched_dets);
  void apply_match(Track& track, const Detection& det, FrameIndex frame);
  void spawn(const Detection& det, FrameIndex frame);

  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<FrameIndex> last_frame_;
  std::optional<Eigen::Index> embedding_dim_;
  TrackerStats stats_;
  TrackerStats frame_stats_;
};

using DetectionStream = std::map<FrameIndex, std::vector<Detection>>;
using EmbeddingStream = std::map<FrameIndex, std::vector<Embedding>>;

/// Per-frame camera transforms; frames without an entry map to identity.
class CmcTable {
 public:
  void set(FrameIndex frame, const CameraTransform& t) { table_[frame] = t; }
  CameraTransform at(FrameIndex frame) const;
  const std::map<FrameIndex, CameraTransform>& entries() const { return table_; }
  bool empty() const { return table_.empty(); }

 private:
  std::map<FrameIndex, CameraTransform> table_;
};

struct SequenceResult {
  std::vector<FrameOutput> frames;
  TrackerStats stats;
};

/// Runs a fresh tracker over every frame from the first to the last key of
/// `dets` (frames without detections are processed as empty). Embeddings, if
/// given, are joined to detections by their order within each frame; a
/// frame whose counts disagree is reported by number.
SequenceResult run_sequence(const TrackerConfig& config, const DetectionStream& dets,
                            const EmbeddingStream* embeddings = nullptr,
                            const CmcTable* cmc = nullptr);

}  // namespace motrack
