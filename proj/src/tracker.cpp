#include "motrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motrack/error.hpp"

namespace motrack {

std::vector<Box> Track::history_boxes() const {
  std::vector<Box> out;
  out.reserve(history.size());
  for (const auto& o : history) out.push_back(o.box);
  return out;
}

TrackerStats& TrackerStats::operator+=(const TrackerStats& o) {
  tracks_created += o.tracks_created;
  primary_matches += o.primary_matches;
  ocr_recoveries += o.ocr_recoveries;
  oos_reupdates += o.oos_reupdates;
  ema_updates += o.ema_updates;
  alpha_sum += o.alpha_sum;
  degenerate_ema += o.degenerate_ema;
  return *this;
}

void TrackerConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("tracker config: " + what); };
  if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0, 1)");
  if (min_hits < 0) fail("min_hits must be >= 0");
  if (max_age < 0) fail("max_age must be >= 0");
  if (!(appearance.alpha_f >= 0.0 && appearance.alpha_f <= 1.0)) fail("alpha_f must lie in [0, 1]");
  if (!(association.a_w >= 0.0)) fail("a_w must be >= 0");
  if (!(association.epsilon > 0.0)) fail("epsilon must be > 0");
  if (!(association.lambda_ocm >= 0.0)) fail("lambda_ocm must be >= 0");
  if (!(association.iou_floor >= 0.0 && association.iou_floor <= 1.0)) {
    fail("iou_floor must lie in [0, 1]");
  }
  if (association.delta_t < 1) fail("delta_t must be >= 1");
}

CameraTransform CmcTable::at(FrameIndex frame) const {
  const auto it = table_.find(frame);
  return it == table_.end() ? CameraTransform::identity() : it->second;
}

namespace {

bool usable(const KalmanState& s) {
  return s.x.allFinite() && s.P.allFinite() && s.x(2) > 0.0 && s.x(3) > 0.0;
}

// Falls back to moving the center only when the corner mapping collapses the
// box (e.g. a 45 degree rotation of a square).
Box move_box(const CameraTransform& t, const Box& b) {
  try {
    return transform_box(t, b);
  } catch (const ContractError&) {
    const Eigen::Vector2d c = transform_point(t, b.center());
    return {c.x() - 0.5 * b.width, c.y() - 0.5 * b.height, b.width, b.height};
  }
}

}  // namespace

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) {
  config_.appearance.sigma = config_.sigma;
  config_.validate();
}

void Tracker::correct_for_camera(const CameraTransform& cmc) {
  if (cmc.is_identity()) {
    return;
  }
  for (auto& t : tracks_) {
    t.kf = apply_cmc(t.kf, cmc);
    t.kf_at_last_obs = apply_cmc(t.kf_at_last_obs, cmc);
    t.last_obs.box = move_box(cmc, t.last_obs.box);
    const Eigen::Vector2d c = transform_point(cmc, {t.last_measurement.x_c, t.last_measurement.y_c});
    t.last_measurement.x_c = c.x();
    t.last_measurement.y_c = c.y();
    for (auto& o : t.history) o.box = move_box(cmc, o.box);
  }
}

void Tracker::associate(std::span<const Detection> dets,
                        std::vector<std::pair<int, int>>& matches,
                        std::vector<int>& unmatched_tracks, std::vector<int>& unmatched_dets) {
  const auto rows = static_cast<Eigen::Index>(tracks_.size());
  const auto cols = static_cast<Eigen::Index>(dets.size());

  std::vector<Box> predicted;
  predicted.reserve(tracks_.size());
  for (const auto& t : tracks_) predicted.push_back(state_to_box(t.kf.measured()));
  std::vector<Box> det_boxes;
  det_boxes.reserve(dets.size());
  for (const auto& d : dets) det_boxes.push_back(d.box);

  const Eigen::MatrixXd ious = iou_matrix(predicted, det_boxes);

  Eigen::MatrixXd appearance = Eigen::MatrixXd::Zero(rows, cols);
  if (config_.appearance_enabled) {
    std::vector<std::optional<Embedding>> te, de;
    for (const auto& t : tracks_) te.push_back(t.embedding);
    for (const auto& d : dets) de.push_back(d.embedding);
    appearance = appearance_cost_matrix(std::span<const std::optional<Embedding>>(te),
                                        std::span<const std::optional<Embedding>>(de));
  }

  Eigen::MatrixXd ocm = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index m = 0; m < rows; ++m) {
    const Track& t = tracks_[static_cast<std::size_t>(m)];
    const std::vector<Box> hist = t.history_boxes();
    for (Eigen::Index n = 0; n < cols; ++n) {
      ocm(m, n) = ocm_cost(hist, t.last_obs.box, det_boxes[static_cast<std::size_t>(n)]);
    }
  }

  const bool adaptive = config_.appearance_enabled && config_.aw_enabled;
  const Eigen::MatrixXd fused = fuse_costs(ious, appearance, ocm, config_.association, adaptive);
  AssignmentResult r = solve_assignment(fused, ious, config_.association.iou_floor);
  matches = std::move(r.matches);
  unmatched_tracks = std::move(r.unmatched_tracks);
  unmatched_dets = std::move(r.unmatched_dets);
  frame_stats_.primary_matches += static_cast<std::int64_t>(matches.size());
}

void Tracker::recover(std::span<const Detection> dets,
                      std::vector<std::pair<int, int>>& matches,
                      std::vector<int>& unmatched_tracks, std::vector<int>& unmatched_dets) {
  if (unmatched_tracks.empty() || unmatched_dets.empty()) {
    return;
  }
  std::vector<Box> last_seen, det_boxes;
  for (int m : unmatched_tracks) last_seen.push_back(tracks_[static_cast<std::size_t>(m)].last_obs.box);
  for (int n : unmatched_dets) det_boxes.push_back(dets[static_cast<std::size_t>(n)].box);

  const Eigen::MatrixXd ious = iou_matrix(last_seen, det_boxes);
  const AssignmentResult r = solve_assignment(ious, ious, config_.association.iou_floor);
  if (r.matches.empty()) {
    return;
  }
  for (const auto& [i, j] : r.matches) {
    matches.emplace_back(unmatched_tracks[static_cast<std::size_t>(i)],
                         unmatched_dets[static_cast<std::size_t>(j)]);
  }
  std::vector<int> still_tracks, still_dets;
  for (int i : r.unmatched_tracks) still_tracks.push_back(unmatched_tracks[static_cast<std::size_t>(i)]);
  for (int j : r.unmatched_dets) still_dets.push_back(unmatched_dets[static_cast<std::size_t>(j)]);
  unmatched_tracks = std::move(still_tracks);
  unmatched_dets = std::move(still_dets);
  frame_stats_.ocr_recoveries += static_cast<std::int64_t>(r.matches.size());
}

void Tracker::apply_match(Track& track, const Detection& det, FrameIndex frame) {
  const StateBox z = box_to_state(det.box);
  if (track.age_since_update > 1) {
    track.kf = oos_reupdate(track.kf_at_last_obs, track.last_measurement, z,
                            track.age_since_update, config_.filter);
    ++frame_stats_.oos_reupdates;
  } else {
    track.kf = update(track.kf, z, config_.filter);
  }
  track.kf_at_last_obs = track.kf;
  track.last_obs = {frame, det.box};
  track.last_measurement = z;
  track.last_score = det.score;
  track.history.push_back(track.last_obs);
  while (track.history.size() > static_cast<std::size_t>(config_.association.delta_t) + 1) {
    track.history.pop_front();
  }
  ++track.hits;
  track.age_since_update = 0;
  if (track.status == TrackStatus::kTentative && track.hits >= config_.min_hits) {
    track.status = TrackStatus::kConfirmed;
  }

  if (config_.appearance_enabled && det.embedding) {
    if (!track.embedding) {
      track.embedding = det.embedding;
    } else {
      const double alpha = config_.da_enabled ? dynamic_alpha(det.score, config_.appearance)
                                              : config_.appearance.alpha_f;
      EmaResult r = ema_update(*track.embedding, *det.embedding, alpha);
      track.embedding = std::move(r.embedding);
      frame_stats_.alpha_sum += alpha;
      ++frame_stats_.ema_updates;
      if (r.degenerate) ++frame_stats_.degenerate_ema;
    }
  }
}

void Tracker::spawn(const Detection& det, FrameIndex frame) {
  Track t;
  t.id = next_id_++;
  const StateBox z = box_to_state(det.box);
  t.kf = initiate(z, config_.filter);
  t.kf_at_last_obs = t.kf;
  if (config_.appearance_enabled) t.embedding = det.embedding;
  t.last_obs = {frame, det.box};
  t.last_measurement = z;
  t.last_score = det.score;
  t.history.push_back(t.last_obs);
  t.hits = 1;
  t.age_since_update = 0;
  t.status = t.hits >= config_.min_hits ? TrackStatus::kConfirmed : TrackStatus::kTentative;
  tracks_.push_back(std::move(t));
  ++frame_stats_.tracks_created;
}

FrameOutput Tracker::step(std::span<const Detection> dets, const CameraTransform& cmc,
                          FrameIndex frame) {
  if (last_frame_ && frame <= *last_frame_) {
    throw ContractError("tracker: frame " + std::to_string(frame) +
                        " does not follow frame " + std::to_string(*last_frame_));
  }
  frame_stats_ = {};

  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const auto& d : dets) {
    if (!d.box.valid()) {
      throw ContractError("tracker: frame " + std::to_string(frame) +
                          " has a detection with non-positive size");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw ContractError("tracker: frame " + std::to_string(frame) +
                          " has a detection score outside [0, 1]");
    }
    if (d.embedding) {
      if (embedding_dim_ && *embedding_dim_ != d.embedding->dim()) {
        throw ContractError("tracker: frame " + std::to_string(frame) + " embedding dimension " +
                            std::to_string(d.embedding->dim()) + " differs from " +
                            std::to_string(*embedding_dim_));
      }
      embedding_dim_ = d.embedding->dim();
    }
    if (d.score >= config_.sigma) kept.push_back(d);
  }
  last_frame_ = frame;

  if (config_.cmc_enabled) {
    correct_for_camera(cmc);
  }

  for (auto& t : tracks_) {
    t.kf = predict(t.kf, config_.filter);
    ++t.age_since_update;
    if (!usable(t.kf)) t.status = TrackStatus::kRemoved;
  }
  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::kRemoved; });

  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_tracks, unmatched_dets;
  if (!tracks_.empty() && !kept.empty()) {
    associate(kept, matches, unmatched_tracks, unmatched_dets);
    recover(kept, matches, unmatched_tracks, unmatched_dets);
  } else {
    for (int n = 0; n < static_cast<int>(kept.size()); ++n) unmatched_dets.push_back(n);
  }

  for (const auto& [m, n] : matches) {
    apply_match(tracks_[static_cast<std::size_t>(m)], kept[static_cast<std::size_t>(n)], frame);
  }
  std::sort(unmatched_dets.begin(), unmatched_dets.end());
  for (int n : unmatched_dets) spawn(kept[static_cast<std::size_t>(n)], frame);

  std::erase_if(tracks_, [&](const Track& t) { return t.age_since_update > config_.max_age; });

  FrameOutput out;
  out.frame = frame;
  for (const auto& t : tracks_) {
    if (t.status != TrackStatus::kConfirmed || t.age_since_update != 0) continue;
    const Box box = config_.report_detections ? t.last_obs.box : state_to_box(t.kf.measured());
    out.entries.push_back({t.id, box, t.last_score});
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });

  stats_ += frame_stats_;
  return out;
}

SequenceResult run_sequence(const TrackerConfig& config, const DetectionStream& dets,
                            const EmbeddingStream* embeddings, const CmcTable* cmc) {
  if (embeddings) {
    for (const auto& [frame, embs] : *embeddings) {
      const auto it = dets.find(frame);
      const std::size_t n = it == dets.end() ? 0 : it->second.size();
      if (embs.size() != n) {
        throw InputError("frame " + std::to_string(frame) + ": " + std::to_string(embs.size()) +
                         " embeddings for " + std::to_string(n) + " detections");
      }
    }
    for (const auto& [frame, ds] : dets) {
      if (!ds.empty() && !embeddings->contains(frame)) {
        throw InputError("frame " + std::to_string(frame) + ": " + std::to_string(ds.size()) +
                         " detections but no embeddings");
      }
    }
  }

  SequenceResult result;
  if (dets.empty()) {
    return result;
  }
  Tracker tracker(config);
  const FrameIndex first = dets.begin()->first;
  const FrameIndex last = dets.rbegin()->first;
  const std::vector<Detection> none;
  for (FrameIndex f = first; f <= last; ++f) {
    const auto it = dets.find(f);
    std::vector<Detection> frame_dets = it == dets.end() ? none : it->second;
    if (embeddings) {
      const auto e = embeddings->find(f);
      if (e != embeddings->end()) {
        for (std::size_t i = 0; i < frame_dets.size(); ++i) frame_dets[i].embedding = e->second[i];
      }
    }
    const CameraTransform t = cmc ? cmc->at(f) : CameraTransform::identity();
    result.frames.push_back(tracker.step(frame_dets, t, f));
  }
  result.stats = tracker.stats();
  return result;
}

}  // namespace motrack
