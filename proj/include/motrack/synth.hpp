#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motrack/tracker.hpp"

namespace motrack::synth {

/// A generated sequence with ground truth. Detections carry their
/// embeddings; `detection_ids` names the ground-truth identity behind each
/// detection, in the same order.
struct Scenario {
  std::string name;
  std::map<int, std::map<FrameIndex, Box>> ground_truth;
  DetectionStream detections;
  std::map<FrameIndex, std::vector<int>> detection_ids;
  std::optional<CmcTable> camera;
  int embedding_dim = 0;

  FrameIndex first_frame() const;
  FrameIndex last_frame() const;
  /// Detections with the embeddings stripped, as read from a detection file.
  DetectionStream bare_detections() const;
  EmbeddingStream embeddings() const;
  /// Ground truth in tracker-output form, score 1.
  std::vector<FrameOutput> ground_truth_frames() const;
};

inline constexpr int kEmbeddingDim = 64;
inline constexpr double kEmbeddingNoise = 0.1;
inline constexpr double kScenarioSigma = 0.4;

/// Targets approach a common point along straight lines, dwell there fully
/// overlapped, then withdraw along the lines they came in on. A motion model
/// sees the same detections as if they had passed through each other; only
/// appearance tells the two readings apart. Scores drop to sigma + 0.05
/// while targets overlap. Each identity has an orthogonal base embedding
/// plus isotropic Gaussian noise of total standard deviation `noise`.
Scenario gen_crossing(std::uint64_t seed, int n_targets = 2, double noise = kEmbeddingNoise,
                      double sigma = kScenarioSigma);

/// Static targets seen by a camera that holds, pans sideways by `amplitude`
/// px/frame, then holds again. Detections are in camera coordinates and
/// `camera` holds the matching per-frame transforms.
/// Throws ContractError unless amplitude > 0.
Scenario gen_pan(std::uint64_t seed, double amplitude = 60.0);

/// Linearly moving targets; target 1 is hidden for `gap` frames mid-sequence
/// and halts while hidden, then carries on along its line.
/// Throws ContractError unless gap >= 2.
Scenario gen_occlusion(std::uint64_t seed, int gap = 3);

/// Names accepted by `generate`.
std::vector<std::string> scenario_names();
/// Default-parameter scenario by name; throws ContractError for an unknown one.
Scenario generate(const std::string& name, std::uint64_t seed);

/// Writes det.txt, emb.txt, gt.txt and, for moving cameras, cmc.txt.
void write_scenario(const Scenario& s, const std::filesystem::path& dir);

/// Simplified association metrics: per-frame matching at IoU >= 0.5 that
/// keeps still-valid correspondences from earlier frames and matches the
/// rest greedily, not the optimal matching of the reference CLEAR tools.
/// IDF1 uses the best one-to-one identity mapping over those matches.
struct AssocMetrics {
  int id_switches = 0;
  double mota_lite = 0.0;
  double idf1_lite = 0.0;
  int gt_boxes = 0;
  int pred_boxes = 0;
  int false_negatives = 0;
  int false_positives = 0;
};

AssocMetrics score(std::span<const FrameOutput> ground_truth, std::span<const FrameOutput> pred);
AssocMetrics score(const Scenario& gt, std::span<const FrameOutput> pred);

}  // namespace motrack::synth
