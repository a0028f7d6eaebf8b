#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "motrack/geometry.hpp"

namespace motrack {

struct AssociationParams {
  /// Global weight on the appearance similarity.
  double a_w = 0.75;
  /// Cap on the per-row/column discriminativeness boost.
  double epsilon = 0.5;
  /// Weight of the momentum-direction penalty.
  double lambda_ocm = 0.2;
  /// Matches with IoU below this are rejected after assignment.
  double iou_floor = 0.3;
  /// Momentum horizon in observations.
  int delta_t = 3;
};

/// Fused score matrix, tracks x detections; higher is better.
struct CostMatrix {
  Eigen::MatrixXd values;
  /// Track id of each row.
  std::vector<int> track_ids;
  /// Detection index of each column.
  std::vector<int> det_indices;
};

struct AssignmentResult {
  /// (row, column) pairs, sorted by row.
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_dets;
};

/// Rows are `tracks`, columns are `dets`.
Eigen::MatrixXd iou_matrix(std::span<const Box> tracks, std::span<const Box> dets);

/// min(best - second best, epsilon) over column n. A single-row matrix has
/// no runner-up and scores epsilon. Throws ContractError on an empty matrix
/// or an out-of-range index.
double z_diff_det(const Eigen::MatrixXd& appearance, Eigen::Index n, double epsilon);
/// Row counterpart of z_diff_det.
double z_diff_track(const Eigen::MatrixXd& appearance, Eigen::Index m, double epsilon);

inline double weight_boost(double z_track, double z_det) { return 0.5 * (z_track + z_det); }

/// C = IoU + (a_w + w_b) * A_c - lambda_ocm * ocm, with w_b taken from the
/// raw appearance matrix. With `adaptive_weighting` off, w_b = 0.
Eigen::MatrixXd fuse_costs(const Eigen::MatrixXd& iou, const Eigen::MatrixXd& appearance,
                           const Eigen::MatrixXd& ocm, const AssociationParams& p,
                           bool adaptive_weighting = true);

/// Maximum-total one-to-one assignment over `score` (Hungarian, rectangular).
/// Every row or column (whichever is fewer) is matched; pairs whose IoU is
/// below `iou_floor` are then moved to the unmatched lists. Throws
/// ContractError on non-finite scores or a shape mismatch.
AssignmentResult solve_assignment(const Eigen::MatrixXd& score, const Eigen::MatrixXd& iou,
                                  double iou_floor);

/// Raw maximum-total assignment without any IoU gate: `row_to_col[i]` is the
/// column of row i, or -1.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& score);

/// Angle in [0, pi] between the track's recent motion (history.front() ->
/// last_obs) and the step last_obs -> det. Returns 0 with fewer than two
/// history entries or when either direction has zero length.
double ocm_cost(std::span<const Box> history, const Box& last_obs, const Box& det);

}  // namespace motrack
