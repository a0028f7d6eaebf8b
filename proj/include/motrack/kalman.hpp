#pragma once

#include <Eigen/Dense>

#include "motrack/geometry.hpp"

namespace motrack {

using Vector7d = Eigen::Matrix<double, 7, 1>;
using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Matrix4x7d = Eigen::Matrix<double, 4, 7>;

/// State [x_c, y_c, a, s, vx_c, vy_c, va] and its covariance.
struct KalmanState {
  Vector7d x = Vector7d::Zero();
  Matrix7d P = Matrix7d::Identity();

  StateBox measured() const { return {x(0), x(1), x(2), x(3)}; }
};

/// Constant-velocity model with dt = 1 frame. Defaults follow the SORT noise
/// convention: unit measurement noise on position, 10 on area and aspect,
/// and process noise scaled down on the velocity terms.
struct FilterParams {
  Matrix7d F;
  Matrix4x7d H;
  Matrix7d Q;
  Eigen::Matrix4d R;
  /// Covariance assigned to a freshly initiated track.
  Matrix7d P0;

  FilterParams();
};

/// New track state from a first measurement; velocities start at zero.
KalmanState initiate(const StateBox& z, const FilterParams& params);

/// x <- F x, P <- F P F' + Q. The area velocity is zeroed first when it would
/// drive the area non-positive.
KalmanState predict(const KalmanState& state, const FilterParams& params);

/// Standard correction with measurement z. Throws ContractError if the
/// innovation covariance is singular.
KalmanState update(const KalmanState& state, const StateBox& z, const FilterParams& params);

/// Camera-motion correction of the center/velocity entries and the two
/// matching covariance blocks. Area, aspect and their covariance are left
/// alone; cross-covariance blocks are not rotated.
KalmanState apply_cmc(const KalmanState& state, const CameraTransform& t);

/// Online smoothing after a gap: replays predict+update through `gap`
/// measurements linearly interpolated from `last_obs` (exclusive) to
/// `new_obs` (inclusive), starting from `state`, the posterior at the time
/// of `last_obs`.
KalmanState oos_reupdate(const KalmanState& state, const StateBox& last_obs,
                         const StateBox& new_obs, int gap, const FilterParams& params);

/// The k-th of `gap` virtual measurements used by oos_reupdate (k = 1..gap).
StateBox interpolate_observation(const StateBox& last_obs, const StateBox& new_obs, int k,
                                 int gap);

}  // namespace motrack
