#include "motrack/kalman.hpp"

#include <string>

#include "motrack/error.hpp"

namespace motrack {

FilterParams::FilterParams() {
  F = Matrix7d::Identity();
  F(0, 4) = 1.0;
  F(1, 5) = 1.0;
  F(2, 6) = 1.0;

  H = Matrix4x7d::Zero();
  H.leftCols<4>().setIdentity();

  R = Eigen::Vector4d(1.0, 1.0, 10.0, 10.0).asDiagonal();

  Q = Matrix7d::Identity();
  Q.bottomRightCorner<3, 3>() *= 0.01;
  Q(6, 6) *= 0.01;

  P0 = Matrix7d::Identity() * 10.0;
  P0.bottomRightCorner<3, 3>() *= 1000.0;
}

KalmanState initiate(const StateBox& z, const FilterParams& params) {
  KalmanState s;
  s.x.setZero();
  s.x.head<4>() = z.vector();
  s.P = params.P0;
  return s;
}

KalmanState predict(const KalmanState& state, const FilterParams& params) {
  KalmanState out = state;
  if (out.x(2) + out.x(6) <= 0.0) {
    out.x(6) = 0.0;
  }
  out.x = params.F * out.x;
  out.P = params.F * out.P * params.F.transpose() + params.Q;
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

KalmanState update(const KalmanState& state, const StateBox& z, const FilterParams& params) {
  const Eigen::Vector4d innovation = z.vector() - params.H * state.x;
  const Eigen::Matrix4d S = params.H * state.P * params.H.transpose() + params.R;
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(S);
  if (!lu.isInvertible()) {
    throw ContractError("kalman update: singular innovation covariance");
  }
  const Eigen::Matrix<double, 7, 4> K = state.P * params.H.transpose() * lu.inverse();

  KalmanState out;
  out.x = state.x + K * innovation;
  out.P = (Matrix7d::Identity() - K * params.H) * state.P;
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

KalmanState apply_cmc(const KalmanState& state, const CameraTransform& t) {
  if (t.is_identity()) {
    return state;
  }
  KalmanState out = state;
  out.x.segment<2>(0) = t.M * state.x.segment<2>(0) + t.T;
  out.x.segment<2>(4) = t.M * state.x.segment<2>(4);
  out.P.block<2, 2>(0, 0) = t.M * state.P.block<2, 2>(0, 0) * t.M.transpose();
  out.P.block<2, 2>(4, 4) = t.M * state.P.block<2, 2>(4, 4) * t.M.transpose();
  return out;
}

StateBox interpolate_observation(const StateBox& last_obs, const StateBox& new_obs, int k,
                                 int gap) {
  const double f = static_cast<double>(k) / static_cast<double>(gap);
  const Eigen::Vector4d a = last_obs.vector();
  const Eigen::Vector4d b = new_obs.vector();
  return StateBox::from_vector(a + f * (b - a));
}

KalmanState oos_reupdate(const KalmanState& state, const StateBox& last_obs,
                         const StateBox& new_obs, int gap, const FilterParams& params) {
  if (gap < 1) {
    throw ContractError("oos_reupdate: gap must be >= 1, got " + std::to_string(gap));
  }
  KalmanState s = state;
  for (int k = 1; k <= gap; ++k) {
    // The final point is new_obs itself, not a reconstruction of it.
    const StateBox z = (k == gap) ? new_obs : interpolate_observation(last_obs, new_obs, k, gap);
    s = update(predict(s, params), z, params);
  }
  return s;
}

}  // namespace motrack
