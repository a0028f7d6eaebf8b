#include "motrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "motrack/error.hpp"

namespace motrack {

Eigen::MatrixXd iou_matrix(std::span<const Box> tracks, std::span<const Box> dets) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tracks.size()),
                      static_cast<Eigen::Index>(dets.size()));
  for (std::size_t m = 0; m < tracks.size(); ++m) {
    for (std::size_t n = 0; n < dets.size(); ++n) {
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = iou(tracks[m], dets[n]);
    }
  }
  return out;
}

namespace {

template <typename Vec>
double top_two_gap(const Vec& v, double epsilon) {
  if (v.size() == 1) {
    return epsilon;
  }
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    if (x > best) {
      second = best;
      best = x;
    } else if (x > second) {
      second = x;
    }
  }
  return std::min(best - second, epsilon);
}

void require_nonempty(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw ContractError(std::string(who) + ": empty appearance matrix");
  }
}

}  // namespace

double z_diff_det(const Eigen::MatrixXd& appearance, Eigen::Index n, double epsilon) {
  require_nonempty(appearance, "z_diff_det");
  if (n < 0 || n >= appearance.cols()) {
    throw ContractError("z_diff_det: column " + std::to_string(n) + " out of range");
  }
  return top_two_gap(appearance.col(n), epsilon);
}

double z_diff_track(const Eigen::MatrixXd& appearance, Eigen::Index m, double epsilon) {
  require_nonempty(appearance, "z_diff_track");
  if (m < 0 || m >= appearance.rows()) {
    throw ContractError("z_diff_track: row " + std::to_string(m) + " out of range");
  }
  return top_two_gap(appearance.row(m), epsilon);
}

Eigen::MatrixXd fuse_costs(const Eigen::MatrixXd& iou, const Eigen::MatrixXd& appearance,
                           const Eigen::MatrixXd& ocm, const AssociationParams& p,
                           bool adaptive_weighting) {
  if (appearance.rows() != iou.rows() || appearance.cols() != iou.cols() ||
      ocm.rows() != iou.rows() || ocm.cols() != iou.cols()) {
    throw ContractError("fuse_costs: matrix shapes differ");
  }
  const Eigen::Index rows = iou.rows();
  const Eigen::Index cols = iou.cols();
  Eigen::MatrixXd out(rows, cols);
  if (rows == 0 || cols == 0) {
    return out;
  }

  Eigen::VectorXd z_track = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd z_det = Eigen::VectorXd::Zero(cols);
  if (adaptive_weighting) {
    for (Eigen::Index m = 0; m < rows; ++m) z_track(m) = z_diff_track(appearance, m, p.epsilon);
    for (Eigen::Index n = 0; n < cols; ++n) z_det(n) = z_diff_det(appearance, n, p.epsilon);
  }
  for (Eigen::Index m = 0; m < rows; ++m) {
    for (Eigen::Index n = 0; n < cols; ++n) {
      const double w = p.a_w + weight_boost(z_track(m), z_det(n));
      out(m, n) = iou(m, n) + w * appearance(m, n) - p.lambda_ocm * ocm(m, n);
    }
  }
  return out;
}

namespace {

// Shortest-augmenting-path Hungarian (potentials form) minimising `cost` for
// rows <= cols. Returns the column assigned to each row.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& score) {
  const Eigen::Index rows = score.rows();
  const Eigen::Index cols = score.cols();
  if (rows == 0 || cols == 0) {
    return std::vector<int>(static_cast<std::size_t>(rows), -1);
  }
  if (!score.allFinite()) {
    throw ContractError("solve_assignment: score matrix contains non-finite values");
  }
  if (rows <= cols) {
    return hungarian_min(-score);
  }
  const std::vector<int> col_to_row = hungarian_min(-score.transpose());
  std::vector<int> row_to_col(static_cast<std::size_t>(rows), -1);
  for (std::size_t c = 0; c < col_to_row.size(); ++c) {
    row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
  }
  return row_to_col;
}

AssignmentResult solve_assignment(const Eigen::MatrixXd& score, const Eigen::MatrixXd& iou,
                                  double iou_floor) {
  if (score.rows() != iou.rows() || score.cols() != iou.cols()) {
    throw ContractError("solve_assignment: score and IoU shapes differ");
  }
  const std::vector<int> row_to_col = max_weight_assignment(score);

  AssignmentResult out;
  std::vector<char> det_used(static_cast<std::size_t>(score.cols()), false);
  for (int r = 0; r < static_cast<int>(row_to_col.size()); ++r) {
    const int c = row_to_col[static_cast<std::size_t>(r)];
    if (c >= 0 && iou(r, c) >= iou_floor) {
      out.matches.emplace_back(r, c);
      det_used[static_cast<std::size_t>(c)] = true;
    } else {
      out.unmatched_tracks.push_back(r);
    }
  }
  for (int c = 0; c < static_cast<int>(det_used.size()); ++c) {
    if (!det_used[static_cast<std::size_t>(c)]) out.unmatched_dets.push_back(c);
  }
  return out;
}

double ocm_cost(std::span<const Box> history, const Box& last_obs, const Box& det) {
  if (history.size() < 2) {
    return 0.0;
  }
  constexpr double kMinLength = 1e-9;
  const Eigen::Vector2d motion = last_obs.center() - history.front().center();
  const Eigen::Vector2d step = det.center() - last_obs.center();
  if (motion.norm() < kMinLength || step.norm() < kMinLength) {
    return 0.0;
  }
  const double cross = motion.x() * step.y() - motion.y() * step.x();
  return std::atan2(std::abs(cross), motion.dot(step));
}

}  // namespace motrack
