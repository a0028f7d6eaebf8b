#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

namespace detail {
inline void search(const Eigen::MatrixXd& s, int row, std::vector<bool>& used, int remaining,
                   double acc, double& best) {
  if (remaining == 0) {
    best = std::max(best, acc);
    return;
  }
  if (s.rows() - row < remaining) return;
  // Either leave this row unassigned (only possible when rows outnumber
  // columns) or assign it to a free column.
  if (s.rows() - row > remaining) search(s, row + 1, used, remaining, acc, best);
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    if (used[c]) continue;
    used[c] = true;
    search(s, row + 1, used, remaining - 1, acc + s(row, c), best);
    used[c] = false;
  }
}
}  // namespace detail

// Maximum total over all injections of size min(rows, cols).
inline double best_total(const Eigen::MatrixXd& s) {
  const int k = static_cast<int>(std::min(s.rows(), s.cols()));
  if (k == 0) return 0.0;
  std::vector<bool> used(s.cols(), false);
  double best = -std::numeric_limits<double>::infinity();
  detail::search(s, 0, used, k, 0.0, best);
  return best;
}

// Every optimal (within tol) full-size matching, as row->col vectors.
inline std::vector<std::vector<int>> optimal_matchings(const Eigen::MatrixXd& s,
                                                       double tol = 1e-9) {
  const double best = best_total(s);
  const int k = static_cast<int>(std::min(s.rows(), s.cols()));
  std::vector<std::vector<int>> out;
  std::vector<int> assign(s.rows(), -1);
  std::vector<bool> used(s.cols(), false);
  auto rec = [&](auto&& self, int row, int remaining, double acc) -> void {
    if (remaining == 0) {
      if (acc >= best - tol) out.push_back(assign);
      return;
    }
    if (s.rows() - row < remaining) return;
    if (s.rows() - row > remaining) self(self, row + 1, remaining, acc);
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      if (used[c]) continue;
      used[c] = true;
      assign[row] = static_cast<int>(c);
      self(self, row + 1, remaining - 1, acc + s(row, c));
      assign[row] = -1;
      used[c] = false;
    }
  };
  if (k > 0) rec(rec, 0, k, 0.0);
  return out;
}

}  // namespace oracle
