#include "motrack/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "motrack/error.hpp"

namespace motrack {

Embedding Embedding::normalized(Eigen::VectorXd v) {
  if (v.size() == 0) {
    throw InputError("embedding: empty vector");
  }
  if (!v.allFinite()) {
    throw InputError("embedding: non-finite component");
  }
  const double n = v.norm();
  if (!(n > 0.0)) {
    throw InputError("embedding: zero vector cannot be normalized");
  }
  v /= n;
  return Embedding(std::move(v));
}

double dynamic_alpha(double s_det, const AppearanceParams& p) {
  if (s_det < p.sigma) {
    throw ContractError("dynamic_alpha: score " + std::to_string(s_det) +
                        " is below the detection threshold " + std::to_string(p.sigma));
  }
  const double trust = (s_det - p.sigma) / (1.0 - p.sigma);
  // lerp is exact at both ends: 1 at sigma, alpha_f at full confidence.
  return std::lerp(1.0, p.alpha_f, trust);
}

EmaResult ema_update(const Embedding& prev, const Embedding& next, double alpha) {
  if (prev.dim() != next.dim()) {
    throw ContractError("ema_update: embedding dimension mismatch");
  }
  if (alpha == 1.0) {
    return {prev, false};
  }
  if (alpha == 0.0) {
    return {next, false};
  }
  Eigen::VectorXd blend = alpha * prev.values() + (1.0 - alpha) * next.values();
  const double n = blend.norm();
  if (!(n > 1e-12)) {
    return {prev, true};
  }
  return {Embedding::normalized(std::move(blend)), false};
}

namespace {

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw ContractError("appearance_cost_matrix: embedding dimension mismatch (" +
                        std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
  const double c = a.values().dot(b.values()) / (a.values().norm() * b.values().norm());
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

Eigen::MatrixXd appearance_cost_matrix(std::span<const std::optional<Embedding>> tracks,
                                       std::span<const std::optional<Embedding>> dets) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tracks.size()),
                                              static_cast<Eigen::Index>(dets.size()));
  for (std::size_t m = 0; m < tracks.size(); ++m) {
    if (!tracks[m]) continue;
    for (std::size_t n = 0; n < dets.size(); ++n) {
      if (!dets[n]) continue;
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = cosine(*tracks[m], *dets[n]);
    }
  }
  return out;
}

Eigen::MatrixXd appearance_cost_matrix(std::span<const Embedding> tracks,
                                       std::span<const Embedding> dets) {
  std::vector<std::optional<Embedding>> t(tracks.begin(), tracks.end());
  std::vector<std::optional<Embedding>> d(dets.begin(), dets.end());
  return appearance_cost_matrix(std::span<const std::optional<Embedding>>(t),
                                std::span<const std::optional<Embedding>>(d));
}

}  // namespace motrack
