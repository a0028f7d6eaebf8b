#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

namespace motrack {

/// Unit-norm appearance descriptor.
class Embedding {
 public:
  Embedding() = default;

  /// L2-normalizes `v`. Throws InputError for zero-norm or non-finite input.
  static Embedding normalized(Eigen::VectorXd v);

  const Eigen::VectorXd& values() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }

  friend bool operator==(const Embedding& a, const Embedding& b) {
    return a.v_.size() == b.v_.size() && a.v_ == b.v_;
  }

 private:
  explicit Embedding(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

struct AppearanceParams {
  double alpha_f = 0.95;
  /// Detection confidence threshold; detections below it never reach the
  /// appearance model.
  double sigma = 0.4;
};

/// Confidence-dependent EMA factor: 1 at s_det = sigma, alpha_f at s_det = 1,
/// linear in between. Throws ContractError when s_det < sigma.
double dynamic_alpha(double s_det, const AppearanceParams& p);

struct EmaResult {
  Embedding embedding;
  /// The blended vector vanished; `embedding` is the previous one unchanged.
  bool degenerate = false;
};

/// normalize(alpha * prev + (1 - alpha) * next).
EmaResult ema_update(const Embedding& prev, const Embedding& next, double alpha);

/// Cosine similarity matrix, tracks x detections. Missing embeddings on either
/// side give zero entries. Throws ContractError on dimension mismatch.
Eigen::MatrixXd appearance_cost_matrix(std::span<const std::optional<Embedding>> tracks,
                                       std::span<const std::optional<Embedding>> dets);
Eigen::MatrixXd appearance_cost_matrix(std::span<const Embedding> tracks,
                                       std::span<const Embedding> dets);

}  // namespace motrack
