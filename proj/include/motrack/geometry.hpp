#pragma once

#include <Eigen/Dense>

namespace motrack {

/// Axis-aligned box in top-left/size form (pixels). Width and height must be
/// positive.
struct Box {
  double left = 0.0;
  double top = 0.0;
  double width = 1.0;
  double height = 1.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
  Eigen::Vector2d center() const { return {left + 0.5 * width, top + 0.5 * height}; }
  bool valid() const { return width > 0.0 && height > 0.0; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Measurement layout of the filter: center, area, aspect ratio (w / h).
struct StateBox {
  double x_c = 0.0;
  double y_c = 0.0;
  double area = 1.0;
  double aspect = 1.0;

  Eigen::Vector4d vector() const { return {x_c, y_c, area, aspect}; }
  static StateBox from_vector(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }

  friend bool operator==(const StateBox&, const StateBox&) = default;
};

/// Similarity transform p -> M p + T mapping previous-frame pixel
/// coordinates into current-frame coordinates.
struct CameraTransform {
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  Eigen::Vector2d T = Eigen::Vector2d::Zero();

  static CameraTransform identity() { return {}; }
  bool is_identity() const;
};

/// Transform equivalent to applying `first`, then `second`.
CameraTransform compose(const CameraTransform& second, const CameraTransform& first);

double iou(const Box& a, const Box& b);

Eigen::Vector2d transform_point(const CameraTransform& t, const Eigen::Vector2d& p);

/// Maps the upper-left and lower-right corners and returns the axis-aligned
/// box spanning them. Throws ContractError when the result collapses.
Box transform_box(const CameraTransform& t, const Box& b);

StateBox box_to_state(const Box& b);
/// Throws ContractError for non-positive area or aspect ratio.
Box state_to_box(const StateBox& sb);

}  // namespace motrack
