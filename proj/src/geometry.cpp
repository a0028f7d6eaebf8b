#include "motrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motrack/error.hpp"

namespace motrack {

bool CameraTransform::is_identity() const {
  return M == Eigen::Matrix2d::Identity() && T == Eigen::Vector2d::Zero();
}

CameraTransform compose(const CameraTransform& second, const CameraTransform& first) {
  CameraTransform out;
  out.M = second.M * first.M;
  out.T = second.M * first.T + second.T;
  return out;
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  // Areas from the same corner differences as the overlap, so iou(a, a) == 1.
  const double area_a = (a.right() - a.left) * (a.bottom() - a.top);
  const double area_b = (b.right() - b.left) * (b.bottom() - b.top);
  const double inter = iw * ih;
  return inter / (area_a + area_b - inter);
}

Eigen::Vector2d transform_point(const CameraTransform& t, const Eigen::Vector2d& p) {
  return t.M * p + t.T;
}

Box transform_box(const CameraTransform& t, const Box& b) {
  if (t.is_identity()) {
    return b;
  }
  const Eigen::Vector2d p1 = transform_point(t, {b.left, b.top});
  const Eigen::Vector2d p2 = transform_point(t, {b.right(), b.bottom()});
  const double x1 = std::min(p1.x(), p2.x());
  const double x2 = std::max(p1.x(), p2.x());
  const double y1 = std::min(p1.y(), p2.y());
  const double y2 = std::max(p1.y(), p2.y());
  Box out{x1, y1, x2 - x1, y2 - y1};
  if (!out.valid()) {
    throw ContractError("transform_box: transformed box is degenerate");
  }
  return out;
}

StateBox box_to_state(const Box& b) {
  return {b.left + 0.5 * b.width, b.top + 0.5 * b.height, b.width * b.height,
          b.width / b.height};
}

Box state_to_box(const StateBox& sb) {
  if (!(sb.area > 0.0) || !(sb.aspect > 0.0)) {
    throw ContractError("state_to_box: area and aspect ratio must be positive (a=" +
                        std::to_string(sb.area) + ", s=" + std::to_string(sb.aspect) + ")");
  }
  const double w = std::sqrt(sb.area * sb.aspect);
  const double h = std::sqrt(sb.area / sb.aspect);
  return {sb.x_c - 0.5 * w, sb.y_c - 0.5 * h, w, h};
}

}  // namespace motrack
