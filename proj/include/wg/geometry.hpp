#pragma once

#include <Eigen/Core>

namespace wg {

using Point2 = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace wg
