#pragma once

// Interface geometry: parametric curves and the charts that pin a curve
// sub-arc to the arclength-scaled parameter interval [0,|e|] used by all
// edge integrals.
//
// Three curve families cover the meshes we build: straight segments,
// circles, and origin-star curves r(theta) = c0 + sum_n c_n cos(n theta).
// Closed curves are parametrised by angle, segments by t in [0,1].

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wg/exceptions.hpp"
#include "wg/geometry.hpp"
#include "wg/numfmt.hpp"

namespace wg {

enum class CurveKind { Segment, Circle, PolarStar };

class ParametricCurve {
 public:
  ParametricCurve() = default;

  static ParametricCurve segment(const Point2& p0, const Point2& p1) {
    if ((p1 - p0).norm() <= 0.0)
      throw GeometryError("segment: endpoints coincide");
    ParametricCurve c;
    c.kind_ = CurveKind::Segment;
    c.p0_ = p0;
    c.p1_ = p1;
    return c;
  }

  static ParametricCurve circle(const Point2& center, double radius) {
    if (!(radius > 0.0)) throw GeometryError("circle: radius must be positive");
    ParametricCurve c;
    c.kind_ = CurveKind::Circle;
    c.center_ = center;
    c.radius_ = radius;
    return c;
  }

  /// r(theta) = c0 + sum_i harmonics[i].second * cos(harmonics[i].first * theta).
  /// The radius must stay positive on the whole period.
  static ParametricCurve polar_star(const Point2& center, double c0,
                                    std::vector<std::pair<int, double>> harmonics) {
    ParametricCurve c;
    c.kind_ = CurveKind::PolarStar;
    c.center_ = center;
    c.c0_ = c0;
    c.harmonics_ = std::move(harmonics);
    for (const auto& [n, cn] : c.harmonics_)
      if (n <= 0) throw DomainError("polar_star: harmonic index must be positive");
    constexpr int samples = 4096;
    for (int i = 0; i < samples; ++i) {
      double th = 2.0 * M_PI * i / samples;
      if (!(c.polar_radius(th) > 0.0))
        throw GeometryError("polar_star: radius not positive at theta=" + fmt17(th));
    }
    return c;
  }

  CurveKind kind() const { return kind_; }
  bool closed() const { return kind_ != CurveKind::Segment; }
  double param_begin() const { return 0.0; }
  double param_end() const { return closed() ? 2.0 * M_PI : 1.0; }
  const Point2& center() const {
    if (kind_ == CurveKind::Segment) throw DomainError("segment has no center");
    return center_;
  }

  Point2 eval(double t) const {
    switch (kind_) {
      case CurveKind::Segment:
        check_segment_param(t);
        return p0_ + t * (p1_ - p0_);
      case CurveKind::Circle:
        return center_ + radius_ * Vec2(std::cos(t), std::sin(t));
      case CurveKind::PolarStar:
        return center_ + polar_radius(t) * Vec2(std::cos(t), std::sin(t));
    }
    throw DomainError("eval: uninitialised curve");
  }

  Vec2 derivative(double t) const {
    switch (kind_) {
      case CurveKind::Segment:
        check_segment_param(t);
        return p1_ - p0_;
      case CurveKind::Circle:
        return radius_ * Vec2(-std::sin(t), std::cos(t));
      case CurveKind::PolarStar: {
        double r = polar_radius(t), dr = polar_radius_deriv(t);
        double c = std::cos(t), s = std::sin(t);
        return Vec2(dr * c - r * s, dr * s + r * c);
      }
    }
    throw DomainError("derivative: uninitialised curve");
  }

  /// Radius of a closed curve in direction theta from its center.
  double polar_radius(double theta) const {
    switch (kind_) {
      case CurveKind::Circle:
        return radius_;
      case CurveKind::PolarStar: {
        double r = c0_;
        for (const auto& [n, cn] : harmonics_) r += cn * std::cos(n * theta);
        return r;
      }
      default:
        throw DomainError("polar_radius: curve is not closed");
    }
  }

  /// Unsigned distance-like residual of p from the curve; zero on the curve.
  double on_curve_residual(const Point2& p) const {
    switch (kind_) {
      case CurveKind::Segment: {
        Vec2 d = p1_ - p0_;
        double t = (p - p0_).dot(d) / d.squaredNorm();
        t = std::min(1.0, std::max(0.0, t));
        return (p - (p0_ + t * d)).norm();
      }
      case CurveKind::Circle:
        return std::abs((p - center_).norm() - radius_);
      case CurveKind::PolarStar: {
        Vec2 d = p - center_;
        return std::abs(d.norm() - polar_radius(std::atan2(d.y(), d.x())));
      }
    }
    throw DomainError("on_curve_residual: uninitialised curve");
  }

  std::string to_line() const {
    std::ostringstream os;
    switch (kind_) {
      case CurveKind::Segment:
        os << "segment " << fmt17(p0_.x()) << ' ' << fmt17(p0_.y()) << ' '
           << fmt17(p1_.x()) << ' ' << fmt17(p1_.y());
        break;
      case CurveKind::Circle:
        os << "circle " << fmt17(center_.x()) << ' ' << fmt17(center_.y()) << ' '
           << fmt17(radius_);
        break;
      case CurveKind::PolarStar:
        if (center_.x() != 0.0 || center_.y() != 0.0)
          throw MeshError("polar curve serialisation requires an origin center");
        os << "polar " << fmt17(c0_);
        for (const auto& [n, cn] : harmonics_) os << ' ' << n << ' ' << fmt17(cn);
        break;
    }
    return os.str();
  }

  static ParametricCurve from_tokens(const std::vector<std::string>& tok) {
    if (tok.empty()) throw MeshError("curve line: empty");
    if (tok[0] == "segment") {
      if (tok.size() != 5) throw MeshError("curve line: segment needs 4 numbers");
      return segment(Point2(parse_double(tok[1]), parse_double(tok[2])),
                     Point2(parse_double(tok[3]), parse_double(tok[4])));
    }
    if (tok[0] == "circle") {
      if (tok.size() != 4) throw MeshError("curve line: circle needs 3 numbers");
      return circle(Point2(parse_double(tok[1]), parse_double(tok[2])),
                    parse_double(tok[3]));
    }
    if (tok[0] == "polar") {
      if (tok.size() < 2 || tok.size() % 2 != 0)
        throw MeshError("curve line: polar needs c0 then (n, c) pairs");
      std::vector<std::pair<int, double>> harm;
      for (std::size_t i = 2; i + 1 < tok.size(); i += 2)
        harm.emplace_back(static_cast<int>(parse_long(tok[i])), parse_double(tok[i + 1]));
      return polar_star(Point2(0.0, 0.0), parse_double(tok[1]), std::move(harm));
    }
    throw MeshError("curve line: unknown kind '" + tok[0] + "'");
  }

 private:
  void check_segment_param(double t) const {
    if (t < -1e-9 || t > 1.0 + 1e-9)
      throw DomainError("segment parameter outside [0,1]: t=" + fmt17(t));
  }
  double polar_radius_deriv(double theta) const {
    double dr = 0.0;
    for (const auto& [n, cn] : harmonics_) dr -= cn * n * std::sin(n * theta);
    return dr;
  }

  CurveKind kind_ = CurveKind::Segment;
  Point2 p0_ = Point2::Zero(), p1_ = Point2::Zero();
  Point2 center_ = Point2::Zero();
  double radius_ = 0.0;
  double c0_ = 0.0;
  std::vector<std::pair<int, double>> harmonics_;
};

namespace detail {

// 7-point Gauss-Legendre rule on [-1,1], used only for arclength.
inline constexpr double kG7X[7] = {
    -0.94910791234275852, -0.74153118559939444, -0.40584515137739717,
    0.0,
    0.40584515137739717, 0.74153118559939444, 0.94910791234275852};
inline constexpr double kG7W[7] = {
    0.12948496616886969, 0.27970539148927667, 0.38183005050511894,
    0.41795918367346939,
    0.38183005050511894, 0.27970539148927667, 0.12948496616886969};

template <class F>
double gauss7(F&& speed, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) sum += kG7W[i] * speed(mid + half * kG7X[i]);
  return half * sum;
}

template <class F>
double adapt_arclen(F&& speed, double a, double b, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double left = gauss7(speed, a, m);
  double right = gauss7(speed, m, b);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth <= 0)
    throw AccuracyError("arc_length: bisection limit reached on [" + fmt17(a) + "," +
                        fmt17(b) + "]");
  return adapt_arclen(speed, a, m, left, 0.5 * tol, depth - 1) +
         adapt_arclen(speed, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Length of the sub-arc t in [a,b]; absolute error below tol*(1+result).
/// Segments and circles are handled analytically.
inline double arc_length(const ParametricCurve& c, double a, double b,
                         double tol = 1e-12) {
  if (!(b > a)) throw DomainError("arc_length: need a < b");
  if (!(tol > 0.0)) throw DomainError("arc_length: tol must be positive");
  switch (c.kind()) {
    case CurveKind::Segment:
      return (b - a) * (c.eval(1.0) - c.eval(0.0)).norm();
    case CurveKind::Circle:
      return (b - a) * c.polar_radius(0.0);
    case CurveKind::PolarStar: {
      auto speed = [&c](double t) { return c.derivative(t).norm(); };
      double whole = detail::gauss7(speed, a, b);
      double abs_tol = 0.5 * tol * (1.0 + std::abs(whole));
      return detail::adapt_arclen(speed, a, b, whole, abs_tol, 48);
    }
  }
  throw DomainError("arc_length: uninitialised curve");
}

/// A curve sub-arc reparametrised over [0,|e|].  The chart owns a copy of
/// its curve, so it stays valid independently of the mesh that created it.
class EdgeChart {
 public:
  EdgeChart() = default;

  EdgeChart(ParametricCurve curve, double a, double b)
      : curve_(std::move(curve)), a_(a), b_(b) {
    if (!(b_ > a_)) throw DomainError("edge chart: need a < b");
    if (curve_.closed() && b_ - a_ >= 2.0 * M_PI)
      throw DomainError("edge chart: arc covers the whole curve");
    length_ = arc_length(curve_, a_, b_);
    for (int i = 0; i <= 8; ++i) {
      double t = a_ + (b_ - a_) * (i / 8.0);
      if (!(curve_.derivative(t).norm() > 1e-14 * (1.0 + length_)))
        throw GeometryError("edge chart: degenerate curve speed");
    }
  }

  double length() const { return length_; }
  bool is_straight() const { return curve_.kind() == CurveKind::Segment; }
  const ParametricCurve& curve() const { return curve_; }
  double native_begin() const { return a_; }
  double native_end() const { return b_; }

  Point2 eval(double that) const { return curve_.eval(to_native(that)); }
  Point2 start() const { return curve_.eval(a_); }
  Point2 end() const { return curve_.eval(b_); }

  /// dF/d(that); for straight edges the norm is exactly one.
  Vec2 tangent(double that) const {
    return curve_.derivative(to_native(that)) * ((b_ - a_) / length_);
  }

  double jacobian(double that) const { return tangent(that).norm(); }

  /// Unit normal at that.  The left side is the element that traverses the
  /// chart from start to end on its counterclockwise boundary; its outward
  /// normal is the tangent rotated by -pi/2.  The right side gets the exact
  /// negation.
  Vec2 unit_normal(double that, bool left_side) const {
    Vec2 tau = tangent(that);
    tau /= tau.norm();
    Vec2 n(tau.y(), -tau.x());
    return left_side ? n : Vec2(-n.x(), -n.y());
  }

 private:
  double to_native(double that) const {
    double slack = 1e-9 * (1.0 + length_);
    if (that < -slack || that > length_ + slack)
      throw DomainError("edge chart parameter outside [0,|e|]: " + fmt17(that));
    return a_ + (b_ - a_) * (that / length_);
  }

  ParametricCurve curve_;
  double a_ = 0.0, b_ = 1.0;
  double length_ = 0.0;
};

inline EdgeChart build_edge_chart(const ParametricCurve& c, double a, double b) {
  return EdgeChart(c, a, b);
}

}  // namespace wg
