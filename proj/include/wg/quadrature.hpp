#pragma once

// Gauss-Legendre rules, a collapsed-square triangle rule, and the blended
// map that carries the reference triangle onto elements with one curved
// edge.  All integration in the library funnels through these helpers.

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "wg/curve.hpp"
#include "wg/exceptions.hpp"
#include "wg/geometry.hpp"

namespace wg {

struct QuadRule1D {
  Eigen::VectorXd nodes;    // ascending, on [0,1]
  Eigen::VectorXd weights;  // sum to 1
};

/// n-point Gauss-Legendre rule on [0,1]; exact for polynomials of degree
/// 2n-1.  Supported for 1 <= n <= 64.
inline QuadRule1D gauss_legendre(int n) {
  if (n < 1 || n > 64) throw DomainError("gauss_legendre: n outside [1,64]");
  QuadRule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - t * t) * dp * dp);
    // t is the i-th root from the top; store ascending on [0,1]
    rule.nodes[i] = 0.5 * (1.0 - t);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + t);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

struct TriQuadRule {
  std::vector<Point2> nodes;    // inside the reference triangle (0,0)-(1,0)-(0,1)
  std::vector<double> weights;  // sum to 1/2
  int degree = 0;
};

/// Tensor rule collapsed onto the reference triangle; exact for bivariate
/// polynomials up to the requested degree.  Supported for degree <= 30.
inline TriQuadRule triangle_rule(int degree) {
  if (degree < 1 || degree > 30) throw DomainError("triangle_rule: degree outside [1,30]");
  int m = (degree + 3) / 2;  // one extra order absorbs the collapse factor
  QuadRule1D g = gauss_legendre(m);
  TriQuadRule rule;
  rule.degree = degree;
  rule.nodes.reserve(m * m);
  rule.weights.reserve(m * m);
  for (int j = 0; j < m; ++j) {
    double v = g.nodes[j];
    for (int i = 0; i < m; ++i) {
      double u = g.nodes[i];
      rule.nodes.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - v));
    }
  }
  return rule;
}

/// Map from the reference triangle onto a physical element.  Straight
/// elements get the usual affine map; elements with one curved edge blend
/// the edge chart toward the opposite vertex, so the map restricted to the
/// reference base edge reproduces the chart exactly and the two straight
/// sides stay straight.
class CurvedTriMap {
 public:
  CurvedTriMap() = default;

  static CurvedTriMap affine(const Point2& p0, const Point2& p1, const Point2& p2) {
    CurvedTriMap m;
    m.p0_ = p0;
    m.p1_ = p1;
    m.p2_ = p2;
    if (!(m.straight_det() > 0.0))
      throw GeometryError("curved map: vertices not counterclockwise");
    return m;
  }

  /// The reference base edge eta=0 follows the chart; forward means the
  /// chart start sits at the first local vertex.
  static CurvedTriMap with_curved_base(const EdgeChart& chart, const Point2& apex,
                                       bool forward) {
    CurvedTriMap m;
    m.p0_ = forward ? chart.start() : chart.end();
    m.p1_ = forward ? chart.end() : chart.start();
    m.p2_ = apex;
    m.curved_ = true;
    m.chart_ = chart;
    m.forward_ = forward;
    if (!(m.straight_det() > 0.0))
      throw GeometryError("curved map: chord triangle not counterclockwise");
    return m;
  }

  bool is_affine() const { return !curved_; }
  const Point2& vertex(int i) const { return i == 0 ? p0_ : (i == 1 ? p1_ : p2_); }

  /// Point on the (possibly curved) base edge, s in [0,1] from p0 to p1.
  Point2 base_point(double s) const {
    if (!curved_) return p0_ + s * (p1_ - p0_);
    double L = chart_.length();
    return chart_.eval(forward_ ? s * L : (1.0 - s) * L);
  }

  Vec2 base_tangent(double s) const {
    if (!curved_) return p1_ - p0_;
    double L = chart_.length();
    Vec2 d = chart_.tangent(forward_ ? s * L : (1.0 - s) * L);
    return forward_ ? Vec2(L * d) : Vec2(-L * d);
  }

  Point2 map(double xi, double eta) const {
    if (!curved_) return p0_ + xi * (p1_ - p0_) + eta * (p2_ - p0_);
    if (1.0 - eta < 1e-13) return p2_;
    double s = xi / (1.0 - eta);
    return (1.0 - eta) * base_point(s) + eta * p2_;
  }

  /// det of the map differential; positive on valid elements.
  double jacobian(double xi, double eta) const {
    if (!curved_) return straight_det();
    if (1.0 - eta < 1e-13) eta = 1.0 - 1e-13;
    double s = xi / (1.0 - eta);
    return cross2(base_tangent(s), p2_ - base_point(s));
  }

 private:
  double straight_det() const { return cross2(p1_ - p0_, p2_ - p0_); }

  Point2 p0_ = Point2::Zero(), p1_ = Point2::Zero(), p2_ = Point2::Zero();
  bool curved_ = false;
  EdgeChart chart_;
  bool forward_ = true;
};

template <class F>
double integrate_element(const CurvedTriMap& map, const TriQuadRule& rule, F&& f) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const Point2& n = rule.nodes[q];
    double det = map.jacobian(n.x(), n.y());
    if (!(det > 0.0)) throw GeometryError("integrate_element: map not orientation preserving");
    sum += rule.weights[q] * f(map.map(n.x(), n.y())) * det;
  }
  return sum;
}

/// Integral over the edge of a function of the chart parameter, with the
/// arclength weight J = |F'| included.
template <class G>
double integrate_edge_param(const EdgeChart& chart, const QuadRule1D& rule, G&& g) {
  double L = chart.length();
  double sum = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    double that = rule.nodes[i] * L;
    sum += rule.weights[i] * L * g(that) * chart.jacobian(that);
  }
  return sum;
}

template <class F>
double integrate_edge(const EdgeChart& chart, const QuadRule1D& rule, F&& f) {
  return integrate_edge_param(chart, rule,
                              [&](double that) { return f(chart.eval(that)); });
}

}  // namespace wg
