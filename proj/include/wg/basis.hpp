#pragma once

// Polynomial bases and L2 projections.  Interior spaces use monomials in
// coordinates centered at the element and scaled by its diameter; edge
// spaces use Legendre polynomials in the chart parameter.  Projections on
// curved geometry keep the exact arclength weight, so they are genuine L2
// projections on the physical element or edge.

#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "wg/curve.hpp"
#include "wg/exceptions.hpp"
#include "wg/geometry.hpp"
#include "wg/quadrature.hpp"

namespace wg {

namespace detail {

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace detail

class ElementBasis {
 public:
  ElementBasis() = default;

  ElementBasis(int degree, const Point2& center, double scale)
      : k_(degree), c_(center), h_(scale) {
    if (degree < 0) throw DomainError("element basis: negative degree");
    if (!(scale > 0.0)) throw DomainError("element basis: scale must be positive");
    for (int d = 0; d <= k_; ++d)
      for (int ix = d; ix >= 0; --ix) exps_.emplace_back(ix, d - ix);
  }

  int degree() const { return k_; }
  int dim() const { return static_cast<int>(exps_.size()); }
  const std::vector<std::pair<int, int>>& exponents() const { return exps_; }

  double eval(int i, const Point2& p) const {
    double X = (p.x() - c_.x()) / h_, Y = (p.y() - c_.y()) / h_;
    return detail::ipow(X, exps_[i].first) * detail::ipow(Y, exps_[i].second);
  }

  Vec2 grad(int i, const Point2& p) const {
    double X = (p.x() - c_.x()) / h_, Y = (p.y() - c_.y()) / h_;
    auto [ix, iy] = exps_[i];
    double gx = ix == 0 ? 0.0 : ix * detail::ipow(X, ix - 1) * detail::ipow(Y, iy) / h_;
    double gy = iy == 0 ? 0.0 : iy * detail::ipow(X, ix) * detail::ipow(Y, iy - 1) / h_;
    return Vec2(gx, gy);
  }

  void eval_all(const Point2& p, Eigen::VectorXd& out) const {
    out.resize(dim());
    for (int i = 0; i < dim(); ++i) out[i] = eval(i, p);
  }

  double eval_combo(const Eigen::VectorXd& coef, const Point2& p) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += coef[i] * eval(i, p);
    return s;
  }

  Vec2 grad_combo(const Eigen::VectorXd& coef, const Point2& p) const {
    Vec2 g = Vec2::Zero();
    for (int i = 0; i < dim(); ++i) g += coef[i] * grad(i, p);
    return g;
  }

 private:
  int k_ = 0;
  Point2 c_ = Point2::Zero();
  double h_ = 1.0;
  std::vector<std::pair<int, int>> exps_;
};

/// Legendre basis in the chart parameter of one edge, mapped from [0,|e|]
/// onto [-1,1].
class EdgeBasis {
 public:
  EdgeBasis() = default;

  EdgeBasis(double length, int degree) : length_(length), degree_(degree) {
    if (degree < 0) throw DomainError("edge basis: negative degree");
    if (!(length > 0.0)) throw DomainError("edge basis: length must be positive");
  }

  int degree() const { return degree_; }
  int dim() const { return degree_ + 1; }

  double eval(int i, double that) const {
    double x = 2.0 * that / length_ - 1.0;
    double p0 = 1.0, p1 = x;
    if (i == 0) return p0;
    for (int m = 2; m <= i; ++m) {
      double pm = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = pm;
    }
    return p1;
  }

  void eval_all(double that, Eigen::VectorXd& out) const {
    out.resize(dim());
    for (int i = 0; i < dim(); ++i) out[i] = eval(i, that);
  }

  double eval_combo(const Eigen::VectorXd& coef, double that) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += coef[i] * eval(i, that);
    return s;
  }

 private:
  double length_ = 1.0;
  int degree_ = 0;
};

inline Eigen::MatrixXd element_mass(const ElementBasis& basis, const CurvedTriMap& map,
                                    const TriQuadRule& rule) {
  int nb = basis.dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd vals(nb);
  for (std::size_t qp = 0; qp < rule.nodes.size(); ++qp) {
    const Point2& nq = rule.nodes[qp];
    double det = map.jacobian(nq.x(), nq.y());
    if (!(det > 0.0)) throw GeometryError("element_mass: map not orientation preserving");
    basis.eval_all(map.map(nq.x(), nq.y()), vals);
    M.noalias() += (rule.weights[qp] * det) * vals * vals.transpose();
  }
  return M;
}

/// Coefficients of the L2 projection of f onto the element polynomial
/// space.
template <class F>
Eigen::VectorXd project_element(const ElementBasis& basis, const CurvedTriMap& map,
                                const TriQuadRule& rule, F&& f) {
  int nb = basis.dim();
  Eigen::MatrixXd M = element_mass(basis, map, rule);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXd vals(nb);
  for (std::size_t qp = 0; qp < rule.nodes.size(); ++qp) {
    const Point2& nq = rule.nodes[qp];
    Point2 x = map.map(nq.x(), nq.y());
    double det = map.jacobian(nq.x(), nq.y());
    basis.eval_all(x, vals);
    rhs.noalias() += (rule.weights[qp] * det * f(x)) * vals;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw GeometryError("project_element: mass matrix not positive definite");
  return llt.solve(rhs);
}

inline Eigen::MatrixXd edge_mass(const EdgeChart& chart, const EdgeBasis& basis,
                                 const QuadRule1D& rule) {
  int nb = basis.dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd vals(nb);
  double L = chart.length();
  for (int i = 0; i < rule.nodes.size(); ++i) {
    double that = rule.nodes[i] * L;
    basis.eval_all(that, vals);
    M.noalias() += (rule.weights[i] * L * chart.jacobian(that)) * vals * vals.transpose();
  }
  return M;
}

/// Coefficients of the L2(e) projection of a scalar field given in
/// physical coordinates; the arclength weight rides along, so this is the
/// projection on the physical edge even when the chart is curved.
template <class F>
Eigen::VectorXd project_edge(const EdgeChart& chart, const EdgeBasis& basis,
                             const QuadRule1D& rule, F&& f) {
  int nb = basis.dim();
  Eigen::MatrixXd M = edge_mass(chart, basis, rule);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
  Eigen::VectorXd vals(nb);
  double L = chart.length();
  for (int i = 0; i < rule.nodes.size(); ++i) {
    double that = rule.nodes[i] * L;
    basis.eval_all(that, vals);
    rhs.noalias() += (rule.weights[i] * L * chart.jacobian(that) * f(chart.eval(that))) * vals;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw GeometryError("project_edge: mass matrix not positive definite");
  return llt.solve(rhs);
}

/// Componentwise L2 projection of a vector field onto the element space.
template <class G>
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_element_vector(
    const ElementBasis& basis, const CurvedTriMap& map, const TriQuadRule& rule,
    G&& field) {
  auto fx = [&](const Point2& p) { return field(p).x(); };
  auto fy = [&](const Point2& p) { return field(p).y(); };
  return {project_element(basis, map, rule, fx), project_element(basis, map, rule, fy)};
}

}  // namespace wg
