#pragma once

// Elementwise operators of the weak Galerkin discretisation.
//
// On each element T a discrete function is a pair {v0, vb}: an interior
// polynomial of degree k and an independent trace polynomial of degree
// edge_degree on each of the three edges.  The weak gradient of v is the
// [P_grad_degree]^2 field defined against all test fields psi by
//
//   (grad_w v, psi)_T = -(v0, div psi)_T + <vb, psi.n>_dT,
//
// and the element matrices assembled here are the weighted gradient
// stiffness a_T (grad_w u, grad_w v)_T and the boundary penalty
// rho/h_T <Qb u0 - ub, Qb v0 - vb>_dT with Qb the edgewise L2 projection.
// The standard variant needs the penalty for coercivity.  The enriched
// variant does not, and keeping it would feed its O(h^k) consistency
// defect into an otherwise O(h^{k+2}) scheme, so there the bilinear form
// is the gradient term alone (the penalty matrix stays available for
// diagnostics).
//
// Local coefficient ordering: interior monomial block first, then one
// trace block per local edge.  Trace coefficients always live in the
// edge's own chart parameter, shared by the elements on both sides.

#include <array>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "wg/basis.hpp"
#include "wg/exceptions.hpp"
#include "wg/mesh.hpp"
#include "wg/quadrature.hpp"

namespace wg {

enum class Variant { Standard, Superconvergent };

struct DiscretizationConfig {
  int k = 1;
  int edge_degree = 0;
  int grad_degree = 0;
  Variant variant = Variant::Standard;
  double rho = 1.0;

  static DiscretizationConfig standard(int k, double rho = 1.0) {
    DiscretizationConfig cfg{k, k - 1, k - 1, Variant::Standard, rho};
    cfg.validate();
    return cfg;
  }

  /// Trace and gradient degree k+1: same stencil shape, two extra orders
  /// of accuracy.  Runs penalty-free; see stabilized().
  static DiscretizationConfig superconvergent(int k, double rho = 1.0) {
    DiscretizationConfig cfg{k, k + 1, k + 1, Variant::Superconvergent, rho};
    cfg.validate();
    return cfg;
  }

  /// Whether the bilinear form includes the boundary penalty.
  bool stabilized() const { return variant == Variant::Standard; }

  // Generous margins: curved pullbacks are not polynomial, and coarse
  // interface elements can subtend sizeable arcs.
  int volume_quad_degree() const { return 2 * std::max(k, grad_degree) + 10; }
  int edge_quad_points() const { return std::max({k, edge_degree, grad_degree}) + 8; }

  void validate() const {
    if (k < 1) throw ConfigError("config: k must be at least 1");
    if (edge_degree < 0 || grad_degree < 0)
      throw ConfigError("config: negative trace or gradient degree");
    if (!(rho > 0.0)) throw ConfigError("config: rho must be positive");
    if (volume_quad_degree() > 30)
      throw ConfigError("config: degree too large for the tabulated quadrature");
  }
};

struct QuadSet {
  TriQuadRule vol, vol_curved;
  QuadRule1D edge, edge_curved;

  /// Curved pullbacks are oscillatory, not polynomial, so elements and
  /// edges touching a curve get extra resolution.  Straight elements are
  /// integrated exactly by the base rules either way.
  static QuadSet with(int vol_degree, int edge_points) {
    QuadSet qs;
    qs.vol = triangle_rule(vol_degree);
    qs.vol_curved = triangle_rule(std::min(30, vol_degree + 8));
    qs.edge = gauss_legendre(edge_points);
    qs.edge_curved = gauss_legendre(std::min(64, edge_points + 6));
    return qs;
  }

  static QuadSet make(const DiscretizationConfig& cfg) {
    cfg.validate();
    return with(cfg.volume_quad_degree(), cfg.edge_quad_points());
  }
};

class LocalElementOps {
 public:
  struct EdgeData {
    int edge_id = -1;
    bool is_left = true;
    const EdgeChart* chart = nullptr;
    const QuadRule1D* rule = nullptr;
    EdgeBasis basis;
    Eigen::MatrixXd mass;   // trace Gram, arclength weighted
    Eigen::MatrixXd trace;  // <interior basis, trace basis>_e
    Eigen::LLT<Eigen::MatrixXd> mass_llt;
  };

  LocalElementOps(const Mesh& mesh, int elem, const DiscretizationConfig& cfg,
                  const QuadSet& quad)
      : cfg_(cfg), quad_(&quad) {
    const MeshElement& el = mesh.elements[elem];
    h_ = el.h;
    region_ = el.region;
    nk_ = (cfg.k + 1) * (cfg.k + 2) / 2;
    nb_ = cfg.edge_degree + 1;
    nr_ = (cfg.grad_degree + 1) * (cfg.grad_degree + 2) / 2;
    basis_k_ = ElementBasis(cfg.k, el.centroid, el.h);
    basis_r_ = ElementBasis(cfg.grad_degree, el.centroid, el.h);
    map_ = build_curved_map(mesh, elem);
    vol_ = (el.curved_local >= 0) ? &quad.vol_curved : &quad.vol;

    const int nloc = this->nloc();
    R_ = Eigen::MatrixXd::Zero(2 * nr_, nloc);
    Eigen::MatrixXd Mr = Eigen::MatrixXd::Zero(nr_, nr_);
    Eigen::VectorXd vk(nk_), vr(nr_), gx(nr_), gy(nr_);
    for (std::size_t qp = 0; qp < vol_->nodes.size(); ++qp) {
      const Point2& nq = vol_->nodes[qp];
      double det = map_.jacobian(nq.x(), nq.y());
      if (!(det > 0.0)) throw GeometryError("element map not orientation preserving");
      double w = vol_->weights[qp] * det;
      Point2 x = map_.map(nq.x(), nq.y());
      basis_k_.eval_all(x, vk);
      basis_r_.eval_all(x, vr);
      for (int m = 0; m < nr_; ++m) {
        Vec2 g = basis_r_.grad(m, x);
        gx[m] = g.x();
        gy[m] = g.y();
      }
      Mr.noalias() += w * vr * vr.transpose();
      R_.block(0, 0, nr_, nk_).noalias() -= w * gx * vk.transpose();
      R_.block(nr_, 0, nr_, nk_).noalias() -= w * gy * vk.transpose();
    }
    G_ = Eigen::MatrixXd::Zero(2 * nr_, 2 * nr_);
    G_.topLeftCorner(nr_, nr_) = Mr;
    G_.bottomRightCorner(nr_, nr_) = Mr;

    Eigen::VectorXd chi(nb_);
    for (int i = 0; i < 3; ++i) {
      EdgeData& d = edges_[i];
      d.edge_id = el.edge[i];
      const MeshEdge& edge = mesh.edges[d.edge_id];
      d.is_left = (edge.left == elem);
      d.chart = &edge.chart;
      d.rule = edge.chart.is_straight() ? &quad.edge : &quad.edge_curved;
      double L = edge.chart.length();
      d.basis = EdgeBasis(L, cfg.edge_degree);
      d.mass = Eigen::MatrixXd::Zero(nb_, nb_);
      d.trace = Eigen::MatrixXd::Zero(nb_, nk_);
      const int col0 = nk_ + i * nb_;
      for (std::size_t qe = 0; qe < d.rule->nodes.size(); ++qe) {
        double that = d.rule->nodes[qe] * L;
        double w = d.rule->weights[qe] * L * edge.chart.jacobian(that);
        Point2 x = edge.chart.eval(that);
        Vec2 n = edge.chart.unit_normal(that, d.is_left);
        d.basis.eval_all(that, chi);
        basis_k_.eval_all(x, vk);
        basis_r_.eval_all(x, vr);
        d.mass.noalias() += w * chi * chi.transpose();
        d.trace.noalias() += w * chi * vk.transpose();
        R_.block(0, col0, nr_, nb_).noalias() += (w * n.x()) * vr * chi.transpose();
        R_.block(nr_, col0, nr_, nb_).noalias() += (w * n.y()) * vr * chi.transpose();
      }
      d.mass_llt.compute(d.mass);
      if (d.mass_llt.info() != Eigen::Success)
        throw GeometryError("trace Gram matrix not positive definite");
    }

    Eigen::LLT<Eigen::MatrixXd> gllt(G_);
    if (gllt.info() != Eigen::Success)
      throw GeometryError("weak gradient Gram matrix not positive definite");
    W_ = gllt.solve(R_);

    S_ = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int i = 0; i < 3; ++i) {
      Eigen::MatrixXd De = Eigen::MatrixXd::Zero(nb_, nloc);
      De.leftCols(nk_) = edges_[i].mass_llt.solve(edges_[i].trace);
      De.block(0, nk_ + i * nb_, nb_, nb_) = -Eigen::MatrixXd::Identity(nb_, nb_);
      S_.noalias() += (cfg.rho / h_) * De.transpose() * edges_[i].mass * De;
    }
    S_ = 0.5 * (S_ + S_.transpose()).eval();
  }

  int interior_dim() const { return nk_; }
  int edge_block() const { return nb_; }
  int nloc() const { return nk_ + 3 * nb_; }
  int grad_dim() const { return nr_; }

  /// Coefficients of grad_w v, x component block then y component block.
  const Eigen::MatrixXd& weak_grad() const { return W_; }
  const Eigen::MatrixXd& weak_grad_rhs() const { return R_; }
  const Eigen::MatrixXd& vector_mass() const { return G_; }
  const Eigen::MatrixXd& stabilization() const { return S_; }

  Eigen::MatrixXd stiffness(double a) const {
    Eigen::MatrixXd A = a * (R_.transpose() * W_);
    return 0.5 * (A + A.transpose());
  }

  template <class F>
  Eigen::VectorXd load(F&& f) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nloc());
    Eigen::VectorXd vk(nk_);
    for (std::size_t qp = 0; qp < vol_->nodes.size(); ++qp) {
      const Point2& nq = vol_->nodes[qp];
      double det = map_.jacobian(nq.x(), nq.y());
      Point2 x = map_.map(nq.x(), nq.y());
      basis_k_.eval_all(x, vk);
      rhs.head(nk_).noalias() += (vol_->weights[qp] * det * f(x)) * vk;
    }
    return rhs;
  }

  /// Local coefficients of {Q0 u, Qb u}: interior and edgewise L2
  /// projections of a scalar field.
  template <class F>
  Eigen::VectorXd interpolate(F&& u) const {
    Eigen::VectorXd v(nloc());
    v.head(nk_) = project_element(basis_k_, map_, *vol_, u);
    Eigen::VectorXd chi(nb_);
    for (int i = 0; i < 3; ++i) {
      const EdgeData& d = edges_[i];
      double L = d.chart->length();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb_);
      for (std::size_t qe = 0; qe < d.rule->nodes.size(); ++qe) {
        double that = d.rule->nodes[qe] * L;
        double w = d.rule->weights[qe] * L * d.chart->jacobian(that);
        d.basis.eval_all(that, chi);
        rhs.noalias() += (w * u(d.chart->eval(that))) * chi;
      }
      v.segment(nk_ + i * nb_, nb_) = d.mass_llt.solve(rhs);
    }
    return v;
  }

  const ElementBasis& interior_basis() const { return basis_k_; }
  const ElementBasis& grad_basis() const { return basis_r_; }
  const CurvedTriMap& map() const { return map_; }
  const EdgeData& edge_data(int i) const { return edges_[i]; }
  const QuadSet& quad() const { return *quad_; }
  const TriQuadRule& vol_rule() const { return *vol_; }
  const QuadRule1D& edge_rule(int i) const { return *edges_[i].rule; }
  const DiscretizationConfig& config() const { return cfg_; }
  double elem_h() const { return h_; }
  int region() const { return region_; }

 private:
  DiscretizationConfig cfg_;
  const QuadSet* quad_;
  const TriQuadRule* vol_ = nullptr;
  int nk_ = 0, nb_ = 0, nr_ = 0;
  double h_ = 0.0;
  int region_ = 0;
  ElementBasis basis_k_, basis_r_;
  CurvedTriMap map_;
  std::array<EdgeData, 3> edges_;
  Eigen::MatrixXd R_, G_, W_, S_;
};

struct LocalWeakGradient {
  Eigen::MatrixXd W;  // solved operator: coefficients of grad_w
  Eigen::MatrixXd R;  // right-hand sides of the defining system
  int grad_dim = 0;
  int nloc = 0;
};

inline LocalWeakGradient weak_gradient_operator(const Mesh& mesh, int elem,
                                                const DiscretizationConfig& cfg) {
  QuadSet qs = QuadSet::make(cfg);
  LocalElementOps ops(mesh, elem, cfg, qs);
  return {ops.weak_grad(), ops.weak_grad_rhs(), ops.grad_dim(), ops.nloc()};
}

inline Eigen::MatrixXd local_stiffness(double a, const LocalWeakGradient& wg) {
  Eigen::MatrixXd A = a * (wg.R.transpose() * wg.W);
  return 0.5 * (A + A.transpose());
}

inline Eigen::MatrixXd local_stabilization(const Mesh& mesh, int elem,
                                           const DiscretizationConfig& cfg) {
  QuadSet qs = QuadSet::make(cfg);
  return LocalElementOps(mesh, elem, cfg, qs).stabilization();
}

template <class F>
Eigen::VectorXd local_load(const Mesh& mesh, int elem, const DiscretizationConfig& cfg,
                           F&& f) {
  QuadSet qs = QuadSet::make(cfg);
  return LocalElementOps(mesh, elem, cfg, qs).load(f);
}

}  // namespace wg
