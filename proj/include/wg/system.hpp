#pragma once

// Global system: degree-of-freedom layout with double-valued interface
// traces, strong constraints, assembly, and SPD solvers.
//
// Layout: all element interiors first, then one trace block per edge in
// edge order; interface edges carry a second block immediately after
// their first (side 1 faces region 1, side 2 faces region 2).
//
// Constraints are eliminated by substitution.  Boundary blocks are fixed
// to the projected Dirichlet data.  On interface edges side 2 is slaved
// to side 1 with shift -Qb(g_D), enforcing [[u_b]] = u_b|1 - u_b|2 =
// Qb(g_D) exactly.  Test functions run over the homogeneous version of
// the same constraints (jump-free interface traces), which makes the
// reduced system square and symmetric.
//
// The interface flux datum g_N can be paired once per physical edge
// (consistent with the continuous weak form; the default) or once per
// side, which after test reduction double-counts it.  Both conventions
// are kept because the scheme's own statement is ambiguous on this point
// and the difference only matters when g_N != 0.

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "wg/basis.hpp"
#include "wg/exceptions.hpp"
#include "wg/local_ops.hpp"
#include "wg/mesh.hpp"
#include "wg/numfmt.hpp"
#include "wg/problems.hpp"

namespace wg {

struct DofLayout {
  int nk = 0;  // interior block size
  int nb = 0;  // trace block size
  std::vector<int> edge_offset;   // first trace block per edge
  std::vector<int> edge_offset2;  // second block, interface edges only, else -1
  int interior_total = 0;
  int total = 0;

  static DofLayout build(const Mesh& mesh, const DiscretizationConfig& cfg) {
    DofLayout lo;
    lo.nk = (cfg.k + 1) * (cfg.k + 2) / 2;
    lo.nb = cfg.edge_degree + 1;
    lo.interior_total = static_cast<int>(mesh.elements.size()) * lo.nk;
    lo.edge_offset.resize(mesh.edges.size());
    lo.edge_offset2.assign(mesh.edges.size(), -1);
    int next = lo.interior_total;
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
      lo.edge_offset[e] = next;
      next += lo.nb;
      if (mesh.edges[e].kind == EdgeKind::Interface) {
        lo.edge_offset2[e] = next;
        next += lo.nb;
      }
    }
    lo.total = next;
    return lo;
  }

  int interior_offset(int elem) const { return elem * nk; }

  /// Offset of the trace block seen by `elem` on its local edge `i`.
  int trace_offset(const Mesh& mesh, int elem, int i) const {
    int e = mesh.elements[elem].edge[i];
    const MeshEdge& edge = mesh.edges[e];
    if (edge.kind == EdgeKind::Interface && edge.right == elem)
      return edge_offset2[e];
    return edge_offset[e];
  }

  /// Raw ids of all local coefficients of `elem`, in local order.
  std::vector<int> element_dofs(const Mesh& mesh, int elem) const {
    std::vector<int> gid(nk + 3 * nb);
    for (int p = 0; p < nk; ++p) gid[p] = interior_offset(elem) + p;
    for (int i = 0; i < 3; ++i) {
      int off = trace_offset(mesh, elem, i);
      for (int j = 0; j < nb; ++j) gid[nk + i * nb + j] = off + j;
    }
    return gid;
  }
};

class ConstraintSet {
 public:
  enum class State : unsigned char { Free, Fixed, Slaved };

  void init(int total) {
    state_.assign(total, State::Free);
    value_.assign(total, 0.0);
    master_.assign(total, -1);
    free_index_.assign(total, -1);
    n_free_ = 0;
  }

  void fix(int g, double value) {
    state_[g] = State::Fixed;
    value_[g] = value;
  }

  /// x_g = x_master + shift; the master must stay free.
  void slave(int g, int master, double shift) {
    state_[g] = State::Slaved;
    master_[g] = master;
    value_[g] = shift;
  }

  void number_free() {
    n_free_ = 0;
    for (std::size_t g = 0; g < state_.size(); ++g)
      if (state_[g] == State::Free) free_index_[g] = n_free_++;
  }

  int n_free() const { return n_free_; }
  int size() const { return static_cast<int>(state_.size()); }
  State state(int g) const { return state_[g]; }

  /// Affine resolution x_g = x_free[first] + second, with first = -1 for
  /// fully prescribed dofs.
  std::pair<int, double> resolve(int g) const {
    switch (state_[g]) {
      case State::Free:
        return {free_index_[g], 0.0};
      case State::Fixed:
        return {-1, value_[g]};
      case State::Slaved:
        return {free_index_[master_[g]], value_[g]};
    }
    return {-1, 0.0};
  }

  Eigen::VectorXd reconstruct(const Eigen::VectorXd& xfree) const {
    Eigen::VectorXd x(state_.size());
    for (std::size_t g = 0; g < state_.size(); ++g) {
      auto [i, base] = resolve(g);
      x[g] = base + (i >= 0 ? xfree[i] : 0.0);
    }
    return x;
  }

 private:
  std::vector<State> state_;
  std::vector<double> value_;
  std::vector<int> master_;
  std::vector<int> free_index_;
  int n_free_ = 0;
};

inline ConstraintSet build_constraints(const Mesh& mesh, const DofLayout& layout,
                                       const DiscretizationConfig& cfg,
                                       const QuadSet& quad, const ProblemSpec& prob) {
  ConstraintSet cons;
  cons.init(layout.total);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const MeshEdge& edge = mesh.edges[e];
    const QuadRule1D& rule =
        edge.chart.is_straight() ? quad.edge : quad.edge_curved;
    if (edge.kind == EdgeKind::Boundary) {
      EdgeBasis basis(edge.chart.length(), cfg.edge_degree);
      Eigen::VectorXd c =
          prob.g ? project_edge(edge.chart, basis, rule, prob.g)
                 : Eigen::VectorXd::Zero(layout.nb);
      for (int j = 0; j < layout.nb; ++j) cons.fix(layout.edge_offset[e] + j, c[j]);
    } else if (edge.kind == EdgeKind::Interface) {
      Eigen::VectorXd jump = Eigen::VectorXd::Zero(layout.nb);
      if (prob.g_D) {
        EdgeBasis basis(edge.chart.length(), cfg.edge_degree);
        jump = project_edge(edge.chart, basis, rule, prob.g_D);
      }
      for (int j = 0; j < layout.nb; ++j)
        cons.slave(layout.edge_offset2[e] + j, layout.edge_offset[e] + j, -jump[j]);
    }
  }
  cons.number_free();
  return cons;
}

enum class NeumannConvention { Single, Literal };

struct LinearSystem {
  DofLayout layout;
  ConstraintSet constraints;
  Eigen::SparseMatrix<double> K;  // free x free
  Eigen::VectorXd rhs;            // free
};

inline LinearSystem assemble(const Mesh& mesh, const ProblemSpec& prob,
                             const DiscretizationConfig& cfg,
                             NeumannConvention nc = NeumannConvention::Single) {
  cfg.validate();
  prob.validate();
  QuadSet quad = QuadSet::make(cfg);
  LinearSystem sys;
  sys.layout = DofLayout::build(mesh, cfg);
  sys.constraints = build_constraints(mesh, sys.layout, cfg, quad, prob);
  const ConstraintSet& cons = sys.constraints;

  std::vector<Eigen::Triplet<double>> trips;
  const int nloc = sys.layout.nk + 3 * sys.layout.nb;
  trips.reserve(mesh.elements.size() * nloc * nloc);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cons.n_free());

  for (std::size_t el = 0; el < mesh.elements.size(); ++el) {
    LocalElementOps ops(mesh, static_cast<int>(el), cfg, quad);
    int region = mesh.elements[el].region;
    Eigen::MatrixXd A = ops.stiffness(prob.a_of(region));
    if (cfg.stabilized()) A += ops.stabilization();
    Eigen::VectorXd F = ops.load(prob.f_of(region));
    std::vector<int> gid = sys.layout.element_dofs(mesh, static_cast<int>(el));
    for (int p = 0; p < nloc; ++p) {
      auto [ip, bp] = cons.resolve(gid[p]);
      if (ip < 0) continue;
      rhs[ip] += F[p];
      for (int q = 0; q < nloc; ++q) {
        auto [iq, bq] = cons.resolve(gid[q]);
        double v = A(p, q);
        if (iq >= 0) trips.emplace_back(ip, iq, v);
        if (bq != 0.0) rhs[ip] -= v * bq;
      }
    }
  }

  if (prob.g_N) {
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
      const MeshEdge& edge = mesh.edges[e];
      if (edge.kind != EdgeKind::Interface) continue;
      const QuadRule1D& rule =
          edge.chart.is_straight() ? quad.edge : quad.edge_curved;
      EdgeBasis basis(edge.chart.length(), cfg.edge_degree);
      Eigen::VectorXd m = Eigen::VectorXd::Zero(sys.layout.nb);
      Eigen::VectorXd chi(sys.layout.nb);
      double L = edge.chart.length();
      for (std::size_t qp = 0; qp < rule.nodes.size(); ++qp) {
        double that = rule.nodes[qp] * L;
        double w = rule.weights[qp] * L * edge.chart.jacobian(that);
        basis.eval_all(that, chi);
        m.noalias() += (w * prob.g_N(edge.chart.eval(that))) * chi;
      }
      for (int j = 0; j < sys.layout.nb; ++j) {
        auto [i1, b1] = cons.resolve(sys.layout.edge_offset[e] + j);
        if (i1 >= 0) rhs[i1] += m[j];
        if (nc == NeumannConvention::Literal) {
          auto [i2, b2] = cons.resolve(sys.layout.edge_offset2[e] + j);
          if (i2 >= 0) rhs[i2] += m[j];
        }
      }
    }
  }

  sys.K.resize(cons.n_free(), cons.n_free());
  sys.K.setFromTriplets(trips.begin(), trips.end());
  sys.K.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

enum class SolverMethod { CgJacobi, DenseCholesky, SparseDirect };

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  std::vector<double> history;
};

struct WgSolution {
  Eigen::VectorXd coeffs;  // raw layout, constraints reconstructed
  SolveStats stats;
};

namespace detail {

inline Eigen::VectorXd cg_jacobi(const Eigen::SparseMatrix<double>& K,
                                 const Eigen::VectorXd& b, double tol, int max_iter,
                                 SolveStats& stats) {
  const int n = static_cast<int>(K.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  double bnorm = b.norm();
  if (bnorm == 0.0) {
    stats.iterations = 0;
    stats.rel_residual = 0.0;
    return x;
  }
  Eigen::VectorXd d = K.diagonal();
  if (d.size() == 0 || d.minCoeff() <= 0.0)
    throw SolverError("cg: non-positive diagonal, system not positive definite", {});
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = r.cwiseQuotient(d);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd q = K * p;
    double pq = p.dot(q);
    if (!(pq > 0.0))
      throw SolverError("cg: curvature not positive, system not positive definite",
                        stats.history);
    double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    double rel = r.norm() / bnorm;
    stats.history.push_back(rel);
    if (rel <= tol) {
      stats.iterations = it;
      stats.rel_residual = rel;
      return x;
    }
    z = r.cwiseQuotient(d);
    double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw SolverError("cg: no convergence in " + std::to_string(max_iter) +
                        " iterations",
                    stats.history);
}

}  // namespace detail

inline WgSolution solve(const LinearSystem& sys,
                        SolverMethod method = SolverMethod::CgJacobi,
                        double tol = 1e-12, int max_iter = 0) {
  if (!(tol > 0.0)) throw ConfigError("solve: tolerance must be positive");
  const int n = static_cast<int>(sys.K.rows());
  WgSolution sol;
  Eigen::VectorXd xfree;
  switch (method) {
    case SolverMethod::CgJacobi: {
      if (max_iter <= 0) max_iter = std::max(1000, std::min(3 * n, 200000));
      xfree = detail::cg_jacobi(sys.K, sys.rhs, tol, max_iter, sol.stats);
      break;
    }
    case SolverMethod::DenseCholesky: {
      Eigen::MatrixXd Kd(sys.K);
      Eigen::LLT<Eigen::MatrixXd> llt(Kd);
      if (llt.info() != Eigen::Success)
        throw SolverError("dense solve: matrix not positive definite", {});
      xfree = llt.solve(sys.rhs);
      break;
    }
    case SolverMethod::SparseDirect: {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.K);
      if (ldlt.info() != Eigen::Success)
        throw SolverError("sparse solve: factorization failed", {});
      if (n > 0 && ldlt.vectorD().minCoeff() <= 0.0)
        throw SolverError("sparse solve: matrix not positive definite", {});
      xfree = ldlt.solve(sys.rhs);
      break;
    }
  }
  if (method != SolverMethod::CgJacobi) {
    double bnorm = sys.rhs.norm();
    sol.stats.rel_residual =
        bnorm > 0.0 ? (sys.K * xfree - sys.rhs).norm() / bnorm : 0.0;
  }
  sol.coeffs = sys.constraints.reconstruct(xfree);
  return sol;
}

/// Residual of the variational equations recomputed from local matrices,
/// bypassing the assembled sparse operator: max over free test functions
/// of |a(u_h, phi) - rhs(phi)|.
inline double galerkin_residual(const Mesh& mesh, const ProblemSpec& prob,
                                const DiscretizationConfig& cfg,
                                const LinearSystem& sys, const Eigen::VectorXd& raw,
                                NeumannConvention nc = NeumannConvention::Single) {
  QuadSet quad = QuadSet::make(cfg);
  const ConstraintSet& cons = sys.constraints;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(cons.n_free());
  const int nloc = sys.layout.nk + 3 * sys.layout.nb;
  for (std::size_t el = 0; el < mesh.elements.size(); ++el) {
    LocalElementOps ops(mesh, static_cast<int>(el), cfg, quad);
    int region = mesh.elements[el].region;
    Eigen::MatrixXd A = ops.stiffness(prob.a_of(region));
    if (cfg.stabilized()) A += ops.stabilization();
    Eigen::VectorXd F = ops.load(prob.f_of(region));
    std::vector<int> gid = sys.layout.element_dofs(mesh, static_cast<int>(el));
    Eigen::VectorXd xe(nloc);
    for (int p = 0; p < nloc; ++p) xe[p] = raw[gid[p]];
    Eigen::VectorXd local = A * xe - F;
    for (int p = 0; p < nloc; ++p) {
      auto [ip, bp] = cons.resolve(gid[p]);
      if (ip >= 0) r[ip] += local[p];
    }
  }
  if (prob.g_N) {
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
      const MeshEdge& edge = mesh.edges[e];
      if (edge.kind != EdgeKind::Interface) continue;
      const QuadRule1D& rule =
          edge.chart.is_straight() ? quad.edge : quad.edge_curved;
      EdgeBasis basis(edge.chart.length(), cfg.edge_degree);
      Eigen::VectorXd chi(sys.layout.nb);
      double L = edge.chart.length();
      Eigen::VectorXd m = Eigen::VectorXd::Zero(sys.layout.nb);
      for (std::size_t qp = 0; qp < rule.nodes.size(); ++qp) {
        double that = rule.nodes[qp] * L;
        double w = rule.weights[qp] * L * edge.chart.jacobian(that);
        basis.eval_all(that, chi);
        m.noalias() += (w * prob.g_N(edge.chart.eval(that))) * chi;
      }
      for (int j = 0; j < sys.layout.nb; ++j) {
        auto [i1, b1] = cons.resolve(sys.layout.edge_offset[e] + j);
        if (i1 >= 0) r[i1] -= m[j];
        if (nc == NeumannConvention::Literal) {
          auto [i2, b2] = cons.resolve(sys.layout.edge_offset2[e] + j);
          if (i2 >= 0) r[i2] -= m[j];
        }
      }
    }
  }
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

/// Coordinate-format text dump (row col value, 17 significant digits) of
/// the reduced matrix plus the right-hand side, for external checking.
inline void dump_system(const LinearSystem& sys, const std::string& matrix_path,
                        const std::string& rhs_path) {
  std::FILE* fm = std::fopen(matrix_path.c_str(), "w");
  if (!fm) throw Error("cannot open " + matrix_path);
  for (int k = 0; k < sys.K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, k); it; ++it)
      std::fprintf(fm, "%ld %ld %s\n", static_cast<long>(it.row()),
                   static_cast<long>(it.col()), fmt17(it.value()).c_str());
  std::fclose(fm);
  std::FILE* fr = std::fopen(rhs_path.c_str(), "w");
  if (!fr) throw Error("cannot open " + rhs_path);
  for (int i = 0; i < sys.rhs.size(); ++i)
    std::fprintf(fr, "%s\n", fmt17(sys.rhs[i]).c_str());
  std::fclose(fr);
}

}  // namespace wg
