#pragma once

// Error measurement against a known exact solution: the two weighted norms
// reported in the convergence tables, the discrete energy norm, the trace
// seminorm, rate extraction, and an independent residual check of the
// discrete error identity
//
//   a(Q_h u - u_h, v) = s(Q_h u, v) + l1(u, v) + l2(u, v)
//
// over all jump-free test functions v (the s term is present exactly when
// the bilinear form carries the penalty, i.e. for the standard variant),
// with
//
//   l1(u, v) = sum_T <(a grad u - a Q_h grad u) . n, v0 - vb>_dT,
//   l2(u, v) = sum_T <Qb u - u, a grad_w v . n>_dT.
//
// l2 vanishes on straight edges because grad_w v restricted to such an
// edge lies in the trace space Qb projects onto; the residual check keeps
// the pieces separate so that can be asserted directly.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wg/local_ops.hpp"
#include "wg/mesh.hpp"
#include "wg/numfmt.hpp"
#include "wg/problems.hpp"
#include "wg/system.hpp"

namespace wg {

struct ErrorReport {
  int level = 0;
  int ndof = 0;  // raw coefficients, interface traces counted per side
  double h = 0.0;
  double err_l2a = 0.0;      // || Q0 u - u0 ||_{0,a}
  double err_grad_a2 = 0.0;  // || grad_w(Q_h u - u_h) ||_{0,a^2}
  double triple_bar = 0.0;   // sqrt(a(e_h, e_h)), e_h = Q_h u - u_h
  double edge_norm = 0.0;    // (sum_T h_T ||e_b||^2_dT)^{1/2}
};

/// Raw coefficients of {Q0 u, Qb u} with the correct branch of the exact
/// solution on each element and interface side.
inline Eigen::VectorXd wg_interpolant(const Mesh& mesh, const ProblemSpec& prob,
                                      const DiscretizationConfig& cfg) {
  if (!prob.has_exact()) throw ConfigError("interpolant needs the exact solution");
  QuadSet quad = QuadSet::make(cfg);
  DofLayout layout = DofLayout::build(mesh, cfg);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.total);
  for (int el = 0; el < mesh.n_elements(); ++el) {
    LocalElementOps ops(mesh, el, cfg, quad);
    int region = mesh.elements[el].region;
    Eigen::VectorXd loc =
        ops.interpolate([&](const Point2& p) { return prob.u_exact(region, p); });
    auto gid = layout.element_dofs(mesh, el);
    for (std::size_t p = 0; p < gid.size(); ++p) x[gid[p]] = loc[p];
  }
  return x;
}

/// All four error norms of a computed solution in one sweep.  When
/// element_l2 is given it receives the per-element weighted L2 error (the
/// heat-map quantity); its squares sum to err_l2a^2.
inline ErrorReport compute_errors(const Mesh& mesh, const ProblemSpec& prob,
                                  const DiscretizationConfig& cfg,
                                  const Eigen::VectorXd& raw, int level = 0,
                                  std::vector<double>* element_l2 = nullptr) {
  if (!prob.has_exact()) throw ConfigError("error norms need the exact solution");
  QuadSet quad = QuadSet::make(cfg);
  DofLayout layout = DofLayout::build(mesh, cfg);
  if (raw.size() != layout.total)
    throw ConfigError("error norms: coefficient vector does not match the layout");

  ErrorReport rep;
  rep.level = level;
  rep.ndof = layout.total;
  rep.h = mesh.max_h;

  double l2a2 = 0.0, grad2 = 0.0, energy2 = 0.0, edge2 = 0.0;
  const int nk = layout.nk, nb = layout.nb;
  Eigen::VectorXd vk(nk);
  if (element_l2) element_l2->assign(mesh.n_elements(), 0.0);
  for (int el = 0; el < mesh.n_elements(); ++el) {
    LocalElementOps ops(mesh, el, cfg, quad);
    int region = mesh.elements[el].region;
    double a = prob.a_of(region);
    Eigen::VectorXd q =
        ops.interpolate([&](const Point2& p) { return prob.u_exact(region, p); });
    auto gid = layout.element_dofs(mesh, el);
    Eigen::VectorXd e(q.size());
    for (std::size_t p = 0; p < gid.size(); ++p) e[p] = q[p] - raw[gid[p]];

    const TriQuadRule& vol = ops.vol_rule();
    double cell2 = 0.0;
    for (std::size_t qp = 0; qp < vol.nodes.size(); ++qp) {
      const Point2& nq = vol.nodes[qp];
      double w = vol.weights[qp] * ops.map().jacobian(nq.x(), nq.y());
      ops.interior_basis().eval_all(ops.map().map(nq.x(), nq.y()), vk);
      double val = vk.dot(e.head(nk));
      cell2 += w * a * val * val;
    }
    l2a2 += cell2;
    if (element_l2) (*element_l2)[el] = std::sqrt(cell2);

    Eigen::VectorXd c = ops.weak_grad() * e;
    grad2 += a * a * c.dot(ops.vector_mass() * c);
    Eigen::MatrixXd B = ops.stiffness(a);
    if (cfg.stabilized()) B += ops.stabilization();
    energy2 += e.dot(B * e);

    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd eb = e.segment(nk + i * nb, nb);
      edge2 += ops.elem_h() * eb.dot(ops.edge_data(i).mass * eb);
    }
  }
  rep.err_l2a = std::sqrt(l2a2);
  rep.err_grad_a2 = std::sqrt(grad2);
  rep.triple_bar = std::sqrt(std::max(0.0, energy2));
  rep.edge_norm = std::sqrt(edge2);
  return rep;
}

inline double error_L2_weighted(const Mesh& mesh, const ProblemSpec& prob,
                                const DiscretizationConfig& cfg,
                                const Eigen::VectorXd& raw) {
  return compute_errors(mesh, prob, cfg, raw).err_l2a;
}

inline double error_wg_weighted(const Mesh& mesh, const ProblemSpec& prob,
                                const DiscretizationConfig& cfg,
                                const Eigen::VectorXd& raw) {
  return compute_errors(mesh, prob, cfg, raw).err_grad_a2;
}

/// Discrete energy norm sqrt(a(v, v)) of an arbitrary coefficient vector.
inline double triple_bar_norm(const Mesh& mesh, const ProblemSpec& prob,
                              const DiscretizationConfig& cfg,
                              const Eigen::VectorXd& raw) {
  QuadSet quad = QuadSet::make(cfg);
  DofLayout layout = DofLayout::build(mesh, cfg);
  double energy2 = 0.0;
  for (int el = 0; el < mesh.n_elements(); ++el) {
    LocalElementOps ops(mesh, el, cfg, quad);
    double a = prob.a_of(mesh.elements[el].region);
    auto gid = layout.element_dofs(mesh, el);
    Eigen::VectorXd v(gid.size());
    for (std::size_t p = 0; p < gid.size(); ++p) v[p] = raw[gid[p]];
    Eigen::MatrixXd B = ops.stiffness(a);
    if (cfg.stabilized()) B += ops.stabilization();
    energy2 += v.dot(B * v);
  }
  return std::sqrt(std::max(0.0, energy2));
}

/// Trace seminorm (sum_T h_T ||vb||^2_dT)^{1/2}; interior edges count once
/// per adjacent element.
inline double edge_seminorm(const Mesh& mesh, const DiscretizationConfig& cfg,
                            const Eigen::VectorXd& raw) {
  QuadSet quad = QuadSet::make(cfg);
  DofLayout layout = DofLayout::build(mesh, cfg);
  double edge2 = 0.0;
  const int nk = layout.nk, nb = layout.nb;
  for (int el = 0; el < mesh.n_elements(); ++el) {
    LocalElementOps ops(mesh, el, cfg, quad);
    auto gid = layout.element_dofs(mesh, el);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd vb(nb);
      for (int j = 0; j < nb; ++j) vb[j] = raw[gid[nk + i * nb + j]];
      edge2 += ops.elem_h() * vb.dot(ops.edge_data(i).mass * vb);
    }
  }
  return std::sqrt(edge2);
}

struct ErrorEquationReport {
  double residual = 0.0;  // max |a(e_h, v) - s - l1 - l2| over test functions
  double lhs_inf = 0.0;
  double stab_inf = 0.0;
  double l1_inf = 0.0;
  double l2_inf = 0.0;
  double scale() const { return 1.0 + lhs_inf + stab_inf + l1_inf + l2_inf; }
};

/// Evaluates both sides of the error identity for every jump-free test
/// function, given a solved coefficient vector.  The identity is exact in
/// the continuum; discretely it holds to quadrature accuracy, so the
/// residual must track the quadrature tolerance, not the mesh size.
inline ErrorEquationReport check_error_equation(const Mesh& mesh,
                                                const ProblemSpec& prob,
                                                const DiscretizationConfig& cfg,
                                                const Eigen::VectorXd& raw) {
  if (!prob.has_exact()) throw ConfigError("error identity needs the exact gradient");
  QuadSet quad = QuadSet::make(cfg);
  DofLayout layout = DofLayout::build(mesh, cfg);
  ConstraintSet cons = build_constraints(mesh, layout, cfg, quad, prob);

  const int nfree = cons.n_free();
  Eigen::VectorXd lhs = Eigen::VectorXd::Zero(nfree);
  Eigen::VectorXd stab = Eigen::VectorXd::Zero(nfree);
  Eigen::VectorXd l1 = Eigen::VectorXd::Zero(nfree);
  Eigen::VectorXd l2 = Eigen::VectorXd::Zero(nfree);

  const int nk = layout.nk, nb = layout.nb;
  const int nloc = nk + 3 * nb;
  for (int el = 0; el < mesh.n_elements(); ++el) {
    LocalElementOps ops(mesh, el, cfg, quad);
    int region = mesh.elements[el].region;
    double a = prob.a_of(region);
    auto u = [&](const Point2& p) { return prob.u_exact(region, p); };
    auto du = [&](const Point2& p) { return prob.grad_exact(region, p); };

    Eigen::VectorXd q = ops.interpolate(u);
    auto gid = layout.element_dofs(mesh, el);
    Eigen::VectorXd e(nloc);
    for (int p = 0; p < nloc; ++p) e[p] = q[p] - raw[gid[p]];

    Eigen::MatrixXd B = ops.stiffness(a);
    if (cfg.stabilized()) B += ops.stabilization();
    Eigen::VectorXd lhs_loc = B * e;
    Eigen::VectorXd stab_loc = cfg.stabilized()
                                   ? Eigen::VectorXd(ops.stabilization() * q)
                                   : Eigen::VectorXd(Eigen::VectorXd::Zero(nloc));

    auto [cx, cy] =
        project_element_vector(ops.grad_basis(), ops.map(), ops.vol_rule(), du);
    const Eigen::MatrixXd& W = ops.weak_grad();
    const int nr = ops.grad_dim();

    Eigen::VectorXd l1_loc = Eigen::VectorXd::Zero(nloc);
    Eigen::VectorXd l2_loc = Eigen::VectorXd::Zero(nloc);
    Eigen::VectorXd vk(nk), vr(nr), chi(nb);
    for (int i = 0; i < 3; ++i) {
      const auto& d = ops.edge_data(i);
      const QuadRule1D& rule = ops.edge_rule(i);
      double L = d.chart->length();
      Eigen::VectorXd qb = q.segment(nk + i * nb, nb);
      for (std::size_t qe = 0; qe < rule.nodes.size(); ++qe) {
        double that = rule.nodes[qe] * L;
        double w = rule.weights[qe] * L * d.chart->jacobian(that);
        Point2 x = d.chart->eval(that);
        Vec2 n = d.chart->unit_normal(that, d.is_left);
        ops.interior_basis().eval_all(x, vk);
        ops.grad_basis().eval_all(x, vr);
        d.basis.eval_all(that, chi);

        double flux_defect = a * (du(x) - Vec2(cx.dot(vr), cy.dot(vr))).dot(n);
        l1_loc.head(nk).noalias() += (w * flux_defect) * vk;
        l1_loc.segment(nk + i * nb, nb).noalias() -= (w * flux_defect) * chi;

        double trace_defect = qb.dot(chi) - u(x);
        // a grad_w(test dof p) . n at x, all p at once
        Eigen::VectorXd gn =
            W.topRows(nr).transpose() * (n.x() * vr) +
            W.bottomRows(nr).transpose() * (n.y() * vr);
        l2_loc.noalias() += (w * a * trace_defect) * gn;
      }
    }

    for (int p = 0; p < nloc; ++p) {
      auto [ip, base] = cons.resolve(gid[p]);
      if (ip < 0) continue;
      lhs[ip] += lhs_loc[p];
      stab[ip] += stab_loc[p];
      l1[ip] += l1_loc[p];
      l2[ip] += l2_loc[p];
    }
  }

  ErrorEquationReport rep;
  if (nfree > 0) {
    rep.residual = (lhs - stab - l1 - l2).cwiseAbs().maxCoeff();
    rep.lhs_inf = lhs.cwiseAbs().maxCoeff();
    rep.stab_inf = stab.cwiseAbs().maxCoeff();
    rep.l1_inf = l1.cwiseAbs().maxCoeff();
    rep.l2_inf = l2.cwiseAbs().maxCoeff();
  }
  return rep;
}

struct RateRow {
  double l2 = std::numeric_limits<double>::quiet_NaN();
  double grad = std::numeric_limits<double>::quiet_NaN();
  double triple = std::numeric_limits<double>::quiet_NaN();
  double edge = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::vector<ErrorReport> rows;
  std::vector<RateRow> rates;  // rates[0] stays undefined
};

/// Rates against the measured mesh sizes; a vanishing error leaves the
/// rate undefined (NaN) rather than inventing a number.
inline ConvergenceTable convergence_rates(const std::vector<ErrorReport>& rows) {
  if (rows.size() < 2) throw ConfigError("rates need at least two levels");
  ConvergenceTable table;
  table.rows = rows;
  table.rates.resize(rows.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const ErrorReport& prev = rows[i - 1];
    const ErrorReport& cur = rows[i];
    if (!(prev.h > 0.0) || !(cur.h > 0.0) || prev.h == cur.h)
      throw ConfigError("rates need strictly decreasing mesh sizes");
    double denom = std::log(prev.h / cur.h);
    auto rate = [&](double e0, double e1) {
      if (!(e0 > 0.0) || !(e1 > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
      return std::log(e0 / e1) / denom;
    };
    table.rates[i].l2 = rate(prev.err_l2a, cur.err_l2a);
    table.rates[i].grad = rate(prev.err_grad_a2, cur.err_grad_a2);
    table.rates[i].triple = rate(prev.triple_bar, cur.triple_bar);
    table.rates[i].edge = rate(prev.edge_norm, cur.edge_norm);
  }
  return table;
}

/// Machine-readable dump; undefined rates become empty fields.
inline std::string to_csv(const ConvergenceTable& table) {
  std::ostringstream out;
  out << "level,ndof,h,errL2a,rateL2,errGrada2,rateGrad,tripleBar,edgeNorm\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt17(v); };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ErrorReport& r = table.rows[i];
    out << r.level << ',' << r.ndof << ',' << fmt17(r.h) << ',' << fmt17(r.err_l2a)
        << ',' << cell(table.rates[i].l2) << ',' << fmt17(r.err_grad_a2) << ','
        << cell(table.rates[i].grad) << ',' << fmt17(r.triple_bar) << ','
        << fmt17(r.edge_norm) << '\n';
  }
  return out.str();
}

}  // namespace wg
