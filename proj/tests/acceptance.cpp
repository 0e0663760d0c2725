// Acceptance gate.  Reruns the convergence studies and identity checks
// behind the library's headline claims at desk scale and prints one
// [PASS]/[FAIL] line per criterion; indented lines carry supporting data.
// Exits nonzero if any gated criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "wg/errors.hpp"
#include "wg/study.hpp"

#include "hand_meshes.hpp"
#include "hand_problems.hpp"

namespace {

using namespace wg;
using Clock = std::chrono::steady_clock;

int g_failed = 0;

std::string strf(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void verdict(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

void info(const std::string& line) {
  std::printf("          %s\n", line.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool inside(double rate, double mid, double tol) {
  return std::isfinite(rate) && std::abs(rate - mid) <= tol;
}

std::string range(const std::vector<double>& v) {
  double lo = v.front(), hi = v.front();
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return strf("%.2f..%.2f", lo, hi);
}

ConvergenceTable run_levels(const std::vector<Mesh>& meshes, int lo, int hi,
                            const ProblemSpec& prob, const DiscretizationConfig& cfg,
                            NeumannConvention nc = NeumannConvention::Single) {
  std::vector<ErrorReport> rows;
  for (int L = lo; L <= hi; ++L) {
    LinearSystem sys = assemble(meshes[L], prob, cfg, nc);
    WgSolution sol = solve(sys, SolverMethod::SparseDirect);
    rows.push_back(compute_errors(meshes[L], prob, cfg, sol.coeffs, L));
  }
  return convergence_rates(rows);
}

// 1. Circle interface, superconvergent P1, contrast sweep: finest-pair rates
// land on 4.0 / 3.0 within +-0.4, finest mesh stays under 2e5 raw dofs and
// the whole sweep under ten minutes.
std::vector<double> crit_circle_p1(const std::vector<Mesh>& m, double mesh_secs) {
  auto t0 = Clock::now();
  std::vector<double> l2r, gr, grad_err;
  int ndof = 0;
  for (double mu : {1e-4, 1.0, 1e4}) {
    ConvergenceTable t =
        run_levels(m, 3, 5, example1(mu), DiscretizationConfig::superconvergent(1));
    l2r.push_back(t.rates.back().l2);
    gr.push_back(t.rates.back().grad);
    grad_err.push_back(t.rows.back().err_grad_a2);
    ndof = std::max(ndof, t.rows.back().ndof);
  }
  double el = seconds_since(t0) + mesh_secs;
  bool ok = ndof <= 200000 && el <= 600.0;
  for (double r : l2r) ok = ok && inside(r, 4.0, 0.4);
  for (double r : gr) ok = ok && inside(r, 3.0, 0.4);
  verdict(1, "circle P1 super rates", ok,
          strf("l2 %s in 4.0+-0.4, grad %s in 3.0+-0.4, ndof %d, %.0fs",
               range(l2r).c_str(), range(gr).c_str(), ndof, el));
  return grad_err;
}

// 2. Same setup one degree up: rates 5.0 / 4.0 within +-0.4.
void crit_circle_p2(const std::vector<Mesh>& m) {
  auto t0 = Clock::now();
  std::vector<double> l2r, gr;
  for (double mu : {1e-4, 1.0, 1e4}) {
    ConvergenceTable t =
        run_levels(m, 2, 4, example1(mu), DiscretizationConfig::superconvergent(2));
    l2r.push_back(t.rates.back().l2);
    gr.push_back(t.rates.back().grad);
  }
  bool ok = true;
  for (double r : l2r) ok = ok && inside(r, 5.0, 0.4);
  for (double r : gr) ok = ok && inside(r, 4.0, 0.4);
  verdict(2, "circle P2 super rates", ok,
          strf("l2 %s in 5.0+-0.4, grad %s in 4.0+-0.4, %.0fs", range(l2r).c_str(),
               range(gr).c_str(), seconds_since(t0)));
}

// 3. Flower interface, P1 and P2 superconvergent across a milder contrast
// sweep: 4.0+-0.4 / 3.0+-0.4 and 5.0+-0.5 / 4.2+-0.5.
void crit_flower(const std::vector<Mesh>& m) {
  auto t0 = Clock::now();
  std::vector<double> l2p1, grp1, l2p2, grp2;
  for (double mu : {1e-2, 1.0, 1e2}) {
    ConvergenceTable t1 =
        run_levels(m, 2, 4, example2(mu), DiscretizationConfig::superconvergent(1));
    l2p1.push_back(t1.rates.back().l2);
    grp1.push_back(t1.rates.back().grad);
    ConvergenceTable t2 =
        run_levels(m, 1, 3, example2(mu), DiscretizationConfig::superconvergent(2));
    l2p2.push_back(t2.rates.back().l2);
    grp2.push_back(t2.rates.back().grad);
  }
  bool ok = true;
  for (double r : l2p1) ok = ok && inside(r, 4.0, 0.4);
  for (double r : grp1) ok = ok && inside(r, 3.0, 0.4);
  for (double r : l2p2) ok = ok && inside(r, 5.0, 0.5);
  for (double r : grp2) ok = ok && inside(r, 4.2, 0.5);
  verdict(3, "flower super rates", ok,
          strf("P1 l2 %s grad %s (4.0/3.0 +-0.4), P2 l2 %s grad %s "
               "(5.0+-0.5/4.2+-0.5), %.0fs",
               range(l2p1).c_str(), range(grp1).c_str(), range(l2p2).c_str(),
               range(grp2).c_str(), seconds_since(t0)));
}

// 4. Standard variant on the circle at unit contrast: L2 rate k+1,
// triple-bar rate k, edge seminorm rate k+1, all within +-0.4.
void crit_standard(const std::vector<Mesh>& m) {
  auto t0 = Clock::now();
  bool ok = true;
  std::string det;
  for (int k : {1, 2}) {
    ConvergenceTable t =
        run_levels(m, 0, 4, example1(1.0), DiscretizationConfig::standard(k));
    const RateRow& r = t.rates.back();
    ok = ok && inside(r.l2, k + 1.0, 0.4) && inside(r.triple, k, 0.4) &&
         inside(r.edge, k + 1.0, 0.4);
    det += strf("k=%d l2 %.2f tb %.2f edge %.2f; ", k, r.l2, r.triple, r.edge);
  }
  verdict(4, "circle standard rates", ok,
          det + strf("(k+1/k/k+1 +-0.4), %.0fs", seconds_since(t0)));
}

// 5. The finest-level weighted gradient errors from criterion 1 agree
// across four orders of magnitude in the contrast within a factor 1.5.
void crit_contrast(const std::vector<double>& grad_err) {
  double lo = grad_err.front(), hi = grad_err.front();
  for (double e : grad_err) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  double factor = hi / lo;
  verdict(5, "gradient error vs contrast", factor <= 1.5,
          strf("errors %.4e..%.4e, max/min %.4f <= 1.5", lo, hi, factor));
}

// 6. Piecewise-polynomial exactness on a straight-edge interface mesh with
// constant coefficients: every recorded norm at machine precision.
void crit_exactness() {
  Mesh mesh = wgtest::split_square_mesh();
  struct Combo {
    ProblemSpec prob;
    DiscretizationConfig cfg;
  };
  std::vector<Combo> combos = {
      {wgtest::split_square_linear(), DiscretizationConfig::standard(1)},
      {wgtest::split_square_linear(), DiscretizationConfig::superconvergent(1)},
      {wgtest::split_square_quadratic(), DiscretizationConfig::standard(2)},
      {wgtest::split_square_quadratic(), DiscretizationConfig::superconvergent(2)},
  };
  double worst = 0.0;
  for (const Combo& c : combos) {
    LinearSystem sys = assemble(mesh, c.prob, c.cfg);
    WgSolution sol = solve(sys, SolverMethod::DenseCholesky);
    ErrorReport r = compute_errors(mesh, c.prob, c.cfg, sol.coeffs);
    double scale = 1.0 + wg_interpolant(mesh, c.prob, c.cfg).cwiseAbs().maxCoeff();
    double err = std::max(std::max(r.err_l2a, r.err_grad_a2),
                          std::max(r.triple_bar, r.edge_norm));
    worst = std::max(worst, err / scale);
  }
  verdict(6, "polynomial exactness", worst <= 1e-9,
          strf("worst norm/scale %.2e <= 1e-9 over %zu configs", worst, combos.size()));
}

// 7. The error identity holds for the solved discrete error against every
// jump-free test function, both variants, to quadrature precision.
void crit_identity(const std::vector<Mesh>& m) {
  ProblemSpec prob = example1(1.0);
  bool ok = true;
  std::string det;
  for (auto cfg :
       {DiscretizationConfig::standard(1), DiscretizationConfig::superconvergent(1)}) {
    LinearSystem sys = assemble(m[1], prob, cfg);
    WgSolution sol = solve(sys, SolverMethod::SparseDirect);
    ErrorEquationReport rep = check_error_equation(m[1], prob, cfg, sol.coeffs);
    double rel = rep.residual / rep.scale();
    ok = ok && rel <= 1e-8;
    det += strf("%s %.2e ", cfg.variant == Variant::Standard ? "std" : "super", rel);
  }
  verdict(7, "error identity", ok, det + "<= 1e-8");
}

// Largest residual of the weak-gradient defining identity over the full
// vector test basis, for a random weak function, computed by straight
// quadrature independent of the operator assembly.
double definition_residual(const Mesh& mesh, int el, const DiscretizationConfig& cfg,
                           std::mt19937& rng) {
  QuadSet qs = QuadSet::make(cfg);
  LocalElementOps ops(mesh, el, cfg, qs);
  std::uniform_real_distribution<double> pick(-1.0, 1.0);
  Eigen::VectorXd v(ops.nloc());
  for (int i = 0; i < v.size(); ++i) v[i] = pick(rng);
  Eigen::VectorXd g = ops.weak_grad() * v;
  Eigen::VectorXd v0 = v.head(ops.interior_dim());
  const ElementBasis& gb = ops.grad_basis();
  const ElementBasis& ib = ops.interior_basis();
  const TriQuadRule& vr = ops.vol_rule();
  const int d = ops.grad_dim();
  double worst = 0.0;
  for (int j = 0; j < 2 * d; ++j) {
    const int comp = j < d ? 0 : 1;
    const int mb = j % d;
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t q = 0; q < vr.nodes.size(); ++q) {
      double xr = vr.nodes[q].x(), yr = vr.nodes[q].y();
      double w = vr.weights[q] * ops.map().jacobian(xr, yr);
      Point2 x = ops.map().map(xr, yr);
      double psi = gb.eval(mb, x);
      double gval = 0.0;
      for (int t = 0; t < d; ++t) gval += g[comp == 0 ? t : d + t] * gb.eval(t, x);
      lhs += w * gval * psi;
      Vec2 dpsi = gb.grad(mb, x);
      rhs -= w * ib.eval_combo(v0, x) * (comp == 0 ? dpsi.x() : dpsi.y());
    }
    for (int e = 0; e < 3; ++e) {
      const auto& ed = ops.edge_data(e);
      const QuadRule1D& er = ops.edge_rule(e);
      double L = ed.chart->length();
      Eigen::VectorXd vb = v.segment(ops.interior_dim() + e * ops.edge_block(),
                                     ops.edge_block());
      for (std::size_t q = 0; q < er.nodes.size(); ++q) {
        double that = er.nodes[q] * L;
        double w = er.weights[q] * L * ed.chart->jacobian(that);
        Point2 x = ed.chart->eval(that);
        Vec2 n = ed.chart->unit_normal(that, ed.is_left);
        rhs += w * ed.basis.eval_combo(vb, that) * gb.eval(mb, x) *
               (comp == 0 ? n.x() : n.y());
      }
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst / (1.0 + v.norm());
}

// Largest defect of the three projection orthogonality identities for a
// transcendental field, again by direct quadrature.
double orthogonality_residual(const Mesh& mesh, int el, const DiscretizationConfig& cfg) {
  QuadSet qs = QuadSet::make(cfg);
  LocalElementOps ops(mesh, el, cfg, qs);
  auto u = [](const Point2& p) { return std::exp(0.3 * p.x()) * std::sin(2.0 * p.y()); };
  auto du = [](const Point2& p) {
    double ex = std::exp(0.3 * p.x());
    return Vec2(0.3 * ex * std::sin(2.0 * p.y()), 2.0 * ex * std::cos(2.0 * p.y()));
  };
  Eigen::VectorXd q = ops.interpolate(u);
  Eigen::VectorXd q0 = q.head(ops.interior_dim());
  const ElementBasis& ib = ops.interior_basis();
  const ElementBasis& gb = ops.grad_basis();
  const TriQuadRule& vr = ops.vol_rule();
  auto [cx, cy] = project_element_vector(gb, ops.map(), vr, du);
  double worst = 0.0;
  for (int j = 0; j < ops.interior_dim(); ++j) {
    double r = 0.0;
    for (std::size_t qp = 0; qp < vr.nodes.size(); ++qp) {
      double xr = vr.nodes[qp].x(), yr = vr.nodes[qp].y();
      double w = vr.weights[qp] * ops.map().jacobian(xr, yr);
      Point2 x = ops.map().map(xr, yr);
      r += w * (u(x) - ib.eval_combo(q0, x)) * ib.eval(j, x);
    }
    worst = std::max(worst, std::abs(r));
  }
  for (int e = 0; e < 3; ++e) {
    const auto& ed = ops.edge_data(e);
    const QuadRule1D& er = ops.edge_rule(e);
    double L = ed.chart->length();
    Eigen::VectorXd qb =
        q.segment(ops.interior_dim() + e * ops.edge_block(), ops.edge_block());
    for (int j = 0; j < ops.edge_block(); ++j) {
      double r = 0.0;
      for (std::size_t qp = 0; qp < er.nodes.size(); ++qp) {
        double that = er.nodes[qp] * L;
        double w = er.weights[qp] * L * ed.chart->jacobian(that);
        Point2 x = ed.chart->eval(that);
        r += w * (u(x) - ed.basis.eval_combo(qb, that)) * ed.basis.eval(j, that);
      }
      worst = std::max(worst, std::abs(r));
    }
  }
  for (int j = 0; j < 2 * ops.grad_dim(); ++j) {
    const int comp = j < ops.grad_dim() ? 0 : 1;
    const int mb = j % ops.grad_dim();
    double r = 0.0;
    for (std::size_t qp = 0; qp < vr.nodes.size(); ++qp) {
      double xr = vr.nodes[qp].x(), yr = vr.nodes[qp].y();
      double w = vr.weights[qp] * ops.map().jacobian(xr, yr);
      Point2 x = ops.map().map(xr, yr);
      double proj = gb.eval_combo(comp == 0 ? cx : cy, x);
      double exact = comp == 0 ? du(x).x() : du(x).y();
      r += w * (exact - proj) * gb.eval(mb, x);
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst / (1.0 + q.norm() + cx.norm() + cy.norm());
}

// 8. Weak-gradient definition, projection orthogonality, SPD of the reduced
// system, and positive-definiteness of the energy norm on jump-free
// homogeneous functions.
void crit_local(const std::vector<Mesh>& m) {
  const Mesh& mesh = m[1];
  int curved = -1, straight = -1;
  for (int el = 0; el < mesh.n_elements() && (curved < 0 || straight < 0); ++el) {
    if (mesh.elements[el].curved_local >= 0) {
      if (curved < 0) curved = el;
    } else if (straight < 0) {
      straight = el;
    }
  }
  std::mt19937 rng(2026);
  double def = 0.0, orth = 0.0;
  for (auto cfg : {DiscretizationConfig::standard(2),
                   DiscretizationConfig::superconvergent(1),
                   DiscretizationConfig::superconvergent(2)}) {
    for (int el : {curved, straight}) {
      def = std::max(def, definition_residual(mesh, el, cfg, rng));
      orth = std::max(orth, orthogonality_residual(mesh, el, cfg));
    }
  }

  ProblemSpec prob = example1(1.0);
  double min_d = std::numeric_limits<double>::infinity();
  double tb_gap = 0.0, tb_min = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> pick(-1.0, 1.0);
  for (auto cfg :
       {DiscretizationConfig::standard(1), DiscretizationConfig::superconvergent(1)}) {
    LinearSystem sys = assemble(mesh, prob, cfg);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.K);
    min_d = ldlt.info() == Eigen::Success
                ? std::min(min_d, ldlt.vectorD().minCoeff())
                : -1.0;
    Eigen::VectorXd zero_raw =
        sys.constraints.reconstruct(Eigen::VectorXd::Zero(sys.K.rows()));
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd x(sys.K.rows());
      for (int i = 0; i < x.size(); ++i) x[i] = pick(rng);
      Eigen::VectorXd raw = sys.constraints.reconstruct(x) - zero_raw;
      double tb = triple_bar_norm(mesh, prob, cfg, raw);
      double quad = x.dot(sys.K * x);
      tb_gap = std::max(tb_gap, std::abs(tb * tb - quad) / (1.0 + std::abs(quad)));
      tb_min = std::min(tb_min, tb);
    }
  }
  bool ok = def <= 1e-9 && orth <= 1e-9 && min_d > 0.0 && tb_min > 0.0 &&
            tb_gap <= 1e-8;
  verdict(8, "local identities and definiteness", ok,
          strf("def %.2e orth %.2e <= 1e-9, min pivot %.2e > 0, energy-norm id "
               "%.2e <= 1e-8",
               def, orth, min_d, tb_gap));
}

// 9. Manufactured problem with nonzero value and flux jumps: the default
// interface Neumann convention converges at the standard-variant orders;
// the literal double-counting convention is recorded alongside and must be
// strictly worse (or documented as indistinguishable).
void crit_jump(const std::vector<Mesh>& m) {
  ProblemSpec prob = manufactured_jump(2.0);
  auto cfg = DiscretizationConfig::standard(1);
  ConvergenceTable single = run_levels(m, 0, 3, prob, cfg, NeumannConvention::Single);
  ConvergenceTable literal = run_levels(m, 0, 3, prob, cfg, NeumannConvention::Literal);
  auto seq = [](const ConvergenceTable& t, const char* tag) {
    std::string s = strf("%-7s l2", tag);
    for (std::size_t i = 1; i < t.rates.size(); ++i) s += strf(" %.2f", t.rates[i].l2);
    s += "  tb";
    for (std::size_t i = 1; i < t.rates.size(); ++i)
      s += strf(" %.2f", t.rates[i].triple);
    return s;
  };
  info(seq(single, "single"));
  info(seq(literal, "literal"));
  const RateRow& rs = single.rates.back();
  const RateRow& rl = literal.rates.back();
  bool single_ok = inside(rs.l2, 2.0, 0.4) && inside(rs.triple, 1.0, 0.4);
  bool worse = rl.l2 < rs.l2 - 0.05 && rl.triple < rs.triple - 0.05;
  bool tied = std::abs(rl.l2 - rs.l2) <= 0.05 && std::abs(rl.triple - rs.triple) <= 0.05;
  verdict(9, "jump problem Neumann conventions", single_ok && (worse || tied),
          strf("single l2 %.2f tb %.2f (2/1 +-0.4); literal l2 %.2f tb %.2f -> %s",
               rs.l2, rs.triple, rl.l2, rl.triple,
               worse ? "strictly worse" : (tied ? "indistinguishable" : "BETTER")));
}

// 10. Cubic superconvergent runs, reported but not gated: roundoff already
// eats into the finest levels at these orders.
void crit_smoke(const std::vector<Mesh>& ex1m, const std::vector<Mesh>& ex2m) {
  auto t0 = Clock::now();
  ConvergenceTable c =
      run_levels(ex1m, 0, 2, example1(1.0), DiscretizationConfig::superconvergent(3));
  ConvergenceTable f =
      run_levels(ex2m, 0, 1, example2(1.0), DiscretizationConfig::superconvergent(3));
  verdict(10, "P3 super smoke", true,
          strf("circle l2 %.2f grad %.2f, flower l2 %.2f grad %.2f "
               "(reported, not gated), %.0fs",
               c.rates.back().l2, c.rates.back().grad, f.rates.back().l2,
               f.rates.back().grad, seconds_since(t0)));
}

}  // namespace

int main() {
  auto t0 = Clock::now();
  std::printf("wg2d acceptance\n");
  try {
    std::vector<Mesh> ex1m, ex2m, jumpm;
    std::vector<double> ex1gen;
    ProblemSpec p1 = example1(1.0), p2 = example2(1.0), pj = manufactured_jump(2.0);
    for (int L = 0; L <= 5; ++L) {
      auto tg = Clock::now();
      ex1m.push_back(generate_interface_mesh(p1.domain, L));
      ex1gen.push_back(seconds_since(tg));
    }
    for (int L = 0; L <= 4; ++L) ex2m.push_back(generate_interface_mesh(p2.domain, L));
    for (int L = 0; L <= 3; ++L) jumpm.push_back(generate_interface_mesh(pj.domain, L));

    std::vector<double> grad_err =
        crit_circle_p1(ex1m, ex1gen[3] + ex1gen[4] + ex1gen[5]);
    crit_circle_p2(ex1m);
    crit_flower(ex2m);
    crit_standard(ex1m);
    crit_contrast(grad_err);
    crit_exactness();
    crit_identity(ex1m);
    crit_local(ex1m);
    crit_jump(jumpm);
    crit_smoke(ex1m, ex2m);
  } catch (const std::exception& e) {
    std::printf("[FAIL] unhandled: %s\n", e.what());
    return 1;
  }
  std::printf("%d/10 criteria passed, %.0fs total\n", 10 - g_failed, seconds_since(t0));
  return g_failed == 0 ? 0 : 1;
}
