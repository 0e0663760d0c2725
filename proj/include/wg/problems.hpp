#pragma once

// Concrete interface problems: coefficients, data, and (when known) the
// exact solution.  The PDE is -div(a grad u) = f with u = g on the outer
// boundary, a solution jump [[u]] = u|_1 - u|_2 = g_D across the
// interface, and a flux jump a1 grad u1 . n1 + a2 grad u2 . n2 = g_N,
// where n1 is the outward normal of region 1 (so n2 = -n1).
//
// All fields are plain callables; an empty std::function means the datum
// is identically zero (for g_D, g_N) or unavailable (for the exact
// solution).  Formulas are global expressions, so u1 and friends may be
// evaluated slightly outside their region; finite difference checks rely
// on that.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "wg/exceptions.hpp"
#include "wg/geometry.hpp"
#include "wg/mesh.hpp"

namespace wg {

using ScalarField = std::function<double(const Point2&)>;
using VectorField = std::function<Vec2(const Point2&)>;

struct ProblemSpec {
  std::string name;
  DomainSpec domain;
  double a1 = 1.0, a2 = 1.0;
  ScalarField f1, f2;    // source per region
  ScalarField g;         // Dirichlet data on the outer boundary
  ScalarField g_D;       // solution jump on the interface, side 1 - side 2
  ScalarField g_N;       // flux jump on the interface
  ScalarField u1, u2;    // exact solution per region, optional
  VectorField du1, du2;  // exact gradient per region, optional

  double a_of(int region) const { return region == 1 ? a1 : a2; }
  const ScalarField& f_of(int region) const { return region == 1 ? f1 : f2; }

  bool has_exact() const { return u1 && u2 && du1 && du2; }
  double u_exact(int region, const Point2& p) const {
    return region == 1 ? u1(p) : u2(p);
  }
  Vec2 grad_exact(int region, const Point2& p) const {
    return region == 1 ? du1(p) : du2(p);
  }

  void validate() const {
    if (!(a1 > 0.0) || !(a2 > 0.0))
      throw ConfigError("problem '" + name + "': coefficients must be positive");
    if (!f1 || !f2) throw ConfigError("problem '" + name + "': missing source");
  }
};

/// Circle interface r = 1 inside the square (-2,2)^2 with a = mu inside
/// and a = 1 outside.  The solution 2 - r^6 outside, (1 + mu - r^6)/mu
/// inside, is continuous with continuous flux, so both interface jumps
/// vanish for every mu.
inline ProblemSpec example1(double mu) {
  if (!(mu > 0.0)) throw ConfigError("example1: mu must be positive");
  ProblemSpec p;
  p.name = "example1";
  p.domain.xmin = -2.0;
  p.domain.xmax = 2.0;
  p.domain.ymin = -2.0;
  p.domain.ymax = 2.0;
  p.domain.interface = ParametricCurve::circle(Point2(0.0, 0.0), 1.0);
  p.domain.base_resolution = 8;
  p.a1 = mu;
  p.a2 = 1.0;
  auto f = [](const Point2& q) {
    double r2 = q.squaredNorm();
    return 36.0 * r2 * r2;
  };
  p.f1 = f;
  p.f2 = f;
  p.u2 = [](const Point2& q) {
    double r2 = q.squaredNorm();
    return 2.0 - r2 * r2 * r2;
  };
  p.u1 = [mu](const Point2& q) {
    double r2 = q.squaredNorm();
    return (1.0 + mu - r2 * r2 * r2) / mu;
  };
  p.du2 = [](const Point2& q) {
    double r2 = q.squaredNorm();
    return Vec2(-6.0 * r2 * r2 * q);
  };
  p.du1 = [mu](const Point2& q) {
    double r2 = q.squaredNorm();
    return Vec2(-6.0 * r2 * r2 * q / mu);
  };
  p.g = p.u2;
  return p;
}

/// Flower interface r = 3 - cos(4 theta) inside (-4,4)^2, a = mu inside.
/// The solution w = r^5 - 3 r^4 + (x^4 - 6 x^2 y^2 + y^4), divided by mu
/// inside, vanishes on the interface together with its flux jump; the
/// last summand is harmonic, so f = -Delta w = 48 r^2 - 25 r^3 in both
/// regions.
inline ProblemSpec example2(double mu) {
  if (!(mu > 0.0)) throw ConfigError("example2: mu must be positive");
  ProblemSpec p;
  p.name = "example2";
  p.domain.xmin = -4.0;
  p.domain.xmax = 4.0;
  p.domain.ymin = -4.0;
  p.domain.ymax = 4.0;
  p.domain.interface = ParametricCurve::polar_star(Point2(0.0, 0.0), 3.0, {{4, -1.0}});
  p.domain.base_resolution = 16;
  p.a1 = mu;
  p.a2 = 1.0;
  auto f = [](const Point2& q) {
    double r = q.norm();
    return 48.0 * r * r - 25.0 * r * r * r;
  };
  p.f1 = f;
  p.f2 = f;
  auto w = [](const Point2& q) {
    double x = q.x(), y = q.y();
    double r = q.norm();
    double r4 = r * r * r * r;
    return r4 * r - 3.0 * r4 + (x * x * x * x - 6.0 * x * x * y * y + y * y * y * y);
  };
  auto dw = [](const Point2& q) {
    double x = q.x(), y = q.y();
    double r2 = q.squaredNorm();
    double r = std::sqrt(r2);
    Vec2 radial = (5.0 * r2 * r - 12.0 * r2) * q;
    return Vec2(radial + Vec2(4.0 * x * x * x - 12.0 * x * y * y,
                              4.0 * y * y * y - 12.0 * x * x * y));
  };
  p.u2 = w;
  p.u1 = [mu, w](const Point2& q) { return w(q) / mu; };
  p.du2 = dw;
  p.du1 = [mu, dw](const Point2& q) { return Vec2(dw(q) / mu); };
  p.g = p.u2;
  return p;
}

/// Circle interface with two unrelated solution branches, giving nonzero
/// jumps in both the value and the flux.  Exercises the g_D, g_N paths
/// that the published examples leave dormant.
inline ProblemSpec manufactured_jump(double mu) {
  if (!(mu > 0.0)) throw ConfigError("manufactured_jump: mu must be positive");
  ProblemSpec p;
  p.name = "manufactured_jump";
  p.domain.xmin = -2.0;
  p.domain.xmax = 2.0;
  p.domain.ymin = -2.0;
  p.domain.ymax = 2.0;
  p.domain.interface = ParametricCurve::circle(Point2(0.0, 0.0), 1.0);
  p.domain.base_resolution = 8;
  p.a1 = mu;
  p.a2 = 1.0;
  p.u1 = [](const Point2& q) { return std::sin(q.x()) * std::cos(q.y()) + 5.0; };
  p.du1 = [](const Point2& q) {
    return Vec2(std::cos(q.x()) * std::cos(q.y()), -std::sin(q.x()) * std::sin(q.y()));
  };
  p.u2 = [](const Point2& q) { return std::exp(q.x()) * q.y(); };
  p.du2 = [](const Point2& q) {
    return Vec2(std::exp(q.x()) * q.y(), std::exp(q.x()));
  };
  p.f1 = [mu](const Point2& q) {
    return 2.0 * mu * std::sin(q.x()) * std::cos(q.y());
  };
  p.f2 = [](const Point2& q) { return -std::exp(q.x()) * q.y(); };
  p.g = p.u2;
  p.g_D = [u1 = p.u1, u2 = p.u2](const Point2& q) { return u1(q) - u2(q); };
  // On the unit circle the outward normal of region 1 is radial.
  p.g_N = [mu, du1 = p.du1, du2 = p.du2](const Point2& q) {
    Vec2 n = q.normalized();
    return (mu * du1(q) - du2(q)).dot(n);
  };
  return p;
}

/// Largest relative defect of -div(a grad u) = f over random samples,
/// using centred differences of the coded gradients.  Both regional
/// formula sets are checked on the whole box; they are global
/// expressions, so no classification is needed.
inline double exact_consistency_residual(const ProblemSpec& p, unsigned seed,
                                         int samples = 20) {
  if (!p.has_exact()) throw ConfigError("consistency check needs exact data");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(p.domain.xmin, p.domain.xmax);
  std::uniform_real_distribution<double> uy(p.domain.ymin, p.domain.ymax);
  const double h = 1e-5;
  double worst = 0.0;
  for (int region : {1, 2}) {
    const VectorField& du = region == 1 ? p.du1 : p.du2;
    const ScalarField& f = p.f_of(region);
    double a = p.a_of(region);
    for (int s = 0; s < samples; ++s) {
      Point2 q(ux(rng), uy(rng));
      double div = (du(q + Vec2(h, 0)).x() - du(q - Vec2(h, 0)).x() +
                    du(q + Vec2(0, h)).y() - du(q - Vec2(0, h)).y()) /
                   (2.0 * h);
      double fv = f(q);
      worst = std::max(worst, std::abs(-a * div - fv) / (1.0 + std::abs(fv)));
    }
  }
  return worst;
}

/// Largest relative mismatch between the coded gradient and a centred
/// difference of the coded solution.
inline double gradient_consistency_residual(const ProblemSpec& p, unsigned seed,
                                            int samples = 20) {
  if (!p.has_exact()) throw ConfigError("consistency check needs exact data");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(p.domain.xmin, p.domain.xmax);
  std::uniform_real_distribution<double> uy(p.domain.ymin, p.domain.ymax);
  const double h = 1e-6;
  double worst = 0.0;
  for (int region : {1, 2}) {
    const ScalarField& u = region == 1 ? p.u1 : p.u2;
    const VectorField& du = region == 1 ? p.du1 : p.du2;
    for (int s = 0; s < samples; ++s) {
      Point2 q(ux(rng), uy(rng));
      Vec2 fd((u(q + Vec2(h, 0)) - u(q - Vec2(h, 0))) / (2.0 * h),
              (u(q + Vec2(0, h)) - u(q - Vec2(0, h))) / (2.0 * h));
      Vec2 coded = du(q);
      worst = std::max(worst, (fd - coded).norm() / (1.0 + coded.norm()));
    }
  }
  return worst;
}

}  // namespace wg
