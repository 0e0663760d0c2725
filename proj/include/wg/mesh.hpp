#pragma once

// Interface-fitted triangular meshes on a rectangle with one closed curve
// strictly inside.  Every element carries a region tag (1 inside the curve,
// 2 outside), elements touching the curve have exactly one curved edge, and
// meshes refine by doubling the angular and radial resolution so vertex
// families nest across levels.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wg/curve.hpp"
#include "wg/exceptions.hpp"
#include "wg/geometry.hpp"
#include "wg/quadrature.hpp"

namespace wg {

enum class EdgeKind { Boundary, Interior, Interface };

struct MeshEdge {
  int v0 = -1, v1 = -1;
  EdgeKind kind = EdgeKind::Interior;
  int left = -1;   // element traversing v0 -> v1 on its ccw boundary
  int right = -1;  // element traversing v1 -> v0; -1 on the outer boundary
  EdgeChart chart;
  int curve_id = -1;           // index into Mesh::curves for interface arcs
  double ca = 0.0, cb = 0.0;   // native curve interval of the arc
};

struct MeshElement {
  std::array<int, 3> v{{-1, -1, -1}};     // counterclockwise
  std::array<int, 3> edge{{-1, -1, -1}};  // edge[i] joins v[i] -> v[(i+1)%3]
  int region = 2;
  int curved_local = -1;  // local index of the interface edge, if any
  double h = 0.0;         // diameter of the vertex triangle
  double area = 0.0;      // area of the vertex triangle
  Point2 centroid = Point2::Zero();
};

struct DomainSpec {
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  ParametricCurve interface;
  int base_resolution = 8;  // interface arcs at level 0; divisible by 4, >= 8

  void validate() const {
    if (!(xmax > xmin) || !(ymax > ymin))
      throw DomainError("domain: empty rectangle");
    if (!interface.closed()) throw DomainError("domain: interface must be closed");
    if (base_resolution < 8 || base_resolution % 4 != 0)
      throw DomainError("domain: base resolution must be >= 8 and divisible by 4");
    const Point2& c = interface.center();
    if (!(c.x() > xmin && c.x() < xmax && c.y() > ymin && c.y() < ymax))
      throw DomainError("domain: interface center outside the rectangle");
    for (int i = 0; i < 2048; ++i) {
      Point2 p = interface.eval(2.0 * M_PI * i / 2048);
      if (!(p.x() > xmin && p.x() < xmax && p.y() > ymin && p.y() < ymax))
        throw DomainError("domain: interface not strictly inside the rectangle");
    }
  }
};

struct Mesh {
  std::vector<ParametricCurve> curves;
  std::vector<Point2> vertices;
  std::vector<MeshElement> elements;
  std::vector<MeshEdge> edges;
  int level = 0;
  double max_h = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  int count_edges(EdgeKind kind) const {
    int c = 0;
    for (const auto& e : edges) c += (e.kind == kind) ? 1 : 0;
    return c;
  }
};

/// Map of a mesh element onto the reference triangle, curved if the element
/// touches the interface.
inline CurvedTriMap build_curved_map(const Mesh& mesh, int elem_id) {
  const MeshElement& el = mesh.elements[elem_id];
  auto P = [&](int local) { return mesh.vertices[el.v[local]]; };
  if (el.curved_local < 0) return CurvedTriMap::affine(P(0), P(1), P(2));
  int c = el.curved_local;
  const MeshEdge& e = mesh.edges[el.edge[c]];
  bool forward = (e.v0 == el.v[c]);
  return CurvedTriMap::with_curved_base(e.chart, P((c + 2) % 3), forward);
}

namespace detail {

inline double tri_area2(const Point2& a, const Point2& b, const Point2& c) {
  return cross2(b - a, c - a);
}

}  // namespace detail

/// Fill edge records and element-edge links from element traversals.
/// Pre-seeded edges (e.g. interface arcs with their charts) are matched by
/// their vertex pair; missing straight edges are created on first
/// encounter.  When assign_kinds is set, created edges become boundary or
/// interior depending on whether a second element shows up.
inline void build_edges(Mesh& mesh, bool assign_kinds) {
  std::map<std::pair<int, int>, int> lookup;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    auto key = std::minmax(mesh.edges[e].v0, mesh.edges[e].v1);
    if (!lookup.emplace(std::make_pair(key.first, key.second), e).second)
      throw MeshError("duplicate edge between vertices " + std::to_string(key.first) +
                      " and " + std::to_string(key.second));
  }
  for (int t = 0; t < mesh.n_elements(); ++t) {
    MeshElement& el = mesh.elements[t];
    for (int i = 0; i < 3; ++i) {
      int u = el.v[i], w = el.v[(i + 1) % 3];
      auto key = std::minmax(u, w);
      auto it = lookup.find({key.first, key.second});
      int eid;
      if (it == lookup.end()) {
        MeshEdge edge;
        edge.v0 = u;
        edge.v1 = w;
        edge.chart = EdgeChart(
            ParametricCurve::segment(mesh.vertices[u], mesh.vertices[w]), 0.0, 1.0);
        eid = mesh.n_edges();
        mesh.edges.push_back(std::move(edge));
        lookup.emplace(std::make_pair(key.first, key.second), eid);
      } else {
        eid = it->second;
      }
      MeshEdge& edge = mesh.edges[eid];
      if (edge.v0 == u && edge.v1 == w) {
        if (edge.left != -1)
          throw MeshError("edge " + std::to_string(eid) + " traversed twice in the same direction");
        edge.left = t;
      } else {
        if (edge.right != -1)
          throw MeshError("edge " + std::to_string(eid) + " shared by more than two elements");
        edge.right = t;
      }
      el.edge[i] = eid;
    }
  }
  if (assign_kinds)
    for (auto& e : mesh.edges)
      if (e.kind != EdgeKind::Interface)
        e.kind = (e.right == -1) ? EdgeKind::Boundary : EdgeKind::Interior;
}

/// Structural checks shared by the generator and the reader.  Throws
/// MeshError naming the offending entity.
inline void validate_mesh(const Mesh& mesh) {
  for (int t = 0; t < mesh.n_elements(); ++t) {
    const MeshElement& el = mesh.elements[t];
    for (int i = 0; i < 3; ++i) {
      if (el.v[i] < 0 || el.v[i] >= mesh.n_vertices())
        throw MeshError("element " + std::to_string(t) + ": vertex index out of range");
      if (el.edge[i] < 0 || el.edge[i] >= mesh.n_edges())
        throw MeshError("element " + std::to_string(t) + ": missing edge link");
    }
    if (el.region != 1 && el.region != 2)
      throw MeshError("element " + std::to_string(t) + ": region tag must be 1 or 2");
    auto p = [&](int i) { return mesh.vertices[el.v[i]]; };
    if (!(detail::tri_area2(p(0), p(1), p(2)) > 0.0))
      throw MeshError("element " + std::to_string(t) + ": not counterclockwise or degenerate");
    int n_iface = 0, n_curved = 0;
    for (int i = 0; i < 3; ++i) {
      n_iface += (mesh.edges[el.edge[i]].kind == EdgeKind::Interface) ? 1 : 0;
      n_curved += mesh.edges[el.edge[i]].chart.is_straight() ? 0 : 1;
    }
    if (n_iface > 1)
      throw MeshError("element " + std::to_string(t) + ": more than one interface edge");
    if (n_curved > 1)
      throw MeshError("element " + std::to_string(t) + ": more than one curved edge");
  }
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const MeshEdge& edge = mesh.edges[e];
    if (edge.left == -1)
      throw MeshError("edge " + std::to_string(e) + ": no adjacent element");
    switch (edge.kind) {
      case EdgeKind::Boundary:
        if (edge.right != -1)
          throw MeshError("edge " + std::to_string(e) + ": boundary edge with two elements");
        break;
      case EdgeKind::Interior:
        if (edge.right == -1)
          throw MeshError("edge " + std::to_string(e) + ": interior edge with one element");
        if (mesh.elements[edge.left].region != mesh.elements[edge.right].region)
          throw MeshError("edge " + std::to_string(e) +
                          ": interior edge between different regions");
        break;
      case EdgeKind::Interface: {
        if (edge.right == -1)
          throw MeshError("edge " + std::to_string(e) + ": interface edge on the boundary");
        int rl = mesh.elements[edge.left].region, rr = mesh.elements[edge.right].region;
        if (!(rl == 1 && rr == 2))
          throw MeshError("edge " + std::to_string(e) +
                          ": interface edge must have region 1 on its left, 2 on its right");
        break;
      }
    }
    double scale = 1.0 + (mesh.vertices[edge.v0] - mesh.vertices[edge.v1]).norm();
    if ((edge.chart.start() - mesh.vertices[edge.v0]).norm() > 1e-9 * scale ||
        (edge.chart.end() - mesh.vertices[edge.v1]).norm() > 1e-9 * scale)
      throw MeshError("edge " + std::to_string(e) + ": chart endpoints do not match vertices");
  }
}

/// Derived per-element data plus validation; call after vertices, elements
/// and edges are in place.
inline void finalize_mesh(Mesh& mesh) {
  for (int t = 0; t < mesh.n_elements(); ++t) {
    MeshElement& el = mesh.elements[t];
    auto p = [&](int i) { return mesh.vertices[el.v[i]]; };
    el.area = 0.5 * detail::tri_area2(p(0), p(1), p(2));
    el.centroid = (p(0) + p(1) + p(2)) / 3.0;
    el.h = std::max({(p(1) - p(0)).norm(), (p(2) - p(1)).norm(), (p(0) - p(2)).norm()});
    el.curved_local = -1;
    for (int i = 0; i < 3; ++i)
      if (!mesh.edges[el.edge[i]].chart.is_straight()) el.curved_local = i;
  }
  validate_mesh(mesh);
  mesh.max_h = 0.0;
  for (const auto& el : mesh.elements) mesh.max_h = std::max(mesh.max_h, el.h);
  // curved maps must be orientation preserving well inside each element
  TriQuadRule probe = triangle_rule(12);
  for (int t = 0; t < mesh.n_elements(); ++t) {
    if (mesh.elements[t].curved_local < 0) continue;
    CurvedTriMap map = build_curved_map(mesh, t);
    for (const Point2& nq : probe.nodes)
      if (!(map.jacobian(nq.x(), nq.y()) > 0.0))
        throw MeshError("element " + std::to_string(t) + ": curved map folds over");
  }
}

/// Interface-fitted mesh at the given refinement level.  The curve is
/// sampled at n = base_resolution * 2^level angles anchored at the
/// directions of the rectangle corners; the inside is a radially mapped
/// structured grid, the outside a stack of rings blended between the curve
/// and the rectangle.  Halving happens in every direction at once, so the
/// vertex set of level L is contained in that of level L+1 bit for bit.
inline Mesh generate_interface_mesh(const DomainSpec& dom, int level) {
  dom.validate();
  if (level < 0 || level > 14) throw DomainError("mesh level outside [0,14]");
  const ParametricCurve& curve = dom.interface;
  const Point2 c = curve.center();

  const int n = dom.base_resolution << level;
  const int q = n / 4;

  // rectangle corners counterclockwise from the upper right, and their
  // directions seen from the interface center
  const Point2 corner[5] = {Point2(dom.xmax, dom.ymax), Point2(dom.xmin, dom.ymax),
                            Point2(dom.xmin, dom.ymin), Point2(dom.xmax, dom.ymin),
                            Point2(dom.xmax, dom.ymax)};
  double phi[5];
  for (int s = 0; s < 4; ++s) {
    phi[s] = std::atan2(corner[s].y() - c.y(), corner[s].x() - c.x());
    if (s > 0)
      while (phi[s] <= phi[s - 1]) phi[s] += 2.0 * M_PI;
  }
  phi[4] = phi[0] + 2.0 * M_PI;

  // angle grid, sector by sector; theta[n] closes the loop
  std::vector<double> theta(n + 1);
  for (int j = 0; j <= n; ++j) {
    int s = std::min(j / q, 3);
    int m = j - s * q;
    theta[j] = phi[s] + (phi[s + 1] - phi[s]) * (static_cast<double>(m) / q);
  }

  Mesh mesh;
  mesh.level = level;
  mesh.curves.push_back(curve);

  // interface ring: vertex ids 0..n-1
  for (int j = 0; j < n; ++j) mesh.vertices.push_back(curve.eval(theta[j]));

  // map a position on the boundary of the unit square onto its angle;
  // square corner (1,1) corresponds to phi[0] and the walk is ccw
  auto square_angle = [&](double x, double y) {
    int s;
    double f;
    if (y == 1.0 && x > -1.0) {
      s = 0;
      f = 0.5 * (1.0 - x);
    } else if (x == -1.0 && y > -1.0) {
      s = 1;
      f = 0.5 * (1.0 - y);
    } else if (y == -1.0 && x < 1.0) {
      s = 2;
      f = 0.5 * (x + 1.0);
    } else {
      s = 3;
      f = 0.5 * (y + 1.0);
    }
    return phi[s] + (phi[s + 1] - phi[s]) * f;
  };

  // structured (q+1)^2 grid on [-1,1]^2, pushed onto the inside of the
  // curve by radial interpolation between the center and the curve
  auto grid_coord = [&](int i) { return -1.0 + 2.0 * i / q; };
  auto boundary_ring_index = [&](int i, int j) {
    if (j == q) return (q - i) % n;          // top side, sector 0
    if (i == 0) return q + (q - j);          // left side, sector 1
    if (j == 0) return 2 * q + i;            // bottom side, sector 2
    return (3 * q + j) % n;                  // right side, sector 3
  };
  std::vector<int> inner_id((q + 1) * (q + 1), -1);
  auto iid = [&](int i, int j) -> int& { return inner_id[j * (q + 1) + i]; };
  for (int j = 0; j <= q; ++j) {
    for (int i = 0; i <= q; ++i) {
      if (i == 0 || j == 0 || i == q || j == q) {
        iid(i, j) = boundary_ring_index(i, j);
        continue;
      }
      double x = grid_coord(i), y = grid_coord(j);
      double sigma = std::max(std::abs(x), std::abs(y));
      Point2 p;
      if (sigma == 0.0) {
        p = c;
      } else {
        double th = square_angle(x / sigma, y / sigma);
        p = c + sigma * (curve.eval(th) - c);
      }
      iid(i, j) = mesh.n_vertices();
      mesh.vertices.push_back(p);
    }
  }

  auto add_tri = [&](int a, int b, int cc, int region) {
    MeshElement el;
    el.v = {a, b, cc};
    el.region = region;
    mesh.elements.push_back(el);
  };

  // inner cells; the four corner cells must split through the grid corner
  // so no triangle picks up two interface edges
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < q; ++i) {
      int a = iid(i, j), b = iid(i + 1, j), d = iid(i, j + 1), e = iid(i + 1, j + 1);
      bool corner_main = (i == q - 1 && j == q - 1) || (i == 0 && j == 0);
      bool corner_anti = (i == q - 1 && j == 0) || (i == 0 && j == q - 1);
      bool use_main;
      if (corner_main)
        use_main = true;  // diagonal a-e
      else if (corner_anti)
        use_main = false;  // diagonal b-d
      else
        use_main = (mesh.vertices[a] - mesh.vertices[e]).norm() <=
                   (mesh.vertices[b] - mesh.vertices[d]).norm();
      if (use_main) {
        add_tri(a, b, e, 1);
        add_tri(a, e, d, 1);
      } else {
        add_tri(a, b, d, 1);
        add_tri(b, e, d, 1);
      }
    }
  }

  // outer rings: ring 0 is the interface ring, ring M the rectangle
  auto rect_point = [&](int j) {
    int s = std::min(j / q, 3);
    int m = j - s * q;
    return Point2(corner[s] + (static_cast<double>(m) / q) * (corner[s + 1] - corner[s]));
  };
  int M0 = [&] {
    double perim_curve = arc_length(curve, 0.0, 2.0 * M_PI);
    double perim_rect = 2.0 * ((dom.xmax - dom.xmin) + (dom.ymax - dom.ymin));
    double spacing = 0.5 * (perim_curve + perim_rect) / dom.base_resolution;
    double gap = 0.0;
    int nb = dom.base_resolution;
    for (int j = 0; j < nb; ++j) {
      int jj = j << level;  // sample at base-level angles
      gap += (rect_point(jj) - Point2(curve.eval(theta[jj]))).norm();
    }
    gap /= nb;
    return std::max(1, static_cast<int>(std::lround(gap / spacing)));
  }();
  const int M = M0 << level;

  std::vector<int> ring_prev(n), ring_cur(n);
  for (int j = 0; j < n; ++j) ring_prev[j] = j;
  for (int m = 1; m <= M; ++m) {
    double sm = static_cast<double>(m) / M;
    for (int j = 0; j < n; ++j) {
      Point2 g = mesh.vertices[j];
      Point2 p = (m == M) ? rect_point(j) : Point2(g + sm * (rect_point(j) - g));
      ring_cur[j] = mesh.n_vertices();
      mesh.vertices.push_back(p);
    }
    // ccw quad: inner j, outer j, outer j+1, inner j+1; the interface (or
    // inner-ring) side is then traversed against the angle direction, as an
    // outer element must
    for (int j = 0; j < n; ++j) {
      int jn = (j + 1) % n;
      int a = ring_prev[j], b = ring_cur[j], e = ring_cur[jn], d = ring_prev[jn];
      bool use_main = (mesh.vertices[a] - mesh.vertices[e]).norm() <=
                      (mesh.vertices[b] - mesh.vertices[d]).norm();
      if (use_main) {
        add_tri(a, b, e, 2);
        add_tri(a, e, d, 2);
      } else {
        add_tri(a, b, d, 2);
        add_tri(b, e, d, 2);
      }
    }
    ring_prev = ring_cur;
  }

  // interface arcs come first in the edge list, in angle order
  for (int j = 0; j < n; ++j) {
    MeshEdge e;
    e.v0 = j;
    e.v1 = (j + 1) % n;
    e.kind = EdgeKind::Interface;
    e.curve_id = 0;
    e.ca = theta[j];
    e.cb = theta[j + 1];
    e.chart = EdgeChart(curve, e.ca, e.cb);
    mesh.edges.push_back(std::move(e));
  }

  build_edges(mesh, true);
  finalize_mesh(mesh);
  return mesh;
}

struct MeshQuality {
  double min_angle_deg = 0.0;
  double min_h = 0.0;
  double max_h = 0.0;
};

inline MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality qual;
  qual.min_angle_deg = 180.0;
  qual.min_h = mesh.max_h;
  qual.max_h = mesh.max_h;
  for (const auto& el : mesh.elements) {
    qual.min_h = std::min(qual.min_h, el.h);
    for (int i = 0; i < 3; ++i) {
      Vec2 u = mesh.vertices[el.v[(i + 1) % 3]] - mesh.vertices[el.v[i]];
      Vec2 w = mesh.vertices[el.v[(i + 2) % 3]] - mesh.vertices[el.v[i]];
      double ang = std::acos(u.dot(w) / (u.norm() * w.norm())) * 180.0 / M_PI;
      qual.min_angle_deg = std::min(qual.min_angle_deg, ang);
    }
  }
  return qual;
}

// ---------------------------------------------------------------------------
// plain-text mesh files
//
//   wgmesh v1
//   curve <kind> <params...>
//   v <x> <y>
//   t <v0> <v1> <v2> <region>
//   e <v0> <v1> <kind> [<curve_id> <a> <b>]
//
// Numbers carry 17 significant digits, so write/read round-trips exactly.

inline void write_mesh(const Mesh& mesh, std::ostream& os) {
  os << "wgmesh v1\n";
  for (const auto& c : mesh.curves) os << "curve " << c.to_line() << "\n";
  for (const auto& p : mesh.vertices)
    os << "v " << fmt17(p.x()) << ' ' << fmt17(p.y()) << "\n";
  for (const auto& el : mesh.elements)
    os << "t " << el.v[0] << ' ' << el.v[1] << ' ' << el.v[2] << ' ' << el.region
       << "\n";
  for (const auto& e : mesh.edges) {
    os << "e " << e.v0 << ' ' << e.v1 << ' ';
    switch (e.kind) {
      case EdgeKind::Boundary: os << "boundary"; break;
      case EdgeKind::Interior: os << "interior"; break;
      case EdgeKind::Interface:
        os << "interface " << e.curve_id << ' ' << fmt17(e.ca) << ' ' << fmt17(e.cb);
        break;
    }
    os << "\n";
  }
}

inline void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw MeshError("cannot open '" + path + "' for writing");
  write_mesh(mesh, os);
}

inline Mesh read_mesh(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "wgmesh v1")
    throw MeshError("mesh file: missing 'wgmesh v1' header");
  Mesh mesh;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = " (line " + std::to_string(lineno) + ")";
    if (tok[0] == "curve") {
      mesh.curves.push_back(
          ParametricCurve::from_tokens({tok.begin() + 1, tok.end()}));
    } else if (tok[0] == "v") {
      if (tok.size() != 3) throw MeshError("mesh file: bad vertex line" + where);
      mesh.vertices.emplace_back(parse_double(tok[1]), parse_double(tok[2]));
    } else if (tok[0] == "t") {
      if (tok.size() != 5) throw MeshError("mesh file: bad element line" + where);
      MeshElement el;
      for (int i = 0; i < 3; ++i) el.v[i] = static_cast<int>(parse_long(tok[1 + i]));
      el.region = static_cast<int>(parse_long(tok[4]));
      mesh.elements.push_back(el);
    } else if (tok[0] == "e") {
      if (tok.size() < 4) throw MeshError("mesh file: bad edge line" + where);
      MeshEdge e;
      e.v0 = static_cast<int>(parse_long(tok[1]));
      e.v1 = static_cast<int>(parse_long(tok[2]));
      int nv = static_cast<int>(mesh.vertices.size());
      if (e.v0 < 0 || e.v0 >= nv || e.v1 < 0 || e.v1 >= nv)
        throw MeshError("mesh file: edge vertex out of range" + where);
      if (tok[3] == "boundary" || tok[3] == "interior") {
        if (tok.size() != 4) throw MeshError("mesh file: bad edge line" + where);
        e.kind = tok[3] == "boundary" ? EdgeKind::Boundary : EdgeKind::Interior;
        e.chart = EdgeChart(
            ParametricCurve::segment(mesh.vertices[e.v0], mesh.vertices[e.v1]), 0.0,
            1.0);
      } else if (tok[3] == "interface") {
        if (tok.size() != 7) throw MeshError("mesh file: bad interface edge line" + where);
        e.kind = EdgeKind::Interface;
        e.curve_id = static_cast<int>(parse_long(tok[4]));
        if (e.curve_id < 0 || e.curve_id >= static_cast<int>(mesh.curves.size()))
          throw MeshError("mesh file: curve id out of range" + where);
        e.ca = parse_double(tok[5]);
        e.cb = parse_double(tok[6]);
        e.chart = EdgeChart(mesh.curves[e.curve_id], e.ca, e.cb);
      } else {
        throw MeshError("mesh file: unknown edge kind '" + tok[3] + "'" + where);
      }
      mesh.edges.push_back(std::move(e));
    } else {
      throw MeshError("mesh file: unknown record '" + tok[0] + "'" + where);
    }
  }
  build_edges(mesh, false);
  finalize_mesh(mesh);
  return mesh;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot open '" + path + "'");
  return read_mesh(is);
}

}  // namespace wg
