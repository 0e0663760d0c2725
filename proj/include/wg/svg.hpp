#pragma once

// Static SVG renderings: mesh wireframes with the interface drawn as
// sampled arcs, and per-element scalar fields on a log colour scale.
// Coordinates are emitted in pixel space at fixed precision, so identical
// inputs give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "wg/exceptions.hpp"
#include "wg/mesh.hpp"
#include "wg/numfmt.hpp"

namespace wg {

namespace svgdetail {

constexpr int kArcSamples = 32;  // points per curved edge
constexpr double kCanvas = 720.0;
constexpr double kPad = 12.0;

struct Frame {
  double xmin = 0.0, ymin = 0.0, scale = 1.0;
  double width = 0.0, height = 0.0;

  static Frame fit(const Mesh& mesh) {
    double inf = std::numeric_limits<double>::infinity();
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
    auto grow = [&](const Point2& p) {
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    };
    for (const Point2& v : mesh.vertices) grow(v);
    for (const MeshEdge& e : mesh.edges)
      if (!e.chart.is_straight())
        for (int j = 0; j < kArcSamples; ++j)
          grow(e.chart.eval(e.chart.length() * j / (kArcSamples - 1.0)));
    Frame f;
    f.xmin = x0;
    f.ymin = y0;
    f.scale = (kCanvas - 2.0 * kPad) / std::max(x1 - x0, y1 - y0);
    f.width = (x1 - x0) * f.scale + 2.0 * kPad;
    f.height = (y1 - y0) * f.scale + 2.0 * kPad;
    return f;
  }

  std::string at(const Point2& p) const {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f", kPad + (p.x() - xmin) * scale,
                  height - kPad - (p.y() - ymin) * scale);
    return buf;
  }
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// Compact five-anchor approximation of a perceptually ordered ramp.
inline std::string colour(double t) {
  static const int stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  double s = std::clamp(t, 0.0, 1.0) * 4.0;
  int i = std::min(3, static_cast<int>(s));
  double f = s - i;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

inline std::string header(double width, double height) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << ' '
      << num(height) << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  return out.str();
}

/// Path data along one edge from its v0 end, arcs sampled kArcSamples times.
inline void edge_points(const MeshEdge& e, const Frame& f, std::ostringstream& d) {
  double L = e.chart.length();
  int n = e.chart.is_straight() ? 2 : kArcSamples;
  for (int j = 0; j < n; ++j)
    d << (j == 0 ? 'M' : 'L') << f.at(e.chart.eval(L * j / (n - 1.0)));
}

/// Closed outline of an element, counterclockwise, arcs sampled.
inline std::string element_outline(const Mesh& mesh, int el, const Frame& f) {
  const MeshElement& E = mesh.elements[el];
  std::ostringstream d;
  d << 'M' << f.at(mesh.vertices[E.v[0]]);
  for (int i = 0; i < 3; ++i) {
    const MeshEdge& e = mesh.edges[E.edge[i]];
    if (e.chart.is_straight()) {
      d << 'L' << f.at(mesh.vertices[E.v[(i + 1) % 3]]);
      continue;
    }
    bool forward = (e.left == el);
    double L = e.chart.length();
    for (int j = 1; j < kArcSamples; ++j) {
      double s = L * j / (kArcSamples - 1.0);
      d << 'L' << f.at(e.chart.eval(forward ? s : L - s));
    }
  }
  d << 'Z';
  return d.str();
}

}  // namespace svgdetail

/// Wireframe of the mesh; interface edges drawn on top in a second colour.
inline std::string render_mesh_svg(const Mesh& mesh) {
  if (mesh.n_elements() == 0) throw MeshError("svg: empty mesh");
  using svgdetail::Frame;
  Frame f = Frame::fit(mesh);
  std::ostringstream out;
  out << svgdetail::header(f.width, f.height);

  std::ostringstream grid, iface;
  for (const MeshEdge& e : mesh.edges)
    svgdetail::edge_points(e, f, e.kind == EdgeKind::Interface ? iface : grid);
  out << "<path fill=\"none\" stroke=\"#555555\" stroke-width=\"1\" d=\""
      << grid.str() << "\"/>\n";
  out << "<path fill=\"none\" stroke=\"#b03030\" stroke-width=\"1.6\" d=\""
      << iface.str() << "\"/>\n";
  out << "</svg>\n";
  return out.str();
}

/// One value per element, filled on a log scale; zeros take the bottom
/// colour.  The caption line, if any, is printed under the figure.
inline std::string render_element_field_svg(const Mesh& mesh,
                                            const std::vector<double>& value,
                                            const std::string& caption = "") {
  if (static_cast<int>(value.size()) != mesh.n_elements())
    throw ConfigError("svg: need exactly one value per element");
  using svgdetail::Frame;
  Frame f = Frame::fit(mesh);
  double strip = caption.empty() ? 0.0 : 24.0;

  double inf = std::numeric_limits<double>::infinity();
  double vmin = inf, vmax = 0.0;
  for (double v : value)
    if (v > 0.0) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  bool flat = !(vmax > 0.0) || !(vmin < vmax);
  double lmin = flat ? 0.0 : std::log10(vmin);
  double lmax = flat ? 1.0 : std::log10(vmax);

  std::ostringstream out;
  out << svgdetail::header(f.width, f.height + strip);
  for (int el = 0; el < mesh.n_elements(); ++el) {
    double t = 0.0;
    if (value[el] > 0.0)
      t = flat ? 0.5 : (std::log10(value[el]) - lmin) / (lmax - lmin);
    std::string c = svgdetail::colour(t);
    out << "<path fill=\"" << c << "\" stroke=\"" << c
        << "\" stroke-width=\"0.5\" d=\"" << svgdetail::element_outline(mesh, el, f)
        << "\"/>\n";
  }
  std::ostringstream iface;
  for (const MeshEdge& e : mesh.edges)
    if (e.kind == EdgeKind::Interface) svgdetail::edge_points(e, f, iface);
  out << "<path fill=\"none\" stroke=\"#202020\" stroke-width=\"1\" d=\""
      << iface.str() << "\"/>\n";
  if (!caption.empty())
    out << "<text x=\"" << svgdetail::num(svgdetail::kPad) << "\" y=\""
        << svgdetail::num(f.height + 16.0)
        << "\" font-family=\"monospace\" font-size=\"13\">" << caption
        << " range " << fortran_sci(flat ? 0.0 : vmin) << " .. "
        << fortran_sci(flat ? 0.0 : vmax) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace wg
