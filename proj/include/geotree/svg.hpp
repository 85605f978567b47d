#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "geotree/campaign.hpp"
#include "geotree/geometry.hpp"
#include "geotree/tree.hpp"

namespace geotree {

struct ArcOverlay {
  double r = 1.0;
  double theta = 0.0;
  double c = 2.0 * std::numbers::pi;
};

struct SvgOptions {
  double size = 800.0;  // pixels along the longer side
  double dot = 0.0;     // vertex radius in world units; 0 picks one from the extent
  std::optional<ArcOverlay> arc;
  std::string comment;  // embedded verbatim as an XML comment
};

/// Static picture: edges as segments, vertices as dots, optional arc.
inline std::string render_svg(const AncestorTree& t, const SvgOptions& opt = {}) {
  Box b{0, 0, 0, 0};
  bool first = true;
  auto grow = [&](Point p) {
    if (first) { b = {p.x, p.y, p.x, p.y}; first = false; }
    else b.include(p);
  };
  for (Point p : t.vertices) grow(p);
  if (opt.arc) { grow(polar(opt.arc->r, 0)); grow(polar(-opt.arc->r, 0)); grow({0, opt.arc->r}); grow({0, -opt.arc->r}); }
  if (first) grow(kOrigin);
  const double span = std::max({b.xmax - b.xmin, b.ymax - b.ymin, 1e-9});
  b = b.expanded(0.05 * span);
  const double w = b.xmax - b.xmin, h = b.ymax - b.ymin;
  const double scale = opt.size / std::max(w, h);
  const double dot = opt.dot > 0 ? opt.dot : span / 400.0;
  const double stroke = span / 1000.0;
  // World coordinates with y flipped so the picture has the usual orientation.
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!opt.comment.empty()) {
    std::string c = opt.comment;
    for (std::size_t k; (k = c.find("--")) != std::string::npos;) c.replace(k, 2, "- -");
    s << "<!-- " << c << " -->\n";
  }
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w * scale) << "\" height=\"" << fmt(h * scale)
    << "\" viewBox=\"" << fmt(b.xmin) << ' ' << fmt(-b.ymax) << ' ' << fmt(w) << ' ' << fmt(h) << "\">\n";
  s << "<g stroke=\"#333\" stroke-width=\"" << fmt(stroke) << "\">\n";
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.ancestor[v] == kNoAncestor) continue;
    const Point p = t.vertices[v], q = t.vertices[static_cast<std::size_t>(t.ancestor[v])];
    s << "<line x1=\"" << fmt(p.x) << "\" y1=\"" << fmt(-p.y) << "\" x2=\"" << fmt(q.x) << "\" y2=\"" << fmt(-q.y)
      << "\"/>\n";
  }
  s << "</g>\n<g fill=\"#06c\">\n";
  for (std::size_t v = 0; v < t.size(); ++v) {
    const Point p = t.vertices[v];
    const bool root = static_cast<std::int64_t>(v) == t.root;
    s << "<circle cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(-p.y) << "\" r=\"" << fmt(root ? 2 * dot : dot) << '"'
      << (root ? " fill=\"#c00\"" : "") << "/>\n";
  }
  s << "</g>\n";
  if (opt.arc) {
    const auto& a = *opt.arc;
    const double half = std::min(a.c / (2 * a.r), std::numbers::pi);
    const std::string style = "fill=\"none\" stroke=\"#e80\" stroke-width=\"" + fmt(3 * stroke) + "\"";
    if (half >= std::numbers::pi) {
      s << "<circle cx=\"0\" cy=\"0\" r=\"" << fmt(a.r) << "\" " << style << "/>\n";
    } else {
      const Point p0 = polar(a.r, a.theta - half), p1 = polar(a.r, a.theta + half);
      s << "<path d=\"M " << fmt(p0.x) << ' ' << fmt(-p0.y) << " A " << fmt(a.r) << ' ' << fmt(a.r) << " 0 "
        << (2 * half > std::numbers::pi ? 1 : 0) << " 0 " << fmt(p1.x) << ' ' << fmt(-p1.y) << "\" " << style
        << "/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

} // namespace geotree
