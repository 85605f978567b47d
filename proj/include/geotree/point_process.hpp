#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "geotree/error.hpp"
#include "geotree/geometry.hpp"
#include "geotree/rng.hpp"

namespace geotree {

enum class WindowShape { disk, annulus, rectangle };

/// Sampling domain: a disk, an annulus or an axis-aligned rectangle.
struct Window {
  WindowShape shape = WindowShape::disk;
  Point center{};
  double inner = 0.0;  // annulus inner radius
  double outer = 0.0;  // disk / annulus outer radius
  double half_width = 0.0;
  double half_height = 0.0;

  static Window disk(Point c, double radius) {
    Window w{WindowShape::disk, c, 0.0, radius, 0.0, 0.0};
    w.validate();
    return w;
  }
  static Window annulus(Point c, double inner_radius, double outer_radius) {
    Window w{WindowShape::annulus, c, inner_radius, outer_radius, 0.0, 0.0};
    w.validate();
    return w;
  }
  static Window rectangle(const Box& b) {
    Window w{WindowShape::rectangle, {(b.xmin + b.xmax) / 2, (b.ymin + b.ymax) / 2}, 0.0, 0.0,
             (b.xmax - b.xmin) / 2, (b.ymax - b.ymin) / 2};
    w.validate();
    return w;
  }

  void validate() const {
    switch (shape) {
    case WindowShape::disk:
      if (!(outer > 0.0)) throw InvalidInput("disk window needs a positive radius");
      break;
    case WindowShape::annulus:
      if (!(inner >= 0.0) || !(inner < outer))
        throw InvalidInput("annulus window needs 0 <= inner < outer");
      break;
    case WindowShape::rectangle:
      if (!(half_width > 0.0) || !(half_height > 0.0))
        throw InvalidInput("rectangle window has zero area");
      break;
    }
  }

  double area() const {
    switch (shape) {
    case WindowShape::disk: return std::numbers::pi * outer * outer;
    case WindowShape::annulus: return std::numbers::pi * (outer * outer - inner * inner);
    case WindowShape::rectangle: return 4.0 * half_width * half_height;
    }
    return 0.0;
  }

  Box bounding_box() const {
    if (shape == WindowShape::rectangle)
      return {center.x - half_width, center.y - half_height, center.x + half_width,
              center.y + half_height};
    return Box::around(center, outer);
  }

  bool contains(Point p) const {
    switch (shape) {
    case WindowShape::disk: return norm2(p - center) <= outer * outer;
    case WindowShape::annulus: {
      const double d2 = norm2(p - center);
      return d2 >= inner * inner && d2 <= outer * outer;
    }
    case WindowShape::rectangle: return bounding_box().contains(p);
    }
    return false;
  }

  /// True when every point of `b` within distance `clip` of the origin lies in the window.
  bool covers(const Box& b, double clip = 1e300) const {
    if (b.empty()) return true;
    const Point corners[4] = {{b.xmin, b.ymin}, {b.xmin, b.ymax}, {b.xmax, b.ymin}, {b.xmax, b.ymax}};
    switch (shape) {
    case WindowShape::disk:
      if (center == kOrigin && clip <= outer) return true;
      return std::all_of(std::begin(corners), std::end(corners),
                         [&](Point c) { return norm2(c - center) <= outer * outer; });
    case WindowShape::annulus: {
      const bool inside_outer = std::all_of(std::begin(corners), std::end(corners), [&](Point c) {
        return norm2(c - center) <= outer * outer;
      });
      const double dx = std::max({b.xmin - center.x, 0.0, center.x - b.xmax});
      const double dy = std::max({b.ymin - center.y, 0.0, center.y - b.ymax});
      return inside_outer && dx * dx + dy * dy >= inner * inner;
    }
    case WindowShape::rectangle: return bounding_box().contains(b);
    }
    return false;
  }
};

/// A realization of a homogeneous Poisson process restricted to a window.
struct PointSample {
  std::vector<Point> points;
  double intensity = 1.0;
  Window window;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
};

namespace detail {
struct PointBitsHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
    return static_cast<std::size_t>(mix64(k.first ^ mix64(k.second)));
  }
};
inline std::pair<std::uint64_t, std::uint64_t> point_bits(Point p) {
  std::uint64_t a, b;
  std::memcpy(&a, &p.x, sizeof a);
  std::memcpy(&b, &p.y, sizeof b);
  return {a, b};
}
} // namespace detail

/// Homogeneous PPP in `window`: Poisson(intensity * area) points, i.i.d. uniform.
/// Exact coordinate duplicates are redrawn.
inline PointSample sample_ppp(const Window& window, double intensity, std::uint64_t seed) {
  window.validate();
  if (!(intensity > 0.0)) throw InvalidInput("intensity must be positive");
  Rng rng(seed);
  const std::uint64_t count = rng.poisson(intensity * window.area());
  const Box bb = window.bounding_box();
  PointSample s{{}, intensity, window, seed};
  s.points.reserve(count);
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, detail::PointBitsHash> seen;
  seen.reserve(count);
  while (s.points.size() < count) {
    const Point p{rng.uniform(bb.xmin, bb.xmax), rng.uniform(bb.ymin, bb.ymax)};
    if (!window.contains(p)) continue;
    if (!seen.insert(detail::point_bits(p)).second) continue;
    s.points.push_back(p);
  }
  return s;
}

/// Removes the points of the open ball B(center, radius); provenance is kept.
inline PointSample thin_ball(const PointSample& sample, Point center, double radius) {
  if (radius < 0.0) throw InvalidInput("thinning radius must be nonnegative");
  PointSample out{{}, sample.intensity, sample.window, sample.seed};
  out.points.reserve(sample.size());
  for (const Point& p : sample.points)
    if (!(norm2(p - center) < radius * radius)) out.points.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Spatial index and region queries

/// Uniform bucket grid over a bounding box, stored as a CSR array.
class GridIndex {
public:
  GridIndex() = default;

  GridIndex(const std::vector<Point>& points, Box bounds, double cell_size)
      : bounds_(bounds), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw InvalidInput("cell size must be positive");
    for (const Point& p : points) bounds_.include(p);
    nx_ = static_cast<std::size_t>(std::floor((bounds_.xmax - bounds_.xmin) / cell_)) + 1;
    ny_ = static_cast<std::size_t>(std::floor((bounds_.ymax - bounds_.ymin) / cell_)) + 1;
    offsets_.assign(nx_ * ny_ + 1, 0);
    std::vector<std::size_t> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = cell_id(col(points[i].x), row(points[i].y));
      ++offsets_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < nx_ * ny_; ++c) offsets_[c + 1] += offsets_[c];
    ids_.resize(points.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) ids_[fill[cell_of[i]]++] = i;
  }

  double cell_size() const { return cell_; }
  const Box& bounds() const { return bounds_; }
  std::size_t cell_count() const { return nx_ * ny_; }

  std::span<const std::size_t> bucket(std::size_t cell) const {
    return {ids_.data() + offsets_[cell], offsets_[cell + 1] - offsets_[cell]};
  }

  /// Calls f(id) for every indexed id whose cell meets `box`.
  template <class F>
  void for_each_candidate(const Box& box, F&& f) const {
    const Box b = box.intersect(bounds_);
    if (b.empty() || nx_ == 0) return;
    const std::size_t c0 = col(b.xmin), c1 = col(b.xmax), r0 = row(b.ymin), r1 = row(b.ymax);
    for (std::size_t r = r0; r <= r1; ++r)
      for (std::size_t c = c0; c <= c1; ++c) {
        const std::size_t id = cell_id(c, r);
        for (std::size_t k = offsets_[id]; k < offsets_[id + 1]; ++k) f(ids_[k]);
      }
  }

private:
  std::size_t col(double x) const {
    const double v = std::floor((x - bounds_.xmin) / cell_);
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(nx_ - 1)));
  }
  std::size_t row(double y) const {
    const double v = std::floor((y - bounds_.ymin) / cell_);
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(ny_ - 1)));
  }
  std::size_t cell_id(std::size_t c, std::size_t r) const { return r * nx_ + c; }

  Box bounds_{};
  double cell_ = 1.0;
  std::size_t nx_ = 0, ny_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> ids_;
};

/// Open ball B(center, radius).
struct BallRegion {
  Point center;
  double radius;
  bool contains(Point p) const { return norm2(p - center) < radius * radius; }
  Box box() const { return Box::around(center, radius); }
};

/// Cyl(apex, rho): points of B(O, |apex|) closer than rho to the segment [O; apex].
struct CylinderRegion {
  Point apex;
  double rho;
  bool contains(Point p) const {
    return norm2(p) < norm2(apex) && dist_to_segment(p, kOrigin, apex) < rho;
  }
  Box box() const {
    Box b = Box::spanning(kOrigin, apex).expanded(rho);
    return b.intersect(Box::around(kOrigin, norm(apex)));
  }
};

/// apex + (-inf, 0] x [-rho, rho].
struct HalfStripRegion {
  Point apex;
  double rho;
  bool contains(Point p) const { return p.x <= apex.x && std::abs(p.y - apex.y) <= rho; }
  Box box() const { return {-1e300, apex.y - rho, apex.x, apex.y + rho}; }
};

/// { p : inner <= |p - center| < outer, |arg(p - center) - theta| <= half_angle }.
struct AnnulusSectorRegion {
  Point center;
  double inner, outer, theta, half_angle;
  bool contains(Point p) const {
    const Point d = p - center;
    const double r2 = norm2(d);
    if (r2 < inner * inner || !(r2 < outer * outer)) return false;
    if (half_angle >= std::numbers::pi) return true;
    return std::abs(angle_diff(arg(d), theta)) <= half_angle;
  }
  Box box() const { return Box::around(center, outer); }
};

struct BoxRegion {
  Box rect;
  bool contains(Point p) const { return rect.contains(p); }
  Box box() const { return rect; }
};

using Region = std::variant<BallRegion, CylinderRegion, HalfStripRegion, AnnulusSectorRegion, BoxRegion>;

inline bool region_contains(const Region& r, Point p) {
  return std::visit([&](const auto& reg) { return reg.contains(p); }, r);
}

/// A sample together with its grid index. Models the PointSource interface.
class IndexedSample {
public:
  explicit IndexedSample(const PointSample& sample, double cell_size = 0.0)
      : sample_(&sample),
        index_(sample.points, sample.window.bounding_box(),
               cell_size > 0.0 ? cell_size : 1.0 / std::sqrt(sample.intensity)) {}

  const PointSample& sample() const { return *sample_; }
  const GridIndex& index() const { return index_; }
  std::size_t size() const { return sample_->size(); }
  Point point(std::size_t id) const { return sample_->points[id]; }

  template <class F>
  void visit(const Box& box, F&& f) const {
    index_.for_each_candidate(box, [&](std::size_t id) {
      const Point p = sample_->points[id];
      if (box.contains(p)) f(id, p);
    });
  }

  bool covers(const Box& box, double clip = 1e300) const { return sample_->window.covers(box, clip); }

private:
  const PointSample* sample_;
  GridIndex index_;
};

/// Ids of the sample points inside `region`, ascending.
inline std::vector<std::size_t> query_region(const IndexedSample& s, const Region& region) {
  std::vector<std::size_t> out;
  const Box b = std::visit([](const auto& reg) { return reg.box(); }, region);
  s.index().for_each_candidate(b, [&](std::size_t id) {
    if (region_contains(region, s.point(id))) out.push_back(id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

/// Homogeneous PPP on the whole plane, generated lazily cell by cell. The
/// content of cell (i, j) depends only on (seed, i, j), so every region of a
/// realization is the same whatever else has been looked at. Points inside
/// an optional open exclusion ball are dropped. Ids are assigned in order of
/// cell generation. Not thread-safe: one field per replication.
class PoissonField {
public:
  PoissonField(std::uint64_t seed, double intensity, double cell_size = 0.0)
      : seed_(seed), intensity_(intensity),
        cell_(cell_size > 0.0 ? cell_size : 1.0 / std::sqrt(intensity)) {
    if (!(intensity > 0.0)) throw InvalidInput("intensity must be positive");
  }

  void exclude_ball(Point center, double radius) {
    if (!cells_.empty()) throw InvalidInput("exclusion must be set before first use");
    excl_center_ = center;
    excl_radius_ = radius;
  }

  std::uint64_t seed() const { return seed_; }
  double intensity() const { return intensity_; }
  Point point(std::size_t id) const { return points_[id]; }
  std::size_t generated() const { return points_.size(); }

  template <class F>
  void visit(const Box& box, F&& f) const {
    const auto i0 = cell_coord(box.xmin), i1 = cell_coord(box.xmax);
    const auto j0 = cell_coord(box.ymin), j1 = cell_coord(box.ymax);
    for (auto j = j0; j <= j1; ++j)
      for (auto i = i0; i <= i1; ++i) {
        const Span s = ensure(i, j);
        for (std::size_t k = s.first; k < s.first + s.count; ++k)
          if (box.contains(points_[k])) f(k, points_[k]);
      }
  }

  bool covers(const Box&, double = 1e300) const { return true; }

  /// Restriction of the realization to `window`, as a PointSample.
  PointSample materialize(const Window& window) const {
    PointSample s{{}, intensity_, window, seed_};
    visit(window.bounding_box(), [&](std::size_t, Point p) {
      if (window.contains(p)) s.points.push_back(p);
    });
    return s;
  }

private:
  struct Span {
    std::size_t first, count;
  };

  std::int64_t cell_coord(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }

  Span ensure(std::int64_t i, std::int64_t j) const {
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
                              static_cast<std::uint32_t>(j);
    if (auto it = cells_.find(key); it != cells_.end()) return it->second;
    Rng rng(derive_seed(seed_, key));
    const std::uint64_t n = rng.poisson(intensity_ * cell_ * cell_);
    const Span span{points_.size(), 0};
    std::size_t kept = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
      const Point p{(static_cast<double>(i) + rng.uniform()) * cell_,
                    (static_cast<double>(j) + rng.uniform()) * cell_};
      if (excl_radius_ > 0.0 && norm2(p - excl_center_) < excl_radius_ * excl_radius_) continue;
      points_.push_back(p);
      ++kept;
    }
    const Span done{span.first, kept};
    cells_.emplace(key, done);
    return done;
  }

  std::uint64_t seed_;
  double intensity_;
  double cell_;
  Point excl_center_{};
  double excl_radius_ = 0.0;
  mutable std::unordered_map<std::uint64_t, Span> cells_;
  mutable std::vector<Point> points_;
};

/// Anything that can enumerate its points in a box and tell whether a box lies
/// inside its sampled domain.
template <class S>
concept PointSource = requires(const S& s, const Box& b, void (*f)(std::size_t, Point)) {
  { s.covers(b, 1.0) } -> std::convertible_to<bool>;
  s.visit(b, f);
  { s.point(std::size_t{}) } -> std::convertible_to<Point>;
};

} // namespace geotree
