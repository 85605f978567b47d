#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geotree/error.hpp"
#include "geotree/geometry.hpp"

namespace geotree {

enum class Model { rpt, fpp, lpp, forest_rho, forest_alpha, forest_lpp };

inline std::string_view to_string(Model m) {
  switch (m) {
  case Model::rpt: return "rpt";
  case Model::fpp: return "fpp";
  case Model::lpp: return "lpp";
  case Model::forest_rho: return "forest_rho";
  case Model::forest_alpha: return "forest_alpha";
  case Model::forest_lpp: return "forest_lpp";
  }
  return "?";
}

inline Model model_from_string(std::string_view s) {
  for (Model m : {Model::rpt, Model::fpp, Model::lpp, Model::forest_rho, Model::forest_alpha,
                  Model::forest_lpp})
    if (to_string(m) == s) return m;
  throw InvalidInput("unknown model '" + std::string(s) + "'");
}

inline constexpr std::int64_t kNoAncestor = -1;

/// Rooted tree or forest as an out-degree-one ancestor map. Vertices without
/// an ancestor are either the distinguished root or, for forests, vertices
/// whose ancestor lies outside the sampled window.
struct AncestorTree {
  Model model = Model::rpt;
  std::vector<Point> vertices;
  std::vector<std::int64_t> ancestor;
  std::int64_t root = kNoAncestor;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  /// Radius of the disk around O on which the construction is exact.
  double extent = 0.0;

  std::size_t size() const { return vertices.size(); }
  bool has_ancestor(std::size_t v) const { return ancestor[v] != kNoAncestor; }
  std::size_t edge_count() const {
    return static_cast<std::size_t>(
        std::count_if(ancestor.begin(), ancestor.end(), [](auto a) { return a != kNoAncestor; }));
  }
};

inline nlohmann::json to_json(const AncestorTree& t) {
  nlohmann::json vertices = nlohmann::json::array();
  for (Point p : t.vertices) vertices.push_back({p.x, p.y});
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : t.params) params[k] = v;
  return {{"model", std::string(to_string(t.model))},
          {"params", params},
          {"seed", t.seed},
          {"root", t.root},
          {"extent", t.extent},
          {"vertices", vertices},
          {"ancestor", t.ancestor}};
}

inline AncestorTree tree_from_json(const nlohmann::json& j) {
  try {
    AncestorTree t;
    t.model = model_from_string(j.at("model").get<std::string>());
    for (const auto& [k, v] : j.at("params").items()) t.params[k] = v.get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.root = j.at("root").get<std::int64_t>();
    t.extent = j.value("extent", 0.0);
    for (const auto& v : j.at("vertices")) t.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    t.ancestor = j.at("ancestor").get<std::vector<std::int64_t>>();
    if (t.ancestor.size() != t.vertices.size())
      throw InvalidInput("tree JSON: vertices and ancestor arrays differ in length");
    const auto n = static_cast<std::int64_t>(t.vertices.size());
    for (auto a : t.ancestor)
      if (a < kNoAncestor || a >= n) throw InvalidInput("tree JSON: ancestor id out of range");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("tree JSON: ") + e.what());
  }
}

/// Children of every vertex in CSR form.
struct ChildLists {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> ids;

  std::span<const std::size_t> of(std::size_t v) const {
    return {ids.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
};

inline ChildLists child_lists(const AncestorTree& t) {
  ChildLists c;
  c.offsets.assign(t.size() + 1, 0);
  for (auto a : t.ancestor)
    if (a != kNoAncestor) ++c.offsets[static_cast<std::size_t>(a) + 1];
  for (std::size_t i = 0; i < t.size(); ++i) c.offsets[i + 1] += c.offsets[i];
  c.ids.resize(c.offsets.back());
  std::vector<std::size_t> fill(c.offsets.begin(), c.offsets.end() - 1);
  for (std::size_t v = 0; v < t.size(); ++v)
    if (t.ancestor[v] != kNoAncestor) c.ids[fill[static_cast<std::size_t>(t.ancestor[v])]++] = v;
  return c;
}

/// In-degree distribution: degree -> number of vertices (root included).
inline std::map<std::size_t, std::size_t> children_histogram(const AncestorTree& t) {
  std::vector<std::size_t> deg(t.size(), 0);
  for (auto a : t.ancestor)
    if (a != kNoAncestor) ++deg[static_cast<std::size_t>(a)];
  std::map<std::size_t, std::size_t> h;
  for (auto d : deg) ++h[d];
  return h;
}

inline std::size_t root_degree(const AncestorTree& t) {
  if (t.root == kNoAncestor) return 0;
  return static_cast<std::size_t>(std::count(t.ancestor.begin(), t.ancestor.end(), t.root));
}

/// Vertices from which the ancestor chain cycles instead of ending at a
/// vertex without ancestor.
inline std::vector<std::size_t> find_cycles(const AncestorTree& t) {
  // 0 = unvisited, 1 = on current chain, 2 = resolved ok, 3 = resolved bad
  std::vector<std::uint8_t> state(t.size(), 0);
  std::vector<std::size_t> chain, bad;
  for (std::size_t s = 0; s < t.size(); ++s) {
    if (state[s]) continue;
    chain.clear();
    std::size_t v = s;
    std::uint8_t verdict = 2;
    while (true) {
      if (state[v] == 1) { verdict = 3; break; }
      if (state[v] >= 2) { verdict = state[v]; break; }
      state[v] = 1;
      chain.push_back(v);
      if (t.ancestor[v] == kNoAncestor) break;
      v = static_cast<std::size_t>(t.ancestor[v]);
    }
    for (auto c : chain) {
      state[c] = verdict;
      if (verdict == 3) bad.push_back(c);
    }
  }
  std::sort(bad.begin(), bad.end());
  return bad;
}

/// Vertices whose ancestor chain does not end at `t.root`.
inline std::vector<std::size_t> unreachable_from_root(const AncestorTree& t) {
  std::vector<std::int8_t> ok(t.size(), -1);
  std::vector<std::size_t> chain, bad;
  for (std::size_t s = 0; s < t.size(); ++s) {
    chain.clear();
    std::size_t v = s;
    std::int8_t verdict = 0;
    std::size_t steps = 0;
    while (true) {
      if (ok[v] != -1) { verdict = ok[v]; break; }
      chain.push_back(v);
      if (t.ancestor[v] == kNoAncestor) { verdict = static_cast<std::int64_t>(v) == t.root; break; }
      v = static_cast<std::size_t>(t.ancestor[v]);
      if (++steps > t.size()) { verdict = 0; break; }
    }
    for (auto c : chain) ok[c] = verdict;
    if (!verdict) bad.push_back(s);
  }
  return bad;
}

/// Pairs (child, child') of edges [child; ancestor(child)] whose open segments meet.
inline std::vector<std::pair<std::size_t, std::size_t>> check_noncrossing(const AncestorTree& t) {
  struct Edge {
    double xmin, xmax;
    std::size_t child;
  };
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.ancestor[v] == kNoAncestor) continue;
    const Point a = t.vertices[v], b = t.vertices[static_cast<std::size_t>(t.ancestor[v])];
    edges.push_back({std::min(a.x, b.x), std::max(a.x, b.x), v});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.xmin < b.xmin || (a.xmin == b.xmin && a.child < b.child);
  });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::size_t u = edges[i].child;
    const Point a1 = t.vertices[u], a2 = t.vertices[static_cast<std::size_t>(t.ancestor[u])];
    for (std::size_t j = i + 1; j < edges.size() && edges[j].xmin <= edges[i].xmax; ++j) {
      const std::size_t w = edges[j].child;
      const Point b1 = t.vertices[w], b2 = t.vertices[static_cast<std::size_t>(t.ancestor[w])];
      if (open_segments_intersect(a1, a2, b1, b2)) out.emplace_back(std::min(u, w), std::max(u, w));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// For every vertex, the largest norm over its forward subtree (itself included).
inline std::vector<double> subtree_max_norm(const AncestorTree& t) {
  const ChildLists ch = child_lists(t);
  std::vector<double> best(t.size());
  for (std::size_t v = 0; v < t.size(); ++v) best[v] = norm(t.vertices[v]);
  // Iterative post-order from every vertex without ancestor.
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (t.ancestor[r] != kNoAncestor) continue;
    stack.emplace_back(r, 0);
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      const auto kids = ch.of(v);
      if (k < kids.size()) {
        const std::size_t c = kids[k++];
        stack.emplace_back(c, 0);
      } else {
        const std::size_t done = v;
        stack.pop_back();
        if (!stack.empty()) {
          const std::size_t parent = stack.back().first;
          best[parent] = std::max(best[parent], best[done]);
        }
      }
    }
  }
  return best;
}

} // namespace geotree
