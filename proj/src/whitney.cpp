#include "c2trace/whitney.hpp"

#include <string>

#include "c2trace/error.hpp"

namespace c2trace {

namespace {

std::vector<Cube> split(const Cube& c) {
  const double h = 0.5 * c.half_side;
  const Point o = c.center;
  return {{{o.x - h, o.y - h}, h}, {{o.x + h, o.y - h}, h}, {{o.x - h, o.y + h}, h}, {{o.x + h, o.y + h}, h}};
}

bool meets_focus(const Cube& c, std::span<const Segment> focus) {
  for (const auto& s : focus)
    if (segment_meets_closed_box(s, c.center, c.half_side)) return true;
  return false;
}

}  // namespace

std::span<const int> WhitneyDecomposition::neighbors(std::size_t k) const {
  if (k >= adjacency_.size()) throw std::out_of_range("cube index out of range");
  return adjacency_[k];
}

template <class Visit>
void WhitneyDecomposition::visit_closed(const Cube& query, Visit visit) const {
  if (tree_.empty()) return;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& n = tree_[stack.back()];
    stack.pop_back();
    if (!n.box.intersects(query)) continue;
    if (n.child >= 0) {
      for (int c = 3; c >= 0; --c) stack.push_back(n.child + c);
    } else if (n.cube >= 0) {
      visit(n.cube);
    }
  }
}

std::optional<int> WhitneyDecomposition::locate(Point p) const {
  std::optional<int> best;
  auto take = [&](int i) {
    if (cubes_[i].contains(p) && (!best || i < *best)) best = i;
  };
  if (tree_.empty()) {
    for (std::size_t i = 0; i < cubes_.size(); ++i) take(static_cast<int>(i));
  } else {
    visit_closed(Cube{p, 0.0}, take);
  }
  return best;
}

// Assigns cube indices to accepted leaves in depth-first order.
void WhitneyDecomposition::index_leaves() {
  cubes_.clear();
  depths_.clear();
  if (tree_.empty()) return;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    Node& n = tree_[stack.back()];
    stack.pop_back();
    if (n.child >= 0) {
      for (int c = 3; c >= 0; --c) stack.push_back(n.child + c);
    } else if (n.cube >= 0) {
      n.cube = static_cast<int>(cubes_.size());
      cubes_.push_back(n.box);
      depths_.push_back(n.depth);
    }
  }
}

void WhitneyDecomposition::build_adjacency() {
  adjacency_.assign(cubes_.size(), {});
  for (std::size_t k = 0; k < cubes_.size(); ++k) {
    auto& adj = adjacency_[k];
    if (tree_.empty()) {
      for (std::size_t j = 0; j < cubes_.size(); ++j)
        if (cubes_[j].intersects(cubes_[k])) adj.push_back(static_cast<int>(j));
    } else {
      visit_closed(cubes_[k], [&](int j) { adj.push_back(j); });
      std::sort(adj.begin(), adj.end());
    }
  }
}

void WhitneyDecomposition::finish_stats(double domain_area) {
  domain_area_ = domain_area;
  stats_ = {};
  if (!cubes_.empty()) {
    stats_.min_depth = *std::min_element(depths_.begin(), depths_.end());
    stats_.max_depth = *std::max_element(depths_.begin(), depths_.end());
  }
  for (std::size_t k = 0; k < cubes_.size(); ++k) {
    stats_.max_neighbors = std::max(stats_.max_neighbors, static_cast<int>(adjacency_[k].size()));
    stats_.covered_area += cubes_[k].diam() * cubes_[k].diam();
  }
  stats_.covering_multiplicity = covering_multiplicity(*this);
  if (domain_area > 0.0) {
    stats_.skirt_area = std::max(0.0, domain_area - stats_.covered_area);
    stats_.skirt_fraction = stats_.skirt_area / domain_area;
  }
}

WhitneyDecomposition WhitneyDecomposition::from_cubes(std::vector<Cube> cubes, std::vector<int> depths,
                                                      Flavor flavor) {
  if (depths.size() != cubes.size()) throw ValidationError("one depth per cube required");
  WhitneyDecomposition d;
  d.cubes_ = std::move(cubes);
  d.depths_ = std::move(depths);
  d.flavor_ = flavor;
  d.build_adjacency();
  d.finish_stats(0.0);
  return d;
}

WhitneyDecomposition whitney_decompose(const PolygonalDomain& domain, const DecomposeOptions& opts) {
  if (opts.depth_limit < 1 || opts.depth_limit > 24) throw ValidationError("depth limit must lie in [1, 24]");
  const int deepest = std::max(opts.depth_limit, opts.focus.empty() ? 0 : opts.focus_depth);
  if (deepest > 40) throw ValidationError("focus depth must not exceed 40");

  const Box box = domain.bbox();
  const double side = std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y);
  WhitneyDecomposition dec;
  dec.tree_.push_back({{{box.lo.x + 0.5 * side, box.lo.y + 0.5 * side}, 0.5 * side}, 0, -1, -1});

  for (std::size_t i = 0; i < dec.tree_.size(); ++i) {
    const Cube c = dec.tree_[i].box;
    const int depth = dec.tree_[i].depth;
    const double r = c.half_side;
    bool want_split = false;
    if (contains(domain, c.center)) {
      // Whitney condition diam Q <= dist(Q, bdry) <= 4 diam Q, stated for the
      // center: 3r <= dist(c) <= 9r, decided by exact box predicates.
      const bool too_close = boundary_meets_open_box(domain, c.center, 3.0 * r);
      const bool too_far = !boundary_meets_closed_box(domain, c.center, 9.0 * r);
      if (!too_close && !too_far) {
        dec.tree_[i].cube = 0;
        continue;
      }
      want_split = true;
    } else {
      want_split = boundary_meets_open_box(domain, c.center, r);
    }
    if (!want_split) continue;
    const bool allowed = depth < opts.depth_limit || (depth < deepest && meets_focus(c, opts.focus));
    if (!allowed) continue;
    dec.tree_[i].child = static_cast<int>(dec.tree_.size());
    for (const Cube& k : split(c)) dec.tree_.push_back({k, depth + 1, -1, -1});
  }

  dec.index_leaves();
  dec.build_adjacency();
  dec.finish_stats(domain.area());
  if (dec.stats_.skirt_fraction > opts.max_skirt_fraction)
    throw ValidationError("domain too thin for depth limit (skirt fraction " +
                          std::to_string(dec.stats_.skirt_fraction) + ")");
  return dec;
}

WhitneyDecomposition whitney_decompose(const PolygonalDomain& domain, int depth_limit) {
  DecomposeOptions opts;
  opts.depth_limit = depth_limit;
  return whitney_decompose(domain, opts);
}

WhitneyDecomposition refine_4n(const WhitneyDecomposition& dec) {
  if (dec.flavor_ != Flavor::standard) throw ValidationError("decomposition is already refined");
  WhitneyDecomposition out;
  out.flavor_ = Flavor::refined;
  if (dec.tree_.empty()) {
    std::vector<Cube> cubes;
    std::vector<int> depths;
    for (std::size_t k = 0; k < dec.cubes_.size(); ++k) {
      for (const Cube& h : split(dec.cubes_[k]))
        for (const Cube& q : split(h)) {
          cubes.push_back(q);
          depths.push_back(dec.depths_[k] + 2);
        }
    }
    return WhitneyDecomposition::from_cubes(std::move(cubes), std::move(depths), Flavor::refined);
  }
  out.tree_ = dec.tree_;
  const std::size_t n = out.tree_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (out.tree_[i].cube < 0) continue;
    out.tree_[i].cube = -1;
    const int first = static_cast<int>(out.tree_.size());
    out.tree_[i].child = first;
    const Cube parent = out.tree_[i].box;
    const int depth = out.tree_[i].depth;
    for (const Cube& h : split(parent)) out.tree_.push_back({h, depth + 1, -1, -1});
    for (int c = 0; c < 4; ++c) {
      const int node = first + c;
      out.tree_[node].child = static_cast<int>(out.tree_.size());
      for (const Cube& q : split(out.tree_[node].box)) out.tree_.push_back({q, depth + 2, -1, 0});
    }
  }
  out.index_leaves();
  out.build_adjacency();
  out.finish_stats(dec.domain_area_);
  return out;
}

std::vector<CubeAnchor> compute_anchors(const WhitneyDecomposition& dec, const PolygonalDomain& domain) {
  std::vector<CubeAnchor> out;
  out.reserve(dec.size());
  for (const Cube& q : dec.cubes()) {
    const BoundarySample a = nearest_boundary_point(domain, q.center);
    out.push_back({a, element_for_direction(domain, a, q.center - a.point)});
  }
  return out;
}

int covering_multiplicity(const WhitneyDecomposition& dec) {
  int best = 0;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    const Cube& q = dec.cube(k);
    const Point lo = q.lo(), hi = q.hi();
    for (Point p : {q.center, lo, hi, Point{lo.x, hi.y}, Point{hi.x, lo.y}}) {
      int count = 0;
      for (int j : dec.neighbors(k)) count += dilate(dec.cube(j), 9.0 / 8.0).contains(p);
      best = std::max(best, count);
    }
  }
  return best;
}

}  // namespace c2trace
