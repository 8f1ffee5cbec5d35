#include "gwspeed/gw_tree.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "gwspeed/errors.hpp"

namespace gwspeed {

Tree::Tree() { reset(); }

void Tree::reset() {
  vertices_.clear();
  vertices_.push_back({kNoVertex, kNoVertex, 0, 0, 0});
  realized_ = 0;
}

VertexId Tree::child(VertexId v, std::int32_t i) const {
  const Record& r = at(v);
  if (i < 0 || i >= r.n_children) {
    throw StateCorrupt("child index " + std::to_string(i) + " out of range for vertex " +
                       std::to_string(v) + " with " + std::to_string(r.n_children) +
                       " children");
  }
  return r.first_child + i;
}

VertexId Tree::realize_children(VertexId v, std::int32_t count) {
  if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
    throw StateCorrupt("no vertex " + std::to_string(v));
  }
  if (count < 1) throw PreconditionError("child count must be >= 1");
  if (vertices_[static_cast<std::size_t>(v)].n_children > 0) {
    throw AlreadyRealized("vertex " + std::to_string(v));
  }
  if (vertices_.size() + static_cast<std::size_t>(count) >
      static_cast<std::size_t>(std::numeric_limits<VertexId>::max())) {
    throw PopulationOverflow("tree arena exhausted");
  }
  const auto first = static_cast<VertexId>(vertices_.size());
  const std::int32_t depth = vertices_[static_cast<std::size_t>(v)].depth + 1;
  for (std::int32_t i = 0; i < count; ++i) {
    vertices_.push_back({v, kNoVertex, 0, depth, i});
  }
  Record& r = vertices_[static_cast<std::size_t>(v)];
  r.first_child = first;
  r.n_children = count;
  ++realized_;
  return first;
}

std::vector<std::int32_t> Tree::index_path(VertexId v) const {
  std::vector<std::int32_t> path;
  while (v != root()) {
    path.push_back(at(v).index);
    v = at(v).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void Tree::dump(std::ostream& os) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Record& r = vertices_[i];
    os << i << ' ' << r.parent << ' ' << r.depth << ' ' << r.n_children << '\n';
  }
}

}  // namespace gwspeed
