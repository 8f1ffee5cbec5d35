#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace gwspeed {

using VertexId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;

/**
 * Lazily grown rooted tree stored in an arena.
 *
 * Children of a vertex are allocated contiguously when the vertex is
 * realized, so child i of v is first_child(v) + i. A vertex with zero
 * children is unrealized: offspring counts are >= 1 in this model.
 */
class Tree {
 public:
  Tree();

  static constexpr VertexId root() { return 0; }

  /// Drops everything but the root. Keeps arena capacity.
  void reset();

  std::size_t size() const { return vertices_.size(); }
  std::size_t realized_count() const { return realized_; }

  VertexId parent(VertexId v) const { return at(v).parent; }
  std::int32_t depth(VertexId v) const { return at(v).depth; }
  /// 0-based position among the parent's children (0 for the root).
  std::int32_t index_in_parent(VertexId v) const { return at(v).index; }
  std::int32_t child_count(VertexId v) const { return at(v).n_children; }
  bool is_realized(VertexId v) const { return at(v).n_children > 0; }

  VertexId child(VertexId v, std::int32_t i) const;

  /// Appends `count` children in index order; throws AlreadyRealized on a
  /// second call for the same vertex. Returns the id of child 0; the
  /// children occupy [result, result + count).
  VertexId realize_children(VertexId v, std::int32_t count);

  /// Child indices on the path from the root to v.
  std::vector<std::int32_t> index_path(VertexId v) const;

  /// Debug dump, one line per vertex: "id parent depth n_children".
  void dump(std::ostream& os) const;

 private:
  struct Record {
    VertexId parent;
    VertexId first_child;
    std::int32_t n_children;
    std::int32_t depth;
    std::int32_t index;
  };

  const Record& at(VertexId v) const { return vertices_[static_cast<std::size_t>(v)]; }

  std::vector<Record> vertices_;
  std::size_t realized_ = 0;
};

}  // namespace gwspeed
