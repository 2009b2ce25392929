#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcoj/key_set.hpp"

namespace wcoj {

using Tuple = std::vector<Key>;

/// A relation stored level by level: level i holds, for every distinct
/// prefix of length i, the set of values of attribute i under that prefix.
///
/// Nodes of one level are stored contiguously; the children of a node are
/// the `values.size()` nodes starting at `first_child` on the next level, in
/// the same order as the node's values.
class Trie {
 public:
  struct Node {
    KeySet values;
    std::uint32_t first_child = 0;
  };

  Trie() = default;

  /// Builds from row-major tuples of the given arity (sorted and
  /// deduplicated internally). Arity must be at least 1.
  static Trie from_rows(std::vector<Key> rows, std::size_t arity,
                        const LayoutPolicy& policy = {});

  /// Builds from explicit tuples; every tuple must have
  /// `attribute_order.size()` components.
  static Trie build(std::span<const Tuple> tuples,
                    std::vector<std::string> attribute_order,
                    const LayoutPolicy& policy = {});

  std::size_t arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return tuples_; }
  bool empty() const noexcept { return tuples_ == 0; }
  const std::vector<std::string>& attribute_order() const noexcept { return order_; }

  const Node& root() const { return levels_[0][0]; }
  const std::vector<Node>& level(std::size_t i) const { return levels_[i]; }

  /// The node under `node` (which lives on `level`) for `value`.
  const Node* child(std::size_t level, const Node& node, Key value) const {
    const auto r = node.values.rank(value);
    if (!r) return nullptr;
    return &levels_[level + 1][node.first_child + *r];
  }
  const Node& child_at(std::size_t level, const Node& node, std::uint32_t rank) const {
    return levels_[level + 1][node.first_child + rank];
  }

  /// All tuples in lexicographic order, row-major.
  std::vector<Key> enumerate() const;

 private:
  std::size_t arity_ = 0;
  std::size_t tuples_ = 0;
  std::vector<std::string> order_;
  std::vector<std::vector<Node>> levels_;
};

}  // namespace wcoj
