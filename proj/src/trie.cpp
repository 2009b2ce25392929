#include "wcoj/trie.hpp"

#include <algorithm>
#include <numeric>

#include "wcoj/error.hpp"

namespace wcoj {

Trie Trie::from_rows(std::vector<Key> rows, std::size_t arity,
                     const LayoutPolicy& policy) {
  if (arity == 0) throw Error(ErrorCode::ArityMismatch, "trie arity must be >= 1");
  if (rows.size() % arity != 0) {
    throw Error(ErrorCode::ArityMismatch, "row data is not a multiple of the arity");
  }
  const std::size_t n = rows.size() / arity;

  // Sort row indices lexicographically, then drop duplicates.
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  auto row = [&](std::uint32_t i) { return rows.data() + std::size_t{i} * arity; };
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(row(a), row(a) + arity, row(b), row(b) + arity);
  });
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::uint32_t a, std::uint32_t b) {
                          return std::equal(row(a), row(a) + arity, row(b));
                        }),
            idx.end());

  Trie t;
  t.arity_ = arity;
  t.tuples_ = idx.size();
  t.levels_.resize(arity);

  // Each level is built from the row ranges grouped by the previous level.
  struct Range {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Range> groups{{0, idx.size()}};
  std::vector<Key> scratch;
  for (std::size_t level = 0; level < arity; ++level) {
    std::vector<Range> next;
    auto& nodes = t.levels_[level];
    nodes.reserve(groups.size());
    for (const auto& g : groups) {
      scratch.clear();
      Node node;
      node.first_child = static_cast<std::uint32_t>(next.size());
      std::size_t i = g.begin;
      while (i < g.end) {
        const Key v = row(idx[i])[level];
        std::size_t j = i + 1;
        while (j < g.end && row(idx[j])[level] == v) ++j;
        scratch.push_back(v);
        next.push_back({i, j});
        i = j;
      }
      node.values = KeySet::from_sorted(scratch, policy);
      nodes.push_back(std::move(node));
    }
    groups = std::move(next);
  }
  return t;
}

Trie Trie::build(std::span<const Tuple> tuples, std::vector<std::string> order,
                 const LayoutPolicy& policy) {
  const std::size_t arity = order.size();
  std::vector<Key> rows;
  rows.reserve(tuples.size() * arity);
  for (const auto& t : tuples) {
    if (t.size() != arity) {
      throw Error(ErrorCode::ArityMismatch,
                  "tuple of arity " + std::to_string(t.size()) +
                      " for attribute order of length " + std::to_string(arity));
    }
    rows.insert(rows.end(), t.begin(), t.end());
  }
  Trie trie = from_rows(std::move(rows), arity, policy);
  trie.order_ = std::move(order);
  return trie;
}

std::vector<Key> Trie::enumerate() const {
  std::vector<Key> out;
  if (tuples_ == 0) return out;
  out.reserve(tuples_ * arity_);
  Tuple prefix(arity_);
  auto walk = [&](auto&& self, std::size_t level, const Node& node) -> void {
    std::uint32_t r = 0;
    node.values.for_each([&](Key v) {
      prefix[level] = v;
      if (level + 1 == arity_) {
        out.insert(out.end(), prefix.begin(), prefix.end());
      } else {
        self(self, level + 1, child_at(level, node, r));
      }
      ++r;
    });
  };
  walk(walk, 0, root());
  return out;
}

}  // namespace wcoj
