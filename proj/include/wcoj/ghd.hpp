#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wcoj/hypergraph.hpp"
#include "wcoj/rational.hpp"

namespace wcoj {

inline constexpr std::size_t kMaxPlanEdges = 8;

/// One node of a decomposition tree. Edge ids index the plan's hypergraph.
struct GhdNode {
  std::vector<std::size_t> lambda;
  VertexMask chi = 0;
  Rational width;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  std::size_t depth = 0;
  std::vector<VertexId> order;  // global order restricted to chi
};

struct PipelineEdge {
  std::size_t parent = 0;
  std::size_t child = 0;
  std::vector<VertexId> prefix;
};

struct PlannerOptions {
  bool selection_pushdown = true;
  bool attribute_reorder = true;
  bool pipeline = true;
};

/// A decomposition chosen for execution. Nodes are stored in BFS order with
/// the root at index 0. The hypergraph may hold extra selection edges that
/// were duplicated into other subtrees; those act as filters only.
struct GhdPlan {
  Hypergraph graph;
  std::vector<bool> duplicate;  // per edge of `graph`
  std::vector<GhdNode> nodes;
  Rational fhw;
  std::size_t height = 0;
  std::size_t selection_depth = 0;
  std::vector<VertexId> attribute_order;
  std::vector<PipelineEdge> pipeline_edges;
  std::string canonical;

  const GhdNode& root() const { return nodes.front(); }
};

/// A tree over edge blocks as produced by enumeration: block i holds the
/// edges whose bits are set in `blocks[i]`, `parents[i]` is its parent
/// (the root has none).
struct GhdShape {
  std::vector<std::uint32_t> blocks;
  std::vector<std::optional<std::size_t>> parents;
};

/// Streams every rooted tree whose nodes partition the edges of `h` into
/// nonempty blocks with chi = union of the block's edges and which
/// satisfies running intersection. Each unordered tree appears once.
/// Throws Error(TooManyEdges) beyond kMaxPlanEdges.
void for_each_ghd(const Hypergraph& h, const std::function<void(const GhdShape&)>& visit);

/// Materializes a shape as a plan (widths, depths, metrics). `pushdown`
/// selects whether widths count only unselected attributes.
GhdPlan make_plan(const Hypergraph& h, const GhdShape& shape, bool pushdown);

std::vector<GhdPlan> enumerate_ghds(const Hypergraph& h, bool pushdown = true);

/// Adds one filter copy of each selection edge to every root subtree that
/// lacks it but has an edge covering its unselected attributes. Returns
/// nullopt when no copy applies. Selection depth is carried over unchanged.
std::optional<GhdPlan> duplicate_selections(const GhdPlan& plan);

/// Picks the plan to execute and fixes attribute orders and pipelining.
GhdPlan choose_plan(const Hypergraph& h, const PlannerOptions& options = {});

/// Orders every vertex: BFS over nodes from the root. With reordering,
/// selected attributes come first by ascending edge cardinality.
std::vector<VertexId> global_attribute_order(const GhdPlan& plan, bool attribute_reorder);

/// Fills each node's local order from the plan's global order.
void assign_local_orders(GhdPlan& plan);

/// Marks at most one (root, child) pair whose shared unselected attributes
/// lead both node orders.
void mark_pipeline_edges(GhdPlan& plan);

/// Checks edge coverage, running intersection and chi within the union of
/// lambda. Returns a description of the first violation, or empty.
std::string check_ghd(const GhdPlan& plan);

/// Plan text for the explain command.
std::string render_plan(const GhdPlan& plan);

}  // namespace wcoj
