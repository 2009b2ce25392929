#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcoj/dictionary.hpp"
#include "wcoj/rational.hpp"

namespace wcoj {

using VertexId = std::uint32_t;
using VertexMask = std::uint64_t;

inline constexpr std::size_t kMaxVertices = 64;

constexpr VertexMask bit(VertexId v) { return VertexMask{1} << v; }

/// How an edge reads its predicate relation: both columns, or only the
/// pairs with subject == object (a pattern like `?x p ?x`).
enum class EdgeShape : std::uint8_t { Binary, Diagonal };

struct Selection {
  VertexId vertex;
  Key value;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct HyperEdge {
  std::string relation;  // display name of the predicate
  Key predicate = 0;
  EdgeShape shape = EdgeShape::Binary;
  // Subject column first, then object column (one entry for Diagonal).
  std::vector<VertexId> attributes;
  std::vector<Selection> selections;
  double cardinality = 0;

  VertexMask mask() const;
  bool has_selection() const noexcept { return !selections.empty(); }
  std::optional<Key> selection_for(VertexId v) const;
};

/// Query hypergraph: one vertex per attribute, one edge per relation.
/// Constant positions become "selected" vertices bound to a key.
struct Hypergraph {
  std::vector<std::string> vertices;
  std::vector<bool> selected;
  std::vector<HyperEdge> edges;

  VertexId add_vertex(std::string name, bool is_selected = false);
  std::optional<VertexId> find_vertex(std::string_view name) const;
  std::size_t vertex_count() const noexcept { return vertices.size(); }
  VertexMask all_vertices() const;
  VertexMask unselected_vertices() const;
  VertexMask covered_vertices() const;
};

struct FractionalCover {
  std::vector<double> weights;  // one per edge
  double log_bound = 0;         // sum of x_e * ln|R_e|
  double bound = 1;             // exp(log_bound)
};

/// Minimizes sum x_e * ln max(|R_e|, 1) subject to every vertex in
/// `restrict_to` having incident weight >= 1. Throws Error(Infeasible) when a
/// vertex of `restrict_to` lies in no edge.
FractionalCover fractional_cover(std::span<const VertexMask> edges,
                                 std::span<const double> cardinalities,
                                 VertexMask restrict_to);
FractionalCover fractional_cover(const Hypergraph& h, VertexMask restrict_to);

/// Exact fractional edge cover number (all edges weighted equally).
Rational fractional_cover_number(std::span<const VertexMask> edges,
                                 VertexMask restrict_to);

/// Width of a GHD node: the cover number of `restrict_to` using only the
/// listed edges of `h`.
Rational fhw_width(const Hypergraph& h, std::span<const std::size_t> edge_ids,
                   VertexMask restrict_to);

std::vector<VertexId> mask_vertices(VertexMask m);

}  // namespace wcoj
