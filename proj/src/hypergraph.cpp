#include "wcoj/hypergraph.hpp"

#include <bit>
#include <cmath>

#include "wcoj/error.hpp"

namespace wcoj {

VertexMask HyperEdge::mask() const {
  VertexMask m = 0;
  for (VertexId v : attributes) m |= bit(v);
  return m;
}

std::optional<Key> HyperEdge::selection_for(VertexId v) const {
  for (const auto& s : selections) {
    if (s.vertex == v) return s.value;
  }
  return std::nullopt;
}

VertexId Hypergraph::add_vertex(std::string name, bool is_selected) {
  if (vertices.size() >= kMaxVertices) {
    throw Error(ErrorCode::TooManyEdges, "query has more than 64 attributes");
  }
  vertices.push_back(std::move(name));
  selected.push_back(is_selected);
  return static_cast<VertexId>(vertices.size() - 1);
}

std::optional<VertexId> Hypergraph::find_vertex(std::string_view name) const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] == name) return static_cast<VertexId>(i);
  }
  return std::nullopt;
}

VertexMask Hypergraph::all_vertices() const {
  return vertices.size() >= 64 ? ~VertexMask{0}
                               : (VertexMask{1} << vertices.size()) - 1;
}

VertexMask Hypergraph::unselected_vertices() const {
  VertexMask m = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!selected[i]) m |= bit(static_cast<VertexId>(i));
  }
  return m;
}

VertexMask Hypergraph::covered_vertices() const {
  VertexMask m = 0;
  for (const auto& e : edges) m |= e.mask();
  return m;
}

std::vector<VertexId> mask_vertices(VertexMask m) {
  std::vector<VertexId> out;
  while (m != 0) {
    out.push_back(static_cast<VertexId>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

namespace {

bool positive(double x) { return x > 1e-12; }
bool negative(double x) { return x < -1e-12; }
bool positive(const Rational& x) { return x > Rational(0); }
bool negative(const Rational& x) { return x < Rational(0); }

/// Solves the cover LP through its dual, max sum y_v subject to
/// sum_{v in e} y_v <= c_e for every edge, which is feasible at y = 0 because
/// all costs are nonnegative. Bland's rule keeps degenerate programs from
/// cycling. Returns the primal weights (the optimal dual prices of the edge
/// rows) and the shared optimum.
template <class T>
std::pair<T, std::vector<T>> solve_cover(std::span<const VertexMask> edges,
                                         const std::vector<T>& costs,
                                         VertexMask restrict_to) {
  const auto rows = mask_vertices(restrict_to);
  for (VertexId v : rows) {
    bool covered = false;
    for (VertexMask e : edges) covered = covered || (e & bit(v)) != 0;
    if (!covered) {
      throw Error(ErrorCode::Infeasible,
                  "vertex " + std::to_string(v) + " is not covered by any edge");
    }
  }
  const std::size_t m = rows.size();   // dual variables
  const std::size_t n = edges.size();  // dual constraints
  const std::size_t cols = m + n;
  if (m == 0) return {T(0), std::vector<T>(n, T(0))};

  std::vector<std::vector<T>> tab(n, std::vector<T>(cols + 1, T(0)));
  std::vector<T> z(cols + 1, T(0));
  std::vector<std::size_t> basis(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (edges[i] & bit(rows[j])) tab[i][j] = T(1);
    }
    tab[i][m + i] = T(1);
    tab[i][cols] = costs[i];
    basis[i] = m + i;
  }
  for (std::size_t j = 0; j < m; ++j) z[j] = T(-1);

  for (std::size_t iter = 0; iter < 10000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (negative(z[j])) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = n;
    T best_ratio{};
    for (std::size_t i = 0; i < n; ++i) {
      if (!positive(tab[i][enter])) continue;
      T ratio = tab[i][cols] / tab[i][enter];
      if (leave == n || ratio < best_ratio ||
          (!(best_ratio < ratio) && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == n) {
      throw Error(ErrorCode::Infeasible, "cover program is unbounded");
    }
    const T pivot = tab[leave][enter];
    for (auto& x : tab[leave]) x = x / pivot;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == leave) continue;
      const T f = tab[i][enter];
      if (!positive(f) && !negative(f)) continue;
      for (std::size_t j = 0; j <= cols; ++j) tab[i][j] = tab[i][j] - f * tab[leave][j];
    }
    const T f = z[enter];
    for (std::size_t j = 0; j <= cols; ++j) z[j] = z[j] - f * tab[leave][j];
    basis[leave] = enter;
  }

  std::vector<T> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = z[m + i];
  return {z[cols], weights};
}

}  // namespace

FractionalCover fractional_cover(std::span<const VertexMask> edges,
                                 std::span<const double> cardinalities,
                                 VertexMask restrict_to) {
  std::vector<double> costs(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    costs[i] = cardinalities[i] > 1 ? std::log(cardinalities[i]) : 0.0;
  }
  auto [objective, weights] = solve_cover<double>(edges, costs, restrict_to);
  for (auto& w : weights) {
    if (w < 0 && w > -1e-12) w = 0;
  }
  FractionalCover cover;
  cover.weights = std::move(weights);
  cover.log_bound = objective;
  cover.bound = std::exp(objective);
  return cover;
}

FractionalCover fractional_cover(const Hypergraph& h, VertexMask restrict_to) {
  std::vector<VertexMask> masks;
  std::vector<double> cards;
  for (const auto& e : h.edges) {
    masks.push_back(e.mask());
    cards.push_back(e.cardinality);
  }
  return fractional_cover(masks, cards, restrict_to);
}

Rational fractional_cover_number(std::span<const VertexMask> edges,
                                 VertexMask restrict_to) {
  std::vector<Rational> costs(edges.size(), Rational(1));
  return solve_cover<Rational>(edges, costs, restrict_to).first;
}

Rational fhw_width(const Hypergraph& h, std::span<const std::size_t> edge_ids,
                   VertexMask restrict_to) {
  std::vector<VertexMask> masks;
  masks.reserve(edge_ids.size());
  for (auto id : edge_ids) masks.push_back(h.edges.at(id).mask());
  return fractional_cover_number(masks, restrict_to);
}

}  // namespace wcoj
