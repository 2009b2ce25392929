#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wcoj/hypergraph.hpp"
#include "wcoj/triples.hpp"

namespace wcoj {

struct Term {
  enum class Kind : std::uint8_t { Variable, Iri, Literal };
  Kind kind = Kind::Variable;
  std::string value;  // variable name without '?', or the expanded constant

  bool is_variable() const noexcept { return kind == Kind::Variable; }
  friend bool operator==(const Term&, const Term&) = default;
};

struct TriplePattern {
  Term subject;
  Term predicate;
  Term object;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct ParsedQuery {
  std::vector<std::pair<std::string, std::string>> prefixes;
  std::vector<std::string> select;
  std::vector<TriplePattern> patterns;

  friend bool operator==(const ParsedQuery&, const ParsedQuery&) = default;
};

/// Parses `PREFIX p: <iri>` lines, `SELECT ?v... | *` and
/// `WHERE { pattern (. pattern)* }`. Errors carry line:column.
ParsedQuery parse_query(std::string_view text);

/// Renders a query that parses back to the same structure.
std::string render_query(const ParsedQuery& query);

/// A fully constant pattern, checked once before any join runs.
struct ExistenceCheck {
  Key predicate;
  Key subject;
  Key object;
};

/// The join form of a basic graph pattern over a loaded database.
struct ConjunctiveQuery {
  Hypergraph graph;
  std::vector<VertexId> output;  // SELECT order
  std::vector<ExistenceCheck> checks;
  bool empty = false;  // an absent predicate or constant forces no answers
  std::string empty_reason;
};

/// Variables become vertices; each constant subject/object becomes a fresh
/// selected vertex bound to its key. Absent predicates or constants mark the
/// query empty instead of failing.
ConjunctiveQuery to_conjunctive(const ParsedQuery& query,
                                const PartitionedDatabase& db);

/// Like to_conjunctive, but an absent predicate is Error(UnknownPredicate).
Hypergraph query_to_hypergraph(const ParsedQuery& query,
                               const PartitionedDatabase& db);

/// Last path segment of an IRI, for compact display.
std::string short_name(std::string_view term);

}  // namespace wcoj
