#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "wcoj/ghd.hpp"
#include "wcoj/key_set.hpp"
#include "wcoj/query.hpp"
#include "wcoj/trie.hpp"
#include "wcoj/triples.hpp"

namespace wcoj {

struct ExecStats {
  std::uint64_t visited_prefix_count = 0;
  std::uint64_t intersection_count = 0;
  std::uint64_t intermediate_tuple_count = 0;
  std::uint64_t peak_intermediate_tuples = 0;
  std::uint64_t output_count = 0;
  std::uint64_t wall_time_us = 0;

  void record_intermediate(std::uint64_t tuples) {
    intermediate_tuple_count += tuples;
    peak_intermediate_tuples = std::max(peak_intermediate_tuples, tuples);
  }
  void merge(const ExecStats& o);
};

/// Row-major tuples over named columns. A table with no columns holds
/// either zero rows or one empty row.
struct Table {
  std::vector<VertexId> columns;
  std::vector<Key> cells;
  std::size_t rows = 0;

  std::size_t width() const noexcept { return columns.size(); }
  const Key* row(std::size_t i) const { return cells.data() + i * width(); }
  void append(const Key* values) {
    cells.insert(cells.end(), values, values + width());
    ++rows;
  }
  /// Sorts rows lexicographically and drops duplicates.
  void normalize();
  /// Distinct rows restricted to `cols` (each must be a column).
  Table project(const std::vector<VertexId>& cols) const;
};

/// One relation feeding a node join, with its attributes in trie level order.
struct JoinInput {
  const Trie* trie = nullptr;
  std::vector<VertexId> attributes;
};

/// Receives bindings from a node join. `values` is indexed by level.
class JoinSink {
 public:
  virtual ~JoinSink() = default;
  /// Called once the levels before the gate are bound; false prunes.
  virtual bool gate(const Key* /*values*/) { return true; }
  virtual void emit(const Key* values) = 0;
};

/// Generic-Join over the inputs of one decomposition node. Levels follow
/// `order`; a fixed level holds a selection constant and a bound level gets
/// its value from the caller, both probed instead of iterated. Levels after
/// the last kept attribute only need one witness.
class NodeJoin {
 public:
  NodeJoin(std::vector<JoinInput> inputs, std::vector<VertexId> order,
           const std::vector<Selection>& fixed, VertexMask keep, VertexMask bound = 0);

  const std::vector<VertexId>& order() const noexcept { return order_; }
  const std::vector<std::size_t>& kept_levels() const noexcept { return kept_; }
  std::vector<VertexId> kept_columns() const;
  std::size_t level_of(VertexId v) const;

  /// Iterates only part `part` of `parts` of the first iterated level.
  void set_split(std::size_t part, std::size_t parts) {
    part_ = part;
    parts_ = parts;
  }
  /// The sink's gate is called after binding level `level`.
  void set_gate(std::size_t level) { gate_level_ = level; }
  /// Values for bound levels, indexed by level.
  void bind(std::span<const Key> values) { bound_values_.assign(values.begin(), values.end()); }

  void run(JoinSink& sink, ExecStats& stats);
  std::uint64_t last_level_visits() const noexcept { return last_level_visits_; }

  /// Runs to a table over the kept columns, deduplicated.
  Table collect(ExecStats& stats);

 private:
  struct Part {
    std::uint32_t input;
    std::uint32_t level;
  };
  struct Level {
    VertexId vertex = 0;
    bool fixed = false;
    bool bound = false;
    Key constant = 0;
    std::vector<Part> parts;
  };

  bool descend(std::size_t i, Key v, const Trie::Node* const* next);
  bool step(std::size_t i);

  std::vector<JoinInput> inputs_;
  std::vector<VertexId> order_;
  std::vector<Level> levels_;
  std::vector<std::size_t> kept_;
  std::size_t witness_from_ = 0;  // first level run in existence mode
  std::size_t first_free_ = SIZE_MAX;
  std::size_t gate_level_ = SIZE_MAX;
  std::size_t part_ = 0;
  std::size_t parts_ = 1;
  std::vector<Key> bound_values_;

  // Run state: current node of every input at every trie level.
  std::vector<std::vector<const Trie::Node*>> cursor_;
  std::vector<Key> values_;
  std::vector<std::vector<Key>> scratch_;
  JoinSink* sink_ = nullptr;
  ExecStats* stats_ = nullptr;
  std::uint64_t last_level_visits_ = 0;
  bool pruned_ = false;
};

/// Edge tries shared across queries, keyed by predicate, shape, column
/// order and layout mode. Safe for concurrent use.
class TrieCache {
 public:
  explicit TrieCache(const PartitionedDatabase& db) : db_(db) {}

  std::shared_ptr<const Trie> get(Key predicate, EdgeShape shape, bool swapped, LayoutMode mode);
  std::size_t size() const;

 private:
  const PartitionedDatabase& db_;
  mutable std::mutex mu_;
  std::map<std::tuple<Key, int, bool, int>, std::shared_ptr<const Trie>> tries_;
};

struct ExecOptions {
  LayoutMode layout = LayoutMode::Auto;
  bool pipeline = true;
  std::size_t threads = 1;
};

struct NodeTrace {
  std::size_t node = 0;
  std::uint64_t visited = 0;
  std::uint64_t visited_last_level = 0;
  std::uint64_t result_size = 0;
  double agm_bound = 0;
};

struct ExecResult {
  Table table;  // columns in SELECT order, sorted and distinct
  ExecStats stats;
  std::vector<NodeTrace> trace;
};

/// Bottom-up per-node joins, then a top-down join of the node results.
ExecResult run_plan(const GhdPlan& plan, const ConjunctiveQuery& query,
                    const PartitionedDatabase& db, TrieCache& cache,
                    const ExecOptions& options = {});

/// Like run_plan, but the root consumes its pipelined child's tuples per
/// shared prefix instead of the child's full result. Falls back to run_plan
/// when the plan has no pipeline edge.
ExecResult run_pipelined(const GhdPlan& plan, const ConjunctiveQuery& query,
                         const PartitionedDatabase& db, TrieCache& cache,
                         const ExecOptions& options = {});

/// run_pipelined when options.pipeline is set, run_plan otherwise.
ExecResult execute(const GhdPlan& plan, const ConjunctiveQuery& query,
                   const PartitionedDatabase& db, TrieCache& cache,
                   const ExecOptions& options = {});

}  // namespace wcoj
