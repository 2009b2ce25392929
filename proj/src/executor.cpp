#include "wcoj/executor.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <numeric>
#include <thread>

#include "wcoj/error.hpp"

namespace wcoj {

void ExecStats::merge(const ExecStats& o) {
  visited_prefix_count += o.visited_prefix_count;
  intersection_count += o.intersection_count;
  intermediate_tuple_count += o.intermediate_tuple_count;
  peak_intermediate_tuples = std::max(peak_intermediate_tuples, o.peak_intermediate_tuples);
  output_count += o.output_count;
}

// ---------------------------------------------------------------- Table

void Table::normalize() {
  const std::size_t w = width();
  if (w == 0) {
    rows = rows > 0 ? 1 : 0;
    return;
  }
  std::vector<std::uint32_t> idx(rows);
  std::iota(idx.begin(), idx.end(), 0u);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(row(a), row(a) + w, row(b), row(b) + w);
  };
  if (!std::is_sorted(idx.begin(), idx.end(), less)) std::sort(idx.begin(), idx.end(), less);
  std::vector<Key> out;
  out.reserve(cells.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Key* r = row(idx[i]);
    if (n > 0 && std::equal(r, r + w, out.data() + (n - 1) * w)) continue;
    out.insert(out.end(), r, r + w);
    ++n;
  }
  cells = std::move(out);
  rows = n;
}

Table Table::project(const std::vector<VertexId>& cols) const {
  std::vector<std::size_t> pos;
  for (VertexId c : cols) {
    auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) throw Error(ErrorCode::InvalidArgument, "projection onto a missing column");
    pos.push_back(static_cast<std::size_t>(it - columns.begin()));
  }
  Table out;
  out.columns = cols;
  out.cells.reserve(rows * cols.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const Key* r = row(i);
    for (auto p : pos) out.cells.push_back(r[p]);
  }
  out.rows = rows;
  out.normalize();
  return out;
}

// ---------------------------------------------------------------- NodeJoin

namespace {

// Visits members with rank in [lo, hi); stops when f returns true.
template <class F>
void scan(const KeySet& s, std::size_t lo, std::size_t hi, F&& f) {
  if (s.layout() == SetLayout::UintArray) {
    const auto a = s.array();
    hi = std::min(hi, a.size());
    for (std::size_t r = lo; r < hi; ++r) {
      if (f(a[r], static_cast<std::uint32_t>(r))) return;
    }
    return;
  }
  const auto words = s.words();
  std::size_t r = 0;
  for (std::size_t w = 0; w < words.size() && r < hi; ++w) {
    std::uint64_t bits = words[w];
    const auto count = static_cast<std::size_t>(std::popcount(bits));
    if (r + count <= lo) {
      r += count;
      continue;
    }
    while (bits != 0) {
      const int b = std::countr_zero(bits);
      bits &= bits - 1;
      if (r >= lo && r < hi) {
        const Key v = s.offset() + static_cast<Key>(w * 64 + static_cast<unsigned>(b));
        if (f(v, static_cast<std::uint32_t>(r))) return;
      }
      ++r;
    }
  }
}

class TableSink : public JoinSink {
 public:
  TableSink(std::vector<VertexId> columns, std::vector<std::size_t> levels)
      : levels_(std::move(levels)) {
    table.columns = std::move(columns);
    row_.resize(levels_.size());
  }

  void emit(const Key* values) override {
    if (levels_.empty()) {
      table.rows = 1;
      return;
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) row_[i] = values[levels_[i]];
    table.append(row_.data());
  }

  Table table;

 private:
  std::vector<std::size_t> levels_;
  std::vector<Key> row_;
};

}  // namespace

NodeJoin::NodeJoin(std::vector<JoinInput> inputs, std::vector<VertexId> order,
                   const std::vector<Selection>& fixed, VertexMask keep, VertexMask bound)
    : inputs_(std::move(inputs)), order_(std::move(order)) {
  levels_.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    auto& L = levels_[i];
    L.vertex = order_[i];
    for (const auto& s : fixed) {
      if (s.vertex == L.vertex) {
        L.fixed = true;
        L.constant = s.value;
      }
    }
    L.bound = !L.fixed && (bound & bit(L.vertex)) != 0;
    if (keep & bit(L.vertex)) kept_.push_back(i);
  }
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    const auto& in = inputs_[k];
    if (!in.trie || in.trie->arity() != in.attributes.size()) {
      throw Error(ErrorCode::ArityMismatch, "join input arity does not match its attributes");
    }
    std::size_t prev = 0;
    for (std::size_t l = 0; l < in.attributes.size(); ++l) {
      const std::size_t i = level_of(in.attributes[l]);
      if (l > 0 && i <= prev) {
        throw Error(ErrorCode::InvalidArgument, "join input order disagrees with the node order");
      }
      prev = i;
      levels_[i].parts.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(l)});
    }
  }
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].parts.empty()) {
      throw Error(ErrorCode::InvalidArgument, "attribute without any join input");
    }
    if (first_free_ == SIZE_MAX && !levels_[i].fixed && !levels_[i].bound) first_free_ = i;
  }
  witness_from_ = kept_.empty() ? 0 : kept_.back() + 1;
  scratch_.resize(levels_.size());
}

std::size_t NodeJoin::level_of(VertexId v) const {
  auto it = std::find(order_.begin(), order_.end(), v);
  if (it == order_.end()) throw Error(ErrorCode::InvalidArgument, "attribute not in node order");
  return static_cast<std::size_t>(it - order_.begin());
}

std::vector<VertexId> NodeJoin::kept_columns() const {
  std::vector<VertexId> out;
  for (auto i : kept_) out.push_back(order_[i]);
  return out;
}

void NodeJoin::run(JoinSink& sink, ExecStats& stats) {
  sink_ = &sink;
  stats_ = &stats;
  last_level_visits_ = 0;
  values_.assign(levels_.size(), 0);
  cursor_.resize(inputs_.size());
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    cursor_[k].assign(inputs_[k].trie->arity(), nullptr);
    cursor_[k][0] = &inputs_[k].trie->root();
  }
  if (!levels_.empty()) step(0);
}

Table NodeJoin::collect(ExecStats& stats) {
  TableSink sink(kept_columns(), kept_);
  run(sink, stats);
  sink.table.normalize();
  return std::move(sink.table);
}

bool NodeJoin::descend(std::size_t i, Key v, const Trie::Node* const* next) {
  values_[i] = v;
  ++stats_->visited_prefix_count;
  if (i + 1 == levels_.size()) ++last_level_visits_;
  const auto& parts = levels_[i].parts;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (next[p]) cursor_[parts[p].input][parts[p].level + 1] = next[p];
  }
  if (i == gate_level_ && !sink_->gate(values_.data())) return false;
  return step(i + 1);
}

bool NodeJoin::step(std::size_t i) {
  if (i == levels_.size()) {
    sink_->emit(values_.data());
    return true;
  }
  const Level& L = levels_[i];
  const bool witness = i >= witness_from_;
  const Trie::Node* next[kMaxVertices];
  auto child_of = [&](const Part& p, const Trie::Node* node, std::uint32_t rank) -> const Trie::Node* {
    const Trie& t = *inputs_[p.input].trie;
    if (p.level + 1 >= t.arity()) return nullptr;
    return &t.child_at(p.level, *node, rank);
  };

  if (L.fixed || L.bound) {
    const Key v = L.fixed ? L.constant : bound_values_[i];
    for (std::size_t p = 0; p < L.parts.size(); ++p) {
      const Trie::Node* node = cursor_[L.parts[p].input][L.parts[p].level];
      const auto r = node->values.rank(v);
      if (!r) return false;
      next[p] = child_of(L.parts[p], node, *r);
    }
    return descend(i, v, next);
  }

  std::size_t lo = 0;
  std::size_t hi = SIZE_MAX;
  const bool split = i == first_free_ && parts_ > 1;
  bool any = false;

  if (L.parts.size() == 1) {
    const Part& p = L.parts[0];
    const Trie::Node* node = cursor_[p.input][p.level];
    if (split) {
      const std::size_t n = node->values.size();
      lo = n * part_ / parts_;
      hi = n * (part_ + 1) / parts_;
    }
    scan(node->values, lo, hi, [&](Key v, std::uint32_t r) {
      next[0] = child_of(p, node, r);
      if (descend(i, v, next)) {
        any = true;
        return witness;
      }
      return false;
    });
    return any;
  }

  // Intersect the candidate sets, smallest first.
  std::vector<std::size_t> by_size(L.parts.size());
  std::iota(by_size.begin(), by_size.end(), std::size_t{0});
  auto set_of = [&](std::size_t p) -> const KeySet& {
    return cursor_[L.parts[p].input][L.parts[p].level]->values;
  };
  std::sort(by_size.begin(), by_size.end(),
            [&](std::size_t a, std::size_t b) { return set_of(a).size() < set_of(b).size(); });
  auto& cand = scratch_[i];
  intersect_into(set_of(by_size[0]), set_of(by_size[1]), cand);
  for (std::size_t k = 2; k < by_size.size() && !cand.empty(); ++k) filter_in_place(cand, set_of(by_size[k]));
  if (!split || part_ == 0) stats_->intersection_count += L.parts.size() - 1;
  if (split) {
    lo = cand.size() * part_ / parts_;
    hi = cand.size() * (part_ + 1) / parts_;
  } else {
    hi = cand.size();
  }
  // Deeper levels reuse their own scratch buffers, so this one stays valid.
  for (std::size_t c = lo; c < hi; ++c) {
    const Key v = cand[c];
    for (std::size_t p = 0; p < L.parts.size(); ++p) {
      const Trie::Node* node = cursor_[L.parts[p].input][L.parts[p].level];
      next[p] = child_of(L.parts[p], node, *node->values.rank(v));
    }
    if (descend(i, v, next)) {
      any = true;
      if (witness) return true;
    }
  }
  return any;
}

// ---------------------------------------------------------------- TrieCache

std::shared_ptr<const Trie> TrieCache::get(Key predicate, EdgeShape shape, bool swapped,
                                           LayoutMode mode) {
  const auto key = std::make_tuple(predicate, static_cast<int>(shape), swapped, static_cast<int>(mode));
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = tries_.find(key); it != tries_.end()) return it->second;
  const Relation* rel = db_.find(predicate);
  if (!rel) throw Error(ErrorCode::UnknownPredicate, "no relation for predicate key " + std::to_string(predicate));
  LayoutPolicy policy;
  policy.mode = mode;
  std::vector<Key> rows;
  std::size_t arity = 2;
  if (shape == EdgeShape::Diagonal) {
    arity = 1;
    for (const auto& [s, o] : rel->pairs) {
      if (s == o) rows.push_back(s);
    }
  } else {
    rows.reserve(rel->pairs.size() * 2);
    for (const auto& [s, o] : rel->pairs) {
      rows.push_back(swapped ? o : s);
      rows.push_back(swapped ? s : o);
    }
  }
  auto trie = std::make_shared<const Trie>(Trie::from_rows(std::move(rows), arity, policy));
  tries_.emplace(key, trie);
  return trie;
}

std::size_t TrieCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tries_.size();
}

// ---------------------------------------------------------------- plans

namespace {

VertexMask mask_of(const std::vector<VertexId>& vs) {
  VertexMask m = 0;
  for (auto v : vs) m |= bit(v);
  return m;
}

bool checks_pass(const ConjunctiveQuery& q, const PartitionedDatabase& db) {
  for (const auto& c : q.checks) {
    const Relation* rel = db.find(c.predicate);
    if (!rel || !std::binary_search(rel->pairs.begin(), rel->pairs.end(),
                                    std::make_pair(c.subject, c.object))) {
      return false;
    }
  }
  return true;
}

/// Shared state of one execution: kept attributes, inputs and node results.
class Execution {
 public:
  Execution(const GhdPlan& plan, const ConjunctiveQuery& query, TrieCache& cache,
            const ExecOptions& options)
      : plan_(plan), query_(query), cache_(cache), options_(options) {
    const auto& g = plan.graph;
    unsel_ = g.unselected_vertices();
    output_ = mask_of(query.output);
    pos_.assign(g.vertex_count(), 0);
    for (std::size_t i = 0; i < plan.attribute_order.size(); ++i) pos_[plan.attribute_order[i]] = i;
    policy_.mode = options.layout;
    const std::size_t n = plan.nodes.size();
    keep_.resize(n);
    results_.resize(n);
    messages_.resize(n);
    trace_.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& node = plan.nodes[t];
      VertexMask around = output_;
      if (node.parent) around |= plan.nodes[*node.parent].chi;
      for (auto c : node.children) around |= plan.nodes[c].chi;
      keep_[t] = node.chi & unsel_ & around;
      trace_[t].node = t;
      std::vector<VertexMask> masks;
      std::vector<double> cards;
      for (auto e : node.lambda) {
        masks.push_back(g.edges[e].mask());
        cards.push_back(g.edges[e].cardinality);
      }
      trace_[t].agm_bound = fractional_cover(masks, cards, node.chi & unsel_).bound;
    }
  }

  /// The join for node t: its edges plus messages of the listed children.
  NodeJoin node_join(std::size_t t, const std::vector<std::size_t>& from_children,
                     VertexMask bound = 0) {
    const auto& g = plan_.graph;
    const auto& node = plan_.nodes[t];
    std::vector<JoinInput> inputs;
    std::vector<Selection> fixed;
    for (auto id : node.lambda) {
      const auto& e = g.edges[id];
      JoinInput in;
      std::shared_ptr<const Trie> trie;
      if (e.shape == EdgeShape::Diagonal) {
        trie = cache_.get(e.predicate, EdgeShape::Diagonal, false, options_.layout);
        in.attributes = {e.attributes[0]};
      } else {
        const VertexId s = e.attributes[0];
        const VertexId o = e.attributes[1];
        const bool swapped = pos_[o] < pos_[s];
        trie = cache_.get(e.predicate, EdgeShape::Binary, swapped, options_.layout);
        in.attributes = swapped ? std::vector<VertexId>{o, s} : std::vector<VertexId>{s, o};
      }
      in.trie = trie.get();
      held_.push_back(std::move(trie));
      inputs.push_back(std::move(in));
      fixed.insert(fixed.end(), e.selections.begin(), e.selections.end());
    }
    for (auto c : from_children) {
      if (messages_[c]) inputs.push_back({messages_[c].get(), message_columns_[c]});
    }
    return NodeJoin(std::move(inputs), node.order, fixed, keep_[t], bound);
  }

  std::vector<std::size_t> children_except(std::size_t t, std::optional<std::size_t> skip) const {
    std::vector<std::size_t> out;
    for (auto c : plan_.nodes[t].children) {
      if (c != skip) out.push_back(c);
    }
    return out;
  }

  /// Runs node t to a table, splitting across threads for the root.
  /// Returns false when the node result is empty.
  bool compute(std::size_t t, ExecStats& stats) {
    NodeJoin join = node_join(t, children_except(t, std::nullopt));
    ExecStats local;
    Table result;
    const std::size_t threads = t == 0 ? std::max<std::size_t>(options_.threads, 1) : 1;
    if (threads == 1) {
      result = join.collect(local);
      trace_[t].visited_last_level = join.last_level_visits();
    } else {
      std::vector<Table> parts(threads);
      std::vector<ExecStats> part_stats(threads);
      std::vector<std::uint64_t> last(threads);
      std::vector<std::thread> pool;
      for (std::size_t k = 0; k < threads; ++k) {
        pool.emplace_back([&, k] {
          NodeJoin mine = join;
          mine.set_split(k, threads);
          parts[k] = mine.collect(part_stats[k]);
          last[k] = mine.last_level_visits();
        });
      }
      for (auto& th : pool) th.join();
      result.columns = join.kept_columns();
      for (std::size_t k = 0; k < threads; ++k) {
        result.cells.insert(result.cells.end(), parts[k].cells.begin(), parts[k].cells.end());
        result.rows += parts[k].rows;
        local.merge(part_stats[k]);
        trace_[t].visited_last_level += last[k];
      }
      result.normalize();
    }
    trace_[t].visited = local.visited_prefix_count;
    trace_[t].result_size = result.rows;
    stats.merge(local);
    results_[t] = std::move(result);
    return results_[t].rows > 0;
  }

  /// Projects node t's result onto the attributes shared with its parent.
  void make_message(std::size_t t) {
    const auto& node = plan_.nodes[t];
    const VertexMask shared = node.chi & plan_.nodes[*node.parent].chi & unsel_;
    std::vector<VertexId> cols;
    for (auto v : results_[t].columns) {
      if (shared & bit(v)) cols.push_back(v);
    }
    if (message_columns_.size() < plan_.nodes.size()) message_columns_.resize(plan_.nodes.size());
    message_columns_[t] = cols;
    if (cols.empty()) return;  // a disconnected child only has to be nonempty
    Table m = results_[t].project(cols);
    messages_[t] = std::make_shared<const Trie>(Trie::from_rows(std::move(m.cells), cols.size(), policy_));
  }

  /// Bottom-up pass over every node except the root and `skip`.
  bool bottom_up(std::optional<std::size_t> skip, ExecStats& stats) {
    message_columns_.resize(plan_.nodes.size());
    for (std::size_t t = plan_.nodes.size(); t-- > 1;) {
      if (t == skip) continue;
      if (!compute(t, stats)) return false;
      make_message(t);
    }
    return true;
  }

  /// Joins `acc` with the results of all remaining nodes (in BFS order),
  /// keeping only columns still needed, then projects to the output.
  Table top_down(Table acc, std::optional<std::size_t> skip, ExecStats& stats,
                 std::uint64_t acc_counts_as = 0) {
    const std::size_t n = plan_.nodes.size();
    std::vector<VertexMask> later(n + 1, 0);
    for (std::size_t t = n; t-- > 1;) later[t] = later[t + 1] | (t == skip ? 0 : keep_[t]);
    std::vector<std::uint64_t> sizes;
    for (std::size_t t = 1; t < n; ++t) {
      if (t == skip) continue;
      const VertexMask need = output_ | later[t + 1];
      const VertexMask have = mask_of(acc.columns);
      if ((keep_[t] & need & ~have) == 0) continue;
      acc = join(acc, results_[t], need);
      sizes.push_back(acc.rows);
    }
    if (!sizes.empty()) {
      if (acc_counts_as) stats.record_intermediate(acc_counts_as);
      sizes.pop_back();
      for (auto s : sizes) stats.record_intermediate(s);
    }
    return acc.project(query_.output);
  }

  static Table join(const Table& a, const Table& b, VertexMask need) {
    std::vector<std::size_t> shared_a;
    std::vector<std::size_t> shared_b;
    for (std::size_t j = 0; j < b.columns.size(); ++j) {
      auto it = std::find(a.columns.begin(), a.columns.end(), b.columns[j]);
      if (it != a.columns.end()) {
        shared_a.push_back(static_cast<std::size_t>(it - a.columns.begin()));
        shared_b.push_back(j);
      }
    }
    Table out;
    std::vector<std::size_t> from_a;
    std::vector<std::size_t> from_b;
    for (std::size_t j = 0; j < a.columns.size(); ++j) {
      if (need & bit(a.columns[j])) {
        out.columns.push_back(a.columns[j]);
        from_a.push_back(j);
      }
    }
    for (std::size_t j = 0; j < b.columns.size(); ++j) {
      if ((need & bit(b.columns[j])) &&
          std::find(out.columns.begin(), out.columns.end(), b.columns[j]) == out.columns.end()) {
        out.columns.push_back(b.columns[j]);
        from_b.push_back(j);
      }
    }
    std::vector<std::uint32_t> idx(b.rows);
    std::iota(idx.begin(), idx.end(), 0u);
    auto key_less_bb = [&](std::uint32_t x, std::uint32_t y) {
      for (auto j : shared_b) {
        if (b.row(x)[j] != b.row(y)[j]) return b.row(x)[j] < b.row(y)[j];
      }
      return false;
    };
    std::sort(idx.begin(), idx.end(), key_less_bb);
    std::vector<Key> probe(shared_a.size());
    auto row_less_probe = [&](std::uint32_t x, const std::vector<Key>& p) {
      for (std::size_t k = 0; k < shared_b.size(); ++k) {
        if (b.row(x)[shared_b[k]] != p[k]) return b.row(x)[shared_b[k]] < p[k];
      }
      return false;
    };
    auto probe_less_row = [&](const std::vector<Key>& p, std::uint32_t x) {
      for (std::size_t k = 0; k < shared_b.size(); ++k) {
        if (b.row(x)[shared_b[k]] != p[k]) return p[k] < b.row(x)[shared_b[k]];
      }
      return false;
    };
    std::vector<Key> row(out.columns.size());
    for (std::size_t i = 0; i < a.rows; ++i) {
      const Key* ra = a.row(i);
      for (std::size_t k = 0; k < shared_a.size(); ++k) probe[k] = ra[shared_a[k]];
      auto lo = std::lower_bound(idx.begin(), idx.end(), probe, row_less_probe);
      auto hi = std::upper_bound(lo, idx.end(), probe, probe_less_row);
      for (auto it = lo; it != hi; ++it) {
        const Key* rb = b.row(*it);
        std::size_t c = 0;
        for (auto j : from_a) row[c++] = ra[j];
        for (auto j : from_b) row[c++] = rb[j];
        if (out.columns.empty()) {
          out.rows = 1;
        } else {
          out.append(row.data());
        }
      }
    }
    out.normalize();
    return out;
  }

  const GhdPlan& plan_;
  const ConjunctiveQuery& query_;
  TrieCache& cache_;
  const ExecOptions& options_;
  VertexMask unsel_ = 0;
  VertexMask output_ = 0;
  std::vector<std::size_t> pos_;
  LayoutPolicy policy_;
  std::vector<VertexMask> keep_;
  std::vector<Table> results_;
  std::vector<std::shared_ptr<const Trie>> messages_;
  std::vector<std::vector<VertexId>> message_columns_;
  std::vector<std::shared_ptr<const Trie>> held_;
  std::vector<NodeTrace> trace_;
};

Table empty_output(const ConjunctiveQuery& q) {
  Table t;
  t.columns = q.output;
  return t;
}

using Clock = std::chrono::steady_clock;

ExecResult finish(Table table, ExecStats stats, std::vector<NodeTrace> trace, Clock::time_point start) {
  ExecResult r;
  stats.output_count = table.rows;
  stats.wall_time_us = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
  r.table = std::move(table);
  r.stats = stats;
  r.trace = std::move(trace);
  return r;
}

/// Handles the cases that need no joins. Returns true when `out` is final.
bool trivial(const GhdPlan& plan, const ConjunctiveQuery& query, const PartitionedDatabase& db,
             Table& out) {
  if (query.empty || !checks_pass(query, db)) {
    out = empty_output(query);
    return true;
  }
  if (plan.nodes.empty()) {
    out = empty_output(query);
    out.rows = out.columns.empty() ? 1 : 0;
    return true;
  }
  return false;
}

// Root sink that joins each root prefix with the pipelined child's slice.
class PipelineSink : public JoinSink {
 public:
  PipelineSink(NodeJoin child, const NodeJoin& root, const std::vector<VertexId>& prefix,
               ExecStats& stats)
      : child_(std::move(child)), stats_(stats) {
    for (auto v : prefix) {
      from_root_.push_back(root.level_of(v));
      to_child_.push_back(child_.level_of(v));
    }
    bound_.assign(child_.order().size(), 0);
    root_levels_ = root.kept_levels();
    const auto child_cols = child_.kept_columns();
    for (std::size_t j = 0; j < child_cols.size(); ++j) {
      if (std::find(prefix.begin(), prefix.end(), child_cols[j]) == prefix.end()) extra_.push_back(j);
    }
    combined.columns = root.kept_columns();
    for (auto j : extra_) combined.columns.push_back(child_cols[j]);
    row_.resize(combined.columns.size());
  }

  bool gate(const Key* values) override {
    for (std::size_t k = 0; k < from_root_.size(); ++k) bound_[to_child_[k]] = values[from_root_[k]];
    child_.bind(bound_);
    slice_ = child_.collect(stats_);
    child_visits += child_.last_level_visits();
    stats_.record_intermediate(slice_.rows);
    return slice_.rows > 0;
  }

  void emit(const Key* values) override {
    std::size_t c = 0;
    for (auto l : root_levels_) row_[c++] = values[l];
    for (std::size_t i = 0; i < slice_.rows; ++i) {
      const Key* r = slice_.row(i);
      std::size_t d = c;
      for (auto j : extra_) row_[d++] = r[j];
      if (combined.columns.empty()) {
        combined.rows = 1;
      } else {
        combined.append(row_.data());
      }
    }
  }

  Table combined;
  std::uint64_t child_visits = 0;

 private:
  NodeJoin child_;
  ExecStats& stats_;
  std::vector<std::size_t> from_root_;
  std::vector<std::size_t> to_child_;
  std::vector<Key> bound_;
  std::vector<std::size_t> root_levels_;
  std::vector<std::size_t> extra_;
  std::vector<Key> row_;
  Table slice_;
};

}  // namespace

ExecResult run_plan(const GhdPlan& plan, const ConjunctiveQuery& query,
                    const PartitionedDatabase& db, TrieCache& cache, const ExecOptions& options) {
  const auto start = Clock::now();
  ExecStats stats;
  Table out;
  if (trivial(plan, query, db, out)) return finish(std::move(out), stats, {}, start);

  Execution ex(plan, query, cache, options);
  if (!ex.bottom_up(std::nullopt, stats) || !ex.compute(0, stats)) {
    for (std::size_t t = 0; t < plan.nodes.size(); ++t) stats.record_intermediate(ex.results_[t].rows);
    return finish(empty_output(query), stats, ex.trace_, start);
  }
  for (std::size_t t = 1; t < plan.nodes.size(); ++t) stats.record_intermediate(ex.results_[t].rows);
  Table root = std::move(ex.results_[0]);
  const std::uint64_t root_rows = root.rows;
  out = ex.top_down(std::move(root), std::nullopt, stats, root_rows);
  return finish(std::move(out), stats, ex.trace_, start);
}

ExecResult run_pipelined(const GhdPlan& plan, const ConjunctiveQuery& query,
                         const PartitionedDatabase& db, TrieCache& cache, const ExecOptions& options) {
  if (plan.pipeline_edges.empty()) return run_plan(plan, query, db, cache, options);
  const auto start = Clock::now();
  ExecStats stats;
  Table out;
  if (trivial(plan, query, db, out)) return finish(std::move(out), stats, {}, start);

  const auto& edge = plan.pipeline_edges.front();
  const std::size_t pc = edge.child;
  Execution ex(plan, query, cache, options);
  if (!ex.bottom_up(pc, stats)) {
    for (std::size_t t = 1; t < plan.nodes.size(); ++t) stats.record_intermediate(ex.results_[t].rows);
    return finish(empty_output(query), stats, ex.trace_, start);
  }
  for (std::size_t t = 1; t < plan.nodes.size(); ++t) {
    if (t != pc) stats.record_intermediate(ex.results_[t].rows);
  }

  NodeJoin root = ex.node_join(0, ex.children_except(0, pc));
  NodeJoin child = ex.node_join(pc, ex.children_except(pc, std::nullopt), mask_of(edge.prefix));
  std::size_t gate = 0;
  for (auto v : edge.prefix) gate = std::max(gate, root.level_of(v));
  root.set_gate(gate);

  const std::size_t threads = std::max<std::size_t>(options.threads, 1);
  std::vector<ExecStats> part_stats(threads);
  std::vector<Table> parts(threads);
  std::vector<std::uint64_t> root_last(threads);
  std::vector<std::uint64_t> child_last(threads);
  std::vector<std::uint64_t> child_visits(threads);
  auto work = [&](std::size_t k) {
    NodeJoin mine = root;
    mine.set_split(k, threads);
    ExecStats child_stats;
    PipelineSink sink(child, mine, edge.prefix, child_stats);
    ExecStats root_stats;
    mine.run(sink, root_stats);
    root_last[k] = mine.last_level_visits();
    child_last[k] = sink.child_visits;
    child_visits[k] = child_stats.visited_prefix_count;
    part_stats[k] = root_stats;
    part_stats[k].merge(child_stats);
    parts[k] = std::move(sink.combined);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work, k);
    for (auto& th : pool) th.join();
  }
  Table combined;
  combined.columns = parts[0].columns;
  for (std::size_t k = 0; k < threads; ++k) {
    combined.cells.insert(combined.cells.end(), parts[k].cells.begin(), parts[k].cells.end());
    combined.rows += parts[k].rows;
    stats.merge(part_stats[k]);
    ex.trace_[0].visited_last_level += root_last[k];
    ex.trace_[pc].visited_last_level += child_last[k];
    ex.trace_[pc].visited += child_visits[k];
    ex.trace_[0].visited += part_stats[k].visited_prefix_count - child_visits[k];
  }
  combined.normalize();
  ex.trace_[0].result_size = combined.rows;
  const std::uint64_t combined_rows = combined.rows;
  out = ex.top_down(std::move(combined), pc, stats, combined_rows);
  return finish(std::move(out), stats, ex.trace_, start);
}

ExecResult execute(const GhdPlan& plan, const ConjunctiveQuery& query,
                   const PartitionedDatabase& db, TrieCache& cache, const ExecOptions& options) {
  return options.pipeline ? run_pipelined(plan, query, db, cache, options)
                          : run_plan(plan, query, db, cache, options);
}

}  // namespace wcoj
