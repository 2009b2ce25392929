#include "wcoj/pairwise.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "wcoj/error.hpp"

namespace wcoj {
namespace {

std::size_t var_index(std::vector<std::string>& vars, const std::string& name) {
  auto it = std::find(vars.begin(), vars.end(), name);
  if (it != vars.end()) return static_cast<std::size_t>(it - vars.begin());
  vars.push_back(name);
  return vars.size() - 1;
}

Table scan(const TriplePattern& p, const std::vector<std::string>& vars,
           const PartitionedDatabase& db) {
  const auto pred = db.dictionary.lookup(p.predicate.value);
  const Relation* rel = pred ? db.find(*pred) : nullptr;
  if (!rel) throw Error(ErrorCode::UnknownPredicate, "unknown predicate <" + p.predicate.value + ">");

  auto column = [&](const Term& t) {
    return static_cast<VertexId>(std::find(vars.begin(), vars.end(), t.value) - vars.begin());
  };
  std::optional<Key> s_const;
  std::optional<Key> o_const;
  bool absent = false;
  if (!p.subject.is_variable()) {
    s_const = db.dictionary.lookup(p.subject.value);
    absent = absent || !s_const;
  }
  if (!p.object.is_variable()) {
    o_const = db.dictionary.lookup(p.object.value);
    absent = absent || !o_const;
  }
  const bool same = p.subject.is_variable() && p.object.is_variable() &&
                    p.subject.value == p.object.value;

  Table t;
  if (p.subject.is_variable()) t.columns.push_back(column(p.subject));
  if (p.object.is_variable() && !same) t.columns.push_back(column(p.object));
  if (absent) return t;
  for (const auto& [s, o] : rel->pairs) {
    if (p.subject.is_variable() == false && s != *s_const) continue;
    if (p.object.is_variable() == false && o != *o_const) continue;
    if (same && s != o) continue;
    Key row[2];
    std::size_t n = 0;
    if (p.subject.is_variable()) row[n++] = s;
    if (p.object.is_variable() && !same) row[n++] = o;
    if (n == 0) {
      t.rows = 1;
    } else {
      t.append(row);
    }
  }
  return t;
}

// Join key of up to two shared columns packed into 64 bits.
std::uint64_t pack(const Key* row, const std::vector<std::size_t>& cols) {
  std::uint64_t k = 0;
  for (auto c : cols) k = (k << 32) | row[c];
  return k;
}

Table hash_join(const Table& left, const Table& right) {
  std::vector<std::size_t> lk;
  std::vector<std::size_t> rk;
  std::vector<std::size_t> r_extra;
  for (std::size_t j = 0; j < right.columns.size(); ++j) {
    auto it = std::find(left.columns.begin(), left.columns.end(), right.columns[j]);
    if (it != left.columns.end()) {
      lk.push_back(static_cast<std::size_t>(it - left.columns.begin()));
      rk.push_back(j);
    } else {
      r_extra.push_back(j);
    }
  }
  Table out;
  out.columns = left.columns;
  for (auto j : r_extra) out.columns.push_back(right.columns[j]);

  // Build on the smaller input, probe with the other.
  const bool build_left = left.rows < right.rows;
  const Table& build = build_left ? left : right;
  const Table& probe = build_left ? right : left;
  const auto& bk = build_left ? lk : rk;
  const auto& pk = build_left ? rk : lk;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index;
  index.reserve(build.rows);
  for (std::size_t i = 0; i < build.rows; ++i) {
    index[pack(build.row(i), bk)].push_back(static_cast<std::uint32_t>(i));
  }

  std::size_t total = 0;
  for (std::size_t i = 0; i < probe.rows; ++i) {
    if (auto it = index.find(pack(probe.row(i), pk)); it != index.end()) total += it->second.size();
  }
  out.cells.reserve(total * out.width());
  std::vector<Key> row(out.width());
  for (std::size_t i = 0; i < probe.rows; ++i) {
    auto it = index.find(pack(probe.row(i), pk));
    if (it == index.end()) continue;
    for (auto m : it->second) {
      const Key* l = build_left ? build.row(m) : probe.row(i);
      const Key* r = build_left ? probe.row(i) : build.row(m);
      std::size_t c = 0;
      for (std::size_t j = 0; j < left.width(); ++j) row[c++] = l[j];
      for (auto j : r_extra) row[c++] = r[j];
      if (out.columns.empty()) {
        out.rows = 1;
      } else {
        out.append(row.data());
      }
    }
  }
  return out;
}

}  // namespace

PairwisePlan plan_pairwise(const ParsedQuery& query) {
  PairwisePlan plan;
  for (const auto& p : query.patterns) {
    if (p.subject.is_variable()) var_index(plan.variables, p.subject.value);
    if (p.object.is_variable()) var_index(plan.variables, p.object.value);
  }
  std::vector<bool> used(query.patterns.size(), false);
  std::vector<std::string> joined;
  auto shares = [&](const TriplePattern& p) {
    for (const Term* t : {&p.subject, &p.object}) {
      if (t->is_variable() && std::find(joined.begin(), joined.end(), t->value) != joined.end()) {
        return true;
      }
    }
    return false;
  };
  for (std::size_t step = 0; step < query.patterns.size(); ++step) {
    std::size_t pick = query.patterns.size();
    for (std::size_t i = 0; i < query.patterns.size(); ++i) {
      if (!used[i] && (step == 0 || shares(query.patterns[i]))) {
        pick = i;
        break;
      }
    }
    if (pick == query.patterns.size()) {
      pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
    }
    used[pick] = true;
    plan.pattern_order.push_back(pick);
    for (const Term* t : {&query.patterns[pick].subject, &query.patterns[pick].object}) {
      if (t->is_variable()) joined.push_back(t->value);
    }
  }
  return plan;
}

PairwiseResult pairwise_execute(const ParsedQuery& query, const PartitionedDatabase& db) {
  const auto start = std::chrono::steady_clock::now();
  const PairwisePlan plan = plan_pairwise(query);
  PairwiseResult result;
  auto& stats = result.stats;

  std::vector<Table> scans;
  for (const auto& p : query.patterns) {
    scans.push_back(scan(p, plan.variables, db));
    stats.record_intermediate(scans.back().rows);
  }

  Table acc;
  if (!plan.pattern_order.empty()) acc = std::move(scans[plan.pattern_order[0]]);
  for (std::size_t k = 1; k < plan.pattern_order.size(); ++k) {
    if (k > 1) stats.record_intermediate(acc.rows);
    acc = hash_join(acc, scans[plan.pattern_order[k]]);
    result.join_sizes.push_back(acc.rows);
  }

  std::vector<VertexId> out_cols;
  for (const auto& v : query.select) {
    out_cols.push_back(static_cast<VertexId>(
        std::find(plan.variables.begin(), plan.variables.end(), v) - plan.variables.begin()));
  }
  result.table = acc.project(out_cols);
  stats.output_count = result.table.rows;
  stats.wall_time_us = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start)
          .count());
  return result;
}

}  // namespace wcoj
