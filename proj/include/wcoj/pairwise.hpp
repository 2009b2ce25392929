#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcoj/executor.hpp"
#include "wcoj/query.hpp"
#include "wcoj/triples.hpp"

namespace wcoj {

/// Left-deep hash-join plan: patterns in text order, each next pattern the
/// first remaining one that shares a variable with those already joined.
struct PairwisePlan {
  std::vector<std::size_t> pattern_order;
  std::vector<std::string> variables;  // column ids index this list
};

PairwisePlan plan_pairwise(const ParsedQuery& query);

struct PairwiseResult {
  Table table;  // columns index PairwisePlan::variables, in SELECT order
  ExecStats stats;
  std::vector<std::uint64_t> join_sizes;  // one per join, in plan order
};

/// Scans each pattern with its constant and repeated-variable filters, then
/// joins them pairwise. Counts every scan and every join result except the
/// last as an intermediate. Throws Error(UnknownPredicate).
PairwiseResult pairwise_execute(const ParsedQuery& query, const PartitionedDatabase& db);

}  // namespace wcoj
