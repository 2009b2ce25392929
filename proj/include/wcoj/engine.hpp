#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wcoj/executor.hpp"
#include "wcoj/ghd.hpp"
#include "wcoj/query.hpp"
#include "wcoj/triples.hpp"

namespace wcoj {

enum class EngineKind { Wcoj, Pairwise };

std::optional<EngineKind> parse_engine_kind(std::string_view name);
std::optional<LayoutMode> parse_layout_mode(std::string_view name);

/// Toggles only affect the wcoj engine.
struct RunConfig {
  EngineKind engine = EngineKind::Wcoj;
  LayoutMode layout = LayoutMode::Auto;
  bool attr_reorder = true;
  bool ghd_pushdown = true;
  bool pipeline = true;
  std::size_t threads = 1;

  PlannerOptions planner() const { return {ghd_pushdown, attr_reorder, pipeline}; }
  ExecOptions exec() const { return {layout, pipeline, threads}; }
};

struct QueryResult {
  std::vector<std::string> columns;  // SELECT variables
  Table table;                       // sorted by encoded keys, distinct
  ExecStats stats;
};

/// A loaded database with its trie cache.
class Engine {
 public:
  explicit Engine(PartitionedDatabase db);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Loads a snapshot or a triple file.
  static std::unique_ptr<Engine> open(const std::filesystem::path& path);

  const PartitionedDatabase& database() const noexcept { return *db_; }

  QueryResult run(const ParsedQuery& query, const RunConfig& config);
  QueryResult run(std::string_view sparql, const RunConfig& config);

  /// The wcoj plan text for a query.
  std::string explain(std::string_view sparql, const RunConfig& config) const;

  /// Decoded values, tab-separated, one row per line, no header.
  std::string to_tsv(const QueryResult& result) const;

 private:
  std::unique_ptr<PartitionedDatabase> db_;
  std::unique_ptr<TrieCache> cache_;
};

/// Flat JSON object with the counters and wall time.
std::string stats_json(const ExecStats& stats);

}  // namespace wcoj
