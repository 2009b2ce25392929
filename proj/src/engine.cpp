#include "wcoj/engine.hpp"

#include "json.hpp"

#include "wcoj/error.hpp"
#include "wcoj/pairwise.hpp"

namespace wcoj {

std::optional<EngineKind> parse_engine_kind(std::string_view name) {
  if (name == "wcoj") return EngineKind::Wcoj;
  if (name == "pairwise") return EngineKind::Pairwise;
  return std::nullopt;
}

std::optional<LayoutMode> parse_layout_mode(std::string_view name) {
  if (name == "auto") return LayoutMode::Auto;
  if (name == "uint") return LayoutMode::Uint;
  if (name == "bitset") return LayoutMode::Bitset;
  return std::nullopt;
}

Engine::Engine(PartitionedDatabase db)
    : db_(std::make_unique<PartitionedDatabase>(std::move(db))),
      cache_(std::make_unique<TrieCache>(*db_)) {}

std::unique_ptr<Engine> Engine::open(const std::filesystem::path& path) {
  return std::make_unique<Engine>(load_database(path));
}

QueryResult Engine::run(const ParsedQuery& query, const RunConfig& config) {
  QueryResult out;
  out.columns = query.select;
  if (config.engine == EngineKind::Pairwise) {
    auto r = pairwise_execute(query, *db_);
    out.table = std::move(r.table);
    out.stats = r.stats;
    return out;
  }
  const ConjunctiveQuery cq = to_conjunctive(query, *db_);
  const GhdPlan plan = choose_plan(cq.graph, config.planner());
  auto r = execute(plan, cq, *db_, *cache_, config.exec());
  out.table = std::move(r.table);
  out.stats = r.stats;
  return out;
}

QueryResult Engine::run(std::string_view sparql, const RunConfig& config) {
  return run(parse_query(sparql), config);
}

std::string Engine::explain(std::string_view sparql, const RunConfig& config) const {
  const ParsedQuery query = parse_query(sparql);
  const ConjunctiveQuery cq = to_conjunctive(query, *db_);
  std::string text;
  if (cq.empty) text += "empty: " + cq.empty_reason + "\n";
  text += render_plan(choose_plan(cq.graph, config.planner()));
  return text;
}

std::string Engine::to_tsv(const QueryResult& result) const {
  std::string out;
  const std::size_t w = result.table.width();
  for (std::size_t i = 0; i < result.table.rows; ++i) {
    const Key* row = result.table.row(i);
    for (std::size_t j = 0; j < w; ++j) {
      if (j) out += '\t';
      out += db_->dictionary.decode(row[j]);
    }
    out += '\n';
  }
  return out;
}

std::string stats_json(const ExecStats& stats) {
  nlohmann::ordered_json j;
  j["visited_prefix_count"] = stats.visited_prefix_count;
  j["intersection_count"] = stats.intersection_count;
  j["intermediate_tuple_count"] = stats.intermediate_tuple_count;
  j["peak_intermediate_tuples"] = stats.peak_intermediate_tuples;
  j["output_count"] = stats.output_count;
  j["wall_time_us"] = stats.wall_time_us;
  return j.dump(2);
}

}  // namespace wcoj
