#include "wcoj/wcoj.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wcoj/engine.hpp"
#include "wcoj/error.hpp"
#include "wcoj/generator.hpp"

struct wcoj_database {
  std::unique_ptr<wcoj::Engine> engine;
};

struct wcoj_result {
  const wcoj::Engine* engine = nullptr;
  wcoj::QueryResult result;
};

namespace {

thread_local std::string g_last_error;

wcoj_status fail(wcoj_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

wcoj_status status_of(wcoj::ErrorCategory c) {
  switch (c) {
    case wcoj::ErrorCategory::Parse:
      return WCOJ_PARSE_ERROR;
    case wcoj::ErrorCategory::Plan:
      return WCOJ_PLAN_ERROR;
    case wcoj::ErrorCategory::Io:
      return WCOJ_IO_ERROR;
    case wcoj::ErrorCategory::Other:
      break;
  }
  return WCOJ_ERROR;
}

template <typename F>
wcoj_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return WCOJ_OK;
  } catch (const wcoj::Error& e) {
    return fail(status_of(e.category()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(WCOJ_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(WCOJ_ERROR, e.what());
  } catch (...) {
    return fail(WCOJ_ERROR, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

wcoj::RunConfig to_run_config(const wcoj_config* c) {
  wcoj_config d;
  wcoj_config_default(&d);
  if (!c) c = &d;
  wcoj::RunConfig r;
  r.engine = c->engine == WCOJ_ENGINE_PAIRWISE ? wcoj::EngineKind::Pairwise : wcoj::EngineKind::Wcoj;
  switch (c->layout) {
    case WCOJ_LAYOUT_UINT:
      r.layout = wcoj::LayoutMode::Uint;
      break;
    case WCOJ_LAYOUT_BITSET:
      r.layout = wcoj::LayoutMode::Bitset;
      break;
    default:
      r.layout = wcoj::LayoutMode::Auto;
      break;
  }
  r.attr_reorder = c->attr_reorder != 0;
  r.ghd_pushdown = c->ghd_pushdown != 0;
  r.pipeline = c->pipeline != 0;
  r.threads = c->threads ? c->threads : 1;
  return r;
}

#define WCOJ_REQUIRE(cond) \
  if (!(cond)) return fail(WCOJ_ERROR, "invalid argument: " #cond)

}  // namespace

extern "C" {

const char* wcoj_last_error(void) { return g_last_error.c_str(); }

const char* wcoj_version(void) { return "0.1.0"; }

void wcoj_config_default(wcoj_config* config) {
  if (!config) return;
  config->engine = WCOJ_ENGINE_WCOJ;
  config->layout = WCOJ_LAYOUT_AUTO;
  config->attr_reorder = 1;
  config->ghd_pushdown = 1;
  config->pipeline = 1;
  config->threads = 1;
}

void wcoj_string_free(char* text) { std::free(text); }

wcoj_status wcoj_database_open(const char* path, wcoj_database** out) {
  WCOJ_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new wcoj_database{wcoj::Engine::open(path)}; });
}

wcoj_status wcoj_database_from_text(const char* text, size_t length, wcoj_database** out) {
  WCOJ_REQUIRE((text || length == 0) && out);
  *out = nullptr;
  return guarded([&] {
    std::istringstream in(std::string(text ? text : "", length));
    const auto triples = wcoj::parse_triples(in);
    *out = new wcoj_database{std::make_unique<wcoj::Engine>(wcoj::vertical_partition(triples))};
  });
}

wcoj_status wcoj_database_save(const wcoj_database* db, const char* path) {
  WCOJ_REQUIRE(db && path);
  return guarded([&] { wcoj::save_snapshot(db->engine->database(), path); });
}

uint64_t wcoj_database_triple_count(const wcoj_database* db) {
  return db ? db->engine->database().triple_count : 0;
}

wcoj_status wcoj_database_stats_tsv(const wcoj_database* db, char** out) {
  WCOJ_REQUIRE(db && out);
  return guarded([&] { *out = copy_string(db->engine->database().stats_tsv()); });
}

void wcoj_database_free(wcoj_database* db) { delete db; }

wcoj_status wcoj_query(wcoj_database* db, const char* sparql, const wcoj_config* config,
                       wcoj_result** out) {
  WCOJ_REQUIRE(db && sparql && out);
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<wcoj_result>();
    r->engine = db->engine.get();
    r->result = db->engine->run(std::string_view(sparql), to_run_config(config));
    *out = r.release();
  });
}

wcoj_status wcoj_explain(wcoj_database* db, const char* sparql, const wcoj_config* config,
                         char** out) {
  WCOJ_REQUIRE(db && sparql && out);
  return guarded([&] { *out = copy_string(db->engine->explain(sparql, to_run_config(config))); });
}

uint64_t wcoj_result_rows(const wcoj_result* result) { return result ? result->result.table.rows : 0; }

size_t wcoj_result_columns(const wcoj_result* result) {
  return result ? result->result.columns.size() : 0;
}

const char* wcoj_result_column_name(const wcoj_result* result, size_t column) {
  if (!result || column >= result->result.columns.size()) return nullptr;
  return result->result.columns[column].c_str();
}

const char* wcoj_result_value(const wcoj_result* result, uint64_t row, size_t column) {
  if (!result) return nullptr;
  const auto& t = result->result.table;
  if (row >= t.rows || column >= t.width()) return nullptr;
  return result->engine->database().dictionary.decode(t.row(row)[column]).c_str();
}

wcoj_status wcoj_result_tsv(const wcoj_result* result, char** out) {
  WCOJ_REQUIRE(result && out);
  return guarded([&] { *out = copy_string(result->engine->to_tsv(result->result)); });
}

wcoj_status wcoj_result_stats(const wcoj_result* result, wcoj_stats* out) {
  WCOJ_REQUIRE(result && out);
  const auto& s = result->result.stats;
  *out = {s.visited_prefix_count, s.intersection_count, s.intermediate_tuple_count,
          s.peak_intermediate_tuples, s.output_count, s.wall_time_us};
  return WCOJ_OK;
}

wcoj_status wcoj_result_stats_json(const wcoj_result* result, char** out) {
  WCOJ_REQUIRE(result && out);
  return guarded([&] { *out = copy_string(wcoj::stats_json(result->result.stats)); });
}

void wcoj_result_free(wcoj_result* result) { delete result; }

wcoj_status wcoj_generate(const char* kind, uint64_t n, uint64_t seed, const char* path) {
  WCOJ_REQUIRE(kind && path);
  const auto k = wcoj::parse_dataset_kind(kind);
  if (!k) return fail(WCOJ_ERROR, std::string("unknown dataset kind: ") + kind);
  return guarded([&] {
    const auto triples = wcoj::generate(*k, n, seed);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wcoj::Error(wcoj::ErrorCode::Io, std::string("cannot write ") + path);
    wcoj::write_triples(out, triples);
    out.flush();
    if (!out) throw wcoj::Error(wcoj::ErrorCode::Io, std::string("write failed: ") + path);
  });
}

}  // extern "C"
