#ifndef WCOJ_WCOJ_H
#define WCOJ_WCOJ_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define WCOJ_API __attribute__((visibility("default")))
#else
#define WCOJ_API
#endif

/* Status codes double as CLI exit codes. */
typedef enum wcoj_status {
  WCOJ_OK = 0,
  WCOJ_ERROR = 1,
  WCOJ_PARSE_ERROR = 2,
  WCOJ_PLAN_ERROR = 3,
  WCOJ_IO_ERROR = 4
} wcoj_status;

typedef enum wcoj_engine_kind { WCOJ_ENGINE_WCOJ = 0, WCOJ_ENGINE_PAIRWISE = 1 } wcoj_engine_kind;

typedef enum wcoj_layout {
  WCOJ_LAYOUT_AUTO = 0,
  WCOJ_LAYOUT_UINT = 1,
  WCOJ_LAYOUT_BITSET = 2
} wcoj_layout;

typedef struct wcoj_config {
  wcoj_engine_kind engine;
  wcoj_layout layout;
  int attr_reorder;
  int ghd_pushdown;
  int pipeline;
  uint32_t threads;
} wcoj_config;

typedef struct wcoj_stats {
  uint64_t visited_prefix_count;
  uint64_t intersection_count;
  uint64_t intermediate_tuple_count;
  uint64_t peak_intermediate_tuples;
  uint64_t output_count;
  uint64_t wall_time_us;
} wcoj_stats;

typedef struct wcoj_database wcoj_database;
typedef struct wcoj_result wcoj_result;

/* Message of the last failed call on this thread, or "". */
WCOJ_API const char* wcoj_last_error(void);
WCOJ_API const char* wcoj_version(void);

/* All toggles on, auto layout, one thread. */
WCOJ_API void wcoj_config_default(wcoj_config* config);

/* Strings returned through char** are freed with wcoj_string_free. */
WCOJ_API void wcoj_string_free(char* text);

/* Opens a snapshot or triple file. */
WCOJ_API wcoj_status wcoj_database_open(const char* path, wcoj_database** out);
/* Parses triple text held in memory. */
WCOJ_API wcoj_status wcoj_database_from_text(const char* text, size_t length, wcoj_database** out);
WCOJ_API wcoj_status wcoj_database_save(const wcoj_database* db, const char* path);
WCOJ_API uint64_t wcoj_database_triple_count(const wcoj_database* db);
/* predicate<TAB>cardinality lines. */
WCOJ_API wcoj_status wcoj_database_stats_tsv(const wcoj_database* db, char** out);
WCOJ_API void wcoj_database_free(wcoj_database* db);

/* A NULL config means wcoj_config_default. */
WCOJ_API wcoj_status wcoj_query(wcoj_database* db, const char* sparql, const wcoj_config* config,
                                wcoj_result** out);
WCOJ_API wcoj_status wcoj_explain(wcoj_database* db, const char* sparql, const wcoj_config* config,
                                  char** out);

/* A result must be freed before its database. */
WCOJ_API uint64_t wcoj_result_rows(const wcoj_result* result);
WCOJ_API size_t wcoj_result_columns(const wcoj_result* result);
WCOJ_API const char* wcoj_result_column_name(const wcoj_result* result, size_t column);
/* Decoded term, or NULL when out of range. */
WCOJ_API const char* wcoj_result_value(const wcoj_result* result, uint64_t row, size_t column);
WCOJ_API wcoj_status wcoj_result_tsv(const wcoj_result* result, char** out);
WCOJ_API wcoj_status wcoj_result_stats(const wcoj_result* result, wcoj_stats* out);
WCOJ_API wcoj_status wcoj_result_stats_json(const wcoj_result* result, char** out);
WCOJ_API void wcoj_result_free(wcoj_result* result);

/* kind is lubm_like, adversarial_triangle or uniform_random. */
WCOJ_API wcoj_status wcoj_generate(const char* kind, uint64_t n, uint64_t seed, const char* path);

#ifdef __cplusplus
}
#endif

#endif
