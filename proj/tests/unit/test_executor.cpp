#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "wcoj/engine.hpp"
#include "wcoj/error.hpp"
#include "wcoj/executor.hpp"
#include "wcoj/generator.hpp"
#include "wcoj/pairwise.hpp"

using namespace wcoj;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kCorpus[] = {"q1", "q2", "q3", "q4", "q5", "q7", "q8", "q9", "q11", "q12", "q13", "q14"};

std::string corpus_text(const std::string& name) {
  return slurp(std::string(WCOJ_QUERY_DIR) + "/lubm/" + name + ".sparql");
}

bool same_rows(const Table& a, const Table& b) { return a.rows == b.rows && a.cells == b.cells; }

ExecResult run_wcoj(const ParsedQuery& q, const PartitionedDatabase& db, TrieCache& cache,
                    const PlannerOptions& po = {}, ExecOptions eo = {}) {
  const auto cq = to_conjunctive(q, db);
  const auto plan = choose_plan(cq.graph, po);
  eo.pipeline = po.pipeline;
  return execute(plan, cq, db, cache, eo);
}

// Random basic graph pattern over predicates p0..p{np-1} of uniform data.
std::string random_query(std::mt19937_64& rng, std::size_t predicates, std::size_t nodes) {
  const std::string base = "http://example.org/random/";
  const std::size_t n = 1 + rng() % 4;
  std::ostringstream os;
  std::set<std::string> vars;
  std::ostringstream body;
  for (std::size_t k = 0; k < n; ++k) {
    auto term = [&](bool first) {
      if (!first && rng() % 4 == 0) return "<" + base + "n" + std::to_string(rng() % nodes) + ">";
      const std::string v = "?v" + std::to_string(rng() % 4);
      vars.insert(v);
      return v;
    };
    const std::string s = term(k == 0);
    const std::string p = "<" + base + "p" + std::to_string(rng() % predicates) + ">";
    const std::string o = term(false);
    body << s << ' ' << p << ' ' << o << (k + 1 < n ? " . " : " ");
  }
  os << "SELECT";
  std::size_t shown = 0;
  for (const auto& v : vars) {
    if (shown == 0 || rng() % 2) {
      os << ' ' << v;
      ++shown;
    }
  }
  os << " WHERE { " << body.str() << "}";
  return os.str();
}

std::vector<Key> unary_rows(std::initializer_list<Key> v) { return std::vector<Key>(v); }

}  // namespace

TEST_CASE("node join on the triangle matches a nested-loop oracle") {
  const std::vector<Key> r{0, 1, 0, 2, 1, 2};
  const auto R = Trie::from_rows(r, 2);
  const auto S = Trie::from_rows(r, 2);
  const auto T = Trie::from_rows(r, 2);
  // x=0, y=1, z=2: R(x,y), S(y,z), T(x,z).
  NodeJoin join({{&R, {0, 1}}, {&S, {1, 2}}, {&T, {0, 2}}}, {0, 1, 2}, {}, 0b111);
  ExecStats stats;
  const auto t = join.collect(stats);
  CHECK(t.rows == 1);
  CHECK(t.cells == std::vector<Key>{0, 1, 2});

  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    std::set<std::pair<Key, Key>> rs, ss, ts;
    for (int k = 0; k < 60; ++k) {
      rs.insert({static_cast<Key>(rng() % 12), static_cast<Key>(rng() % 12)});
      ss.insert({static_cast<Key>(rng() % 12), static_cast<Key>(rng() % 12)});
      ts.insert({static_cast<Key>(rng() % 12), static_cast<Key>(rng() % 12)});
    }
    auto rows = [](const std::set<std::pair<Key, Key>>& s) {
      std::vector<Key> out;
      for (auto [a, b] : s) {
        out.push_back(a);
        out.push_back(b);
      }
      return out;
    };
    std::vector<Key> want;
    for (Key x = 0; x < 12; ++x) {
      for (Key y = 0; y < 12; ++y) {
        for (Key z = 0; z < 12; ++z) {
          if (rs.count({x, y}) && ss.count({y, z}) && ts.count({x, z})) {
            want.insert(want.end(), {x, y, z});
          }
        }
      }
    }
    for (auto mode : {LayoutMode::Auto, LayoutMode::Uint, LayoutMode::Bitset}) {
      const auto a = Trie::from_rows(rows(rs), 2, {mode});
      const auto b = Trie::from_rows(rows(ss), 2, {mode});
      const auto c = Trie::from_rows(rows(ts), 2, {mode});
      NodeJoin j({{&a, {0, 1}}, {&b, {1, 2}}, {&c, {0, 2}}}, {0, 1, 2}, {}, 0b111);
      ExecStats st;
      auto got = j.collect(st);
      got.normalize();
      CHECK(got.cells == want);
    }
  }
}

TEST_CASE("single attribute node is a set intersection") {
  const auto a = Trie::from_rows(unary_rows({1, 2, 3}), 1);
  const auto b = Trie::from_rows(unary_rows({2, 3, 4}), 1);
  NodeJoin join({{&a, {0}}, {&b, {0}}}, {0}, {}, 0b1);
  ExecStats stats;
  CHECK(join.collect(stats).cells == std::vector<Key>{2, 3});

  const auto e = Trie::from_rows({}, 1);
  NodeJoin empty({{&a, {0}}, {&e, {0}}}, {0}, {}, 0b1);
  CHECK(empty.collect(stats).rows == 0);
}

TEST_CASE("fixed levels probe the constant") {
  const auto r = Trie::from_rows({5, 1, 5, 2, 6, 3}, 2);
  NodeJoin join({{&r, {0, 1}}}, {0, 1}, {{0, 5}}, 0b10);
  ExecStats stats;
  CHECK(join.collect(stats).cells == std::vector<Key>{1, 2});
}

TEST_CASE("both engines agree on the corpus under every toggle") {
  const auto db = vertical_partition(generate_lubm_like(3000, 2));
  TrieCache cache(db);
  for (const char* name : kCorpus) {
    CAPTURE(name);
    const auto q = parse_query(corpus_text(name));
    const auto base = pairwise_execute(q, db);
    CHECK(base.table.rows > 0);
    for (int mask = 0; mask < 16; ++mask) {
      CAPTURE(mask);
      const PlannerOptions po{!(mask & 1), !(mask & 2), !(mask & 4)};
      ExecOptions eo;
      eo.layout = (mask & 8) ? LayoutMode::Uint : LayoutMode::Auto;
      const auto r = run_wcoj(q, db, cache, po, eo);
      CHECK(same_rows(r.table, base.table));
      CHECK(r.stats.output_count == r.table.rows);
    }
    ExecOptions bits;
    bits.layout = LayoutMode::Bitset;
    CHECK(same_rows(run_wcoj(q, db, cache, {}, bits).table, base.table));
  }
}

TEST_CASE("both engines agree on random queries over random data") {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 20; ++round) {
    const auto db = vertical_partition(generate_uniform_random(400, rng(), {30, 3, 30}));
    TrieCache cache(db);
    for (int i = 0; i < 15; ++i) {
      const std::string text = random_query(rng, 3, 30);
      CAPTURE(text);
      const auto q = parse_query(text);
      PairwiseResult base;
      try {
        base = pairwise_execute(q, db);
      } catch (const Error&) {
        continue;  // predicate absent from this sample
      }
      for (int mask = 0; mask < 8; ++mask) {
        const PlannerOptions po{!(mask & 1), !(mask & 2), !(mask & 4)};
        CHECK(same_rows(run_wcoj(q, db, cache, po).table, base.table));
      }
    }
  }
}

TEST_CASE("pipelined and materialized runs agree on two-node plans") {
  std::mt19937_64 rng(41);
  const std::string p = "http://example.org/random/p";
  const std::string text = "SELECT ?x ?y ?z WHERE { ?x <" + p + "0> ?y . ?x <" + p + "1> ?z }";
  for (int seed = 0; seed < 100; ++seed) {
    const auto db = vertical_partition(generate_uniform_random(300, rng(), {40, 2, 40}));
    TrieCache cache(db);
    const auto q = parse_query(text);
    const auto cq = to_conjunctive(q, db);
    const auto plan = choose_plan(cq.graph);
    REQUIRE(plan.nodes.size() == 2);
    REQUIRE(plan.pipeline_edges.size() == 1);
    const auto plain = run_plan(plan, cq, db, cache);
    const auto piped = run_pipelined(plan, cq, db, cache);
    CHECK(same_rows(plain.table, piped.table));
    CHECK(piped.stats.peak_intermediate_tuples <= plain.stats.peak_intermediate_tuples);
  }
}

TEST_CASE("plans without a pipeline edge fall back to the plain run") {
  const auto db = vertical_partition(generate_lubm_like(3000, 3));
  TrieCache cache(db);
  const auto cq = to_conjunctive(parse_query(corpus_text("q14")), db);
  const auto plan = choose_plan(cq.graph);
  REQUIRE(plan.pipeline_edges.empty());
  const auto a = run_plan(plan, cq, db, cache);
  const auto b = run_pipelined(plan, cq, db, cache);
  CHECK(same_rows(a.table, b.table));
  CHECK(a.stats.visited_prefix_count == b.stats.visited_prefix_count);
  CHECK(a.stats.intersection_count == b.stats.intersection_count);
  CHECK(a.stats.intermediate_tuple_count == b.stats.intermediate_tuple_count);
  CHECK(a.stats.peak_intermediate_tuples == b.stats.peak_intermediate_tuples);
  CHECK(a.stats.output_count == b.stats.output_count);
}

TEST_CASE("absent constant gives an empty result without joining") {
  const auto db = vertical_partition(generate_lubm_like(1200, 1));
  TrieCache cache(db);
  const auto q = parse_query(
      "SELECT ?x WHERE { ?x <http://www.lehigh.edu/~zhp2/2004/0401/univ-bench.owl#memberOf> <http://nowhere> }");
  const auto r = run_wcoj(q, db, cache);
  CHECK(r.table.rows == 0);
  CHECK(r.stats.visited_prefix_count == 0);
}

TEST_CASE("last level visits stay within each node's bound") {
  const auto db = vertical_partition(generate_lubm_like(5000, 4));
  TrieCache cache(db);
  for (const char* name : kCorpus) {
    CAPTURE(name);
    const auto q = parse_query(corpus_text(name));
    for (bool pipe : {true, false}) {
      const auto r = run_wcoj(q, db, cache, {true, true, pipe});
      for (const auto& t : r.trace) {
        CHECK(static_cast<double>(t.visited_last_level) <= t.agm_bound * (1 + 1e-9));
      }
    }
  }
  std::mt19937_64 rng(43);
  for (int i = 0; i < 5; ++i) {
    const auto rdb = vertical_partition(generate_uniform_random(500, rng(), {25, 3, 25}));
    TrieCache rc(rdb);
    const std::string p = "http://example.org/random/p";
    const auto q = parse_query("SELECT ?x ?y ?z WHERE { ?x <" + p + "0> ?y . ?y <" + p + "1> ?z . ?x <" + p + "2> ?z }");
    const auto r = run_wcoj(q, rdb, rc);
    for (const auto& t : r.trace) CHECK(static_cast<double>(t.visited_last_level) <= t.agm_bound * (1 + 1e-9));
  }
}

TEST_CASE("thread count does not change results") {
  const auto db = vertical_partition(generate_lubm_like(5000, 5));
  TrieCache cache(db);
  for (const char* name : kCorpus) {
    CAPTURE(name);
    const auto q = parse_query(corpus_text(name));
    for (bool pipe : {true, false}) {
      ExecOptions one;
      ExecOptions many;
      many.threads = 8;
      const auto a = run_wcoj(q, db, cache, {true, true, pipe}, one);
      const auto b = run_wcoj(q, db, cache, {true, true, pipe}, many);
      CHECK(same_rows(a.table, b.table));
      CHECK(a.stats.output_count == b.stats.output_count);
    }
  }
}

TEST_CASE("engine facade prints decoded rows and flat stats") {
  Engine engine(vertical_partition(generate_lubm_like(1200, 1)));
  RunConfig cfg;
  const auto r = engine.run(corpus_text("q14"), cfg);
  const auto tsv = engine.to_tsv(r);
  CHECK(tsv.find("UndergraduateStudent0\n") != std::string::npos);
  cfg.engine = EngineKind::Pairwise;
  CHECK(engine.to_tsv(engine.run(corpus_text("q14"), cfg)) == tsv);
  const auto js = stats_json(r.stats);
  for (const char* k : {"visited_prefix_count", "intersection_count", "intermediate_tuple_count",
                        "peak_intermediate_tuples", "output_count", "wall_time_us"}) {
    CHECK(js.find(std::string("\"") + k + "\"") != std::string::npos);
  }
}
