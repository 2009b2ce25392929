// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wcoj/engine.hpp"
#include "wcoj/generator.hpp"
#include "wcoj/ghd.hpp"
#include "wcoj/hypergraph.hpp"
#include "wcoj/key_set.hpp"
#include "wcoj/pairwise.hpp"

using namespace wcoj;

namespace {

using Clock = std::chrono::steady_clock;

std::string corpus_text(const std::string& name) {
  return oracle::slurp(std::string(WCOJ_QUERY_DIR) + "/lubm/" + name + ".sparql");
}

std::vector<ParsedQuery> corpus() {
  std::vector<ParsedQuery> out;
  for (const char* name : oracle::kCorpus) out.push_back(parse_query(corpus_text(name)));
  return out;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %2d %-28s %s  %s (%.1fs)\n", id, title, o.pass ? "PASS" : "FAIL",
              o.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

VertexMask edge_mask(const HyperEdge& e) {
  VertexMask m = 0;
  for (auto v : e.attributes) m |= bit(v);
  return m;
}

// 1. wcoj and pairwise print identical TSV on the corpus.
Outcome oracle_equivalence() {
  Outcome o;
  const auto queries = corpus();
  std::size_t runs = 0;
  const auto t0 = Clock::now();
  for (std::uint64_t n : {1000, 10000}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Engine engine(vertical_partition(generate_lubm_like(n, seed)));
      RunConfig wc;
      RunConfig pw;
      pw.engine = EngineKind::Pairwise;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto a = engine.to_tsv(engine.run(queries[i], wc));
        const auto b = engine.to_tsv(engine.run(queries[i], pw));
        ++runs;
        if (a != b) o.fail(std::string(oracle::kCorpus[i]) + " differs at N=" + std::to_string(n));
      }
    }
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (s >= 60) o.fail(fmt("took %.1fs, limit 60s", s));
  if (o.pass) o.detail = std::to_string(runs) + " query runs identical, " + fmt("%.1fs < 60s", s);
  return o;
}

// 2. Each toggle flipped off alone leaves every output unchanged.
Outcome toggle_neutrality() {
  Outcome o;
  const auto queries = corpus();
  std::size_t checks = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    Engine engine(vertical_partition(generate_lubm_like(10000, seed)));
    const RunConfig base;
    std::vector<std::pair<const char*, RunConfig>> flips;
    RunConfig c = base;
    c.layout = LayoutMode::Uint;
    flips.push_back({"layout=uint", c});
    c = base;
    c.attr_reorder = false;
    flips.push_back({"attr_reorder=off", c});
    c = base;
    c.ghd_pushdown = false;
    flips.push_back({"ghd_pushdown=off", c});
    c = base;
    c.pipeline = false;
    flips.push_back({"pipeline=off", c});
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto want = engine.to_tsv(engine.run(queries[i], base));
      for (const auto& [name, cfg] : flips) {
        ++checks;
        if (engine.to_tsv(engine.run(queries[i], cfg)) != want) {
          o.fail(std::string(oracle::kCorpus[i]) + " changed with " + name);
        }
      }
    }
  }
  if (o.pass) o.detail = std::to_string(checks) + " flipped runs identical";
  return o;
}

// 3. Exact widths: 3/2 for the triangle shapes, 1 for GYO-acyclic queries.
Outcome fhw_exactness() {
  Outcome o;
  const auto db = vertical_partition(generate_lubm_like(1000, 1));
  Hypergraph tri;
  const auto x = tri.add_vertex("x");
  const auto y = tri.add_vertex("y");
  const auto z = tri.add_vertex("z");
  for (auto [u, v] : {std::pair{x, y}, {y, z}, {z, x}}) {
    HyperEdge e;
    e.relation = "R";
    e.attributes = {u, v};
    e.cardinality = 100;
    tri.edges.push_back(e);
  }
  if (choose_plan(tri).fhw != Rational(3, 2)) o.fail("triangle fhw " + choose_plan(tri).fhw.str());
  std::size_t acyclic = 0;
  std::size_t cyclic = 0;
  for (const char* name : oracle::kCorpus) {
    const auto cq = to_conjunctive(parse_query(corpus_text(name)), db);
    std::vector<std::uint64_t> masks;
    for (const auto& e : cq.graph.edges) masks.push_back(edge_mask(e));
    const bool is_acyclic = oracle::gyo_acyclic(masks);
    const Rational want = is_acyclic ? Rational(1) : Rational(3, 2);
    (is_acyclic ? acyclic : cyclic)++;
    const auto got = choose_plan(cq.graph).fhw;
    if (got != want) o.fail(std::string(name) + " fhw " + got.str() + ", expected " + want.str());
  }
  if (!oracle::gyo_acyclic({0b011, 0b110}) || oracle::gyo_acyclic({0b011, 0b110, 0b101})) {
    o.fail("acyclicity oracle self-check");
  }
  if (cyclic == 0) o.fail("Q2 not recognized as cyclic");
  if (o.pass) {
    o.detail = "triangle 3/2, " + std::to_string(cyclic) + " cyclic corpus queries 3/2, " +
               std::to_string(acyclic) + " acyclic 1";
  }
  return o;
}

// 4. Simplex against basic feasible solution enumeration.
Outcome agm_lp() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0;
  int done = 0;
  while (done < 200) {
    const std::size_t nv = 1 + rng() % 4;
    const std::size_t ne = 1 + rng() % 4;
    const VertexMask all = (VertexMask{1} << nv) - 1;
    std::vector<VertexMask> edges;
    std::vector<double> cards;
    std::vector<double> cost;
    VertexMask covered = 0;
    for (std::size_t i = 0; i < ne; ++i) {
      VertexMask m = 0;
      while (m == 0) m = rng() & all;
      edges.push_back(m);
      covered |= m;
      cards.push_back(static_cast<double>(1 + rng() % 1000000));
      cost.push_back(std::log(cards.back()));
    }
    if (covered != all) continue;
    ++done;
    const double got = fractional_cover(edges, cards, all).log_bound;
    const double want = oracle::cover_lp_by_vertices(std::vector<std::uint64_t>(edges.begin(), edges.end()), cost, all);
    worst = std::max(worst, std::fabs(got - want));
  }
  if (worst > 1e-6) o.fail(fmt("max error %.3g > 1e-6", worst));
  if (o.pass) o.detail = fmt("200 hypergraphs, max error %.2g <= 1e-6", worst);
  return o;
}

// 5. Quadratic pairwise growth against near-linear wcoj growth.
Outcome asymptotic_separation() {
  Outcome o;
  const std::string b(kAdversarialPrefix);
  const auto q = parse_query("SELECT ?x ?y ?z WHERE { ?x <" + b + "p> ?y . ?y <" + b + "q> ?z . ?z <" + b +
                             "r> ?x }");
  std::vector<double> pairwise;
  std::vector<double> wcoj;
  for (std::uint64_t n : {1000, 4000, 16000}) {
    Engine engine(vertical_partition(generate_adversarial_triangle(n)));
    const auto w = engine.run(q, RunConfig{});
    RunConfig pc;
    pc.engine = EngineKind::Pairwise;
    const auto p = engine.run(q, pc);
    if (engine.to_tsv(w) != engine.to_tsv(p)) o.fail("engines disagree at N=" + std::to_string(n));
    wcoj.push_back(static_cast<double>(w.stats.visited_prefix_count));
    pairwise.push_back(static_cast<double>(p.stats.intermediate_tuple_count));
  }
  std::string d;
  for (std::size_t i = 1; i < 3; ++i) {
    const double pr = pairwise[i] / pairwise[i - 1];
    const double wr = wcoj[i] / std::max(1.0, wcoj[i - 1]);
    d += fmt("step %.0f: pairwise x%.2f wcoj x%.2f; ", static_cast<double>(i), pr, wr);
    if (pr < 12) o.fail(fmt("pairwise ratio %.2f < 12", pr));
    if (wr > 6) o.fail(fmt("wcoj ratio %.2f > 6", wr));
  }
  if (o.pass) o.detail = d + fmt("pairwise %.0f vs wcoj %.0f at N=16000", pairwise[2], wcoj[2]);
  return o;
}

// 6. Attribute reordering and across-node pushdown reduce work.
Outcome selection_pushdown() {
  Outcome o;
  Engine engine(vertical_partition(generate_lubm_like(10000, 1)));
  std::string d;
  for (const char* name : {"q14", "q1"}) {
    RunConfig on;
    RunConfig off;
    off.attr_reorder = false;
    const auto a = engine.run(corpus_text(name), on);
    const auto b = engine.run(corpus_text(name), off);
    const double r = static_cast<double>(b.stats.visited_prefix_count) /
                     std::max<double>(1, static_cast<double>(a.stats.visited_prefix_count));
    d += std::string(name) + fmt(" visited %.0f vs %.0f (x%.1f); ", static_cast<double>(a.stats.visited_prefix_count),
                                 static_cast<double>(b.stats.visited_prefix_count), r);
    if (r < 10) o.fail(std::string(name) + fmt(" reorder reduction x%.2f < 10", r));
    if (engine.to_tsv(a) != engine.to_tsv(b)) o.fail(std::string(name) + " results differ");
  }
  {
    RunConfig on;
    RunConfig off;
    off.ghd_pushdown = false;
    const auto a = engine.run(corpus_text("q4"), on);
    const auto b = engine.run(corpus_text("q4"), off);
    const double r = static_cast<double>(b.stats.intermediate_tuple_count) /
                     std::max<double>(1, static_cast<double>(a.stats.intermediate_tuple_count));
    d += fmt("q4 intermediates %.0f vs %.0f (x%.1f)", static_cast<double>(a.stats.intermediate_tuple_count),
             static_cast<double>(b.stats.intermediate_tuple_count), r);
    if (r < 2) o.fail(fmt("q4 pushdown reduction x%.2f < 2", r));
    if (engine.to_tsv(a) != engine.to_tsv(b)) o.fail("q4 results differ");
  }
  if (o.pass) o.detail = d;
  return o;
}

// 7. Pipelining lowers the peak on the two-pattern shape R(x,y), S(x,z).
Outcome pipelining() {
  Outcome o;
  Engine engine(vertical_partition(generate_lubm_like(10000, 1)));
  const std::string ub(kUbPrefix);
  const std::string q = "SELECT ?X ?Y ?Z WHERE { ?X <" + ub + "memberOf> ?Y . ?X <" + ub + "emailAddress> ?Z }";
  RunConfig on;
  RunConfig off;
  off.pipeline = false;
  const auto a = engine.run(q, on);
  const auto b = engine.run(q, off);
  if (engine.to_tsv(a) != engine.to_tsv(b)) o.fail("results differ");
  const double pa = static_cast<double>(a.stats.peak_intermediate_tuples);
  const double pb = static_cast<double>(b.stats.peak_intermediate_tuples);
  if (pa > 0.5 * pb) o.fail(fmt("peak %.0f > 0.5 x %.0f", pa, pb));
  if (a.table.rows == 0) o.fail("empty result");
  if (o.pass) o.detail = fmt("peak %.0f on vs %.0f off, %.0f rows", pa, pb, static_cast<double>(a.table.rows));
  return o;
}

// 8. Intersections and layout choice against oracles.
Outcome layout_properties() {
  Outcome o;
  std::mt19937_64 rng(8);
  auto random_set = [&](std::size_t max_size, std::uint32_t range) {
    std::set<Key> s;
    const std::size_t n = rng() % (max_size + 1);
    for (std::size_t i = 0; i < n; ++i) s.insert(static_cast<Key>(rng() % range));
    return std::vector<Key>(s.begin(), s.end());
  };
  const SetLayout layouts[] = {SetLayout::UintArray, SetLayout::Bitset};
  std::size_t cases = 0;
  while (cases < 100000) {
    const std::uint32_t range = static_cast<std::uint32_t>(1 + rng() % 5000);
    const auto va = random_set(64, range);
    const auto vb = random_set(64, range);
    const auto want = oracle::nested_intersection(va, vb);
    for (auto la : layouts) {
      for (auto lb : layouts) {
        ++cases;
        const auto got = set_intersect(KeySet::with_layout(va, la), KeySet::with_layout(vb, lb)).to_vector();
        if (got != want) o.fail("intersection mismatch");
      }
    }
  }
  for (int i = 0; i < 10000; ++i) {
    const auto v = random_set(300, static_cast<std::uint32_t>(1 + rng() % 30000));
    const bool want = oracle::wants_bitset(v);
    if ((choose_layout(v) == SetLayout::Bitset) != want) o.fail("layout rule mismatch");
  }
  // One element is always dense over its own range, yet stays an array.
  for (Key x : {0u, 5u, 4000000000u}) {
    const std::vector<Key> one{x};
    if (choose_layout(one) != SetLayout::UintArray) o.fail("singleton became a bitset");
    if (KeySet::from_sorted(one).layout() != SetLayout::UintArray) o.fail("singleton set became a bitset");
  }
  if (o.pass) o.detail = std::to_string(cases) + " intersections, 10000 layout choices, singletons stay arrays";
  return o;
}

// 9. Decomposition properties and the two golden plans.
Outcome ghd_validity() {
  Outcome o;
  const auto db = vertical_partition(generate_lubm_like(1000, 1));
  std::size_t plans = 0;
  for (const char* name : oracle::kCorpus) {
    const auto cq = to_conjunctive(parse_query(corpus_text(name)), db);
    for (bool pushdown : {true, false}) {
      for (const auto& p : enumerate_ghds(cq.graph, pushdown)) {
        ++plans;
        if (auto err = check_ghd(p); !err.empty()) o.fail(std::string(name) + ": " + err);
      }
      for (bool reorder : {true, false}) {
        for (bool pipe : {true, false}) {
          ++plans;
          const auto p = choose_plan(cq.graph, {pushdown, reorder, pipe});
          if (auto err = check_ghd(p); !err.empty()) o.fail(std::string(name) + " chosen: " + err);
        }
      }
    }
  }

  // Q2: triangle root over three single-edge type selections.
  const auto q2 = to_conjunctive(parse_query(oracle::slurp(std::string(WCOJ_TEST_DATA) + "/q2_lower.sparql")), db);
  const auto p2 = choose_plan(q2.graph);
  bool shape = p2.nodes.size() == 4 && p2.root().lambda.size() == 3 && p2.fhw == Rational(3, 2);
  for (auto e : p2.root().lambda) shape = shape && !p2.graph.edges[e].has_selection();
  for (std::size_t i = 1; shape && i < p2.nodes.size(); ++i) {
    const auto& n = p2.nodes[i];
    shape = n.parent == std::optional<std::size_t>(0) && n.lambda.size() == 1 &&
            p2.graph.edges[n.lambda[0]].has_selection() && short_name(p2.graph.edges[n.lambda[0]].relation) == "type";
  }
  std::string order;
  for (auto v : p2.attribute_order) order += (order.empty() ? "" : " ") + p2.graph.vertices[v];
  if (!shape) o.fail("Q2 plan does not match the golden shape");
  if (order != "a b c x y z") o.fail("Q2 attribute order " + order);

  // Q4: both selection nodes sit below every other node.
  const auto q4 = to_conjunctive(parse_query(corpus_text("q4")), db);
  const auto p4 = choose_plan(q4.graph);
  std::size_t plain_depth = 0;
  std::size_t sel_min = SIZE_MAX;
  std::size_t sel_nodes = 0;
  for (const auto& n : p4.nodes) {
    bool sel = false;
    for (auto e : n.lambda) sel = sel || (p4.graph.edges[e].has_selection() && !p4.duplicate[e]);
    if (sel) {
      ++sel_nodes;
      sel_min = std::min(sel_min, n.depth);
    } else {
      plain_depth = std::max(plain_depth, n.depth);
    }
  }
  if (sel_nodes != 2 || sel_min <= plain_depth) o.fail("Q4 selection nodes are not at maximal depth");
  if (o.pass) {
    o.detail = std::to_string(plans) + " plans valid, Q2 golden [" + order + "], Q4 selections at depth >= " +
               std::to_string(sel_min) + " of height " + std::to_string(p4.height);
  }
  return o;
}

// 10. One thread and eight threads print the same bytes.
Outcome determinism() {
  Outcome o;
  const auto queries = corpus();
  Engine engine(vertical_partition(generate_lubm_like(10000, 1)));
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (bool pipe : {true, false}) {
      RunConfig one;
      one.pipeline = pipe;
      RunConfig eight = one;
      eight.threads = 8;
      const auto a = engine.to_tsv(engine.run(queries[i], one));
      const auto a2 = engine.to_tsv(engine.run(queries[i], one));
      const auto b = engine.to_tsv(engine.run(queries[i], eight));
      const auto b2 = engine.to_tsv(engine.run(queries[i], eight));
      bytes += a.size();
      if (a != b || a != a2 || b != b2) o.fail(std::string(oracle::kCorpus[i]) + " differs across runs");
    }
  }
  if (o.pass) o.detail = "24 query configurations byte-identical (" + std::to_string(bytes) + " bytes)";
  return o;
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "toggle neutrality", toggle_neutrality);
  report(3, "fhw exactness", fhw_exactness);
  report(4, "AGM LP", agm_lp);
  report(5, "asymptotic separation", asymptotic_separation);
  report(6, "selection pushdown", selection_pushdown);
  report(7, "pipelining", pipelining);
  report(8, "layout and intersection", layout_properties);
  report(9, "GHD validity", ghd_validity);
  report(10, "determinism", determinism);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
