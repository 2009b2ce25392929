#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "wcoj/generator.hpp"
#include "wcoj/ghd.hpp"
#include "wcoj/query.hpp"

using namespace wcoj;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kCorpus[] = {"q1", "q2", "q3", "q4", "q5", "q7", "q8", "q9", "q11", "q12", "q13", "q14"};

const PartitionedDatabase& lubm() {
  static const PartitionedDatabase db = vertical_partition(generate_lubm_like(3000, 1));
  return db;
}

Hypergraph corpus_graph(const std::string& name) {
  return to_conjunctive(parse_query(slurp(std::string(WCOJ_QUERY_DIR) + "/lubm/" + name + ".sparql")), lubm())
      .graph;
}

void add_edge(Hypergraph& h, const std::string& rel, std::vector<VertexId> attrs, double card,
              std::vector<Selection> sel = {}) {
  HyperEdge e;
  e.relation = rel;
  e.predicate = static_cast<Key>(h.edges.size());
  e.attributes = std::move(attrs);
  e.selections = std::move(sel);
  e.cardinality = card;
  h.edges.push_back(std::move(e));
}

std::string order_text(const GhdPlan& plan, const std::vector<VertexId>& order) {
  std::string s;
  for (VertexId v : order) s += (s.empty() ? "" : " ") + plan.graph.vertices[v];
  return s;
}

std::size_t node_of_edge(const GhdPlan& plan, const std::string& relation_suffix) {
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    for (auto e : plan.nodes[i].lambda) {
      if (!plan.duplicate[e] && short_name(plan.graph.edges[e].relation) == relation_suffix) return i;
    }
  }
  return SIZE_MAX;
}

}  // namespace

TEST_CASE("triangle enumeration includes the single node of width 3/2") {
  Hypergraph h;
  const auto x = h.add_vertex("x");
  const auto y = h.add_vertex("y");
  const auto z = h.add_vertex("z");
  add_edge(h, "R", {x, y}, 100);
  add_edge(h, "S", {y, z}, 100);
  add_edge(h, "T", {z, x}, 100);
  bool found = false;
  for (const auto& p : enumerate_ghds(h)) {
    CHECK(check_ghd(p).empty());
    if (p.nodes.size() == 1) {
      found = true;
      CHECK(p.fhw == Rational(3, 2));
    }
  }
  CHECK(found);
  const auto plan = choose_plan(h);
  CHECK(plan.fhw == Rational(3, 2));
  CHECK(plan.nodes.size() == 1);
  CHECK(plan.pipeline_edges.empty());
}

TEST_CASE("single relation has exactly one decomposition") {
  Hypergraph h;
  add_edge(h, "R", {h.add_vertex("x"), h.add_vertex("y")}, 5);
  const auto all = enumerate_ghds(h);
  REQUIRE(all.size() == 1);
  CHECK(all[0].nodes.size() == 1);
  CHECK(all[0].fhw == Rational(1));
}

TEST_CASE("Q2 plan is a triangle root over three type filters") {
  const auto cq = to_conjunctive(parse_query(slurp(std::string(WCOJ_TEST_DATA) + "/q2_lower.sparql")), lubm());
  const auto plan = choose_plan(cq.graph);
  CHECK(check_ghd(plan).empty());
  CHECK(plan.fhw == Rational(3, 2));
  REQUIRE(plan.nodes.size() == 4);
  const auto& root = plan.root();
  CHECK(root.lambda.size() == 3);
  for (auto e : root.lambda) CHECK_FALSE(plan.graph.edges[e].has_selection());
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(plan.nodes[i].parent == std::optional<std::size_t>(0));
    REQUIRE(plan.nodes[i].lambda.size() == 1);
    CHECK(short_name(plan.graph.edges[plan.nodes[i].lambda[0]].relation) == "type");
  }
  CHECK(order_text(plan, plan.attribute_order) == "a b c x y z");
}

TEST_CASE("Q4 plan pushes both selection nodes to the bottom") {
  const auto h = corpus_graph("q4");
  const auto plan = choose_plan(h);
  CHECK(check_ghd(plan).empty());
  CHECK(plan.fhw == Rational(1));
  const auto type_node = node_of_edge(plan, "type");
  const auto works_node = node_of_edge(plan, "worksFor");
  REQUIRE(type_node != SIZE_MAX);
  REQUIRE(works_node != SIZE_MAX);
  std::size_t deepest_plain = 0;
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    if (i == type_node || i == works_node) continue;
    deepest_plain = std::max(deepest_plain, plan.nodes[i].depth);
  }
  CHECK(plan.nodes[type_node].depth > deepest_plain);
  CHECK(plan.nodes[works_node].depth > deepest_plain);

  // Without pushdown the planner has no reason to move them down.
  const auto flat = choose_plan(h, {false, true, true});
  CHECK(flat.height < plan.height);
}

TEST_CASE("Q14 orders the selected attribute first") {
  const auto h = corpus_graph("q14");
  const auto on = choose_plan(h);
  CHECK(order_text(on, on.root().order) == "a X");
  const auto off = choose_plan(h, {true, false, true});
  CHECK(order_text(off, off.root().order) == "X a");
}

TEST_CASE("corpus plans are valid and acyclic ones have width one") {
  for (const char* name : kCorpus) {
    CAPTURE(name);
    const auto h = corpus_graph(name);
    for (bool pushdown : {true, false}) {
      for (const auto& p : enumerate_ghds(h, pushdown)) CHECK(check_ghd(p).empty());
      for (bool reorder : {true, false}) {
        const auto plan = choose_plan(h, {pushdown, reorder, true});
        CHECK(check_ghd(plan).empty());
        const Rational want = std::string(name) == "q2" || std::string(name) == "q9" ? Rational(3, 2) : Rational(1);
        CHECK(plan.fhw == want);
        CHECK(choose_plan(h, {pushdown, reorder, true}).canonical == plan.canonical);
      }
    }
  }
}

TEST_CASE("chosen plan has maximal selection depth among plain-rooted plans of equal width") {
  for (const char* name : kCorpus) {
    CAPTURE(name);
    const auto h = corpus_graph(name);
    const auto plan = choose_plan(h);
    for (const auto& p : enumerate_ghds(h, true)) {
      bool plain_root = false;
      for (auto e : p.root().lambda) plain_root = plain_root || !p.graph.edges[e].has_selection();
      if (!plain_root || p.fhw != plan.fhw) continue;
      CHECK(p.selection_depth <= plan.selection_depth);
    }
  }
}

TEST_CASE("global order is a permutation with root selections first") {
  for (const char* name : kCorpus) {
    CAPTURE(name);
    const auto h = corpus_graph(name);
    for (bool reorder : {true, false}) {
      const auto plan = choose_plan(h, {true, reorder, true});
      std::set<VertexId> seen(plan.attribute_order.begin(), plan.attribute_order.end());
      CHECK(seen.size() == plan.graph.vertex_count());
      CHECK(plan.attribute_order.size() == plan.graph.vertex_count());
      if (!reorder) continue;
      bool free_seen = false;
      for (VertexId v : plan.root().order) {
        if (plan.graph.selected[v]) {
          CHECK_FALSE(free_seen);
        } else {
          free_seen = true;
        }
      }
    }
  }
}

TEST_CASE("no selections keeps the input order on a single node") {
  Hypergraph h;
  const auto y = h.add_vertex("y");
  const auto x = h.add_vertex("x");
  add_edge(h, "R", {y, x}, 10);
  const auto plan = choose_plan(h);
  CHECK(order_text(plan, plan.attribute_order) == "y x");
  CHECK(plan.selection_depth == 0);
}

TEST_CASE("random acyclic queries get width one") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 150; ++i) {
    Hypergraph h;
    const std::size_t n = 2 + rng() % 6;
    std::vector<VertexId> v;
    for (std::size_t k = 0; k < n; ++k) v.push_back(h.add_vertex("v" + std::to_string(k)));
    // A random tree over the vertices, one binary edge per tree edge.
    for (std::size_t k = 1; k < n; ++k) {
      const VertexId parent = v[rng() % k];
      add_edge(h, "R" + std::to_string(k), {parent, v[k]}, static_cast<double>(1 + rng() % 1000));
    }
    if (rng() % 2) {
      const VertexId s = h.add_vertex("s", true);
      add_edge(h, "T", {v[rng() % n], s}, static_cast<double>(1 + rng() % 1000), {{s, 7}});
    }
    for (bool pushdown : {true, false}) {
      const auto plan = choose_plan(h, {pushdown, true, true});
      CHECK(check_ghd(plan).empty());
      CHECK(plan.fhw == Rational(1));
      for (const auto& node : plan.nodes) {
        const VertexMask need = pushdown ? node.chi & plan.graph.unselected_vertices() : node.chi;
        if (need == 0) continue;
        bool single = false;
        for (auto e : node.lambda) single = single || (need & ~plan.graph.edges[e].mask()) == 0;
        CHECK(single);
      }
    }
  }
}

TEST_CASE("pipeline needs the shared attribute to lead both orders") {
  Hypergraph h;
  const auto x = h.add_vertex("x");
  const auto y = h.add_vertex("y");
  const auto z = h.add_vertex("z");
  add_edge(h, "R", {x, y}, 10);
  add_edge(h, "S", {x, z}, 10);
  GhdPlan plan;
  plan.graph = h;
  plan.duplicate = {false, false};
  GhdNode root;
  root.lambda = {0};
  root.chi = bit(x) | bit(y);
  root.children = {1};
  root.order = {x, y};
  GhdNode child;
  child.lambda = {1};
  child.chi = bit(x) | bit(z);
  child.parent = 0;
  child.depth = 1;
  child.order = {x, z};
  plan.nodes = {root, child};

  mark_pipeline_edges(plan);
  REQUIRE(plan.pipeline_edges.size() == 1);
  CHECK(plan.pipeline_edges[0].prefix == std::vector<VertexId>{x});

  plan.nodes[1].order = {z, x};
  mark_pipeline_edges(plan);
  CHECK(plan.pipeline_edges.empty());

  plan.nodes.resize(1);
  plan.nodes[0].children.clear();
  mark_pipeline_edges(plan);
  CHECK(plan.pipeline_edges.empty());
}

TEST_CASE("planning is deterministic") {
  const auto h = corpus_graph("q2");
  const auto a = render_plan(choose_plan(h));
  for (int i = 0; i < 5; ++i) CHECK(render_plan(choose_plan(h)) == a);
}
