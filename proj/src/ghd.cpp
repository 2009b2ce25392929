#include "wcoj/ghd.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "wcoj/error.hpp"
#include "wcoj/query.hpp"

namespace wcoj {
namespace {

VertexMask edges_attrs(const std::vector<VertexMask>& masks, std::uint32_t edges) {
  VertexMask m = 0;
  for (auto e = edges; e != 0; e &= e - 1) m |= masks[std::countr_zero(e)];
  return m;
}

class Enumerator {
 public:
  Enumerator(const Hypergraph& h, const std::function<void(const GhdShape&)>& visit)
      : visit_(visit) {
    for (const auto& e : h.edges) masks_.push_back(e.mask());
  }

  void run() {
    if (masks_.empty()) return;
    pending_.push_back({static_cast<std::uint32_t>((1u << masks_.size()) - 1), 0, std::nullopt});
    expand();
  }

 private:
  struct Pending {
    std::uint32_t edges;
    VertexMask required;  // vertices the subtree root must hold
    std::optional<std::size_t> parent;
  };

  void expand() {
    if (pending_.empty()) {
      visit_(shape_);
      return;
    }
    const Pending p = pending_.back();
    pending_.pop_back();
    for (std::uint32_t b = p.edges; b != 0; b = (b - 1) & p.edges) {
      const VertexMask chi = edges_attrs(masks_, b);
      if ((p.required & ~chi) != 0) continue;
      shape_.blocks.push_back(b);
      shape_.parents.push_back(p.parent);
      partition(p, p.edges & ~b, chi, shape_.blocks.size() - 1);
      shape_.blocks.pop_back();
      shape_.parents.pop_back();
    }
    pending_.push_back(p);
  }

  // Splits `rest` into child groups; every vertex a group shares with the
  // rest of the subtree (or with the outside) must be in the block above.
  void partition(const Pending& p, std::uint32_t rest, VertexMask chi, std::size_t block) {
    if (rest == 0) {
      expand();
      return;
    }
    const std::uint32_t low = rest & (~rest + 1);
    const std::uint32_t others = rest & ~low;
    for (std::uint32_t extra = others;; extra = (extra - 1) & others) {
      const std::uint32_t group = low | extra;
      const VertexMask inside = edges_attrs(masks_, group);
      const VertexMask outside = edges_attrs(masks_, p.edges & ~group) | p.required;
      const VertexMask shared = inside & outside;
      if ((shared & ~chi) == 0) {
        pending_.push_back({group, shared, block});
        partition(p, rest & ~group, chi, block);
        pending_.pop_back();
      }
      if (extra == 0) break;
    }
  }

  const std::function<void(const GhdShape&)>& visit_;
  std::vector<VertexMask> masks_;
  std::vector<Pending> pending_;
  GhdShape shape_;
};

std::string edge_label(const Hypergraph& h, std::size_t id) {
  const auto& e = h.edges[id];
  std::string s = short_name(e.relation) + "(";
  for (std::size_t i = 0; i < e.attributes.size(); ++i) {
    if (i) s += ",";
    s += h.vertices[e.attributes[i]];
  }
  return s + ")";
}

std::string vertex_list(const Hypergraph& h, const std::vector<VertexId>& vs,
                        const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) s += sep;
    s += h.vertices[vs[i]];
  }
  return s;
}

VertexMask selected_mask(const Hypergraph& h) { return h.all_vertices() & ~h.unselected_vertices(); }

bool has_plain_edge(const Hypergraph& h) {
  return std::any_of(h.edges.begin(), h.edges.end(),
                     [](const HyperEdge& e) { return !e.has_selection(); });
}

// Width cache for one hypergraph, keyed by block mask.
class WidthCache {
 public:
  WidthCache(const Hypergraph& h, bool pushdown) : h_(h), pushdown_(pushdown) {
    for (const auto& e : h.edges) masks_.push_back(e.mask());
  }

  Rational width(std::uint32_t block) {
    auto it = cache_.find(block);
    if (it != cache_.end()) return it->second;
    std::vector<VertexMask> lambda;
    for (auto e = block; e != 0; e &= e - 1) lambda.push_back(masks_[std::countr_zero(e)]);
    VertexMask chi = edges_attrs(masks_, block);
    if (pushdown_) chi &= h_.unselected_vertices();
    const Rational w = fractional_cover_number(lambda, chi);
    cache_.emplace(block, w);
    return w;
  }

 private:
  const Hypergraph& h_;
  bool pushdown_;
  std::vector<VertexMask> masks_;
  std::map<std::uint32_t, Rational> cache_;
};

GhdPlan build_plan(const Hypergraph& h, const GhdShape& shape, WidthCache& widths) {
  const std::size_t n = shape.blocks.size();
  std::vector<std::vector<std::size_t>> kids(n);
  std::size_t root = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (shape.parents[i]) {
      kids[*shape.parents[i]].push_back(i);
    } else {
      root = i;
    }
  }

  // Canonical labels bottom-up; children are visited in label order.
  std::vector<std::string> label(n);
  std::vector<std::size_t> post;
  {
    std::vector<std::pair<std::size_t, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [b, done] = stack.back();
      stack.pop_back();
      if (done) {
        post.push_back(b);
        continue;
      }
      stack.push_back({b, true});
      for (auto c : kids[b]) stack.push_back({c, false});
    }
  }
  for (auto b : post) {
    auto& ks = kids[b];
    std::sort(ks.begin(), ks.end(), [&](std::size_t x, std::size_t y) {
      return std::tie(label[x], x) < std::tie(label[y], y);
    });
    std::string s = "[";
    bool first = true;
    for (auto e = shape.blocks[b]; e != 0; e &= e - 1) {
      if (!first) s += ",";
      s += std::to_string(std::countr_zero(e));
      first = false;
    }
    for (auto c : ks) s += label[c];
    label[b] = s + "]";
  }

  GhdPlan plan;
  plan.graph = h;
  plan.duplicate.assign(h.edges.size(), false);
  plan.canonical = label[root];
  std::vector<std::size_t> bfs{root};
  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    for (auto c : kids[bfs[i]]) bfs.push_back(c);
  }
  for (std::size_t i = 0; i < n; ++i) index[bfs[i]] = i;

  const VertexMask sel = selected_mask(h);
  plan.fhw = Rational(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = bfs[i];
    GhdNode node;
    for (auto e = shape.blocks[b]; e != 0; e &= e - 1) {
      node.lambda.push_back(static_cast<std::size_t>(std::countr_zero(e)));
      node.chi |= h.edges[node.lambda.back()].mask();
    }
    node.width = widths.width(shape.blocks[b]);
    if (shape.parents[b]) {
      node.parent = index[*shape.parents[b]];
      node.depth = plan.nodes[*node.parent].depth + 1;
    }
    for (auto c : kids[b]) node.children.push_back(index[c]);
    plan.fhw = std::max(plan.fhw, node.width);
    plan.height = std::max(plan.height, node.depth);
    plan.selection_depth += node.depth * static_cast<std::size_t>(std::popcount(node.chi & sel));
    plan.nodes.push_back(std::move(node));
  }
  return plan;
}

// Rebuilds a shape from a plan so extra edges can be appended.
GhdShape shape_of(const GhdPlan& plan) {
  GhdShape s;
  for (const auto& node : plan.nodes) {
    std::uint32_t b = 0;
    for (auto e : node.lambda) b |= 1u << e;
    s.blocks.push_back(b);
    s.parents.push_back(node.parent);
  }
  return s;
}

bool in_subtree(const GhdPlan& plan, std::size_t node, std::size_t top) {
  for (std::optional<std::size_t> t = node; t; t = plan.nodes[*t].parent) {
    if (*t == top) return true;
  }
  return false;
}

using PushdownKey = std::tuple<Rational, std::size_t, std::size_t, std::string>;

PushdownKey pushdown_key(const GhdPlan& p) {
  // Selection depth is maximized, so it is negated through the complement.
  return {p.fhw, SIZE_MAX - p.selection_depth, p.height, p.canonical};
}

}  // namespace

void for_each_ghd(const Hypergraph& h, const std::function<void(const GhdShape&)>& visit) {
  if (h.edges.size() > kMaxPlanEdges) {
    throw Error(ErrorCode::TooManyEdges, "query has " + std::to_string(h.edges.size()) +
                                             " patterns; the planner handles at most " +
                                             std::to_string(kMaxPlanEdges));
  }
  Enumerator(h, visit).run();
}

GhdPlan make_plan(const Hypergraph& h, const GhdShape& shape, bool pushdown) {
  WidthCache widths(h, pushdown);
  return build_plan(h, shape, widths);
}

std::vector<GhdPlan> enumerate_ghds(const Hypergraph& h, bool pushdown) {
  WidthCache widths(h, pushdown);
  std::vector<GhdPlan> out;
  for_each_ghd(h, [&](const GhdShape& s) { out.push_back(build_plan(h, s, widths)); });
  return out;
}

std::optional<GhdPlan> duplicate_selections(const GhdPlan& plan) {
  if (plan.nodes.empty()) return std::nullopt;
  Hypergraph g = plan.graph;
  GhdShape shape = shape_of(plan);
  const std::size_t original = g.edges.size();
  std::vector<std::size_t> home(original);
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    for (auto e : plan.nodes[i].lambda) home[e] = i;
  }
  const VertexMask unsel = plan.graph.unselected_vertices();
  std::size_t copies = 0;
  for (std::size_t e = 0; e < original; ++e) {
    const auto& edge = plan.graph.edges[e];
    if (!edge.has_selection() || plan.duplicate[e]) continue;
    const VertexMask need = edge.mask() & unsel;
    for (auto top : plan.root().children) {
      if (in_subtree(plan, home[e], top)) continue;
      std::optional<std::size_t> target;
      for (std::size_t t = top; t < plan.nodes.size(); ++t) {
        if (!in_subtree(plan, t, top)) continue;
        const bool covers = std::any_of(
            plan.nodes[t].lambda.begin(), plan.nodes[t].lambda.end(),
            [&](std::size_t f) { return (need & ~plan.graph.edges[f].mask()) == 0; });
        if (covers && (!target || plan.nodes[t].depth > plan.nodes[*target].depth)) target = t;
      }
      if (!target) continue;
      if (g.edges.size() >= 32) {
        throw Error(ErrorCode::TooManyEdges, "too many duplicated selection edges");
      }
      ++copies;
      HyperEdge copy = edge;
      for (auto& s : copy.selections) {
        const VertexId fresh =
            g.add_vertex(g.vertices[s.vertex] + "#" + std::to_string(copies), true);
        std::replace(copy.attributes.begin(), copy.attributes.end(), s.vertex, fresh);
        s.vertex = fresh;
      }
      g.edges.push_back(std::move(copy));
      shape.blocks.push_back(1u << (g.edges.size() - 1));
      shape.parents.push_back(*target);
    }
  }
  if (copies == 0) return std::nullopt;
  GhdPlan out = make_plan(g, shape, true);
  // Filter copies do not count toward selection depth.
  out.selection_depth = plan.selection_depth;
  out.duplicate.assign(g.edges.size(), false);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    out.duplicate[e] = e >= original || plan.duplicate[e];
  }
  return out;
}

GhdPlan choose_plan(const Hypergraph& h, const PlannerOptions& options) {
  GhdPlan best;
  bool found = false;
  if (h.edges.empty()) {
    best.graph = h;
  } else if (options.selection_pushdown) {
    // Keep the shapes of minimal width; among them maximize selection depth.
    WidthCache widths(h, true);
    const bool need_plain = has_plain_edge(h);
    std::vector<GhdShape> shapes;
    std::optional<Rational> min_fhw;
    for_each_ghd(h, [&](const GhdShape& s) {
      std::size_t root = 0;
      while (s.parents[root]) ++root;
      if (need_plain) {
        bool plain = false;
        for (auto e = s.blocks[root]; e != 0; e &= e - 1) {
          plain = plain || !h.edges[std::countr_zero(e)].has_selection();
        }
        if (!plain) return;
      }
      Rational fhw(0);
      for (auto b : s.blocks) fhw = std::max(fhw, widths.width(b));
      if (!min_fhw || fhw < *min_fhw) {
        min_fhw = fhw;
        shapes.clear();
      }
      if (fhw == *min_fhw) shapes.push_back(s);
    });
    for (const auto& s : shapes) {
      GhdPlan p = build_plan(h, s, widths);
      if (!found || pushdown_key(p) < pushdown_key(best)) {
        best = std::move(p);
        found = true;
      }
    }
    if (auto d = duplicate_selections(best)) best = std::move(*d);
  } else {
    WidthCache widths(h, false);
    for_each_ghd(h, [&](const GhdShape& s) {
      GhdPlan p = build_plan(h, s, widths);
      if (!found || std::tie(p.fhw, p.height, p.canonical) <
                        std::tie(best.fhw, best.height, best.canonical)) {
        best = std::move(p);
        found = true;
      }
    });
  }
  if (best.duplicate.size() != best.graph.edges.size()) {
    best.duplicate.assign(best.graph.edges.size(), false);
  }
  best.attribute_order = global_attribute_order(best, options.attribute_reorder);
  assign_local_orders(best);
  if (options.pipeline) mark_pipeline_edges(best);
  return best;
}

std::vector<VertexId> global_attribute_order(const GhdPlan& plan, bool attribute_reorder) {
  const auto& g = plan.graph;
  std::vector<VertexId> order;
  std::vector<bool> placed(g.vertex_count(), false);
  if (attribute_reorder) {
    std::vector<std::pair<double, VertexId>> sel;
    for (const auto& e : g.edges) {
      for (const auto& s : e.selections) sel.emplace_back(e.cardinality, s.vertex);
    }
    std::sort(sel.begin(), sel.end());
    for (const auto& [card, v] : sel) {
      if (!placed[v]) {
        order.push_back(v);
        placed[v] = true;
      }
    }
  }
  for (const auto& node : plan.nodes) {
    for (VertexId v : mask_vertices(node.chi)) {
      if (!placed[v]) {
        order.push_back(v);
        placed[v] = true;
      }
    }
  }
  return order;
}

void assign_local_orders(GhdPlan& plan) {
  for (auto& node : plan.nodes) {
    node.order.clear();
    for (VertexId v : plan.attribute_order) {
      if (node.chi & bit(v)) node.order.push_back(v);
    }
  }
}

void mark_pipeline_edges(GhdPlan& plan) {
  plan.pipeline_edges.clear();
  if (plan.nodes.size() < 2) return;
  const VertexMask unsel = plan.graph.unselected_vertices();
  auto free_order = [&](const GhdNode& n) {
    std::vector<VertexId> out;
    for (VertexId v : n.order) {
      if (unsel & bit(v)) out.push_back(v);
    }
    return out;
  };
  const auto& root = plan.nodes[0];
  const auto root_order = free_order(root);
  for (auto c : root.children) {
    const auto& child = plan.nodes[c];
    const VertexMask shared = root.chi & child.chi & unsel;
    if (shared == 0) continue;
    const auto child_order = free_order(child);
    const auto k = static_cast<std::size_t>(std::popcount(shared));
    auto leads = [&](const std::vector<VertexId>& o) {
      if (o.size() < k) return false;
      for (std::size_t i = 0; i < k; ++i) {
        if (!(shared & bit(o[i]))) return false;
      }
      return true;
    };
    if (leads(root_order) && leads(child_order)) {
      plan.pipeline_edges.push_back(
          {0, c, std::vector<VertexId>(root_order.begin(), root_order.begin() + k)});
      return;
    }
  }
}

std::string check_ghd(const GhdPlan& plan) {
  const auto& g = plan.graph;
  if (plan.nodes.empty()) return g.edges.empty() ? "" : "plan has no nodes";
  std::vector<int> owner(g.edges.size(), -1);
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    const auto& node = plan.nodes[i];
    if ((i == 0) != !node.parent) return "node " + std::to_string(i) + " has a bad parent link";
    if (node.parent) {
      const auto& up = plan.nodes[*node.parent].children;
      if (std::find(up.begin(), up.end(), i) == up.end()) {
        return "node " + std::to_string(i) + " is missing from its parent's children";
      }
    }
    VertexMask covered = 0;
    for (auto e : node.lambda) {
      if (e >= g.edges.size()) return "node " + std::to_string(i) + " names a missing edge";
      covered |= g.edges[e].mask();
      owner[e] = static_cast<int>(i);
    }
    if (node.chi & ~covered) {
      return "node " + std::to_string(i) + ": chi is not within the union of lambda";
    }
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const VertexMask m = g.edges[e].mask();
    const bool covered = std::any_of(plan.nodes.begin(), plan.nodes.end(),
                                     [&](const GhdNode& n) { return (m & ~n.chi) == 0; });
    if (!covered || owner[e] < 0) return "edge " + edge_label(g, e) + " is not covered";
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    int tops = 0;
    for (const auto& n : plan.nodes) {
      if (!(n.chi & bit(v))) continue;
      if (!n.parent || !(plan.nodes[*n.parent].chi & bit(v))) ++tops;
    }
    if (tops > 1) return "attribute " + g.vertices[v] + " breaks running intersection";
  }
  return {};
}

std::string render_plan(const GhdPlan& plan) {
  const auto& g = plan.graph;
  std::ostringstream os;
  os << "plan: fhw=" << plan.fhw.str() << " height=" << plan.height
     << " selection_depth=" << plan.selection_depth << " nodes=" << plan.nodes.size() << "\n";
  os << "attribute order: " << vertex_list(g, plan.attribute_order, " ") << "\n";
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    const auto& n = plan.nodes[i];
    os << std::string(2 * n.depth, ' ') << "node " << i;
    if (n.parent) os << " (parent " << *n.parent << ")";
    os << ": chi={" << vertex_list(g, mask_vertices(n.chi), ",") << "} lambda={";
    for (std::size_t k = 0; k < n.lambda.size(); ++k) {
      if (k) os << ", ";
      os << edge_label(g, n.lambda[k]);
      if (plan.duplicate[n.lambda[k]]) os << " [filter]";
    }
    os << "} width=" << n.width.str() << " order=[" << vertex_list(g, n.order, ",") << "]\n";
  }
  if (plan.pipeline_edges.empty()) {
    os << "pipeline: none\n";
  } else {
    for (const auto& p : plan.pipeline_edges) {
      os << "pipeline: node " << p.parent << " -> node " << p.child << " on ["
         << vertex_list(g, p.prefix, ",") << "]\n";
    }
  }
  std::vector<VertexMask> masks;
  std::vector<double> cards;
  std::vector<std::size_t> ids;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (plan.duplicate[e]) continue;
    masks.push_back(g.edges[e].mask());
    cards.push_back(g.edges[e].cardinality);
    ids.push_back(e);
  }
  if (!masks.empty()) {
    const auto cover = fractional_cover(masks, cards, g.unselected_vertices() & g.covered_vertices());
    os << "cover:";
    char buf[64];
    for (std::size_t k = 0; k < ids.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.4g", cover.weights[k]);
      os << " " << edge_label(g, ids[k]) << "=" << buf;
    }
    std::snprintf(buf, sizeof buf, "%.3e", cover.bound);
    os << "\nagm bound: " << buf << "\n";
  }
  return os.str();
}

}  // namespace wcoj
