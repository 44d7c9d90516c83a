#include "lifshitz/census.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>

#include "lifshitz/error.hpp"

namespace lifshitz {

DivergenceDegree divergence_degree(const SubgraphCounts& c) {
  return {3 * c.loops - 2 * c.lines, c.loops - 4 * c.lines};
}

namespace {

std::vector<int> mask_vertices(const FeynmanGraph& g, std::uint64_t mask) {
  std::vector<int> vs;
  for (auto& e : g.edges())
    if (mask >> (e.momentum - 1) & 1) vs.push_back(e.tail), vs.push_back(e.head);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

const std::vector<std::pair<int, int>>& graph_F_form() {
  static const auto form = canonical_form(2, {{0, 1}, {0, 1}, {0, 1}});
  return form;
}

}  // namespace

namespace {
// True if dropping line j from the subgraph leaves its vertex set disconnected.
bool splits(const FeynmanGraph& g, std::uint64_t mask, int j) {
  auto vs = mask_vertices(g, mask);
  std::vector<int> parent(g.num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (auto& e : g.edges())
    if (e.momentum != j && (mask >> (e.momentum - 1) & 1)) parent[find(e.tail)] = find(e.head);
  for (int v : vs)
    if (find(v) != find(vs[0])) return true;
  return false;
}
}  // namespace

bool subgraph_connected(const FeynmanGraph& g, std::uint64_t mask) {
  if (mask == 0) return false;
  std::vector<int> parent(g.num_vertices());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (auto& e : g.edges())
    if (mask >> (e.momentum - 1) & 1) parent[find(e.tail)] = find(e.head);
  auto vs = mask_vertices(g, mask);
  for (int v : vs)
    if (find(v) != find(vs[0])) return false;
  return true;
}

SubgraphCounts subgraph_counts(const FeynmanGraph& g, std::uint64_t mask) {
  auto vs = mask_vertices(g, mask);
  std::vector<int> local(g.num_vertices(), -1);
  for (std::size_t i = 0; i < vs.size(); ++i) local[vs[i]] = int(i);
  SubgraphCounts c;
  c.vertices = int(vs.size());
  std::vector<std::vector<long long>> incidence(vs.size());
  for (auto& row : incidence) row.reserve(g.edges().size());
  for (auto& e : g.edges()) {
    bool in = mask >> (e.momentum - 1) & 1;
    if (in) {
      ++c.lines;
      for (std::size_t i = 0; i < vs.size(); ++i) {
        long long v = 0;
        if (local[e.head] == int(i)) v += 1;
        if (local[e.tail] == int(i)) v -= 1;
        incidence[i].push_back(v);
      }
    } else {
      if (local[e.tail] >= 0) ++c.external;
      if (local[e.head] >= 0) ++c.external;
    }
  }
  c.loops = c.lines - integer_rank(incidence);
  return c;
}

std::string to_string(Clause c) {
  switch (c) {
    case Clause::NegativeDiv: return "div<-2eps*E";
    case Clause::LogMarginal: return "div=0,l_div<=-eps";
    default: return "violated";
  }
}

Clause convergence_clause(const SubgraphCounts& c, const DivergenceDegree& d, double eps) {
  if (d.div < -2.0 * eps * c.external) return Clause::NegativeDiv;
  if (d.div == 0 && d.l_div <= -eps) return Clause::LogMarginal;
  return Clause::Violated;
}

CensusReport classify_superficial_convergence(const FeynmanGraph& g, double eps, std::uint64_t budget) {
  const int m = int(g.edges().size());
  if (m > 62) throw InvalidArgument("census supports at most 62 lines");
  CensusReport rep;
  rep.partition = g.partition().to_string();
  rep.order = g.order();
  rep.eps = eps;
  const std::uint64_t full = (std::uint64_t(1) << m) - 1;
  bool ok = true;
  for (std::uint64_t mask = 1; mask <= full; ++mask) {
    if (rep.examined >= budget) {
      rep.complete = false;
      break;
    }
    ++rep.examined;
    if (!subgraph_connected(g, mask)) continue;
    SubgraphRecord r;
    r.mask = mask;
    for (int j = 1; j <= m; ++j)
      if (mask >> (j - 1) & 1) r.edges.push_back(j);
    r.counts = subgraph_counts(g, mask);
    r.degree = divergence_degree(r.counts);
    r.clause = convergence_clause(r.counts, r.degree, eps);
    r.whole = mask == full;
    r.bridgeless = true;
    for (int j : r.edges)
      if (splits(g, mask, j)) r.bridgeless = false;
    r.tadpole = r.edges.size() == 1 && g.edge(r.edges[0]).is_self_loop();
    if (r.counts.vertices == 2 && r.counts.lines == 3) {
      std::vector<int> vs = mask_vertices(g, mask);
      std::vector<std::pair<int, int>> es;
      for (int j : r.edges) {
        const Edge& e = g.edge(j);
        int a = e.tail == vs[0] ? 0 : 1, b = e.head == vs[0] ? 0 : 1;
        es.push_back({a, b});
      }
      r.isomorphic_to_F = canonical_form(2, es) == graph_F_form();
    }
    if (r.clause == Clause::Violated) ok = false;
    rep.subgraphs.push_back(std::move(r));
  }
  rep.superficially_convergent = ok && rep.complete;
  return rep;
}

nlohmann::json CensusReport::to_json() const {
  nlohmann::json subs = nlohmann::json::array();
  int violated = 0, divergent_proper = 0, f_count = 0;
  for (auto& r : subgraphs) {
    subs.push_back({{"edges", r.edges},
                    {"N", r.counts.vertices},
                    {"I", r.counts.lines},
                    {"Lambda", r.counts.loops},
                    {"E", r.counts.external},
                    {"div", r.degree.div},
                    {"l_div", r.degree.l_div},
                    {"clause", to_string(r.clause)},
                    {"whole", r.whole},
                    {"tadpole", r.tadpole},
                    {"isomorphic_to_F", r.isomorphic_to_F}});
    if (r.clause == Clause::Violated) ++violated;
    if (!r.whole && r.degree.div >= 0) ++divergent_proper;
    if (r.isomorphic_to_F) ++f_count;
  }
  return {{"partition", partition},
          {"n", order},
          {"eps", eps},
          {"complete", complete},
          {"examined", examined},
          {"verdict", superficially_convergent ? "superficially convergent" : "not superficially convergent"},
          {"summary",
           {{"connected_subgraphs", subgraphs.size()},
            {"violations", violated},
            {"proper_with_nonnegative_div", divergent_proper},
            {"isomorphic_to_F", f_count}}},
          {"subgraphs", subs}};
}

}  // namespace lifshitz
