#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "lifshitz/census.hpp"
#include "lifshitz/feynman_graph.hpp"
#include "lifshitz/partitions.hpp"
#include "lifshitz/rng.hpp"

using namespace lifshitz;

namespace {

std::vector<Partition> pairings(int n, bool gate_free) {
  EnumerationOptions o;
  o.pairings_only = true;
  o.gate_free = gate_free;
  return enumerate_partitions(IndexSet::upsilon(n, n), o);
}

template <class F>
double simpson(F f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

DeltaSystem forms(std::vector<std::vector<int>> rows) { return DeltaSystem{10, std::move(rows)}; }

// Coefficient row for sum_j c_j p_j over p_1..p_10.
std::vector<int> row(std::initializer_list<std::pair<int, int>> terms) {
  std::vector<int> r(10, 0);
  for (auto [j, c] : terms) r[j - 1] = c;
  return r;
}

}  // namespace

TEST_CASE("small enumerations") {
  CHECK(pairings(2, false).size() == 3);
  auto gf = pairings(2, true);
  REQUIRE(gf.size() == 2);
  CHECK(gf[0].to_string() == "{{1,4},{2,5}}");
  CHECK(gf[1].to_string() == "{{1,5},{2,4}}");
  CHECK(pairings(1, false).size() == 1);
  CHECK(pairings(1, true).size() == 1);
  CHECK(pairings(3, false).size() == 15);
  CHECK(pairings(4, false).size() == 105);
  CHECK(parse_partition("1,3|2,6") == parse_partition("{{2,6},{1,3}}"));
}

TEST_CASE("cumulant coefficients") {
  CHECK(cumulant_coefficient(2) == doctest::Approx(1.0));
  CHECK(cumulant_coefficient(4) == doctest::Approx(-6.0 / 5.0));
  CHECK_THROWS(cumulant_coefficient(3));
  // E[V(a)^2 V(b)^4] for a != b by product quadrature
  const double a = std::sqrt(3.0);
  double m2 = simpson([&](double v) { return v * v / (2 * a); }, -a, a, 2000);
  double m4 = simpson([&](double v) { return std::pow(v, 4) / (2 * a); }, -a, a, 2000);
  CHECK(std::abs(partition_moment({1, 1, 2, 2, 2, 2}) - m2 * m4) < 1e-8);
  double m6 = simpson([&](double v) { return std::pow(v, 6) / (2 * a); }, -a, a, 2000);
  CHECK(std::abs(partition_moment({5, 5, 5, 5, 5, 5}) - m6) < 1e-8);
  CHECK(partition_moment({1, 2}) == 0.0);
}

TEST_CASE("figure graph: delta functions and the forced delta") {
  Partition p = parse_partition("{{1,3},{2,6},{4,9},{7,8}}");
  FeynmanGraph g = FeynmanGraph::from_partition(p, 4);
  DeltaSystem expected = forms({row({{1, 1}, {2, -1}, {3, 1}, {4, -1}}),
                                row({{4, 1}, {5, -1}, {9, 1}, {10, -1}}),
                                row({{2, 1}, {3, -1}, {6, 1}, {7, -1}}),
                                row({{7, 1}, {9, -1}})});
  CHECK(g.delta_system().equivalent(expected));
  CHECK(g.delta_system().implies(row({{1, 1}, {5, -1}, {6, 1}, {10, -1}})));
  auto zl = g.zero_loops();
  REQUIRE(zl.size() == 1);
  CHECK(zl[0] == 8);
}

TEST_CASE("spanning-tree decompositions of all pairings") {
  RandomStream rng(3, "kirchhoff", 0);
  for (int n = 2; n <= 4; ++n)
    for (const Partition& p : pairings(n, false)) {
      FeynmanGraph g = FeynmanGraph::from_partition(p, n);
      auto deg = g.degrees();
      for (std::size_t v = 1; v < deg.size(); ++v) CHECK(deg[v] == 4);
      TreeDecomposition t = spanning_tree_decomposition(g);
      CHECK(int(t.tree_edges.size()) == n);
      CHECK(int(t.loop_edges.size()) == n + 2);
      CHECK(int(g.delta_system().rank()) == n);
      for (const Edge& e : g.edges())
        if (e.special)
          CHECK(std::find(t.loop_edges.begin(), t.loop_edges.end(), e.momentum) != t.loop_edges.end());
      for (int j : t.tree_edges) CHECK_FALSE(g.edge(j).special);
      CHECK(t.reduced_system(2 * n + 2).equivalent(g.delta_system()));
      // random integer loop momenta satisfy every constraint
      auto m = t.momentum_in_loops(2 * n + 2);
      std::vector<long long> w(t.loop_edges.size());
      for (auto& x : w) x = (long long)(rng.bits() % 21) - 10;
      std::vector<long long> p_val(2 * n + 2, 0);
      for (int j = 0; j < 2 * n + 2; ++j)
        for (std::size_t k = 0; k < w.size(); ++k) p_val[j] += m[j][k] * w[k];
      for (const auto& r : g.delta_system().rows) {
        long long s = 0;
        for (int j = 0; j < 2 * n + 2; ++j) s += r[j] * p_val[j];
        CHECK(s == 0);
      }
    }
}

TEST_CASE("divergence degrees of the basic subgraphs") {
  CHECK(divergence_degree({1, 1, 1, 2}).div == 1);
  CHECK(divergence_degree({2, 3, 2, 2}).div == 0);
  for (int n = 2; n <= 4; ++n) {
    FeynmanGraph g = FeynmanGraph::from_partition(pairings(n, true).front(), n);
    std::uint64_t all = (std::uint64_t(1) << (2 * n + 2)) - 1;
    auto c = subgraph_counts(g, all);
    CHECK(c.loops == n + 2);
    CHECK(divergence_degree(c).div == 2 - n);
  }
}

TEST_CASE("census of gate-free pairings") {
  for (int n = 2; n <= 4; ++n)
    for (const Partition& p : pairings(n, true)) {
      FeynmanGraph g = FeynmanGraph::from_partition(p, n);
      CensusReport r = classify_superficial_convergence(g, 0.1);
      CHECK(r.complete);
      CHECK(r.superficially_convergent);
      for (const auto& s : r.subgraphs) {
        if (s.counts.vertices >= 2) CHECK(s.degree.l_div <= -4);
        if (!s.whole && s.degree.div >= 0) CHECK(s.isomorphic_to_F);
        CHECK(s.counts.loops + s.counts.vertices - 1 == s.counts.lines);
        CHECK(s.degree.div <= 4 - s.counts.external - s.counts.loops);
      }
    }
}

TEST_CASE("a gate makes the census fail through the tadpole") {
  FeynmanGraph g = FeynmanGraph::from_partition(parse_partition("{{1,2},{4,5}}"), 2);
  CensusReport r = classify_superficial_convergence(g, 0.1);
  CHECK_FALSE(r.superficially_convergent);
  bool saw_tadpole = false;
  for (const auto& s : r.subgraphs)
    if (s.tadpole) {
      saw_tadpole = true;
      CHECK(s.degree.div == 1);
    }
  CHECK(saw_tadpole);
}

TEST_CASE("exchange format round trip and canonical form") {
  FeynmanGraph g = FeynmanGraph::from_partition(parse_partition("{{1,5},{2,4}}"), 2);
  FeynmanGraph h = FeynmanGraph::from_exchange_format(g.to_exchange_format());
  CHECK(h.to_exchange_format() == g.to_exchange_format());
  CHECK(canonical_form(2, {{0, 1}, {1, 0}, {0, 1}}) == canonical_form(2, {{1, 0}, {1, 0}, {1, 0}}));
  CHECK(integer_rank({{1, 2}, {2, 4}}) == 1);
}
