#include <cmath>

#include "doctest.h"
#include "lifshitz/diagram_values.hpp"
#include "lifshitz/error.hpp"
#include "lifshitz/feynman_graph.hpp"
#include "lifshitz/partitions.hpp"

using namespace lifshitz;

namespace {

FeynmanGraph bubble() { return FeynmanGraph::from_edges(2, {{1, 0, 1, false}, {2, 1, 0, false}}); }

FeynmanGraph graph_F() {
  return FeynmanGraph::from_edges(2, {{1, 0, 1, false}, {2, 1, 0, false}, {3, 0, 1, false}});
}

McParams params(std::uint64_t samples, std::uint64_t seed = 1) {
  McParams mc;
  mc.samples = samples;
  mc.seed = seed;
  return mc;
}

}  // namespace

TEST_CASE("two-line loop against radial quadrature") {
  double exact = bubble_radial_quadrature();
  GraphValueEstimate e = graph_value(bubble(), params(40000), "bubble");
  CHECK(std::abs(e.value - exact) < 3 * e.stderr_);
  CHECK(e.stderr_ / e.value < 0.02);
}

TEST_CASE("graph F converges at the Monte Carlo rate") {
  GraphValueEstimate a = graph_value(graph_F(), params(4000));
  GraphValueEstimate b = graph_value(graph_F(), params(16000));
  CHECK(std::isfinite(a.value));
  CHECK(a.value > 0);
  double shrink = b.stderr_ / a.stderr_;
  CHECK(shrink > 0.3);
  CHECK(shrink < 0.75);
}

TEST_CASE("same seed gives the same estimate") {
  GraphValueEstimate a = graph_value(bubble(), params(5000, 9));
  GraphValueEstimate b = graph_value(bubble(), params(5000, 9));
  CHECK(a.value == b.value);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("0-loop graphs are rejected") {
  FeynmanGraph g = FeynmanGraph::from_partition(parse_partition("{{1,2},{4,5}}"), 2);
  CHECK_THROWS_AS(graph_value(g, params(100)), NumericalError);
}

TEST_CASE("torus pairing integrals are positive") {
  EnumerationOptions o;
  o.pairings_only = true;
  o.gate_free = true;
  for (const Partition& p : enumerate_partitions(IndexSet::upsilon(2, 2), o)) {
    GraphValueEstimate e = torus_pairing_integral(p, 0.1, params(4000));
    CHECK(e.value > 0);
  }
}

TEST_CASE("continuum surrogate needs a cutoff when power counting fails") {
  Partition p = parse_partition("{{1,4},{2,5}}");
  CHECK_THROWS_AS(continuum_pairing_integral(p, 0.1, params(100)), NumericalError);
  GraphValueEstimate e = continuum_pairing_integral(p, 0.1, params(4000), 50.0);
  CHECK(e.value > 0);
}

TEST_CASE("stopping rule at the chosen order") {
  for (double rho : {std::exp(-8.0), std::exp(-10.0), 1e-6, 1e-9}) {
    int N = chosen_stopping_order(rho);
    StoppingCheck c = stopping_rule_check(rho, N);
    CHECK(c.holds);
    CHECK(c.lhs_log < c.rhs_log);
  }
}

TEST_CASE("bound assembly") {
  BoundAssembly small = assemble_An_bound(2, 1e-4, 0.1);
  BoundAssembly smaller = assemble_An_bound(2, 1e-5, 0.1);
  CHECK(smaller.log_bound < small.log_bound);
  CHECK(small.rho < 1);
  CHECK_THROWS_AS(assemble_An_bound(2, 0.5, 0.1), DomainError);
  CHECK(std::isfinite(refe_exponent(1e-2, 1.0)));
  BoundMinimum m = bound_minimum(1e-4, 0.1, 1.0, 40);
  CHECK(m.argmin >= 1);
}
