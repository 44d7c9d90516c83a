#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lifshitz/feynman_graph.hpp"

namespace lifshitz {

// Counts for a connected subgraph G' of G.
struct SubgraphCounts {
  int vertices = 0;        // N
  int lines = 0;           // I
  int loops = 0;           // Lambda, nullity of the incidence matrix
  int external = 0;        // E, half-edges of G \ G' attached to G'
};

struct DivergenceDegree {
  int div = 0;    // 3 Lambda - 2 I
  int l_div = 0;  // Lambda - 4 I
};

DivergenceDegree divergence_degree(const SubgraphCounts& c);

// Counts for the subgraph spanned by the given edge bitmask (bit j-1 <-> p_j).
SubgraphCounts subgraph_counts(const FeynmanGraph& g, std::uint64_t mask);
bool subgraph_connected(const FeynmanGraph& g, std::uint64_t mask);

enum class Clause { NegativeDiv, LogMarginal, Violated };
std::string to_string(Clause c);
Clause convergence_clause(const SubgraphCounts& c, const DivergenceDegree& d, double eps);

struct SubgraphRecord {
  std::uint64_t mask = 0;
  std::vector<int> edges;
  SubgraphCounts counts;
  DivergenceDegree degree;
  Clause clause = Clause::Violated;
  bool whole = false;
  bool bridgeless = false;
  bool tadpole = false;        // a single 0-loop line
  bool isomorphic_to_F = false;  // two vertices joined by three lines
};

struct CensusReport {
  std::string partition;
  int order = 0;
  double eps = 0.1;
  bool complete = true;
  std::uint64_t examined = 0;
  std::vector<SubgraphRecord> subgraphs;
  bool superficially_convergent = false;

  nlohmann::json to_json() const;
};

CensusReport classify_superficial_convergence(const FeynmanGraph& g, double eps = 0.1,
                                              std::uint64_t budget = 1000000);

}  // namespace lifshitz
