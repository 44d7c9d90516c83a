#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lifshitz/partitions.hpp"

namespace lifshitz {

// Integer rank by fraction-free elimination.
int integer_rank(std::vector<std::vector<long long>> rows);

// Linear forms in momenta p_1..p_m, each set to zero.
struct DeltaSystem {
  int num_momenta = 0;
  std::vector<std::vector<int>> rows;  // rows[r][j-1] is the coefficient of p_j

  int rank() const;
  // Same affine subspace: rank(A) = rank(B) = rank([A;B]).
  bool equivalent(const DeltaSystem& other) const;
  // True if `form` = 0 is implied by the system.
  bool implies(const std::vector<int>& form) const;
  std::string describe_row(std::size_t r) const;
};

// Directed momentum line p_j from `tail` to `head`.
struct Edge {
  int momentum = 0;
  int tail = 0;
  int head = 0;
  bool special = false;
  bool is_self_loop() const { return tail == head; }
};

class FeynmanGraph {
 public:
  // Two chains of n insertions; vertex 0 is the merged endpoint vertex, block j is vertex j+1.
  static FeynmanGraph from_partition(const Partition& partition, int n);
  static FeynmanGraph from_edges(int num_vertices, std::vector<Edge> edges);

  int num_vertices() const { return num_vertices_; }
  int order() const { return order_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int momentum) const { return edges_.at(momentum - 1); }
  const Partition& partition() const { return partition_; }

  std::vector<int> degrees() const;
  bool is_connected() const;
  // Momentum indices of edges with identical endpoints.
  std::vector<int> zero_loops() const;
  // One constraint per vertex other than the merged endpoint vertex.
  DeltaSystem delta_system() const;
  // The constraint at the endpoint vertex, implied by all others.
  std::vector<int> forced_delta() const;

  // "edge momentum tail head special" lines after a header.
  std::string to_exchange_format() const;
  static FeynmanGraph from_exchange_format(const std::string& text);

 private:
  int num_vertices_ = 0;
  int order_ = 0;
  std::vector<Edge> edges_;
  Partition partition_;
};

struct TreeDecomposition {
  std::vector<int> tree_edges;  // momentum indices u_1..u_k
  std::vector<int> loop_edges;  // w_1..w_l, special edges first
  std::vector<std::vector<int>> a;  // k x l, u_i = sum_j a[i][j] w_j

  // The system prod_i delta(u_i - sum_j a_ij w_j).
  DeltaSystem reduced_system(int num_momenta) const;
  // Each momentum as integer combination of loop momenta (num_momenta x l).
  std::vector<std::vector<int>> momentum_in_loops(int num_momenta) const;
};

// BFS tree from the endpoint vertex avoiding special lines and 0-loops.
TreeDecomposition spanning_tree_decomposition(const FeynmanGraph& g);
// Decomposition relative to a given spanning tree (momentum indices).
TreeDecomposition decomposition_for_tree(const FeynmanGraph& g, const std::vector<int>& tree_edges);
// Spanning trees in lexicographic order of their line sets, at most `limit`.
std::vector<std::vector<int>> spanning_trees(const FeynmanGraph& g, std::size_t limit = 4096);

// Canonical form of an undirected multigraph on `num_vertices` vertices.
std::vector<std::pair<int, int>> canonical_form(int num_vertices,
                                                const std::vector<std::pair<int, int>>& edges);

}  // namespace lifshitz
