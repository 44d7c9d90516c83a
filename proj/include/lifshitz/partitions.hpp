#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "lifshitz/density.hpp"

namespace lifshitz {

// Ordered index set; the standard one is {1..N, N+2..N+N'+1}.
struct IndexSet {
  int n_left = 0;
  int n_right = 0;
  std::vector<int> members;

  static IndexSet upsilon(int n_left, int n_right);
  // Arbitrary sorted member list (n_left = size, n_right = 0).
  static IndexSet of(std::vector<int> members);
  std::size_t size() const { return members.size(); }
};

using Block = std::vector<int>;

// Blocks sorted by smallest element, members sorted inside each block.
struct Partition {
  std::vector<Block> blocks;

  static Partition canonical(std::vector<Block> blocks);
  bool is_pairing() const;
  bool has_gate() const;
  std::vector<int> members() const;
  std::string to_string() const;
  auto operator<=>(const Partition&) const = default;
};

bool is_gate(const Block& b);
Partition parse_partition(const std::string& text);

struct EnumerationOptions {
  bool pairings_only = false;
  bool gate_free = false;
  std::size_t max_indices = 16;
};

std::vector<Partition> enumerate_partitions(const IndexSet& set, const EnumerationOptions& opts = {});

// Coefficients c_{2l} fixed by m_{2l} = sum over even partitions of 2l slots of prod c_{|S|}.
double cumulant_coefficient(int block_size, const DensitySpec& density = {});

// E[prod_i V(label_i)] predicted by the even-partition expansion.
double partition_moment(const std::vector<int>& site_labels, const DensitySpec& density = {});

// (2n-1)!!
unsigned long long double_factorial_odd(int two_n);

}  // namespace lifshitz
