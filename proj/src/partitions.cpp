#include "lifshitz/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lifshitz/error.hpp"

namespace lifshitz {

IndexSet IndexSet::upsilon(int n_left, int n_right) {
  if (n_left < 0 || n_right < 0) throw InvalidArgument("index set sizes must be >= 0");
  IndexSet s{n_left, n_right, {}};
  for (int i = 1; i <= n_left; ++i) s.members.push_back(i);
  for (int i = n_left + 2; i <= n_left + n_right + 1; ++i) s.members.push_back(i);
  return s;
}

IndexSet IndexSet::of(std::vector<int> m) {
  std::sort(m.begin(), m.end());
  if (std::adjacent_find(m.begin(), m.end()) != m.end())
    throw InvalidArgument("index set has repeated members");
  return IndexSet{int(m.size()), 0, std::move(m)};
}

bool is_gate(const Block& b) { return b.size() == 2 && b[1] == b[0] + 1; }

Partition Partition::canonical(std::vector<Block> blocks) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end());
  return Partition{std::move(blocks)};
}

bool Partition::is_pairing() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const Block& b) { return b.size() == 2; });
}

bool Partition::has_gate() const { return std::any_of(blocks.begin(), blocks.end(), is_gate); }

std::vector<int> Partition::members() const {
  std::vector<int> m;
  for (auto& b : blocks) m.insert(m.end(), b.begin(), b.end());
  std::sort(m.begin(), m.end());
  return m;
}

std::string Partition::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) s += ",";
    s += fmt::format("{{{}}}", fmt::join(blocks[i], ","));
  }
  return s + "}";
}

Partition parse_partition(const std::string& text) {
  // Accepts "{{1,3},{2,6}}" or "1,3|2,6".
  std::vector<Block> blocks;
  Block cur;
  std::string num;
  int depth = 0;
  bool braces = text.find('{') != std::string::npos;
  auto flush_num = [&] {
    if (!num.empty()) cur.push_back(std::stoi(num)), num.clear();
  };
  auto flush_block = [&] {
    flush_num();
    if (!cur.empty()) blocks.push_back(cur), cur.clear();
  };
  for (char ch : text) {
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      num += ch;
    } else if (ch == '{') {
      ++depth;
    } else if (ch == '}') {
      if (depth == 2) flush_block();
      --depth;
    } else if (ch == ',') {
      flush_num();
    } else if (ch == '|' && !braces) {
      flush_block();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw InvalidArgument("cannot parse partition '" + text + "'");
    }
  }
  flush_block();
  if (blocks.empty()) throw InvalidArgument("empty partition '" + text + "'");
  return Partition::canonical(std::move(blocks));
}

namespace {

void enumerate_rec(std::vector<int>& rest, std::vector<Block>& acc, const EnumerationOptions& opts,
                   std::vector<Partition>& out) {
  if (rest.empty()) {
    out.push_back(Partition{acc});
    return;
  }
  int first = rest.front();
  std::vector<int> others(rest.begin() + 1, rest.end());
  int m = int(others.size());
  int max_extra = opts.pairings_only ? 1 : m;
  for (int extra = 1; extra <= max_extra; extra += 2) {
    // Lexicographic combinations of `extra` partners out of `others`.
    std::vector<int> pick(extra);
    for (int i = 0; i < extra; ++i) pick[i] = i;
    while (true) {
      Block b{first};
      std::vector<bool> used(m, false);
      for (int i : pick) b.push_back(others[i]), used[i] = true;
      if (!(opts.gate_free && is_gate(b))) {
        std::vector<int> next;
        for (int i = 0; i < m; ++i)
          if (!used[i]) next.push_back(others[i]);
        acc.push_back(b);
        enumerate_rec(next, acc, opts, out);
        acc.pop_back();
      }
      int i = extra - 1;
      while (i >= 0 && pick[i] == m - extra + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < extra; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
}

}  // namespace

std::vector<Partition> enumerate_partitions(const IndexSet& set, const EnumerationOptions& opts) {
  if (set.size() > opts.max_indices)
    throw InvalidArgument(fmt::format("index set of size {} exceeds the enumeration guard {}",
                                      set.size(), opts.max_indices));
  if (opts.pairings_only && set.size() % 2)
    throw InvalidArgument("pairings need an even number of indices");
  std::vector<Partition> out;
  if (set.size() % 2) return out;
  std::vector<int> rest = set.members;
  std::sort(rest.begin(), rest.end());
  std::vector<Block> acc;
  if (rest.empty()) {
    out.push_back(Partition{});
    return out;
  }
  enumerate_rec(rest, acc, opts, out);
  return out;
}

double cumulant_coefficient(int block_size, const DensitySpec& density) {
  if (block_size < 2 || block_size % 2)
    throw InvalidArgument(fmt::format("cumulant block size {} must be even and >= 2", block_size));
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(int(density.family()), block_size);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  // c_{2l} = m_{2l} - sum_{k<l} C(2l-1, 2k-1) c_{2k} m_{2l-2k}
  std::vector<double> c(block_size + 1, 0.0);
  for (int two_l = 2; two_l <= block_size; two_l += 2) {
    double v = density.moment(two_l);
    for (int two_k = 2; two_k < two_l; two_k += 2) {
      double binom = std::round(std::exp(std::lgamma(two_l) - std::lgamma(two_k) - std::lgamma(two_l - two_k + 1)));
      v -= binom * c[two_k] * density.moment(two_l - two_k);
    }
    c[two_l] = v;
    cache[{int(density.family()), two_l}] = v;
  }
  return c[block_size];
}

double partition_moment(const std::vector<int>& labels, const DensitySpec& density) {
  std::vector<int> slots(labels.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = int(i) + 1;
  double total = 0.0;
  for (const auto& p : enumerate_partitions(IndexSet::of(slots))) {
    double term = 1.0;
    for (const auto& b : p.blocks) {
      int site = labels[b[0] - 1];
      bool same = std::all_of(b.begin(), b.end(), [&](int i) { return labels[i - 1] == site; });
      if (!same) {
        term = 0.0;
        break;
      }
      term *= cumulant_coefficient(int(b.size()), density);
    }
    total += term;
  }
  return total;
}

unsigned long long double_factorial_odd(int two_n) {
  unsigned long long r = 1;
  for (int k = two_n - 1; k > 1; k -= 2) r *= k;
  return r;
}

}  // namespace lifshitz
