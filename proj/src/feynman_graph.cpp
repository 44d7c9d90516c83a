#include "lifshitz/feynman_graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "lifshitz/error.hpp"

namespace lifshitz {

int integer_rank(std::vector<std::vector<long long>> m) {
  if (m.empty()) return 0;
  std::size_t cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[r]);
    for (std::size_t i = r + 1; i < m.size(); ++i) {
      if (m[i][c] == 0) continue;
      long long f = m[i][c], g = m[r][c];
      long long div = 0;
      for (std::size_t k = 0; k < cols; ++k) {
        m[i][k] = m[i][k] * g - m[r][k] * f;
        div = std::gcd(div, m[i][k] < 0 ? -m[i][k] : m[i][k]);
      }
      if (div > 1)
        for (auto& v : m[i]) v /= div;
    }
    ++r;
  }
  return int(r);
}

namespace {
std::vector<std::vector<long long>> widen(const std::vector<std::vector<int>>& rows) {
  std::vector<std::vector<long long>> out;
  for (auto& r : rows) out.emplace_back(r.begin(), r.end());
  return out;
}
}  // namespace

int DeltaSystem::rank() const { return integer_rank(widen(rows)); }

bool DeltaSystem::equivalent(const DeltaSystem& o) const {
  if (o.num_momenta != num_momenta) return false;
  auto both = rows;
  both.insert(both.end(), o.rows.begin(), o.rows.end());
  int ra = rank(), rb = o.rank();
  return ra == rb && integer_rank(widen(both)) == ra;
}

bool DeltaSystem::implies(const std::vector<int>& form) const {
  auto both = rows;
  both.push_back(form);
  return integer_rank(widen(both)) == rank();
}

std::string DeltaSystem::describe_row(std::size_t r) const {
  std::string s;
  for (int j = 0; j < num_momenta; ++j) {
    int c = rows[r][j];
    if (c == 0) continue;
    if (c > 0 && !s.empty()) s += "+";
    if (c == -1) s += "-";
    else if (c != 1) s += std::to_string(c);
    s += "p" + std::to_string(j + 1);
  }
  return s.empty() ? "0" : s;
}

FeynmanGraph FeynmanGraph::from_partition(const Partition& partition, int n) {
  if (n < 1) throw InvalidArgument("graph order must be >= 1");
  if (partition.members() != IndexSet::upsilon(n, n).members)
    throw InvalidArgument("partition " + partition.to_string() + " does not cover the index set for n=" +
                          std::to_string(n));
  FeynmanGraph g;
  g.order_ = n;
  g.partition_ = partition;
  g.num_vertices_ = int(partition.blocks.size()) + 1;
  std::vector<int> vertex_of(2 * n + 3, 0);
  for (std::size_t b = 0; b < partition.blocks.size(); ++b)
    for (int i : partition.blocks[b]) vertex_of[i] = int(b) + 1;
  for (int j = 1; j <= 2 * n + 2; ++j)
    g.edges_.push_back(Edge{j, vertex_of[j - 1], vertex_of[j], j == 1 || j == n + 2});
  return g;
}

FeynmanGraph FeynmanGraph::from_edges(int num_vertices, std::vector<Edge> edges) {
  FeynmanGraph g;
  g.num_vertices_ = num_vertices;
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.momentum < b.momentum; });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].momentum != int(i) + 1) throw InvalidArgument("edge momenta must be 1..m");
    if (edges[i].tail < 0 || edges[i].tail >= num_vertices || edges[i].head < 0 ||
        edges[i].head >= num_vertices)
      throw InvalidArgument("edge endpoint out of range");
  }
  g.edges_ = std::move(edges);
  g.order_ = (int(g.edges_.size()) - 2) / 2;
  return g;
}

std::vector<int> FeynmanGraph::degrees() const {
  std::vector<int> d(num_vertices_, 0);
  for (auto& e : edges_) ++d[e.tail], ++d[e.head];
  return d;
}

bool FeynmanGraph::is_connected() const {
  std::vector<int> parent(num_vertices_);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (auto& e : edges_) parent[find(e.tail)] = find(e.head);
  for (int v = 0; v < num_vertices_; ++v)
    if (find(v) != find(0)) return false;
  return true;
}

std::vector<int> FeynmanGraph::zero_loops() const {
  std::vector<int> out;
  for (auto& e : edges_)
    if (e.is_self_loop()) out.push_back(e.momentum);
  return out;
}

DeltaSystem FeynmanGraph::delta_system() const {
  DeltaSystem d;
  d.num_momenta = int(edges_.size());
  for (int v = 1; v < num_vertices_; ++v) {
    std::vector<int> row(edges_.size(), 0);
    for (auto& e : edges_) {
      if (e.head == v) row[e.momentum - 1] += 1;
      if (e.tail == v) row[e.momentum - 1] -= 1;
    }
    d.rows.push_back(row);
  }
  return d;
}

std::vector<int> FeynmanGraph::forced_delta() const {
  std::vector<int> row(edges_.size(), 0);
  for (auto& e : edges_) {
    if (e.head == 0) row[e.momentum - 1] += 1;
    if (e.tail == 0) row[e.momentum - 1] -= 1;
  }
  return row;
}

std::string FeynmanGraph::to_exchange_format() const {
  std::string s = fmt::format("# feynman-graph vertices={} edges={} order={}", num_vertices_,
                              edges_.size(), order_);
  if (!partition_.blocks.empty()) s += " partition=" + partition_.to_string();
  s += "\nmomentum,tail,head,special\n";
  for (auto& e : edges_) s += fmt::format("{},{},{},{}\n", e.momentum, e.tail, e.head, e.special ? 1 : 0);
  return s;
}

FeynmanGraph FeynmanGraph::from_exchange_format(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int vertices = -1, order = -1;
  std::string partition;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("vertices=");
      if (pos != std::string::npos) vertices = std::stoi(line.substr(pos + 9));
      if ((pos = line.find("order=")) != std::string::npos) order = std::stoi(line.substr(pos + 6));
      if ((pos = line.find("partition=")) != std::string::npos) partition = line.substr(pos + 10);
      continue;
    }
    if (line.rfind("momentum", 0) == 0) continue;
    std::istringstream ss(line);
    Edge e;
    char c;
    int special;
    ss >> e.momentum >> c >> e.tail >> c >> e.head >> c >> special;
    if (!ss) throw InvalidArgument("malformed edge line: " + line);
    e.special = special != 0;
    edges.push_back(e);
  }
  if (vertices < 1) throw InvalidArgument("graph header lacks vertices=");
  if (!partition.empty() && order >= 0) {
    FeynmanGraph g = from_partition(parse_partition(partition), order);
    bool same = g.edges_.size() == edges.size();
    for (std::size_t i = 0; same && i < edges.size(); ++i)
      same = g.edges_[i].momentum == edges[i].momentum && g.edges_[i].tail == edges[i].tail &&
             g.edges_[i].head == edges[i].head && g.edges_[i].special == edges[i].special;
    if (!same) throw InvalidArgument("edge list does not match the recorded partition");
    return g;
  }
  return from_edges(vertices, std::move(edges));
}

DeltaSystem TreeDecomposition::reduced_system(int num_momenta) const {
  DeltaSystem d;
  d.num_momenta = num_momenta;
  for (std::size_t i = 0; i < tree_edges.size(); ++i) {
    std::vector<int> row(num_momenta, 0);
    row[tree_edges[i] - 1] = 1;
    for (std::size_t j = 0; j < loop_edges.size(); ++j) row[loop_edges[j] - 1] -= a[i][j];
    d.rows.push_back(row);
  }
  return d;
}

std::vector<std::vector<int>> TreeDecomposition::momentum_in_loops(int num_momenta) const {
  std::vector<std::vector<int>> m(num_momenta, std::vector<int>(loop_edges.size(), 0));
  for (std::size_t j = 0; j < loop_edges.size(); ++j) m[loop_edges[j] - 1][j] = 1;
  for (std::size_t i = 0; i < tree_edges.size(); ++i) m[tree_edges[i] - 1] = a[i];
  return m;
}

TreeDecomposition decomposition_for_tree(const FeynmanGraph& g, const std::vector<int>& tree) {
  const int V = g.num_vertices();
  if (int(tree.size()) != V - 1) throw InvalidArgument("a spanning tree has V-1 lines");
  std::vector<bool> in_tree(g.edges().size() + 1, false);
  for (int j : tree) in_tree.at(j) = true;
  std::vector<int> parent(V, -1), parent_edge(V, -1), depth(V, 0);
  std::vector<bool> seen(V, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (auto& e : g.edges()) {
      if (!in_tree[e.momentum]) continue;
      int w = e.tail == v ? e.head : (e.head == v ? e.tail : -1);
      if (w < 0 || seen[w]) continue;
      seen[w] = true;
      parent[w] = v;
      parent_edge[w] = e.momentum;
      depth[w] = depth[v] + 1;
      q.push(w);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw InvalidArgument("given lines do not form a spanning tree");

  TreeDecomposition td;
  for (auto& e : g.edges())
    if (in_tree[e.momentum]) td.tree_edges.push_back(e.momentum);
  for (auto& e : g.edges())
    if (!in_tree[e.momentum] && e.special) td.loop_edges.push_back(e.momentum);
  for (auto& e : g.edges())
    if (!in_tree[e.momentum] && !e.special) td.loop_edges.push_back(e.momentum);

  std::map<int, std::size_t> tree_row;
  for (std::size_t i = 0; i < td.tree_edges.size(); ++i) tree_row[td.tree_edges[i]] = i;
  td.a.assign(td.tree_edges.size(), std::vector<int>(td.loop_edges.size(), 0));
  for (std::size_t j = 0; j < td.loop_edges.size(); ++j) {
    const Edge& w = g.edge(td.loop_edges[j]);
    if (w.is_self_loop()) continue;
    // Close the loop through the tree from head back to tail; a tree line gets +1
    // when its orientation agrees with the direction of travel.
    std::vector<std::pair<int, int>> up_from_head, up_from_tail;  // (line, lower vertex)
    int b = w.head, a = w.tail;
    while (depth[b] > depth[a]) up_from_head.push_back({parent_edge[b], b}), b = parent[b];
    while (depth[a] > depth[b]) up_from_tail.push_back({parent_edge[a], a}), a = parent[a];
    while (a != b) {
      up_from_head.push_back({parent_edge[b], b}), b = parent[b];
      up_from_tail.push_back({parent_edge[a], a}), a = parent[a];
    }
    for (auto [line, from] : up_from_head)
      td.a[tree_row[line]][j] = g.edge(line).tail == from ? 1 : -1;
    for (auto [line, to] : up_from_tail)
      td.a[tree_row[line]][j] = g.edge(line).head == to ? 1 : -1;
  }
  return td;
}

TreeDecomposition spanning_tree_decomposition(const FeynmanGraph& g) {
  if (!g.is_connected()) throw InvalidArgument("spanning tree needs a connected graph");
  const int V = g.num_vertices();
  std::vector<bool> seen(V, false);
  std::vector<int> tree;
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (auto& e : g.edges()) {
      if (e.special || e.is_self_loop()) continue;
      int w = e.tail == v ? e.head : (e.head == v ? e.tail : -1);
      if (w < 0 || seen[w]) continue;
      seen[w] = true;
      tree.push_back(e.momentum);
      q.push(w);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::logic_error("special edges are forced into every spanning tree");
  std::sort(tree.begin(), tree.end());
  return decomposition_for_tree(g, tree);
}

std::vector<std::vector<int>> spanning_trees(const FeynmanGraph& g, std::size_t limit) {
  const int m = int(g.edges().size());
  const int V = g.num_vertices();
  std::vector<std::vector<int>> out;
  std::vector<int> chosen;
  std::vector<int> parent(V);
  // Depth-first over line subsets in increasing order, pruning cycles.
  std::function<int(std::vector<int>&, int)> find = [&](std::vector<int>& p, int v) {
    while (p[v] != v) v = p[v];
    return v;
  };
  std::function<void(int, std::vector<int>)> rec = [&](int next, std::vector<int> p) {
    if (out.size() >= limit) return;
    if (int(chosen.size()) == V - 1) {
      out.push_back(chosen);
      return;
    }
    for (int j = next; j <= m; ++j) {
      if (m - j + 1 < V - 1 - int(chosen.size())) break;
      const Edge& e = g.edge(j);
      int a = find(p, e.tail), b = find(p, e.head);
      if (a == b) continue;
      auto p2 = p;
      p2[a] = b;
      chosen.push_back(j);
      rec(j + 1, std::move(p2));
      chosen.pop_back();
      if (out.size() >= limit) return;
    }
  };
  std::iota(parent.begin(), parent.end(), 0);
  rec(1, parent);
  return out;
}

std::vector<std::pair<int, int>> canonical_form(int V, const std::vector<std::pair<int, int>>& edges) {
  if (V > 10) throw InvalidArgument("canonical_form is limited to 10 vertices");
  std::vector<int> deg(V, 0), loops(V, 0);
  for (auto [a, b] : edges) {
    ++deg[a], ++deg[b];
    if (a == b) ++loops[a];
  }
  std::vector<std::vector<int>> nbr_deg(V);
  for (auto [a, b] : edges)
    if (a != b) nbr_deg[a].push_back(deg[b]), nbr_deg[b].push_back(deg[a]);
  using Inv = std::tuple<int, int, std::vector<int>>;
  std::vector<Inv> inv(V);
  for (int v = 0; v < V; ++v) {
    std::sort(nbr_deg[v].begin(), nbr_deg[v].end());
    inv[v] = {deg[v], loops[v], nbr_deg[v]};
  }
  std::vector<int> order(V);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return inv[x] < inv[y]; });
  std::vector<std::pair<int, int>> groups;  // [start, end) in order
  for (int i = 0; i < V;) {
    int j = i;
    while (j < V && inv[order[j]] == inv[order[i]]) ++j;
    groups.push_back({i, j});
    i = j;
  }
  std::vector<std::pair<int, int>> best;
  bool have = false;
  std::function<void(std::size_t)> rec = [&](std::size_t gi) {
    if (gi == groups.size()) {
      std::vector<int> label(V);
      for (int i = 0; i < V; ++i) label[order[i]] = i;
      std::vector<std::pair<int, int>> cand;
      for (auto [a, b] : edges) cand.push_back({std::min(label[a], label[b]), std::max(label[a], label[b])});
      std::sort(cand.begin(), cand.end());
      if (!have || cand < best) best = cand, have = true;
      return;
    }
    auto [s, e] = groups[gi];
    std::sort(order.begin() + s, order.begin() + e);
    do {
      rec(gi + 1);
    } while (std::next_permutation(order.begin() + s, order.begin() + e));
  };
  rec(0);
  return best;
}

}  // namespace lifshitz
