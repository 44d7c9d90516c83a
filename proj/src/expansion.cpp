#include "lifshitz/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "lifshitz/anderson.hpp"
#include "lifshitz/error.hpp"
#include "lifshitz/partitions.hpp"
#include "lifshitz/rng.hpp"
#include "lifshitz/sparse_solver.hpp"
#include "lifshitz/stats.hpp"

namespace lifshitz {

int ExpansionTerm::potential_count() const {
  return int(std::count(insertions.begin(), insertions.end(), 'V'));
}
int ExpansionTerm::bullet_count() const {
  return int(std::count(insertions.begin(), insertions.end(), 'S'));
}
int ExpansionTerm::order() const { return potential_count() + 2 * bullet_count(); }
int ExpansionTerm::sign() const { return insertions.size() % 2 ? -1 : 1; }

std::string ExpansionTerm::render() const {
  std::string s = sign() < 0 ? "-" : "+";
  int v = potential_count();
  if (v == 1) s += "λ ";
  if (v > 1) s += fmt::format("λ^{} ", v);
  for (char c : insertions) s += c == 'V' ? "R_r V " : "R_r σ ";
  s += full_terminal ? "R" : "R_r";
  return s;
}

bool ExpansionTerm::operator<(const ExpansionTerm& o) const {
  auto rank = [](char c) { return c == 'V' ? 0 : 1; };
  return std::lexicographical_compare(
      insertions.begin(), insertions.end(), o.insertions.begin(), o.insertions.end(),
      [&](char a, char b) { return rank(a) < rank(b); });
}

std::vector<ExpansionTerm> Decomposition::all() const {
  std::vector<ExpansionTerm> out = explicit_terms;
  out.insert(out.end(), remainder_terms.begin(), remainder_terms.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string Decomposition::to_table() const {
  std::string s = fmt::format("# N={} explicit={} remainder={}\n", N, explicit_terms.size(),
                              remainder_terms.size());
  for (const auto& t : all())
    s += fmt::format("{}\t{}\t{}\t{}\n", t.insertions.empty() ? "-" : t.insertions, t.order(),
                     t.full_terminal ? "full" : "free", t.render());
  return s;
}

namespace {

void check_order(int N) {
  if (N < 1) throw InvalidArgument("expansion order N must be >= 1");
  if (N > 12) throw InvalidArgument(fmt::format("expansion order {} exceeds the limit 12", N));
}

void finish(Decomposition& d) {
  std::sort(d.explicit_terms.begin(), d.explicit_terms.end());
  std::sort(d.remainder_terms.begin(), d.remainder_terms.end());
}

}  // namespace

Decomposition generate_terms(int N) {
  check_order(N);
  Decomposition d;
  d.N = N;
  std::vector<ExpansionTerm> open{{"", true}};
  while (!open.empty()) {
    ExpansionTerm t = open.back();
    open.pop_back();
    if (t.order() >= N) {
      d.remainder_terms.push_back(t);
      continue;
    }
    d.explicit_terms.push_back({t.insertions, false});
    open.push_back({t.insertions + "V", true});
    open.push_back({t.insertions + "S", true});
  }
  finish(d);
  return d;
}

Decomposition generate_terms_direct(int N) {
  check_order(N);
  Decomposition d;
  d.N = N;
  std::function<void(const std::string&)> walk = [&](const std::string& w) {
    ExpansionTerm t{w, false};
    if (t.order() > N + 1) return;
    bool prefixes_low = true;
    for (std::size_t k = 0; k < w.size(); ++k)
      if (ExpansionTerm{w.substr(0, k), false}.order() >= N) prefixes_low = false;
    if (prefixes_low) {
      if (t.order() < N) d.explicit_terms.push_back(t);
      else d.remainder_terms.push_back({w, true});
    }
    walk(w + "V");
    walk(w + "S");
  };
  walk("");
  finish(d);
  return d;
}

DecompositionResidual evaluate_decomposition(const Box& box, std::span<const double> potential,
                                             const EnergyContext& ctx, const Site& x,
                                             const Site& y, int N, double eta) {
  using C = std::complex<double>;
  using Vec = Eigen::VectorXcd;
  if (!box.contains(x) || !box.contains(y)) throw InvalidArgument("x and y must lie in the box");
  if (!potential.empty() && potential.size() != box.size())
    throw InvalidArgument("potential size does not match the box");
  Decomposition dec = generate_terms(N);

  RealSparse lap = laplacian_operator(box);
  RealSparse h = build_hamiltonian(box, potential, ctx.lambda);
  SparseLu<C> free_lu(shifted_operator(lap, ctx.estar, eta));
  SparseLu<C> full_lu(shifted_operator(h, ctx.energy, eta));

  const auto n = Eigen::Index(box.size());
  Vec ex = Vec::Zero(n), ey = Vec::Zero(n);
  ex[Eigen::Index(box.index(x))] = 1.0;
  ey[Eigen::Index(box.index(y))] = 1.0;
  Vec free_y = free_lu.solve(ey);
  Vec full_y = full_lu.solve(ey);

  Vec weight_v = Vec::Zero(n);
  if (!potential.empty())
    for (Eigen::Index i = 0; i < n; ++i) weight_v[i] = ctx.lambda * potential[std::size_t(i)];

  // prefix word -> row vector e_x^T R_r D_1 R_r ... D_k
  std::map<std::string, Vec> prefix;
  prefix[""] = free_lu.solve(ex);
  std::function<const Vec&(const std::string&)> row = [&](const std::string& w) -> const Vec& {
    auto it = prefix.find(w);
    if (it != prefix.end()) return it->second;
    Vec u = row(w.substr(0, w.size() - 1));
    if (w.size() > 1) u = free_lu.solve(u);
    if (w.back() == 'V') u = u.cwiseProduct(weight_v);
    else u *= ctx.sigma;
    return prefix.emplace(w, std::move(u)).first->second;
  };

  DecompositionResidual r;
  r.N = N;
  r.eta = eta;
  r.lhs = full_y[Eigen::Index(box.index(x))];
  for (const auto& t : dec.all()) {
    C value;
    if (t.insertions.empty()) {
      value = (t.full_terminal ? full_y : free_y)[Eigen::Index(box.index(x))];
    } else {
      const Vec& u = row(t.insertions);
      value = u.transpose() * (t.full_terminal ? full_y : free_y);
    }
    r.rhs += double(t.sign()) * value;
    ++r.terms;
  }
  r.residual = std::abs(r.lhs - r.rhs);
  r.column_norm = full_y.norm();
  return r;
}

std::vector<Site> truncated_region(const Site& x, const Site& y, double radius) {
  if (!(radius >= 0)) throw InvalidArgument("region radius must be >= 0");
  int R = int(std::floor(radius));
  std::vector<Site> out;
  Site lo, hi;
  for (int a = 0; a < 3; ++a) lo[a] = std::min(x[a], y[a]) - R, hi[a] = std::max(x[a], y[a]) + R;
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        Site z{i, j, k};
        if (norm(z - x) <= radius + 1e-12 || norm(z - y) <= radius + 1e-12) out.push_back(z);
      }
  return out;
}

namespace {

// Kernel restricted to the region plus the two endpoints.
struct RegionKernel {
  Eigen::MatrixXd k;
  Eigen::VectorXd gx, gy;
};

RegionKernel region_kernel(const GreenTable& table, const Site& x, const Site& y,
                           std::span<const Site> region) {
  const auto m = Eigen::Index(region.size());
  RegionKernel rk{Eigen::MatrixXd(m, m), Eigen::VectorXd(m), Eigen::VectorXd(m)};
  try {
    for (Eigen::Index i = 0; i < m; ++i) {
      rk.gx[i] = table(x, region[std::size_t(i)]);
      rk.gy[i] = table(region[std::size_t(i)], y);
      for (Eigen::Index j = 0; j <= i; ++j)
        rk.k(i, j) = rk.k(j, i) = table(region[std::size_t(i)], region[std::size_t(j)]);
    }
  } catch (const std::out_of_range&) {
    throw InvalidArgument(fmt::format(
        "Green table radius {} does not cover the region around x={} y={}", table.radius(),
        to_string(x), to_string(y)));
  }
  return rk;
}

void check_context(int l, const EnergyContext& ctx, const GreenTable& table) {
  if (l < 1 || l > 2) throw InvalidArgument("moment checks are implemented for l = 1, 2");
  if (std::abs(table.estar() - ctx.estar) > 1e-12 * std::max(1.0, ctx.estar))
    throw InvalidArgument("Green table E* does not match the energy context");
}

double diagram_sum_kernel(int l, const EnergyContext& ctx, const RegionKernel& rk,
                          const DensitySpec& density) {
  IndexSet set = IndexSet::upsilon(l, l);
  EnumerationOptions eo;
  eo.gate_free = true;
  const Eigen::Index m = rk.k.rows();
  double total = 0.0;
  for (const Partition& p : enumerate_partitions(set, eo)) {
    // chain position of every index: chain 0 -> 1..l, chain 1 -> l+2..2l+1
    std::map<int, int> block_of;
    for (std::size_t b = 0; b < p.blocks.size(); ++b)
      for (int i : p.blocks[b]) block_of[i] = int(b);
    std::vector<std::vector<int>> chains(2);
    for (int i = 1; i <= l; ++i) chains[0].push_back(block_of.at(i));
    for (int i = l + 2; i <= 2 * l + 1; ++i) chains[1].push_back(block_of.at(i));

    const int nb = int(p.blocks.size());
    std::vector<Eigen::Index> site(std::size_t(nb), 0);
    double sum = 0.0;
    std::function<void(int)> rec = [&](int b) {
      if (b == nb) {
        double prod = 1.0;
        for (const auto& c : chains) {
          prod *= rk.gx[site[std::size_t(c.front())]] * rk.gy[site[std::size_t(c.back())]];
          for (std::size_t i = 1; i < c.size(); ++i)
            prod *= rk.k(site[std::size_t(c[i - 1])], site[std::size_t(c[i])]);
        }
        sum += prod;
        return;
      }
      for (Eigen::Index z = 0; z < m; ++z) site[std::size_t(b)] = z, rec(b + 1);
    };
    rec(0);
    double coeff = 1.0;
    for (const auto& b : p.blocks) coeff *= cumulant_coefficient(int(b.size()), density);
    total += coeff * sum;
  }
  return std::pow(ctx.lambda, 2 * l) * total;
}

}  // namespace

double diagram_sum_Al_squared(int l, const EnergyContext& ctx, const GreenTable& table,
                              const Site& x, const Site& y, std::span<const Site> region,
                              const DensitySpec& density) {
  check_context(l, ctx, table);
  return diagram_sum_kernel(l, ctx, region_kernel(table, x, y, region), density);
}

double closed_form_A1_squared(const EnergyContext& ctx, const GreenTable& table, const Site& x,
                              const Site& y, std::span<const Site> region) {
  RegionKernel rk = region_kernel(table, x, y, region);
  return ctx.lambda * ctx.lambda * (rk.gx.array().square() * rk.gy.array().square()).sum();
}

MomentComparison mc_moment_Al_squared(int l, const EnergyContext& ctx, const GreenTable& table,
                                      const Site& x, const Site& y, const MomentOptions& opts) {
  check_context(l, ctx, table);
  if (opts.samples < 2) throw InvalidArgument("need at least 2 samples");
  if (opts.block_size == 0) throw InvalidArgument("block_size must be > 0");

  auto region = truncated_region(x, y, opts.region_radius);
  RegionKernel rk = region_kernel(table, x, y, region);
  MomentComparison out;
  out.l = l;
  out.region_sites = region.size();
  out.diagram_sum = diagram_sum_kernel(l, ctx, rk, opts.density);
  auto wider = truncated_region(x, y, opts.region_radius + 1.0);
  out.diagram_sum_enlarged =
      diagram_sum_kernel(l, ctx, region_kernel(table, x, y, wider), opts.density);
  out.truncation_estimate =
      std::abs(out.diagram_sum_enlarged - out.diagram_sum) / std::abs(out.diagram_sum_enlarged);
  if (!(out.truncation_estimate <= opts.truncation_tol))
    throw NumericalError(fmt::format("lattice sum truncation {:.3g} exceeds tolerance {:.3g}; "
                                     "enlarge region_radius",
                                     out.truncation_estimate, opts.truncation_tol),
                         out.truncation_estimate);

  std::vector<ExpansionTerm> words;
  for (const auto& t : generate_terms(l + 1).explicit_terms)
    if (t.order() == l) words.push_back(t);

  const Eigen::Index m = Eigen::Index(region.size());
  const std::size_t blocks = (opts.samples + opts.block_size - 1) / opts.block_size;
  std::vector<RunningStats> partial(blocks);
  parallel_for_blocks(blocks, opts.threads, [&](std::size_t b) {
    RandomStream rng(opts.seed, "moment_Al", b);
    std::uint64_t count = std::min<std::uint64_t>(opts.block_size, opts.samples - b * opts.block_size);
    Eigen::VectorXd v(m);
    for (std::uint64_t s = 0; s < count; ++s) {
      for (Eigen::Index i = 0; i < m; ++i) {
        double u1 = rng.uniform(), u2 = rng.uniform();
        v[i] = ctx.lambda * opts.density.sample(u1, u2);
      }
      double a = 0.0;
      for (const auto& w : words) {
        Eigen::VectorXd u = rk.gx;
        for (std::size_t c = 0; c < w.insertions.size(); ++c) {
          if (c > 0) u = rk.k * u;
          if (w.insertions[c] == 'V') u = u.cwiseProduct(v);
          else u *= ctx.sigma;
        }
        a += w.sign() * u.dot(rk.gy);
      }
      partial[b].add(a * a);
    }
  });
  RunningStats total;
  for (const auto& p : partial) total.merge(p);
  out.samples = total.count;
  out.mc_mean = total.mean;
  out.mc_stderr = total.stderr_of_mean();
  out.z_score = out.mc_stderr > 0 ? (out.mc_mean - out.diagram_sum) / out.mc_stderr : 0.0;
  return out;
}

DecayEnvelopeReport check_decay_envelope(int l, const EnergyContext& ctx, const GreenTable& table,
                                         std::span<const int> axis_distances,
                                         double region_radius, const DensitySpec& density) {
  check_context(l, ctx, table);
  if (axis_distances.size() < 2) throw InvalidArgument("need at least two distances");
  DecayEnvelopeReport rep;
  rep.l = l;
  rep.envelope_rate = std::sqrt(ctx.estar / 3.0);
  std::vector<double> logs;
  double fact = std::tgamma(4.0 * l + 1.0);
  for (int d : axis_distances) {
    Site x{0, 0, 0}, y{d, 0, 0};
    auto region = truncated_region(x, y, region_radius);
    double v = diagram_sum_kernel(l, ctx, region_kernel(table, x, y, region), density);
    if (!(v > 0)) throw NumericalError(fmt::format("non-positive diagram sum at distance {}", d), v);
    rep.distances.push_back(d);
    rep.values.push_back(v);
    logs.push_back(std::log(v));
    double k = std::pow(v * std::exp(rep.envelope_rate * d) / fact, 1.0 / l) *
               std::sqrt(ctx.estar) / (ctx.lambda * ctx.lambda);
    rep.fitted_K = std::max(rep.fitted_K, k);
  }
  LinearFit f = fit_line(rep.distances, logs);
  rep.fitted_rate = -f.slope;
  rep.rate_ok = rep.fitted_rate >= rep.envelope_rate;
  return rep;
}

}  // namespace lifshitz
