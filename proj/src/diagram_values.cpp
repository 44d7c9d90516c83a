#include "lifshitz/diagram_values.hpp"

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "lifshitz/census.hpp"
#include "lifshitz/error.hpp"
#include "lifshitz/rng.hpp"
#include "lifshitz/stats.hpp"

namespace lifshitz {

namespace {

constexpr double kPi = std::numbers::pi;
using Vec3 = std::array<double, 3>;

enum class Proposal { LogHeavy, Cauchy };

// Isotropic proposals on R^3 with scale s.
//  LogHeavy: u = U/(1-U), r = s expm1(u), radial density 1/((1+u)^2 (s+r)); capped at u <= 150,
//            where the remaining mass of any convergent integrand is negligible.
//  Cauchy:   multivariate Cauchy, density s / (pi^2 (q^2 + s^2)^2).
constexpr double kRadialCap = 150.0;

double log_density(Proposal kind, double r, double s) {
  if (kind == Proposal::Cauchy) return std::log(s / (kPi * kPi)) - 2.0 * std::log(r * r + s * s);
  double x = r / s;
  double u = std::log1p(x);
  return -(2.0 * std::log1p(u) + std::log1p(x) + std::log(4.0 * kPi) + 2.0 * std::log(x)) -
         3.0 * std::log(s);
}

bool draw(Proposal kind, double s, RandomStream& rng, Vec3& q) {
  if (kind == Proposal::Cauchy) {
    double w = rng.normal();
    if (w == 0.0) return false;
    for (auto& c : q) c = s * rng.normal() / std::abs(w);
    return true;
  }
  double U = rng.uniform();
  double z = 2.0 * rng.uniform() - 1.0;
  double phi = 2.0 * kPi * rng.uniform();
  double u = U / (1.0 - U);
  if (u > kRadialCap) return false;
  double r = s * std::expm1(u);
  double st = std::sqrt(std::max(0.0, 1.0 - z * z));
  q = {r * st * std::cos(phi), r * st * std::sin(phi), r * z};
  return true;
}

double wrap(double x) { return x - std::floor(x + 0.5); }

template <class SampleFn>
RunningStats run_blocks(const McParams& mc, std::string_view stream, SampleFn&& sample) {
  if (mc.samples == 0) throw InvalidArgument("Monte Carlo needs at least one sample");
  std::uint64_t bs = std::max<std::uint64_t>(1, mc.block_size);
  std::size_t blocks = std::size_t((mc.samples + bs - 1) / bs);
  std::vector<RunningStats> partial(blocks);
  parallel_for_blocks(blocks, mc.threads, [&](std::size_t b) {
    RandomStream rng(mc.seed, stream, b);
    std::uint64_t begin = b * bs, end = std::min(mc.samples, begin + bs);
    for (std::uint64_t i = begin; i < end; ++i) partial[b].add(sample(rng));
  });
  RunningStats total;
  for (auto& p : partial) total.merge(p);
  return total;
}

// One loop basis per spanning tree; the proposal is the uniform mixture over bases,
// so regions where several loop momenta grow together stay covered.
struct ChannelSet {
  std::vector<std::vector<std::vector<int>>> coeff;  // channel -> line -> loop
  std::vector<std::vector<int>> loop_lines;          // channel -> line indices (0-based)
  std::size_t lines = 0;
  int loops = 0;
};

ChannelSet build_channels(const FeynmanGraph& g, std::size_t limit) {
  ChannelSet cs;
  cs.lines = g.edges().size();
  for (auto& tree : spanning_trees(g, limit)) {
    auto td = decomposition_for_tree(g, tree);
    cs.coeff.push_back(td.momentum_in_loops(int(cs.lines)));
    std::vector<int> ll;
    for (int j : td.loop_edges) ll.push_back(j - 1);
    cs.loop_lines.push_back(ll);
    cs.loops = int(ll.size());
  }
  if (cs.coeff.empty()) throw InvalidArgument("graph has no spanning tree");
  return cs;
}

// Draws line momenta |p_t|^2 from the mixture and returns ln(1/density); -inf when rejected.
double draw_lines(const ChannelSet& cs, Proposal kind, double scale, RandomStream& rng,
                  std::vector<double>& q2) {
  std::size_t C = cs.coeff.size();
  std::size_t c = std::size_t(rng.bits() % C);
  std::vector<Vec3> w(cs.loops);
  bool ok = true;
  for (auto& v : w) ok = draw(kind, scale, rng, v) && ok;
  if (!ok) return -INFINITY;
  q2.assign(cs.lines, 0.0);
  for (std::size_t t = 0; t < cs.lines; ++t) {
    Vec3 p{0, 0, 0};
    for (int j = 0; j < cs.loops; ++j)
      if (int k = cs.coeff[c][t][j])
        for (int a = 0; a < 3; ++a) p[a] += k * w[j][a];
    q2[t] = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
  }
  double mx = -INFINITY;
  std::vector<double> ld(C);
  for (std::size_t k = 0; k < C; ++k) {
    double l = 0;
    for (int t : cs.loop_lines[k]) l += log_density(kind, std::sqrt(q2[t]), scale);
    ld[k] = l;
    mx = std::max(mx, l);
  }
  if (!std::isfinite(mx)) return -INFINITY;
  double sum = 0;
  for (double l : ld) sum += std::exp(l - mx);
  return -(mx + std::log(sum / double(C)));
}

GraphValueEstimate finish(const RunningStats& s, const McParams& mc, std::string id, int order,
                          std::string method) {
  GraphValueEstimate e;
  e.graph_id = std::move(id);
  e.order = order;
  e.value = s.mean;
  e.stderr_ = s.stderr_of_mean();
  e.samples = s.count;
  e.seed = mc.seed;
  e.method = std::move(method);
  return e;
}

// Power counting without log damping: every connected subgraph needs div < 0.
bool power_counting_convergent(const FeynmanGraph& g) {
  auto census = classify_superficial_convergence(g);
  for (auto& r : census.subgraphs)
    if (r.degree.div >= 0) return false;
  return census.complete;
}

void require_convergent(const FeynmanGraph& g) {
  if (!g.zero_loops().empty())
    throw NumericalError("graph contains a 0-loop line; its value is not integrable");
  if (g.edges().size() <= 16) {
    auto census = classify_superficial_convergence(g);
    if (!census.superficially_convergent)
      throw NumericalError("graph is not superficially convergent; its value is not integrable");
  }
}

}  // namespace

double log_damped_propagator(double q2) {
  return -std::log1p(q2) - 4.0 * std::log(std::log(q2 + 2.0));
}

double damped_propagator(double q2) {
  double l = std::log(q2 + 2.0);
  double l2 = l * l;
  return 1.0 / ((q2 + 1.0) * l2 * l2);
}

GraphValueEstimate graph_value(const FeynmanGraph& g, const McParams& mc, const std::string& id) {
  require_convergent(g);
  auto cs = build_channels(g, mc.max_channels);
  auto s = run_blocks(mc, "graph_value", [&](RandomStream& rng) {
    std::vector<double> q2;
    double lw = draw_lines(cs, Proposal::LogHeavy, 1.0, rng, q2);
    if (std::isinf(lw)) return 0.0;
    for (double v : q2) lw += log_damped_propagator(v);
    return std::exp(lw);
  });
  return finish(s, mc, id.empty() ? g.partition().to_string() : id, g.order(), "importance-MC");
}

double bubble_radial_quadrature() {
  gsl_set_error_handler_off();
  gsl_function F;
  F.function = [](double r, void*) {
    double f = damped_propagator(r * r);
    return 4.0 * kPi * r * r * f * f;
  };
  F.params = nullptr;
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(2000);
  double result, err;
  int status = gsl_integration_qagiu(&F, 0.0, 0.0, 1e-12, 2000, w, &result, &err);
  gsl_integration_workspace_free(w);
  if (status != GSL_SUCCESS) throw NumericalError("radial quadrature failed", err / result);
  return result;
}

GraphValueEstimate torus_pairing_integral(const Partition& p, double estar, const McParams& mc,
                                          double C) {
  if (!(estar > 0)) throw InvalidArgument("E* must be positive");
  if (!p.is_pairing()) throw InvalidArgument("torus_pairing_integral needs a pairing");
  int n = int(p.blocks.size());
  auto g = FeynmanGraph::from_partition(p, n);
  auto td = spanning_tree_decomposition(g);
  struct {
    std::vector<std::vector<int>> coeff;
    int loops;
  } form{td.momentum_in_loops(int(g.edges().size())), int(td.loop_edges.size())};
  std::size_t lines = form.coeff.size();
  auto s = run_blocks(mc, "torus_pairing", [&](RandomStream& rng) {
    std::vector<Vec3> w(form.loops);
    for (auto& v : w)
      for (auto& c : v) c = rng.uniform() - 0.5;
    double value = 1.0;
    for (std::size_t t = 0; t < lines; ++t) {
      double q2 = 0;
      for (int a = 0; a < 3; ++a) {
        double x = 0;
        for (int j = 0; j < form.loops; ++j) x += form.coeff[t][j] * w[j][a];
        x = wrap(x);
        q2 += x * x;
      }
      value *= C / (q2 + estar);
    }
    return value;
  });
  return finish(s, mc, p.to_string(), n, "uniform-MC-torus");
}

GraphValueEstimate continuum_pairing_integral(const Partition& p, double estar, const McParams& mc,
                                              double cutoff) {
  if (!(estar > 0)) throw InvalidArgument("E* must be positive");
  if (!p.is_pairing()) throw InvalidArgument("continuum_pairing_integral needs a pairing");
  if (cutoff < 0) throw InvalidArgument("cutoff must be >= 0");
  int n = int(p.blocks.size());
  auto g = FeynmanGraph::from_partition(p, n);
  if (cutoff == 0.0 && !power_counting_convergent(g))
    throw NumericalError("continuum integral of " + p.to_string() +
                         " diverges by power counting; supply a momentum cutoff");
  auto cs = build_channels(g, mc.max_channels);
  const double scale = 2.0 * std::sqrt(estar);
  const double max_q2 = cutoff > 0 ? cutoff * cutoff * estar : INFINITY;
  auto s = run_blocks(mc, "continuum_pairing", [&](RandomStream& rng) {
    std::vector<double> q2;
    double lw = draw_lines(cs, Proposal::Cauchy, scale, rng, q2);
    if (std::isinf(lw)) return 0.0;
    for (double v : q2) {
      if (v > max_q2) return 0.0;
      lw -= std::log(v + estar);
    }
    return std::exp(lw);
  });
  return finish(s, mc, p.to_string(), n, cutoff > 0 ? "importance-MC-continuum-cutoff" : "importance-MC-continuum");
}

int chosen_stopping_order(double rho) {
  return std::max(1, int(std::ceil(std::pow(rho, -0.25) / 4.0)));
}

BoundAssembly assemble_An_bound(int n, double lambda, double estar, double K) {
  if (n < 0) throw InvalidArgument("order must be >= 0");
  if (!(estar > 0 && estar < 1)) throw InvalidArgument("E* must lie in (0,1)");
  if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
  if (!(K > 0)) throw InvalidArgument("K must be positive");
  BoundAssembly b;
  b.order = n;
  b.lambda = lambda;
  b.estar = estar;
  b.K = K;
  b.C_of_estar = K * std::pow(std::log(std::numbers::e + 1.0 / estar), 9);
  b.rho = b.C_of_estar * lambda * lambda / std::sqrt(estar);
  if (b.rho >= 1.0)
    throw DomainError(fmt::format("outside Lifshitz window: C(E*) lambda^2 / sqrt(E*) = {:.3g} >= 1", b.rho));
  b.log_bound = std::lgamma(4.0 * n + 1.0) + std::log(estar) + n * std::log(b.rho);
  b.bound_value = std::exp(b.log_bound);
  b.log_alt_prefactor = n > 0 ? (2.0 * n + 1.0) * std::log(2.0 * n * n) : 0.0;
  b.chosen_N = chosen_stopping_order(b.rho);
  b.normalization_note = "C(E*) = K ln^9(e + 1/E*), a positive normalization of K ln^9 E*";
  return b;
}

StoppingCheck stopping_rule_check(double rho, int N) {
  using boost::multiprecision::cpp_int;
  using Real = boost::multiprecision::cpp_bin_float_100;
  if (!(rho > 0)) throw InvalidArgument("rho must be positive");
  if (N < 1) throw InvalidArgument("N must be >= 1");
  cpp_int fact = 1;
  for (int k = 2; k <= 4 * N; ++k) fact *= k;
  Real lhs = log(Real(fact)) + Real(N) * log(Real(rho));
  Real rhs = -Real(N);
  return {N, lhs.convert_to<double>(), rhs.convert_to<double>(), lhs < rhs};
}

BoundMinimum bound_minimum(double lambda, double estar, double K, int n_max) {
  BoundMinimum best{1, INFINITY};
  for (int n = 1; n <= n_max; ++n) {
    double lb = assemble_An_bound(n, lambda, estar, K).log_bound;
    if (lb < best.log_bound) best = {n, lb};
  }
  return best;
}

double refe_exponent(double lambda, double epsilon, double K) {
  if (!(lambda > 0 && lambda < 1)) throw InvalidArgument("lambda must lie in (0,1)");
  double estar = std::pow(lambda, 4.0 - epsilon);
  double C = K * std::pow(std::log(std::numbers::e + 1.0 / estar), 9);
  double rho = C * lambda * lambda / std::sqrt(estar);
  return std::log(rho) / (epsilon * std::log(lambda));
}

}  // namespace lifshitz
