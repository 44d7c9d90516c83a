#include "lifshitz/anderson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "lifshitz/error.hpp"
#include "lifshitz/rng.hpp"
#include "lifshitz/stats.hpp"

namespace lifshitz {

std::vector<double> sample_potential(const Box& box, const DensitySpec& density, std::uint64_t seed,
                                     std::uint64_t index) {
  RandomStream rng(seed, "potential", index);
  std::vector<double> v(box.size());
  for (auto& x : v) {
    double u1 = rng.uniform(), u2 = rng.uniform();
    x = density.sample(u1, u2);
  }
  return v;
}

RealSparse laplacian_operator(const Box& box) {
  return build_hamiltonian(box, {}, 0.0);
}

RealSparse build_hamiltonian(const Box& box, std::span<const double> potential, double lambda) {
  if (!potential.empty() && potential.size() != box.size())
    throw InvalidArgument("potential size does not match the box");
  const std::size_t n = box.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(7 * n);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 3.0 + (potential.empty() ? 0.0 : lambda * potential[i]);
    t.emplace_back(int(i), int(i), diag);
    Site s = box.site(i);
    for (int a = 0; a < 3; ++a)
      for (int step : {-1, 1}) {
        Site nb = s;
        nb[a] += step;
        if (box.contains(nb)) t.emplace_back(int(i), int(box.index(nb)), -0.5);
      }
  }
  RealSparse h{Eigen::Index(n), Eigen::Index(n)};
  h.setFromTriplets(t.begin(), t.end());
  h.makeCompressed();
  return h;
}

ComplexSparse shifted_operator(const RealSparse& h, double energy, double eta) {
  ComplexSparse a = h.cast<std::complex<double>>();
  ComplexSparse shift(h.rows(), h.cols());
  shift.setIdentity();
  a += shift * std::complex<double>(energy, eta);
  a.makeCompressed();
  return a;
}

double lowest_eigenvalue(const RealSparse& h, double lower_bound, double tol) {
  const Eigen::Index n = h.rows();
  if (n == 0) throw InvalidArgument("empty operator");
  RealSparse shifted = h;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= lower_bound;
  Eigen::SimplicialLDLT<RealSparse> ldlt(shifted);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0).any())
    throw InvalidArgument(fmt::format("{} is not a strict lower bound of the spectrum", lower_bound));

  // Shift-invert subspace iteration with Rayleigh-Ritz.
  const Eigen::Index k = std::min<Eigen::Index>(n, 8);
  Eigen::MatrixXd q(n, k);
  RandomStream rng(0x5eed, "lowest_eigenvalue", std::uint64_t(n));
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = rng.normal();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(h.coeff(i, i)) + 3.0);
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::MatrixXd z = ldlt.solve(q);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    Eigen::MatrixXd hq = h * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(q.transpose() * hq);
    q = q * small.eigenvectors();
    hq = hq * small.eigenvectors();
    double theta = small.eigenvalues()[0];
    double res = (hq.col(0) - theta * q.col(0)).norm();
    if (res <= tol * scale) return theta;
  }
  throw NumericalError("lowest eigenvalue did not converge", std::numeric_limits<double>::quiet_NaN());
}

namespace {

SparseLu<std::complex<double>> factor_or_explain(const RealSparse& h, double energy, double eta) {
  try {
    return SparseLu<std::complex<double>>(shifted_operator(h, energy, eta));
  } catch (const NumericalError&) {
    if (eta == 0.0)
      throw NumericalError(fmt::format("box operator singular at E={} with eta=0; retry with eta > 0 "
                                       "(smallest value of the schedule)",
                                       energy),
                           0.0);
    throw;
  }
}

}  // namespace

BoxResolvent::BoxResolvent(const Box& box, const RealSparse& h, double energy, double eta)
    : box_(box), energy_(energy), eta_(eta), lu_(factor_or_explain(h, energy, eta)) {
  if (eta < 0) throw InvalidArgument("eta must be >= 0");
  if (std::size_t(h.rows()) != box.size()) throw InvalidArgument("operator size does not match the box");
}

ResolventColumn BoxResolvent::column(const Site& y) const {
  if (!box_.contains(y)) throw InvalidArgument(fmt::format("site {} outside the box", to_string(y)));
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(Eigen::Index(box_.size()));
  rhs[Eigen::Index(box_.index(y))] = 1.0;
  Eigen::VectorXcd u;
  try {
    u = lu_.solve(rhs);
  } catch (const NumericalError& e) {
    if (eta_ != 0.0) throw;
    throw NumericalError(std::string(e.what()) + "; retry with eta > 0 (smallest value of the schedule)",
                         e.achieved_estimate());
  }
  ResolventColumn c;
  c.y = y;
  c.energy = energy_;
  c.eta = eta_;
  c.residual = (lu_.matrix() * u - rhs).norm();
  if (!(c.residual <= 1e-10))
    throw NumericalError(fmt::format("resolvent residual {:.3g} above 1e-10{}", c.residual,
                                     eta_ == 0.0 ? "; retry with eta > 0 (smallest value of the schedule)" : ""),
                         c.residual);
  c.values.assign(u.data(), u.data() + u.size());
  return c;
}

ResolventColumn resolvent_column(const Box& box, const RealSparse& h, double energy, double eta,
                                 const Site& y) {
  return BoxResolvent(box, h, energy, eta).column(y);
}

std::string SitePair::label() const { return to_string(x) + "-" + to_string(y); }

namespace {

void check_s(double s) {
  if (!(s > 0 && s < 1)) throw InvalidArgument("s must lie in (0,1)");
}

void check_pairs(const Box& box, const std::vector<SitePair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("no site pairs given");
  for (const auto& p : pairs)
    if (!box.contains(p.x) || !box.contains(p.y))
      throw InvalidArgument(fmt::format("pair {} outside the box", p.label()));
}

// values[pair][eta] for one disorder sample; `subtract_free` gives |R - R_r|.
std::vector<double> sample_moments(const Box& box, const EnergyContext& ctx, double s,
                                   const std::vector<SitePair>& pairs,
                                   const std::vector<double>& etas, std::span<const double> v,
                                   const RealSparse* lap) {
  RealSparse h = build_hamiltonian(box, v, ctx.lambda);
  std::vector<double> out(pairs.size() * etas.size());
  for (std::size_t e = 0; e < etas.size(); ++e) {
    BoxResolvent full(box, h, ctx.energy, etas[e]);
    std::map<std::size_t, ResolventColumn> cols, free_cols;
    std::unique_ptr<BoxResolvent> free;
    if (lap) free = std::make_unique<BoxResolvent>(box, *lap, ctx.estar, etas[e]);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      std::size_t iy = box.index(pairs[p].y), ix = box.index(pairs[p].x);
      if (!cols.count(iy)) cols.emplace(iy, full.column(pairs[p].y));
      std::complex<double> r = cols.at(iy).values[ix];
      if (free) {
        if (!free_cols.count(iy)) free_cols.emplace(iy, free->column(pairs[p].y));
        r -= free_cols.at(iy).values[ix];
      }
      out[p * etas.size() + e] = std::pow(std::abs(r), s);
    }
  }
  return out;
}

FractionalMomentEstimate run_moments(const Box& box, const EnergyContext& ctx, double s,
                                     const std::vector<SitePair>& pairs,
                                     const FractionalMomentOptions& opts, bool difference) {
  check_s(s);
  check_pairs(box, pairs);
  if (opts.samples < 1) throw InvalidArgument("need at least one sample");
  if (opts.eta_schedule.empty()) throw InvalidArgument("empty eta schedule");
  for (double e : opts.eta_schedule)
    if (!(e >= 0)) throw InvalidArgument("eta values must be >= 0");
  FractionalMomentEstimate est;
  est.s = s;
  est.pairs = pairs;
  est.etas = opts.eta_schedule;
  RealSparse lap = laplacian_operator(box);
  const RealSparse* lp = difference ? &lap : nullptr;
  const std::size_t width = pairs.size() * est.etas.size();
  std::vector<RunningStats> acc(width);

  if (ctx.lambda == 0.0) {
    // No disorder: every sample is identical.
    auto m = sample_moments(box, ctx, s, pairs, est.etas, {}, lp);
    for (std::size_t i = 0; i < width; ++i) acc[i] = RunningStats{opts.samples, m[i], 0.0};
  } else {
    std::vector<std::vector<double>> per(opts.samples);
    parallel_for_blocks(opts.samples, opts.threads, [&](std::size_t i) {
      auto v = sample_potential(box, opts.density, opts.seed, i);
      per[i] = sample_moments(box, ctx, s, pairs, est.etas, v, lp);
    });
    for (const auto& row : per)
      for (std::size_t i = 0; i < width; ++i) acc[i].add(row[i]);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t e = 0; e < est.etas.size(); ++e) {
      const auto& a = acc[p * est.etas.size() + e];
      est.rows.push_back({p, est.etas[e], a.mean, a.count > 1 ? a.stderr_of_mean() : 0.0, a.count});
    }
  return est;
}

}  // namespace

FractionalMomentEstimate fractional_moment(const Box& box, const EnergyContext& ctx, double s,
                                           const std::vector<SitePair>& pairs,
                                           const FractionalMomentOptions& opts) {
  return run_moments(box, ctx, s, pairs, opts, false);
}

MomentDifferenceReport moment_difference(const Box& box, const EnergyContext& ctx, double s,
                                         const std::vector<SitePair>& pairs,
                                         const FractionalMomentOptions& opts) {
  if (!(s > 0 && s < 0.5)) throw InvalidArgument("moment difference needs s in (0, 1/2)");
  MomentDifferenceReport rep;
  std::vector<SitePair> kept;
  const double window = 1.0 / std::sqrt(ctx.estar);
  for (const auto& p : pairs) {
    if (norm(p.x - p.y) < window) {
      kept.push_back(p);
    } else {
      rep.excluded.push_back(p);
      rep.notices.push_back(fmt::format("pair {} excluded: |x-y| >= (E*)^(-1/2) = {:.4g}",
                                        p.label(), window));
    }
  }
  if (kept.empty()) throw InvalidArgument("no pair inside the |x-y| < (E*)^(-1/2) window");
  rep.estimate = run_moments(box, ctx, s, kept, opts, true);
  std::size_t smallest =
      std::min_element(rep.estimate.etas.begin(), rep.estimate.etas.end()) - rep.estimate.etas.begin();
  for (std::size_t p = 0; p < kept.size(); ++p) {
    double m = rep.estimate.row(p, smallest).estimate;
    if (ctx.lambda > 0)
      rep.fitted_C1 = std::max(rep.fitted_C1, m * std::pow(norm(kept[p].x - kept[p].y) + 1.0, s / 2) /
                                                  std::pow(ctx.lambda, s));
  }
  return rep;
}

CriterionReport finite_volume_criterion(int L, const EnergyContext& ctx, double s, double b,
                                        double B_s, const CriterionOptions& opts) {
  check_s(s);
  if (!(b > 0 && b < 1)) throw InvalidArgument("b must lie in (0,1)");
  if (!(B_s > 0)) throw InvalidArgument("B_s must be positive");
  if (opts.samples < 1) throw InvalidArgument("need at least one sample");
  Box box = Box::centered(L);
  const auto boundary = box.boundary_layer();
  const Site origin{0, 0, 0};

  CriterionReport rep;
  rep.L = L;
  rep.lambda = ctx.lambda;
  rep.energy = ctx.energy;
  rep.estar = ctx.estar;
  rep.s = s;
  rep.b = b;
  rep.B_s = B_s;
  rep.boundary_sites = boundary.size();

  auto boundary_sum = [&](std::span<const double> v, double eta) {
    RealSparse h = build_hamiltonian(box, v, ctx.lambda);
    ResolventColumn c = BoxResolvent(box, h, ctx.energy, eta).column(origin);
    double sum = 0.0;
    for (const auto& n : boundary) sum += std::pow(std::abs(c.values[box.index(n)]), s);
    return sum;
  };

  double eta = opts.eta;
  auto run = [&](double e) {
    RunningStats acc;
    if (ctx.lambda == 0.0) {
      double v = boundary_sum({}, e);
      acc = RunningStats{opts.samples, v, 0.0};
    } else {
      std::vector<double> per(opts.samples);
      parallel_for_blocks(opts.samples, opts.threads, [&](std::size_t i) {
        auto v = sample_potential(box, opts.density, opts.seed, i);
        per[i] = boundary_sum(v, e);
      });
      for (double x : per) acc.add(x);
    }
    return acc;
  };
  RunningStats acc;
  try {
    acc = run(eta);
  } catch (const NumericalError&) {
    if (eta != 0.0) throw;
    eta = opts.fallback_eta;
    acc = run(eta);
  }
  rep.eta_used = eta;
  rep.samples = acc.count;
  rep.raw_boundary_sum = acc.mean;
  rep.boundary_stderr = acc.count > 1 ? acc.stderr_of_mean() : 0.0;
  double L4 = std::pow(double(L), 4);
  rep.value = B_s * L4 * std::pow(ctx.lambda, -2.0 * s) * rep.raw_boundary_sum;
  rep.pass = rep.value < b;
  rep.margin = b - rep.value;
  rep.implied_decay_rate = -std::log(b) / L;
  return rep;
}

CorrelationFit correlation_length_fit(std::span<const DecaySample> samples, double s) {
  check_s(s);
  if (samples.size() < 4) throw InvalidArgument("need at least 4 distances");
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (const auto& d : samples) {
    if (!(d.distance > 0)) throw InvalidArgument("distances must be positive");
    dmin = std::min(dmin, d.distance);
    dmax = std::max(dmax, d.distance);
  }
  if (dmax < 3.0 * dmin) throw InvalidArgument("distances must span a factor >= 3");

  CorrelationFit fit;
  std::vector<double> x, y, w;
  bool weighted = std::all_of(samples.begin(), samples.end(),
                              [](const DecaySample& d) { return d.stderr_ > 0; });
  for (const auto& d : samples) {
    if (!(d.moment > 0)) {
      fit.note = "no decay detected: non-positive moment";
      return fit;
    }
    x.push_back(d.distance);
    y.push_back(std::log(d.moment));
    if (weighted) w.push_back(std::pow(d.moment / d.stderr_, 2));
  }
  LinearFit lf = fit_line(x, y, w);
  fit.slope = lf.slope;
  fit.slope_stderr = lf.slope_stderr;
  fit.intercept = lf.intercept;
  if (!(lf.slope < 0)) {
    fit.note = "no decay detected";
    return fit;
  }
  fit.decaying = true;
  fit.xi = -s / lf.slope;
  double steep = lf.slope - 2 * lf.slope_stderr, shallow = lf.slope + 2 * lf.slope_stderr;
  fit.xi_low = -s / steep;
  fit.xi_high = shallow < 0 ? -s / shallow : std::numeric_limits<double>::infinity();
  return fit;
}

}  // namespace lifshitz
