#include "lifshitz/dispersion.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "lifshitz/error.hpp"

namespace lifshitz {

namespace {

constexpr double kPi = std::numbers::pi;

double half_dispersion_1d(double p) {
  double s = std::sin(kPi * p);
  return 2.0 * s * s;
}

// Transverse-plane kernels at t = 3 + E* - cos(2 pi p1), written as t = 2 + gap.
// plane1 = int_{T^2} 1/(t - cos - cos) = 2 K(2/t) / (pi t)
// plane2 = int_{T^2} 1/(t - cos - cos)^2 = 2 E(2/t) / (pi (t^2 - 4))
double plane1(double gap) {
  double t = 2.0 + gap;
  return 2.0 * std::comp_ellint_1(2.0 / t) / (kPi * t);
}
double plane2(double gap) {
  double t = 2.0 + gap;
  return 2.0 * std::comp_ellint_2(2.0 / t) / (kPi * gap * (t + 2.0));
}

double reduced_midpoint(double estar, int M, int power) {
  // Symmetric under p -> -p, so sum half the nodes.
  double sum = 0.0;
  for (int i = 0; i < M / 2; ++i) {
    double p = (i + 0.5) / M - 0.5;
    double gap = estar + half_dispersion_1d(p);
    sum += power == 1 ? plane1(gap) : plane2(gap);
  }
  return 2.0 * sum / M;
}

double full_midpoint(double estar, int M, int power) {
  int h = M / 2;
  std::vector<double> c(h);
  for (int i = 0; i < h; ++i) c[i] = half_dispersion_1d((i + 0.5) / M - 0.5);
  // Sum over i <= j <= k with permutation multiplicities.
  long double sum = 0.0L;
  for (int i = 0; i < h; ++i) {
    for (int j = i; j < h; ++j) {
      double cij = c[i] + c[j] + estar;
      long double row = 0.0L;
      for (int k = j; k < h; ++k) {
        double d = 1.0 / (cij + c[k]);
        double v = power == 1 ? d : d * d;
        int mult = (i == j) ? (j == k ? 1 : 3) : (j == k ? 3 : 6);
        row += mult * v;
      }
      sum += row;
    }
  }
  return double(8.0L * sum / ((long double)M * M * M));
}

QuadratureResult richardson(double estar, const QuadratureSpec& spec, int power) {
  const int max_levels = 6;
  std::vector<std::vector<double>> T;
  int M = spec.grid_points_per_axis;
  double est = INFINITY;
  for (int level = 0; level < max_levels; ++level, M *= 2) {
    if (M > 1024 || M > spec.max_grid_points) break;
    std::vector<double> row{full_midpoint(estar, M, power)};
    for (int j = 1; j <= level; ++j) {
      double f = std::ldexp(1.0, 2 * j - 1);
      row.push_back((f * row[j - 1] - T[level - 1][j - 1]) / (f - 1.0));
    }
    T.push_back(row);
    if (level >= 2) {
      est = std::abs(T[level][level] - T[level - 1][level - 1]);
      if (est <= spec.tolerance * std::abs(T[level][level]))
        return {T[level][level], est, M};
    }
  }
  throw NumericalError(
      fmt::format("Richardson ladder did not reach tolerance {:.1e} (achieved {:.2e})",
                  spec.tolerance, est),
      est);
}

QuadratureResult reduced(double estar, const QuadratureSpec& spec, int power) {
  // Convergence is roughly exp(-M sqrt(2 E*)); start near where it should bite.
  double guess = 12.0 / std::sqrt(2.0 * estar);
  int M = spec.grid_points_per_axis;
  while (M < guess && M < spec.max_grid_points / 2) M *= 2;
  double prev = reduced_midpoint(estar, M, power);
  double est = INFINITY;
  for (M *= 2; M <= spec.max_grid_points; M *= 2) {
    double cur = reduced_midpoint(estar, M, power);
    est = std::abs(cur - prev);
    if (est <= spec.tolerance * std::abs(cur)) return {cur, est, M};
    prev = cur;
  }
  throw NumericalError(
      fmt::format("torus quadrature at E*={} did not converge to {:.1e} (achieved {:.2e})",
                  estar, spec.tolerance, est),
      est);
}

}  // namespace

TorusPoint TorusPoint::wrapped(std::array<double, 3> q) {
  TorusPoint t;
  for (int a = 0; a < 3; ++a) {
    double v = q[a] - std::floor(q[a] + 0.5);
    t.p[a] = v;
  }
  return t;
}

double dispersion(const TorusPoint& p) {
  return half_dispersion_1d(p.p[0]) + half_dispersion_1d(p.p[1]) + half_dispersion_1d(p.p[2]);
}

void QuadratureSpec::validate() const {
  if (grid_points_per_axis < 8 || grid_points_per_axis % 2)
    throw InvalidArgument("grid_points_per_axis must be even and >= 8");
  if (!(tolerance > 0)) throw InvalidArgument("quadrature tolerance must be positive");
}

QuadratureResult torus_integral_I1(double estar, const QuadratureSpec& spec) {
  spec.validate();
  if (!(estar >= 0)) throw InvalidArgument("I1 needs E* >= 0");
  if (estar == 0.0 || spec.method == QuadratureMethod::TensorMidpointRichardson)
    return richardson(estar, spec, 1);
  return reduced(estar, spec, 1);
}

QuadratureResult torus_integral_I2(double estar, const QuadratureSpec& spec) {
  spec.validate();
  if (!(estar > 0)) throw InvalidArgument("I2 needs E* > 0");
  if (spec.method == QuadratureMethod::TensorMidpointRichardson) return richardson(estar, spec, 2);
  return reduced(estar, spec, 2);
}

double lattice_constant() {
  static const double value = [] {
    QuadratureSpec spec;
    spec.method = QuadratureMethod::TensorMidpointRichardson;
    spec.tolerance = 1e-11;
    return torus_integral_I1(0.0, spec).value;
  }();
  return value;
}

double lattice_constant_closed_form() {
  double g = std::tgamma(1.0 / 24) * std::tgamma(5.0 / 24) * std::tgamma(7.0 / 24) *
             std::tgamma(11.0 / 24);
  return std::sqrt(6.0) / (32.0 * kPi * kPi * kPi) * g / 3.0;
}

double energy_of_estar(double estar, double lambda) {
  if (!(estar >= 0)) throw InvalidArgument("energy_of_estar needs E* >= 0");
  if (lambda == 0.0) return estar;
  double i1 = estar == 0.0 ? lattice_constant() : torus_integral_I1(estar).value;
  return estar + lambda * lambda * i1;
}

double threshold_E_eps(double lambda, double epsilon) {
  if (!(lambda >= 0)) throw InvalidArgument("lambda must be >= 0");
  if (!(epsilon > 0 && epsilon < 4)) throw InvalidArgument("epsilon must lie in (0,4)");
  if (lambda == 0.0) return 0.0;
  return lambda * lambda * lattice_constant() + std::pow(lambda, 4.0 - epsilon);
}

double EnergyContext::fixed_point_residual() const {
  if (lambda == 0.0) return std::abs(sigma);
  return std::abs(sigma - lambda * lambda * torus_integral_I1(estar).value);
}

EnergyContext solve_self_energy(double E, double lambda, double epsilon,
                                const QuadratureSpec& spec) {
  spec.validate();
  if (!(E > 0)) throw InvalidArgument("energy must be positive");
  if (!(lambda >= 0)) throw InvalidArgument("lambda must be >= 0");
  if (!(epsilon > 0 && epsilon < 4)) throw InvalidArgument("epsilon must lie in (0,4)");
  EnergyContext ctx{lambda, E, E, 0.0, epsilon, 0};
  if (lambda == 0.0) return ctx;

  double thr = threshold_E_eps(lambda, epsilon);
  if (E < thr)
    throw DomainError(fmt::format(
        "below Lifshitz window: E={} < E_eps(lambda={}, eps={}) = {}", E, lambda, epsilon, thr));

  const double l2 = lambda * lambda;
  auto f = [&](double x) { return x + l2 * torus_integral_I1(x, spec).value - E; };
  double lo = 4.0 * (l2 * lattice_constant()) * (l2 * lattice_constant());
  double hi = std::max(6.0, E);
  double flo = f(lo);
  if (flo > 0)
    throw DomainError(fmt::format("below Lifshitz window: E={} lies under the increasing branch", E));

  int it = 0;
  while (hi - lo > 1e-3 * hi && it < 200) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? hi : lo) = mid;
    ++it;
  }
  double x = 0.5 * (lo + hi);
  for (; it < 300; ++it) {
    double fx = f(x);
    if (std::abs(fx) <= 1e-14 * std::max(1.0, E)) break;
    (fx > 0 ? hi : lo) = x;
    double d = 1.0 - l2 * torus_integral_I2(x, spec).value;
    double nx = d > 0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 1e-16 * x) {
      x = nx;
      break;
    }
    x = nx;
  }
  ctx.estar = x;
  ctx.sigma = E - x;
  ctx.iterations = it;
  return ctx;
}

EnergyContext context_from_estar(double estar, double lambda, double epsilon) {
  if (!(estar > 0)) throw InvalidArgument("E* must be positive");
  double E = energy_of_estar(estar, lambda);
  return EnergyContext{lambda, E, estar, E - estar, epsilon, 0};
}

SqrtBounds fit_I2_sqrt_bounds(double emin, double emax, int points) {
  if (!(emin > 0 && emax > emin) || points < 2) throw InvalidArgument("bad sweep");
  SqrtBounds b{INFINITY, 0.0};
  for (int i = 0; i < points; ++i) {
    double e = emin * std::pow(emax / emin, double(i) / (points - 1));
    double v = torus_integral_I2(e).value * std::sqrt(e);
    b.lower = std::min(b.lower, v);
    b.upper = std::max(b.upper, v);
  }
  return b;
}

double fit_threshold_constant(const std::vector<double>& lambdas, double epsilon) {
  double c = INFINITY;
  for (double l : lambdas) {
    auto ctx = solve_self_energy(threshold_E_eps(l, epsilon), l, epsilon);
    c = std::min(c, ctx.estar / std::pow(l, 4.0 - epsilon));
  }
  return c;
}

int derivative_sign_changes(double lambda, double emin, double emax, int points) {
  int changes = 0;
  int prev = 0;
  for (int i = 0; i < points; ++i) {
    double e = emin * std::pow(emax / emin, double(i) / (points - 1));
    double d = 1.0 - lambda * lambda * torus_integral_I2(e).value;
    int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (s != 0 && prev != 0 && s != prev) ++changes;
    if (s != 0) prev = s;
  }
  return changes;
}

}  // namespace lifshitz
