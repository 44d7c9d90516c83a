#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "lifshitz/dispersion.hpp"
#include "lifshitz/error.hpp"
#include "lifshitz/lattice_green.hpp"

using namespace lifshitz;

namespace {

// Plain midpoint sum over an M^3 torus grid; spectrally accurate once e^{-rate M} is negligible.
double torus_sum(const Site& x, double estar, int M) {
  const double pi = std::numbers::pi;
  std::vector<double> c(M), cs(M);
  double total = 0.0;
  for (int k = 0; k < M; ++k) {
    double p = (k + 0.5) / M;
    c[k] = 2 * std::sin(pi * p) * std::sin(pi * p);
  }
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k) {
        double phase = 2 * pi * ((i + 0.5) * x[0] + (j + 0.5) * x[1] + (k + 0.5) * x[2]) / M;
        total += std::cos(phase) / (c[i] + c[j] + c[k] + estar);
      }
  return total / (double(M) * M * M);
}

}  // namespace

TEST_CASE("Bessel representation against a direct torus sum") {
  for (Site x : {Site{0, 0, 0}, Site{1, 0, 0}, Site{2, 1, 0}, Site{3, 2, 1}})
    CHECK(std::abs(green_free(x, 1.0) - torus_sum(x, 1.0, 48)) < 1e-10);
}

TEST_CASE("free Green function is positive and symmetric") {
  for (double e : {1e-3, 1e-2, 1e-1}) {
    GreenTable t = build_green_table(e, 8);
    t.for_each_canonical([&](const Site&, double v) { CHECK(v > 0); });
  }
  double g = green_free({1, 2, 3}, 0.05);
  CHECK(green_free({-3, 1, -2}, 0.05) == doctest::Approx(g).epsilon(1e-14));
  CHECK(green_free({2, -3, 1}, 0.05) == doctest::Approx(g).epsilon(1e-14));
}

TEST_CASE("diagonal value reproduces the self-energy") {
  for (double lambda : {0.1, 0.2}) {
    double E = 0.5 * (threshold_E_eps(lambda, 1.0) + lambda * lambda * lattice_constant() + lambda);
    EnergyContext ctx = solve_self_energy(E, lambda);
    double g0 = green_free({0, 0, 0}, ctx.estar);
    CHECK(std::abs(lambda * lambda * g0 - ctx.sigma) / ctx.sigma < 1e-8);
  }
}

TEST_CASE("FFT table") {
  GreenTable f = green_free_fft(128, 1.0, 6);
  CHECK(std::abs(f({0, 0, 0}) - green_free({0, 0, 0}, 1.0)) < 1e-8);
  CHECK(std::abs(f({2, 1, 0}) - green_free({2, 1, 0}, 1.0)) < 1e-8);
  CHECK(f({1, -2, 0}) == f({0, 2, 1}));
  CHECK_THROWS_AS(green_free_fft(64, 1e-3, 10), NumericalError);
  CHECK_THROWS_AS(green_free_fft(63, 1.0, 4), InvalidArgument);
}

TEST_CASE("table lookup, identity residual and CSV round trip") {
  GreenTable t = build_green_table(0.2, 6);
  CHECK(t.contains({6, 0, 0}));
  CHECK_FALSE(t.contains({5, 5, 0}));
  CHECK_THROWS_AS(t({5, 5, 0}), std::out_of_range);
  CHECK(resolvent_identity_residual(t, 5) < 1e-9);
  std::stringstream ss;
  t.write_csv(ss);
  GreenTable back = GreenTable::read_csv(ss);
  CHECK(back.radius() == 6);
  CHECK(back({3, -1, 2}) == t({3, -1, 2}));
  CHECK_THROWS_AS(build_green_table(0.2, 65), InvalidArgument);
}

TEST_CASE("axis asymptotics at small E*") {
  AsymptoticsReport a = check_asymptotics(20, 60, 0.01);
  CHECK(a.rate_ratio > 0.95);
  CHECK(a.rate_ratio < 1.05);
  CHECK(a.ratio_min >= 0.8);
  CHECK(a.ratio_max <= 1.2);
  CHECK(a.envelope_K <= 2.0);
  CHECK(axis_decay_rate(0.01) == doctest::Approx(std::acosh(1.01)));
}
