#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lifshitz/anderson.hpp"
#include "lifshitz/error.hpp"
#include "lifshitz/lattice_green.hpp"

using namespace lifshitz;

TEST_CASE("Hamiltonian stencil") {
  Box box = Box::cube(6);
  auto v = sample_potential(box, DensitySpec{}, 2, 0);
  RealSparse h = build_hamiltonian(box, v, 0.7);
  CHECK((RealSparse(h.transpose()) - h).norm() == 0.0);
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (box.distance_to_boundary(box.site(i)) == 0) continue;
    double sum = 0;
    for (RealSparse::InnerIterator it(h, Eigen::Index(i)); it; ++it) sum += it.value();
    CHECK(sum == doctest::Approx(0.7 * v[i]).epsilon(1e-12));
  }
}

TEST_CASE("lowest eigenvalue of the Dirichlet Laplacian") {
  const double pi = std::numbers::pi;
  double l8 = lowest_eigenvalue(laplacian_operator(Box::cube(8)), -0.5);
  double l16 = lowest_eigenvalue(laplacian_operator(Box::cube(16)), -0.5);
  CHECK(l16 == doctest::Approx(3 - 3 * std::cos(pi / 17)).epsilon(1e-10));
  CHECK(l8 == doctest::Approx(3 - 3 * std::cos(pi / 9)).epsilon(1e-10));
  CHECK(l16 > 0);
  CHECK(l16 < l8);
  CHECK_THROWS_AS(lowest_eigenvalue(laplacian_operator(Box::cube(4)), 1.0), InvalidArgument);
}

TEST_CASE("ground state lies above lambda times the lower support edge") {
  Box box = Box::cube(10);
  DensitySpec d;
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto v = sample_potential(box, d, 5, s);
    double lambda = 0.5;
    double e0 = lowest_eigenvalue(build_hamiltonian(box, v, lambda), lambda * d.support_min() - 0.1);
    CHECK(e0 >= lambda * d.support_min());
  }
}

TEST_CASE("free box resolvent against the lattice Green function") {
  const double estar = 0.5;
  Box box = Box::centered(8);
  auto col = resolvent_column(box, laplacian_operator(box), estar, 0.0, {0, 0, 0});
  CHECK(col.residual < 1e-10);
  for (Site x : {Site{0, 0, 0}, Site{1, 0, 0}, Site{2, 2, 1}, Site{4, 0, 0}}) {
    double dist = box.distance_to_boundary({0, 0, 0}) + 1;
    double bound = 10 * std::exp(-std::sqrt(2 * estar) * dist);
    CHECK(std::abs(col.values[box.index(x)].real() - green_free(x, estar)) <= bound);
  }
}

TEST_CASE("resolvent columns are symmetric") {
  Box box = Box::cube(8);
  auto v = sample_potential(box, DensitySpec{}, 3, 1);
  RealSparse h = build_hamiltonian(box, v, 0.5);
  BoxResolvent r(box, h, 0.6, 1e-3);
  Site a{1, 2, 3}, b{5, 4, 2};
  auto ca = r.column(a), cb = r.column(b);
  CHECK(std::abs(ca.values[box.index(b)] - cb.values[box.index(a)]) < 1e-10);
}

TEST_CASE("singular solve at eta = 0 asks for a positive eta") {
  Box box = Box::cube(5);
  RealSparse h = laplacian_operator(box);
  double e0 = lowest_eigenvalue(h, -0.5);
  try {
    resolvent_column(box, h, -e0, 0.0, {2, 2, 2});
    FAIL("expected a singular factorization");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("eta") != std::string::npos);
  }
  CHECK_NOTHROW(resolvent_column(box, h, -e0, 1e-4, {2, 2, 2}));
}

TEST_CASE("fractional moments") {
  Box box = Box::cube(8);
  EnergyContext ctx = context_from_estar(0.3, 0.5);
  std::vector<SitePair> pairs{{{2, 4, 4}, {4, 4, 4}}, {{2, 4, 4}, {2, 4, 4}}};
  FractionalMomentOptions fo;
  fo.samples = 40;
  auto a = fractional_moment(box, ctx, 0.3, pairs, fo);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double lo = a.row(p, 0).estimate, hi = lo;
    for (std::size_t e = 1; e < a.etas.size(); ++e) {
      lo = std::min(lo, a.row(p, e).estimate);
      hi = std::max(hi, a.row(p, e).estimate);
    }
    CHECK(hi / lo - 1 < 0.2);
    CHECK(lo > 0);
  }
  // Lyapunov: (E|R|^s)^(1/s) grows with s.
  auto b = fractional_moment(box, ctx, 0.9, pairs, fo);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    CHECK(std::pow(b.row(p, 2).estimate, 1 / 0.9) >= std::pow(a.row(p, 2).estimate, 1 / 0.3));

  EnergyContext free = context_from_estar(0.3, 0.0);
  auto f = fractional_moment(box, free, 0.3, pairs, fo);
  auto col = resolvent_column(box, laplacian_operator(box), 0.3, 1e-4, {4, 4, 4});
  CHECK(f.row(0, 2).stderr_ == 0.0);
  CHECK(f.row(0, 2).estimate == doctest::Approx(std::pow(std::abs(col.values[box.index({2, 4, 4})]), 0.3)));
  CHECK_THROWS_AS(fractional_moment(box, ctx, 1.2, pairs, fo), InvalidArgument);
}

TEST_CASE("moment difference") {
  Box box = Box::cube(8);
  std::vector<SitePair> pairs{{{2, 4, 4}, {3, 4, 4}}, {{2, 4, 4}, {4, 4, 4}}, {{0, 4, 4}, {7, 4, 4}}};
  FractionalMomentOptions fo;
  fo.samples = 30;
  fo.eta_schedule = {1e-3};
  auto zero = moment_difference(box, context_from_estar(0.1, 0.0), 0.3, pairs, fo);
  for (const auto& r : zero.estimate.rows) CHECK(r.estimate < 1e-12);
  CHECK(zero.excluded.size() == 1);
  auto m = moment_difference(box, context_from_estar(0.1, 0.5), 0.3, pairs, fo);
  CHECK(m.estimate.row(0, 0).estimate > m.estimate.row(1, 0).estimate);
  CHECK(m.fitted_C1 > 0);
  CHECK_THROWS_AS(moment_difference(box, context_from_estar(0.3, 0.5), 0.6, pairs, fo), InvalidArgument);
}

TEST_CASE("finite-volume criterion") {
  CriterionOptions co;
  co.samples = 8;
  EnergyContext deep = context_from_estar(50, 0.5);
  auto a = finite_volume_criterion(3, deep, 0.24, 0.5, 1.0, co);
  auto b = finite_volume_criterion(5, deep, 0.24, 0.5, 1.0, co);
  CHECK(a.boundary_sites == 7 * 7 * 7 - 5 * 5 * 5);
  CHECK(b.raw_boundary_sum < a.raw_boundary_sum);
  CHECK(a.implied_decay_rate == doctest::Approx(std::log(2.0) / 3));
  auto z = finite_volume_criterion(3, context_from_estar(0.3, 0.0), 0.2, 0.5, 1.0, co);
  CHECK(z.raw_boundary_sum > 0);
  CHECK(std::isinf(z.value));
  CHECK_FALSE(z.pass);
}

TEST_CASE("correlation length fits") {
  std::vector<DecaySample> syn;
  for (int r = 2; r <= 20; r += 3) syn.push_back({double(r), std::exp(-r / 10.0), 0.0});
  CorrelationFit f = correlation_length_fit(syn, 1.0 - 1e-12);
  CHECK(f.decaying);
  CHECK(f.xi == doctest::Approx(10.0).epsilon(0.01));

  std::vector<DecaySample> flat{{1, 1, 0}, {2, 1.1, 0}, {3, 1.2, 0}, {4, 1.3, 0}};
  CHECK_FALSE(correlation_length_fit(flat, 0.3).decaying);
  std::vector<DecaySample> few{{1, 1, 0}, {2, 0.5, 0}, {3, 0.2, 0}};
  CHECK_THROWS_AS(correlation_length_fit(few, 0.3), InvalidArgument);

  const double estar = 0.2;
  std::vector<DecaySample> freem;
  for (int r = 20; r <= 60; r += 5) freem.push_back({double(r), std::pow(green_free({r, 0, 0}, estar), 0.3), 0});
  CorrelationFit g = correlation_length_fit(freem, 0.3);
  CHECK(g.xi == doctest::Approx(1 / std::sqrt(2 * estar)).epsilon(0.1));
}
