#include <cmath>
#include <set>

#include "doctest.h"
#include "lifshitz/anderson.hpp"
#include "lifshitz/density.hpp"
#include "lifshitz/lattice.hpp"
#include "lifshitz/rng.hpp"
#include "lifshitz/stats.hpp"

using namespace lifshitz;

namespace {

// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("substreams are reproducible and distinct") {
  RandomStream a(7, "potential", 3), b(7, "potential", 3), c(7, "potential", 4), d(7, "other", 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 5; ++i) {
    auto x = a.bits();
    CHECK(x == b.bits());
    seen.insert(x);
  }
  CHECK(c.bits() != RandomStream(7, "potential", 3).bits());
  CHECK(d.bits() != RandomStream(7, "potential", 3).bits());
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("running stats merge matches a single pass") {
  RandomStream r(1, "stats", 0);
  RunningStats all, left, right;
  for (int i = 0; i < 1000; ++i) {
    double x = r.normal();
    all.add(x);
    (i < 400 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(left.count == all.count);
  CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-13));
  CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("weighted line fit recovers an exact line") {
  std::vector<double> x{1, 2, 3, 4, 5}, y, w{1, 2, 1, 3, 1};
  for (double v : x) y.push_back(2.5 - 0.75 * v);
  LinearFit f = fit_line(x, y, w);
  CHECK(f.slope == doctest::Approx(-0.75));
  CHECK(f.intercept == doctest::Approx(2.5));
  CHECK(f.residual_rms < 1e-12);
}

TEST_CASE("box geometry") {
  Box b = Box::centered(2);
  CHECK(b.side() == 5);
  CHECK(b.size() == 125);
  CHECK(b.contains({-2, 2, 0}));
  CHECK_FALSE(b.contains({3, 0, 0}));
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index(b.site(i)) == i);
  CHECK(b.boundary_layer().size() == 125 - 27);
  CHECK(b.distance_to_boundary({0, 0, 0}) == 2);
}

TEST_CASE("uniform density: moments by quadrature") {
  DensitySpec d;
  const double a = std::sqrt(3.0);
  for (int k : {2, 4, 6}) {
    double m = simpson([&](double v) { return std::pow(v, k) / (2 * a); }, -a, a, 2000);
    CHECK(d.moment(k) == doctest::Approx(m).epsilon(1e-10));
  }
  CHECK(d.moment(2) == doctest::Approx(1.0));
  CHECK(d.moment(4) == doctest::Approx(9.0 / 5.0));
  CHECK(d.support_min() == doctest::Approx(-a));
}

TEST_CASE("triangular density has unit variance") {
  DensitySpec d = DensitySpec::from_name("triangular");
  const double a = d.support_bound();
  double var = simpson([&](double v) { return v * v * (a - std::abs(v)) / (a * a); }, -a, a, 4000);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.moment(2) == doctest::Approx(1.0));
  CHECK_THROWS(DensitySpec::from_name("gaussian"));
}

TEST_CASE("potential samples: mean, variance, support") {
  Box box = Box::cube(100);
  auto v = sample_potential(box, DensitySpec{}, 11, 0);
  RunningStats s;
  double lo = 0, hi = 0;
  for (double x : v) {
    s.add(x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(s.count == 1000000);
  CHECK(std::abs(s.mean) < 4e-3);
  CHECK(std::abs(s.variance() - 1.0) < 1e-2);
  CHECK(lo >= -std::sqrt(3.0));
  CHECK(hi <= std::sqrt(3.0));
  CHECK(sample_potential(Box::cube(4), DensitySpec{}, 11, 5) ==
        sample_potential(Box::cube(4), DensitySpec{}, 11, 5));
}
