#include "lifshitz/density.hpp"

#include <cmath>

#include "lifshitz/error.hpp"

namespace lifshitz {

DensitySpec DensitySpec::from_name(const std::string& name) {
  if (name == "uniform") return DensitySpec(Family::UniformSqrt3);
  if (name == "triangular") return DensitySpec(Family::Triangular);
  throw InvalidArgument("unknown density family '" + name + "' (expected uniform|triangular)");
}

std::string DensitySpec::name() const {
  return family_ == Family::UniformSqrt3 ? "uniform" : "triangular";
}

double DensitySpec::support_bound() const {
  return family_ == Family::UniformSqrt3 ? std::sqrt(3.0) : std::sqrt(6.0);
}

double DensitySpec::moment(int k) const {
  if (k < 0) throw InvalidArgument("moment order must be non-negative");
  if (k % 2) return 0.0;
  double a = support_bound();
  double ak = std::pow(a, k);
  if (family_ == Family::UniformSqrt3) return ak / double(k + 1);
  // density (a-|x|)/a^2 on [-a,a]
  return 2.0 * ak / (double(k + 1) * double(k + 2));
}

double DensitySpec::sample(double u1, double u2) const {
  double a = support_bound();
  if (family_ == Family::UniformSqrt3) return a * (2.0 * u1 - 1.0);
  return a * (u1 - u2);
}

}  // namespace lifshitz
