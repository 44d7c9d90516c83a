#pragma once

#include <string>

namespace lifshitz {

// Single-site law of the potential: even, bounded density, compact support, unit variance.
class DensitySpec {
 public:
  enum class Family { UniformSqrt3, Triangular };

  DensitySpec() = default;
  explicit DensitySpec(Family f) : family_(f) {}
  static DensitySpec from_name(const std::string& name);

  Family family() const { return family_; }
  std::string name() const;
  // Support is [-a, a]; a = support_bound().
  double support_bound() const;
  // Lower end of the support (the `a` with inf spectrum = lambda*a).
  double support_min() const { return -support_bound(); }
  // Even moment E[V^k]; odd moments are zero.
  double moment(int k) const;
  // Maps two independent uniforms on [0,1) to one draw.
  double sample(double u1, double u2) const;

 private:
  Family family_ = Family::UniformSqrt3;
};

}  // namespace lifshitz
