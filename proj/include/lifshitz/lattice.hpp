#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace lifshitz {

using Site = std::array<int, 3>;

inline double norm(const Site& x) {
  return std::sqrt(double(x[0]) * x[0] + double(x[1]) * x[1] + double(x[2]) * x[2]);
}
inline int norm_sup(const Site& x) {
  return std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
}
inline int norm_l1(const Site& x) { return std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]); }
inline Site operator-(const Site& a, const Site& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Site operator+(const Site& a, const Site& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
std::string to_string(const Site& x);

// Cubic box of `side` sites per axis starting at `lower`.
class Box {
 public:
  Box(Site lower, int side);
  // Sites -L..L on every axis (linear size 2L around the origin).
  static Box centered(int half_width);
  // Sites 0..side-1.
  static Box cube(int side);

  int side() const { return side_; }
  const Site& lower() const { return lower_; }
  std::size_t size() const { return std::size_t(side_) * side_ * side_; }
  bool contains(const Site& x) const;
  std::size_t index(const Site& x) const;
  Site site(std::size_t index) const;
  Site center() const;
  // Distance (in lattice steps) from x to the nearest site outside the box, minus one.
  int distance_to_boundary(const Site& x) const;
  // Sites with dist(n, outside) <= 1, i.e. the outermost layer.
  std::vector<Site> boundary_layer() const;

 private:
  Site lower_;
  int side_;
};

}  // namespace lifshitz
