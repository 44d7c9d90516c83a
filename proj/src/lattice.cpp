#include "lifshitz/lattice.hpp"

#include <fmt/format.h>

#include "lifshitz/error.hpp"

namespace lifshitz {

std::string to_string(const Site& x) { return fmt::format("({},{},{})", x[0], x[1], x[2]); }

Box::Box(Site lower, int side) : lower_(lower), side_(side) {
  if (side < 1) throw InvalidArgument("box side must be positive");
  if (double(side) * side * side > 2.0e8) throw InvalidArgument("box exceeds the site budget");
}

Box Box::centered(int L) {
  if (L < 1) throw InvalidArgument("box half-width must be positive");
  return Box({-L, -L, -L}, 2 * L + 1);
}

Box Box::cube(int side) { return Box({0, 0, 0}, side); }

bool Box::contains(const Site& x) const {
  for (int a = 0; a < 3; ++a)
    if (x[a] < lower_[a] || x[a] >= lower_[a] + side_) return false;
  return true;
}

std::size_t Box::index(const Site& x) const {
  if (!contains(x)) throw InvalidArgument("site " + to_string(x) + " outside box");
  return (std::size_t(x[0] - lower_[0]) * side_ + std::size_t(x[1] - lower_[1])) * side_ +
         std::size_t(x[2] - lower_[2]);
}

Site Box::site(std::size_t i) const {
  int k = int(i % side_);
  i /= side_;
  int j = int(i % side_);
  int h = int(i / side_);
  return {lower_[0] + h, lower_[1] + j, lower_[2] + k};
}

Site Box::center() const {
  return {lower_[0] + side_ / 2, lower_[1] + side_ / 2, lower_[2] + side_ / 2};
}

int Box::distance_to_boundary(const Site& x) const {
  int d = side_;
  for (int a = 0; a < 3; ++a) {
    d = std::min(d, x[a] - lower_[a]);
    d = std::min(d, lower_[a] + side_ - 1 - x[a]);
  }
  return d;
}

std::vector<Site> Box::boundary_layer() const {
  std::vector<Site> out;
  for (std::size_t i = 0; i < size(); ++i) {
    Site s = site(i);
    if (distance_to_boundary(s) == 0) out.push_back(s);
  }
  return out;
}

}  // namespace lifshitz
