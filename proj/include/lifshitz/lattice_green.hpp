#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lifshitz/lattice.hpp"

namespace lifshitz {

// R_r(x) = int_T3 e^{2 pi i p.x} / (e(p) + E*) d^3p, via
// int_0^inf e^{-E* t} prod_a e^{-t} I_{|x_a|}(t) dt.
double green_free(const Site& x, double estar, double rel_tol = 1e-10);

enum class GreenMethod { BesselIntegral, FftGrid };
std::string to_string(GreenMethod m);

// Free Green function on the lattice ball |x| <= radius, stored on the
// canonical octant x1 >= x2 >= x3 >= 0 and expanded by octahedral symmetry.
class GreenTable {
 public:
  GreenTable(double estar, int radius, GreenMethod method, int grid_size, double tolerance,
             std::vector<double> cube_values);

  double estar() const { return estar_; }
  int radius() const { return radius_; }
  GreenMethod method() const { return method_; }
  int grid_size() const { return grid_size_; }
  double tolerance() const { return tolerance_; }

  bool contains(const Site& x) const;
  // Throws std::out_of_range outside the ball.
  double operator()(const Site& x) const;
  double operator()(const Site& x, const Site& y) const { return (*this)(x - y); }

  // Calls fn(canonical site, value) for each stored representative.
  void for_each_canonical(const std::function<void(const Site&, double)>& fn) const;
  std::size_t canonical_count() const;

  // First line '# ' + JSON header, then x1,x2,x3,value over canonical sites.
  void write_csv(std::ostream& out) const;
  static GreenTable read_csv(std::istream& in);

 private:
  std::size_t slot(int a, int b, int c) const {
    return (std::size_t(a) * (radius_ + 1) + b) * (radius_ + 1) + c;
  }

  double estar_;
  int radius_;
  GreenMethod method_;
  int grid_size_;
  double tolerance_;
  std::vector<double> values_;
};

Site canonical_site(const Site& x);

struct GreenTableOptions {
  double rel_tol = 1e-10;
  bool allow_large_radius = false;
  int threads = 1;
};

GreenTable build_green_table(double estar, int radius, const GreenTableOptions& opts = {});

// Periodized Green function from an M^3 momentum grid. Rejects the request when the
// estimated periodization error over the requested ball exceeds `tolerance`.
GreenTable green_free_fft(int grid, double estar, int radius, double tolerance = 1e-8);

// Estimate of sum over nonzero images of R_r(x + mM).
double periodization_error_estimate(const Site& x, int grid, double estar);

// Exact decay rate of R_r along a lattice axis: acosh(1 + E*).
double axis_decay_rate(double estar);

struct AsymptoticsReport {
  double estar = 0.0;
  int r_min = 0, r_max = 0;
  double fitted_rate = 0.0;
  double continuum_rate = 0.0;  // sqrt(2 E*)
  double rate_ratio = 0.0;      // fitted / continuum
  double ratio_min = 0.0, ratio_max = 0.0;
  double c1 = 0.0, c2 = 0.0;    // |ratio - 1| <= c1 sqrt(E*) + c2 / |x|
  double envelope_K = 0.0;      // max R(x) (|x| + 1)
  int envelope_radius = 0;
  std::vector<int> distances;
  std::vector<double> values;
  std::vector<double> ratios;
};

AsymptoticsReport check_asymptotics(int r_min, int r_max, double estar, int envelope_radius = 12);

// max over |x| <= radius - 1 of |(3 + E*) G(x) - 1/2 sum_nbr G - delta_x0|.
double resolvent_identity_residual(const GreenTable& table, int patch_radius);

}  // namespace lifshitz
