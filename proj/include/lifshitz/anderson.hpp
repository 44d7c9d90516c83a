#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lifshitz/density.hpp"
#include "lifshitz/dispersion.hpp"
#include "lifshitz/lattice.hpp"
#include "lifshitz/sparse_solver.hpp"

namespace lifshitz {

// i.i.d. potential on the box; a pure function of (seed, index).
std::vector<double> sample_potential(const Box& box, const DensitySpec& density, std::uint64_t seed,
                                     std::uint64_t index);

// -1/2 Laplacian with Dirichlet truncation: diagonal 3, nearest-neighbour -1/2.
RealSparse laplacian_operator(const Box& box);
// -1/2 Laplacian + lambda V. An empty potential means V = 0.
RealSparse build_hamiltonian(const Box& box, std::span<const double> potential, double lambda);
// H + (E + i eta)
ComplexSparse shifted_operator(const RealSparse& h, double energy, double eta);

// Smallest eigenvalue of a real symmetric H, given any strict lower bound of its spectrum.
double lowest_eigenvalue(const RealSparse& h, double lower_bound, double tol = 1e-12);

struct ResolventColumn {
  Site y{};
  double energy = 0.0;
  double eta = 0.0;
  std::vector<std::complex<double>> values;  // indexed by Box::index
  double residual = 0.0;                     // ||(H + E + i eta) u - delta_y||
};

// Factorizes H + E + i eta once; columns on demand.
class BoxResolvent {
 public:
  BoxResolvent(const Box& box, const RealSparse& h, double energy, double eta);
  ResolventColumn column(const Site& y) const;
  const Box& box() const { return box_; }
  double energy() const { return energy_; }
  double eta() const { return eta_; }

 private:
  Box box_;
  double energy_, eta_;
  SparseLu<std::complex<double>> lu_;
};

ResolventColumn resolvent_column(const Box& box, const RealSparse& h, double energy, double eta,
                                 const Site& y);

struct SitePair {
  Site x{};
  Site y{};
  std::string label() const;
};

struct FractionalMomentOptions {
  std::uint64_t samples = 1000;
  std::vector<double> eta_schedule{1e-2, 1e-3, 1e-4};
  std::uint64_t seed = 1;
  DensitySpec density{};
  int threads = 1;
};

struct MomentRow {
  std::size_t pair = 0;
  double eta = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
};

struct FractionalMomentEstimate {
  double s = 0.0;
  std::vector<SitePair> pairs;
  std::vector<double> etas;
  std::vector<MomentRow> rows;  // pair-major, eta-minor

  const MomentRow& row(std::size_t pair, std::size_t eta_index) const {
    return rows.at(pair * etas.size() + eta_index);
  }
};

// E|R(x,y)|^s with R = (H + E + i eta)^{-1} on the box, for every eta in the schedule.
FractionalMomentEstimate fractional_moment(const Box& box, const EnergyContext& ctx, double s,
                                           const std::vector<SitePair>& pairs,
                                           const FractionalMomentOptions& opts);

struct MomentDifferenceReport {
  FractionalMomentEstimate estimate;  // of E|R - R_r|^s
  std::vector<SitePair> excluded;
  std::vector<std::string> notices;
  double fitted_C1 = 0.0;  // max estimate (|x-y|+1)^{s/2} / lambda^s at the smallest eta
};

// R_r here is the free box resolvent (-1/2 Laplacian + E* + i eta)^{-1}.
MomentDifferenceReport moment_difference(const Box& box, const EnergyContext& ctx, double s,
                                         const std::vector<SitePair>& pairs,
                                         const FractionalMomentOptions& opts);

struct CriterionOptions {
  std::uint64_t samples = 100;
  double eta = 0.0;            // retried at fallback_eta if the box operator is singular
  double fallback_eta = 1e-4;
  std::uint64_t seed = 1;
  DensitySpec density{};
  int threads = 1;
};

struct CriterionReport {
  int L = 0;
  double lambda = 0.0, energy = 0.0, estar = 0.0;
  double s = 0.0, b = 0.0, B_s = 1.0;
  double raw_boundary_sum = 0.0;  // sum over the boundary layer of E|R(n,0)|^s
  double boundary_stderr = 0.0;
  std::size_t boundary_sites = 0;
  double value = 0.0;   // B_s L^4 lambda^{-2s} raw_boundary_sum
  bool pass = false;
  double margin = 0.0;  // b - value
  double implied_decay_rate = 0.0;  // -ln(b) / L
  double eta_used = 0.0;
  std::uint64_t samples = 0;
};

// Box of sites -L..L; boundary layer = sites with dist(n, outside) <= 1.
CriterionReport finite_volume_criterion(int L, const EnergyContext& ctx, double s, double b,
                                        double B_s, const CriterionOptions& opts);

struct DecaySample {
  double distance = 0.0;
  double moment = 0.0;
  double stderr_ = 0.0;  // 0 = unweighted
};

struct CorrelationFit {
  bool decaying = false;
  double xi = 0.0, xi_low = 0.0, xi_high = 0.0;  // xi_low/high from slope +- 2 stderr
  double slope = 0.0, slope_stderr = 0.0, intercept = 0.0;
  std::string note;
};

// Weighted least squares of ln(moment) against distance; xi = -s / slope.
CorrelationFit correlation_length_fit(std::span<const DecaySample> samples, double s);

}  // namespace lifshitz
