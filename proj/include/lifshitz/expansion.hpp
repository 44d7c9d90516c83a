#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lifshitz/density.hpp"
#include "lifshitz/dispersion.hpp"
#include "lifshitz/lattice.hpp"
#include "lifshitz/lattice_green.hpp"

namespace lifshitz {

// One term of the resolvent expansion. `insertions` is a word over {V, S}: each V is
// a potential insertion lambda*V, each S a bullet insertion sigma, separated by R_r.
// The last factor is R_r (free terminal) or R (full terminal).
struct ExpansionTerm {
  std::string insertions;
  bool full_terminal = false;

  int potential_count() const;
  int bullet_count() const;
  // V counts 1, S counts 2.
  int order() const;
  // (-1)^{number of insertions}
  int sign() const;
  std::string render() const;
  // Lexicographic with V < S.
  bool operator<(const ExpansionTerm& other) const;
  bool operator==(const ExpansionTerm& other) const = default;
};

struct Decomposition {
  int N = 0;
  std::vector<ExpansionTerm> explicit_terms;   // free terminal, order < N
  std::vector<ExpansionTerm> remainder_terms;  // full terminal

  std::vector<ExpansionTerm> all() const;
  // Tab separated: insertions, order, terminal, rendered term.
  std::string to_table() const;
};

// Repeated substitution R = R_r - R_r (lambda V + sigma) R until all full-terminal terms
// reach order >= N. N <= 12.
Decomposition generate_terms(int N);
// Same set, by filtering all words of order <= N+1.
Decomposition generate_terms_direct(int N);

struct DecompositionResidual {
  int N = 0;
  double eta = 0.0;
  std::complex<double> lhs{};  // R(x,y)
  std::complex<double> rhs{};  // sum of terms
  double residual = 0.0;       // |lhs - rhs|
  double column_norm = 0.0;    // ||R(., y)||
  std::size_t terms = 0;
};

// Evaluates both sides on the box with R_r = (-1/2 Laplacian + E* + i eta)^{-1} and
// R = (H + E + i eta)^{-1}, H = -1/2 Laplacian + lambda V.
DecompositionResidual evaluate_decomposition(const Box& box, std::span<const double> potential,
                                             const EnergyContext& ctx, const Site& x,
                                             const Site& y, int N, double eta = 0.0);

// Sites within Euclidean distance `radius` of x or of y.
std::vector<Site> truncated_region(const Site& x, const Site& y, double radius);

struct MomentOptions {
  std::uint64_t samples = 20000;
  std::uint64_t seed = 1;
  double region_radius = 5.0;
  double truncation_tol = 0.05;
  DensitySpec density{};
  int threads = 1;
  std::size_t block_size = 1000;
};

// Sum over gate-free even partitions of the index set for E[A_l^2], lattice sums over `region`.
double diagram_sum_Al_squared(int l, const EnergyContext& ctx, const GreenTable& table,
                              const Site& x, const Site& y, std::span<const Site> region,
                              const DensitySpec& density = {});
// lambda^2 sum_z R_r(x,z)^2 R_r(z,y)^2
double closed_form_A1_squared(const EnergyContext& ctx, const GreenTable& table, const Site& x,
                              const Site& y, std::span<const Site> region);

struct MomentComparison {
  int l = 0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  std::uint64_t samples = 0;
  double diagram_sum = 0.0;
  double diagram_sum_enlarged = 0.0;  // region radius + 1
  double truncation_estimate = 0.0;   // relative change under enlargement
  double z_score = 0.0;
  std::size_t region_sites = 0;
};

// Monte Carlo of E[A_l(x,y)^2], potential supported on the truncated region, against the
// diagram sum on the same region. l in {1, 2}. Throws NumericalError when the sum is not
// stable under enlarging the region.
MomentComparison mc_moment_Al_squared(int l, const EnergyContext& ctx, const GreenTable& table,
                                      const Site& x, const Site& y, const MomentOptions& opts);

struct DecayEnvelopeReport {
  int l = 0;
  std::vector<double> distances;
  std::vector<double> values;
  double fitted_rate = 0.0;     // -slope of ln(value) vs distance
  double envelope_rate = 0.0;   // sqrt(E*/3)
  double fitted_K = 0.0;        // smallest K with value <= (4l)! (K lambda^2/sqrt(E*))^l e^{-rate d}
  bool rate_ok = false;         // fitted_rate >= envelope_rate
};

DecayEnvelopeReport check_decay_envelope(int l, const EnergyContext& ctx, const GreenTable& table,
                                         std::span<const int> axis_distances,
                                         double region_radius, const DensitySpec& density = {});

}  // namespace lifshitz
