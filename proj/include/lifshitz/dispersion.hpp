#pragma once

#include <array>
#include <vector>

namespace lifshitz {

// Momentum on the torus [-1/2, 1/2]^3.
struct TorusPoint {
  std::array<double, 3> p{0.0, 0.0, 0.0};

  // Reduces every component modulo 1 into [-1/2, 1/2).
  static TorusPoint wrapped(std::array<double, 3> q);
  double norm_squared() const { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; }
};

// e(p) = sum_a (1 - cos 2 pi p_a), computed as 2 sin^2 to keep accuracy near p = 0.
double dispersion(const TorusPoint& p);

enum class QuadratureMethod {
  // Midpoint rule in p_1 with the (p_2, p_3) plane done in closed form through
  // the square-lattice Green function; refined by grid doubling. Needs E* > 0.
  TensorMidpoint,
  // Full 3D midpoint rule on even grids with Richardson extrapolation in h, h^3, h^5.
  TensorMidpointRichardson,
};

struct QuadratureSpec {
  QuadratureMethod method = QuadratureMethod::TensorMidpoint;
  int grid_points_per_axis = 32;
  double tolerance = 1e-12;
  // Largest grid tried before giving up.
  int max_grid_points = 1 << 22;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int grid_points = 0;
};

// I1(E*) = integral over the torus of 1/(e(p)+E*).
QuadratureResult torus_integral_I1(double estar, const QuadratureSpec& spec = {});
// I2(E*) = integral of 1/(e(p)+E*)^2 = -dI1/dE*.
QuadratureResult torus_integral_I2(double estar, const QuadratureSpec& spec = {});

// Value of I1 at E* = 0, the simple-cubic lattice constant. Computed once, cached.
double lattice_constant();
// Closed form of the same constant through Gamma functions.
double lattice_constant_closed_form();

double energy_of_estar(double estar, double lambda);

double threshold_E_eps(double lambda, double epsilon);

struct EnergyContext {
  double lambda = 0.0;
  double energy = 0.0;
  double estar = 0.0;
  double sigma = 0.0;
  double epsilon = 1.0;
  int iterations = 0;

  // |sigma - lambda^2 I1(E*)|
  double fixed_point_residual() const;
};

EnergyContext solve_self_energy(double energy, double lambda, double epsilon = 1.0,
                                const QuadratureSpec& spec = {});
// Context built from E* directly; E follows from energy_of_estar.
EnergyContext context_from_estar(double estar, double lambda, double epsilon = 1.0);

// Fitted c <= I2 sqrt(E*) <= C over a logarithmic sweep of E*.
struct SqrtBounds {
  double lower = 0.0;
  double upper = 0.0;
};
SqrtBounds fit_I2_sqrt_bounds(double estar_min, double estar_max, int points);

// Smallest E*/lambda^(4-eps) among contexts solved at E = threshold_E_eps(lambda, eps).
double fit_threshold_constant(const std::vector<double>& lambdas, double epsilon);

// Number of sign changes of 1 - lambda^2 I2 on a log grid of E*.
int derivative_sign_changes(double lambda, double estar_min, double estar_max, int points);

}  // namespace lifshitz
