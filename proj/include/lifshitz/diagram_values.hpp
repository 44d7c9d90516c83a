#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lifshitz/feynman_graph.hpp"

namespace lifshitz {

struct McParams {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::uint64_t block_size = 4096;
  int threads = 1;
  // Loop bases (spanning trees) in the importance-sampling mixture.
  std::size_t max_channels = 64;
};

struct GraphValueEstimate {
  std::string graph_id;
  int order = 0;
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string method;
};

// F(q) = 1 / ((q^2 + 1) ln^4(q^2 + 2))
double damped_propagator(double q2);
double log_damped_propagator(double q2);

// |G| = int prod_j F(p_j) over the loop momenta in R^3 (one factor per line).
GraphValueEstimate graph_value(const FeynmanGraph& g, const McParams& mc, const std::string& id = "");

// int_{R^3} F(q)^2 d^3q by one-dimensional adaptive quadrature.
double bubble_radial_quadrature();

// Torus integral with propagators C/(|p|^2 + E*), p wrapped to [-1/2,1/2)^3.
GraphValueEstimate torus_pairing_integral(const Partition& p, double estar, const McParams& mc,
                                          double propagator_constant = 1.0);
// Same graph over R^3 with 1/(q^2 + E*). A positive cutoff restricts every line to
// |q| <= cutoff * sqrt(E*); without one, graphs that diverge by power counting are rejected.
GraphValueEstimate continuum_pairing_integral(const Partition& p, double estar, const McParams& mc,
                                              double cutoff = 0.0);

struct BoundAssembly {
  int order = 0;
  double lambda = 0.0;
  double estar = 0.0;
  double K = 1.0;
  double C_of_estar = 0.0;  // K ln^9(e + 1/E*)
  double rho = 0.0;         // C lambda^2 / sqrt(E*)
  double log_bound = 0.0;   // ln of (4n)! E* rho^n
  double bound_value = 0.0;
  double log_alt_prefactor = 0.0;  // ln (2 n^2)^(2n+1)
  int chosen_N = 1;
  std::string normalization_note;
};

BoundAssembly assemble_An_bound(int n, double lambda, double estar, double K = 1.0);

// ln (4N)! + N ln rho versus -N, factorial exact, reals at 100 digits.
struct StoppingCheck {
  int N = 0;
  double lhs_log = 0.0;
  double rhs_log = 0.0;
  bool holds = false;
};
StoppingCheck stopping_rule_check(double rho, int N);
int chosen_stopping_order(double rho);

// Smallest n >= 1 minimising the bound, with its value.
struct BoundMinimum {
  int argmin = 1;
  double log_bound = 0.0;
};
BoundMinimum bound_minimum(double lambda, double estar, double K, int n_max);

// Exponent B with rho = lambda^(B eps) at E* = lambda^(4 - eps).
double refe_exponent(double lambda, double epsilon, double K = 1.0);

}  // namespace lifshitz
