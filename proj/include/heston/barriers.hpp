#pragma once

#include <optional>

#include "heston/evolution.hpp"
#include "heston/grid.hpp"
#include "heston/params.hpp"
#include "heston/verdict.hpp"

namespace heston {

struct BarrierParams {
  // majorizer h0
  double beta0 = 1.0, mu0 = 1.0, gamma0 = 1.0;
  // barrier h
  double beta1 = 1.0, gamma1 = 2.0, mu1 = 2.0, nu = 0.0, omega = 1.0, tau = 0.5;
  // comparison function U = K1 e^{x + varpi xi} + K0, grown at rate r0
  double varpi = 0.0, K0 = 0.0, K1 = 1.0, r0 = 0.0;
};

// Inputs for choose_barrier_constants; unset values take the documented defaults.
struct BarrierSeed {
  double beta0 = 1.0;
  std::optional<double> mu0;     // defaults to the weight's mu
  std::optional<double> gamma0;  // defaults to the weight's gamma
  std::optional<double> gamma1;  // defaults to gamma0 + 1
  double nu = 0.0;
  double T = 1.0;
};

double majorizer_h0(double x, double xi, const BarrierParams& bp);
double barrier_h(double x, double xi, double t, const BarrierParams& bp);
// Exponent of h, i.e. log h.
double barrier_log_h(double x, double xi, double t, const BarrierParams& bp);

struct JCoeffs {
  double J1 = 0, J0 = 0, Jm1 = 0;
  double combined(double xi) const { return J1 * xi + J0 + Jm1 / xi; }
};

JCoeffs J_coefficients(double x, double xi, double t, const BarrierParams& bp, const ModelParams& p);

// -h^{-1}(h_t + A h) by fourth-order finite differences of h, computed on
// ratios h(P)/h(P0) so that the large exponentials cancel.
double J_finite_difference(double x, double xi, double t, const BarrierParams& bp, const ModelParams& p);

struct BarrierChoice {
  BarrierParams bp;
  double tau0 = 0;
  double omega_J1 = 0, omega_J0 = 0, omega_T = 0;
  double beta1_lo = 0, beta1_hi = 0;
};

BarrierChoice choose_barrier_constants(const ModelParams& p, const WeightParams& w, const BarrierSeed& seed);

// Sign certification J_{-1} <= 0, J_1 <= 0, J_0 + nu <= 0 over the grid nodes
// with xi > 0 times `time_samples` equispaced times in (0, tau/omega].
VerdictReport certify_J_signs(const BarrierParams& bp, const ModelParams& p, const Grid2D& grid,
                              int time_samples = 32);

// Reconstruction J1 xi + J0 + Jm1/xi against the finite-difference value on
// `samples` deterministic pseudo-random points.
VerdictReport check_J_reconstruction(const BarrierParams& bp, const ModelParams& p, double x_half_width,
                                     double xi_max, int samples, std::uint64_t seed, double rel_tol = 1e-6);

// Closed-form e^{-r0 t}(U_t + A U) at every node, which must be >= 0.
double supersolution_expression(double x, double xi, const ModelParams& p, double varpi, double K0, double K1,
                                double r0);
VerdictReport supersolution_check_U(const ModelParams& p, double varpi, double mu0, double K0, double K1,
                                    double r0, const Grid2D& grid);

// tol_grid = 10 (h_x + h_xi,min + dt).
double max_principle_tolerance(const Grid2D& g, double dt);

VerdictReport verify_max_principle(const EvolutionTrace& trace, const ModelParams& p, double varpi, double K0,
                                   double K1, double r0, double tol, bool nonnegative_payoff = true);

}  // namespace heston
