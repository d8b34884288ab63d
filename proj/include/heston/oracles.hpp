#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heston/config.hpp"
#include "heston/params.hpp"

namespace heston {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct McConfig {
  std::size_t paths = 100000;
  int steps = 200;
  std::uint64_t seed = 20240101;
  bool antithetic = true;  // variance leg uses full truncation in every case
};

// Terminal samples of (X_T, V_T) with X = log S. With antithetic pairs the
// vectors hold both members of each pair, in pair order.
struct HestonSamples {
  std::vector<double> x_T, v_T;
  double mean_v = 0.0, se_v = 0.0;  // mean and standard error of V_T
};

HestonSamples simulate_heston(const ModelParams& p, double S0, double V0, double T, const McConfig& cfg);

struct McPrice {
  double price = 0.0;
  double std_error = 0.0;
  double half_width = 0.0;  // 95% confidence half-width
};

// Discounted mean of payoff(S_T) with S_0 = K e^{x0}; x0 is log-moneyness.
McPrice price_mc(const ModelParams& p, const std::function<double(double)>& payoff, double K, double x0, double v0,
                 double T, const McConfig& cfg);
McPrice price_mc(const ModelParams& p, Payoff payoff, double K, double x0, double v0, double T, const McConfig& cfg);

// Semi-closed-form price from the two characteristic-function probabilities.
struct CfPrice {
  double call = 0.0, put = 0.0;
  double P1 = 0.0, P2 = 0.0;
  double quad_error = 0.0;
};
CfPrice price_reference_both(const ModelParams& p, double K, double x0, double v0, double T);
double price_reference(const ModelParams& p, Payoff payoff, double K, double x0, double v0, double T);

// Values of a function on a uniform line grid.
struct LineTable {
  std::vector<double> x, u;
};

// Convolution with G(z; t) = (4 pi t)^{-1/2} exp(-z^2 / 4t). The kernel is cut
// at |z| <= A sqrt(t) with A = 2 erfc^{-1}(delta), renormalised to unit mass,
// and the result is reported only on nodes whose whole window lies inside the
// input grid. Throws if the discrete kernel mass falls short of 1 - 1e-8.
LineTable heat_convolve(const LineTable& u0, double t, double delta = 1e-10);

// Discrete mass of the truncated kernel on a grid of spacing h.
double heat_kernel_mass(double t, double h, double delta = 1e-10);
double heat_window_halfwidth(double t, double delta = 1e-10);

// Black-Scholes price with variance v, obtained from heat_convolve of the payoff
// in log-price; the time to maturity enters as heat time v T / 2.
double black_scholes_heat(Payoff payoff, double S0, double K, double r, double q, double v, double T);
// Closed form, for tests.
double black_scholes(Payoff payoff, double S0, double K, double r, double q, double v, double T);

double pairwise_sum(const double* v, std::size_t n);

}  // namespace heston
