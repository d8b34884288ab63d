#include "heston/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "heston/rng.hpp"

namespace heston {

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += v[k];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

namespace {

struct MeanSe {
  double mean, se;
};

MeanSe mean_and_se(const std::vector<double>& y) {
  const std::size_t n = y.size();
  const double mean = pairwise_sum(y.data(), n) / double(n);
  if (n < 2) return {mean, 0.0};
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = (y[k] - mean) * (y[k] - mean);
  const double var = pairwise_sum(d.data(), n) / double(n - 1);
  return {mean, std::sqrt(var / double(n))};
}

// Pair averages when the samples come in antithetic pairs.
std::vector<double> pair_means(const std::vector<double>& y, bool antithetic) {
  if (!antithetic) return y;
  std::vector<double> out(y.size() / 2);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = 0.5 * (y[2 * m] + y[2 * m + 1]);
  return out;
}

}  // namespace

HestonSamples simulate_heston(const ModelParams& p, double S0, double V0, double T, const McConfig& cfg) {
  if (!(S0 > 0)) throw std::invalid_argument("simulate_heston: S0 must be > 0");
  if (!(V0 >= 0)) throw std::invalid_argument("simulate_heston: V0 must be >= 0");
  if (cfg.paths < 1 || cfg.steps < 1) throw std::invalid_argument("simulate_heston: need paths >= 1 and steps >= 1");

  // Antithetic runs simulate whole pairs, so the count is rounded up to even.
  const std::size_t n = cfg.antithetic ? 2 * ((cfg.paths + 1) / 2) : cfg.paths;
  const double dt = T / cfg.steps, sdt = std::sqrt(dt), rho_perp = std::sqrt(1.0 - p.rho * p.rho);
  const double x0 = std::log(S0);
  HestonSamples out;
  out.x_T.resize(n);
  out.v_T.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t stream = cfg.antithetic ? k / 2 : k;
    const double sign = (cfg.antithetic && (k & 1)) ? -1.0 : 1.0;
    double X = x0, V = V0;
    for (int s = 0; s < cfg.steps; ++s) {
      auto [zv, zp] = normal_pair(cfg.seed, stream, std::uint64_t(s));
      zv *= sign;
      zp *= sign;
      const double vp = V > 0 ? V : 0.0, sv = std::sqrt(vp) * sdt;
      X += -(p.q_r() + 0.5 * vp) * dt + sv * (p.rho * zv + rho_perp * zp);
      V += p.kappa * (p.theta - vp) * dt + p.sigma * sv * zv;
    }
    if (!std::isfinite(X) || !std::isfinite(V)) {
      std::ostringstream os;
      os << "simulate_heston: non-finite path (seed " << cfg.seed << ", path " << k << ")";
      throw OracleError(os.str());
    }
    out.x_T[k] = X;
    out.v_T[k] = V;
  }
  const MeanSe ms = mean_and_se(pair_means(out.v_T, cfg.antithetic));
  out.mean_v = ms.mean;
  out.se_v = ms.se;
  return out;
}

McPrice price_mc(const ModelParams& p, const std::function<double(double)>& payoff, double K, double x0, double v0,
                 double T, const McConfig& cfg) {
  const HestonSamples s = simulate_heston(p, K * std::exp(x0), v0, T, cfg);
  std::vector<double> y(s.x_T.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = payoff(std::exp(s.x_T[k]));
  const MeanSe ms = mean_and_se(pair_means(y, cfg.antithetic));
  const double disc = std::exp(-p.r * T);
  McPrice out;
  out.price = disc * ms.mean;
  out.std_error = disc * ms.se;
  out.half_width = 1.959963984540054 * out.std_error;
  return out;
}

McPrice price_mc(const ModelParams& p, Payoff payoff, double K, double x0, double v0, double T, const McConfig& cfg) {
  if (payoff == Payoff::call) return price_mc(p, [K](double S) { return S > K ? S - K : 0.0; }, K, x0, v0, T, cfg);
  return price_mc(p, [K](double S) { return K > S ? K - S : 0.0; }, K, x0, v0, T, cfg);
}

namespace {

using cplx = std::complex<double>;

// Characteristic function of log S_T under the j-th measure, in the
// formulation that keeps the complex logarithm on its principal branch.
cplx heston_cf(const ModelParams& p, int j, double phi, double lnS, double v0, double T) {
  const double u = j == 1 ? 0.5 : -0.5;
  const double b = j == 1 ? p.kappa - p.rho * p.sigma : p.kappa;
  const double s2 = p.sigma * p.sigma;
  const cplx i(0.0, 1.0);
  const cplx rsi = p.rho * p.sigma * phi * i;
  const cplx d = std::sqrt((rsi - b) * (rsi - b) - s2 * (2.0 * u * phi * i - phi * phi));
  const cplx g = (b - rsi - d) / (b - rsi + d);
  const cplx e = std::exp(-d * T);
  const cplx C = -p.q_r() * phi * i * T +
                 p.kappa * p.theta / s2 * ((b - rsi - d) * T - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
  const cplx D = (b - rsi - d) / s2 * (1.0 - e) / (1.0 - g * e);
  return std::exp(C + D * v0 + i * phi * lnS);
}

}  // namespace

CfPrice price_reference_both(const ModelParams& p, double K, double x0, double v0, double T) {
  check_fields(p);
  if (!(p.kappa * p.theta > 0.5 * p.sigma * p.sigma))
    throw std::invalid_argument("price_reference: Feller condition required");
  const double lnK = std::log(K), lnS = lnK + x0;
  CfPrice out;
  double P[2];
  for (int j = 1; j <= 2; ++j) {
    auto integrand = [&](double phi) {
      if (phi == 0.0) phi = 1e-12;
      const cplx v = std::exp(cplx(0.0, -phi * lnK)) * heston_cf(p, j, phi, lnS, v0, T) / cplx(0.0, phi);
      return v.real();
    };
    double err = 0.0;
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-12, &err);
    if (!std::isfinite(I) || err > 1e-6) throw OracleError("price_reference: quadrature did not converge");
    out.quad_error = std::max(out.quad_error, err);
    P[j - 1] = 0.5 + I / std::numbers::pi;
  }
  out.P1 = P[0];
  out.P2 = P[1];
  const double S0 = K * std::exp(x0), dq = std::exp(-p.q * T), dr = std::exp(-p.r * T);
  out.call = S0 * dq * P[0] - K * dr * P[1];
  out.put = K * dr * (1.0 - P[1]) - S0 * dq * (1.0 - P[0]);
  return out;
}

double price_reference(const ModelParams& p, Payoff payoff, double K, double x0, double v0, double T) {
  const CfPrice c = price_reference_both(p, K, x0, v0, T);
  return payoff == Payoff::call ? c.call : c.put;
}

double heat_window_halfwidth(double t, double delta) {
  return 2.0 * boost::math::erfc_inv(delta) * std::sqrt(t);
}

namespace {

std::vector<double> heat_weights(double t, double h, double delta, double& mass) {
  const long m = static_cast<long>(std::floor(heat_window_halfwidth(t, delta) / h));
  std::vector<double> w(2 * m + 1);
  const double c = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
  for (long k = -m; k <= m; ++k) {
    const double z = k * h;
    w[k + m] = h * c * std::exp(-z * z / (4.0 * t));
  }
  mass = pairwise_sum(w.data(), w.size());
  return w;
}

}  // namespace

double heat_kernel_mass(double t, double h, double delta) {
  if (!(t > 0) || !(h > 0)) throw std::invalid_argument("heat_kernel_mass: need t > 0 and h > 0");
  double mass = 0.0;
  heat_weights(t, h, delta, mass);
  return mass;
}

LineTable heat_convolve(const LineTable& u0, double t, double delta) {
  if (!(t > 0)) throw std::invalid_argument("heat_convolve: t must be > 0");
  const std::size_t n = u0.x.size();
  if (n < 3 || u0.u.size() != n) throw std::invalid_argument("heat_convolve: malformed table");
  const double h = (u0.x.back() - u0.x.front()) / double(n - 1);
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(u0.x[k] - u0.x[k - 1] - h) > 1e-9 * h) throw std::invalid_argument("heat_convolve: grid not uniform");
  for (double v : u0.u)
    if (!std::isfinite(v)) throw std::invalid_argument("heat_convolve: u0 must be bounded");

  double mass = 0.0;
  std::vector<double> w = heat_weights(t, h, delta, mass);
  if (mass < 1.0 - 1e-8) throw OracleError("heat_convolve: kernel window too small (mass " + std::to_string(mass) + ")");
  for (double& v : w) v /= mass;
  const std::size_t m = w.size() / 2;
  if (2 * m + 1 > n) throw OracleError("heat_convolve: grid shorter than the kernel window");

  LineTable out;
  std::vector<double> terms(w.size());
  for (std::size_t i = m; i + m < n; ++i) {
    for (std::size_t k = 0; k < w.size(); ++k) terms[k] = w[k] * u0.u[i + k - m];
    out.x.push_back(u0.x[i]);
    out.u.push_back(pairwise_sum(terms.data(), terms.size()));
  }
  return out;
}

double black_scholes_heat(Payoff payoff, double S0, double K, double r, double q, double v, double T) {
  const double th = 0.5 * v * T;
  const double y0 = std::log(S0) + (r - q - 0.5 * v) * T;
  const double W = heat_window_halfwidth(th);
  const long half = 4000;
  const double h = W / double(half / 2);
  LineTable g;
  for (long k = -half; k <= half; ++k) {
    const double y = y0 + k * h, S = std::exp(y);
    g.x.push_back(y);
    g.u.push_back(payoff == Payoff::call ? std::max(S - K, 0.0) : std::max(K - S, 0.0));
  }
  const LineTable c = heat_convolve(g, th);
  // y0 is the centre node of both tables.
  return std::exp(-r * T) * c.u[c.u.size() / 2];
}

double black_scholes(Payoff payoff, double S0, double K, double r, double q, double v, double T) {
  const double sd = std::sqrt(v * T);
  const double d1 = (std::log(S0 / K) + (r - q + 0.5 * v) * T) / sd, d2 = d1 - sd;
  auto N = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  if (payoff == Payoff::call) return S0 * std::exp(-q * T) * N(d1) - K * std::exp(-r * T) * N(d2);
  return K * std::exp(-r * T) * N(-d2) - S0 * std::exp(-q * T) * N(-d1);
}

}  // namespace heston
