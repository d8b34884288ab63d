#include "heston/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace heston {

namespace {

void need(std::vector<std::string>& out, bool cond, const char* msg) {
  if (!cond) out.emplace_back(msg);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double beta_strict_bound() { return 0.5 * (1.0 + std::sqrt(17.0)); }

void check_fields(const ModelParams& p) {
  std::vector<std::string> bad;
  for (double v : {p.sigma, p.kappa, p.theta, p.rho, p.r, p.q, p.lambda_risk})
    if (!std::isfinite(v)) {
      bad.emplace_back("non-finite model field");
      break;
    }
  need(bad, p.sigma > 0, "sigma must be > 0");
  need(bad, p.kappa > 0, "kappa must be > 0");
  need(bad, p.theta > 0, "theta must be > 0");
  need(bad, p.rho > -1 && p.rho < 1, "rho must lie in (-1, 1)");
  need(bad, p.lambda_risk >= 0, "lambda_risk must be >= 0");
  if (!bad.empty()) throw ParamError("invalid model parameters", bad);
}

void check_fields(const WeightParams& w) {
  std::vector<std::string> bad;
  for (double v : {w.beta, w.gamma, w.mu})
    if (!std::isfinite(v)) {
      bad.emplace_back("non-finite weight field");
      break;
    }
  need(bad, w.beta > 1, "beta must be > 1");
  need(bad, w.gamma > 0, "gamma must be > 0");
  need(bad, w.mu > 0, "mu must be > 0");
  if (!bad.empty()) throw ParamError("invalid weight parameters", bad);
}

ValidityReport validate(const ModelParams& p, const WeightParams& w) {
  check_fields(p);
  check_fields(w);
  ValidityReport rep;

  // Feller and coercivity are strict inequalities; a zero margin fails.
  rep.feller.margin = p.kappa * p.theta - 0.5 * p.sigma * p.sigma;
  rep.feller.ok = rep.feller.margin > 0;

  const double ar = std::abs(p.rho);
  rep.coercivity.margin =
      p.kappa - p.sigma * (w.gamma * ar + std::sqrt(w.gamma * (1.0 + w.gamma)));
  rep.coercivity.ok = rep.coercivity.margin > 0;

  rep.beta_feller_bound = 2.0 * p.kappa * p.theta / (p.sigma * p.sigma);
  rep.beta_strict_bound = beta_strict_bound();
  // The strict bounds are shifted by one ulp so that "margin >= 0" is the
  // exact floating-point form of the strict inequality.
  const double m_feller = rep.beta_feller_bound - w.beta;
  const double m_strict =
      std::nextafter(rep.beta_strict_bound, -std::numeric_limits<double>::infinity()) - w.beta;
  const double m_lower = w.beta - std::nextafter(1.0, 2.0);
  rep.beta_window.margin = std::min({m_feller, m_strict, m_lower});
  rep.beta_window.ok = rep.beta_window.margin >= 0;

  rep.gamma_call.margin = w.gamma - 2.0;
  rep.gamma_call.ok = rep.gamma_call.margin > 0;

  // Admissible comparison-function exponents with mu0 = mu and r0 = r.
  rep.varpi_window.lo = 0.0;
  double hi = w.mu;
  rep.varpi_window.hi_open = true;
  const double c1 = (p.r + p.q_r()) / (p.kappa * p.theta_sigma());
  const double c2 = 2.0 * (p.kappa - p.sigma * p.rho) / p.sigma;
  if (std::min(c1, c2) < hi) {
    hi = std::min(c1, c2);
    rep.varpi_window.hi_open = false;
  }
  rep.varpi_window.hi = hi;
  return rep;
}

ModelParams absorb_risk_premium(const ModelParams& p) {
  check_fields(p);
  ModelParams out = p;
  if (p.lambda_risk == 0.0) return out;
  out.kappa = p.kappa + p.lambda_risk;
  out.theta = p.kappa * p.theta / out.kappa;
  out.lambda_risk = 0.0;
  return out;
}

WeightParams default_weights(const ModelParams& p, double gamma) {
  check_fields(p);
  if (!(gamma > 0)) throw ParamError("invalid gamma", {"gamma must be > 0"});
  WeightParams w;
  w.gamma = gamma;
  w.mu_max = p.kappa / p.sigma - gamma * std::abs(p.rho);
  if (!(w.mu_max > 0))
    throw ParamError("mu_max <= 0: coercivity impossible at this gamma",
                     {"mu_max = " + fmt(w.mu_max)});
  w.mu = w.mu_max;
  w.beta = std::min(2.0 * p.kappa * p.theta / (p.sigma * p.sigma),
                    beta_strict_bound() - kBetaSlack);
  return w;
}

std::string describe(const ValidityReport& rep) {
  std::ostringstream os;
  auto line = [&](const char* name, const Gate& g) {
    os << name << " ok=" << (g.ok ? 1 : 0) << " margin=" << fmt(g.margin) << '\n';
  };
  line("feller", rep.feller);
  line("coercivity", rep.coercivity);
  line("beta_window", rep.beta_window);
  line("gamma_call", rep.gamma_call);
  os << "beta_feller_bound " << fmt(rep.beta_feller_bound) << '\n';
  os << "beta_strict_bound " << fmt(rep.beta_strict_bound) << '\n';
  os << "varpi_window [" << fmt(rep.varpi_window.lo) << ", " << fmt(rep.varpi_window.hi)
     << (rep.varpi_window.hi_open ? ")" : "]") << '\n';
  os << "admissible " << (rep.admissible() ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace heston
