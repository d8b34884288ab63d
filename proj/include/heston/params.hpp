#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace heston {

// Raised when primitive fields are non-finite or out of range.
class ParamError : public std::invalid_argument {
 public:
  ParamError(const std::string& what, std::vector<std::string> violations)
      : std::invalid_argument(what), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ModelParams {
  double sigma = 0.2;
  double kappa = 2.0;
  double theta = 0.04;
  double rho = -0.5;
  double r = 0.0;
  double q = 0.0;
  double lambda_risk = 0.0;

  double q_r() const { return q - r; }
  double theta_sigma() const { return theta / sigma; }
};

struct WeightParams {
  double beta = 2.0;
  double gamma = 2.5;
  double mu = 8.75;
  double mu_max = 8.75;
};

struct Gate {
  bool ok = false;
  double margin = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool hi_open = false;
  bool empty() const { return hi < lo || (hi_open && hi == lo); }
};

struct ValidityReport {
  Gate feller;       // kappa*theta - sigma^2/2
  Gate coercivity;   // kappa - sigma*(gamma|rho| + sqrt(gamma(1+gamma)))
  Gate beta_window;  // min of the three distances to the beta bounds
  Gate gamma_call;   // gamma - 2
  double beta_feller_bound = 0.0;  // 2 kappa theta / sigma^2
  double beta_strict_bound = 0.0;  // (1 + sqrt 17)/2
  Interval varpi_window;

  bool admissible() const { return feller.ok && coercivity.ok && beta_window.ok; }
};

// (1 + sqrt(17)) / 2, the strict upper bound on beta from beta(beta-1) < 4.
double beta_strict_bound();

// Slack below the strict bound used by the default weight rule.
inline constexpr double kBetaSlack = 1e-3;

// Throws ParamError listing every violated field-level invariant.
void check_fields(const ModelParams& p);
void check_fields(const WeightParams& w);

ValidityReport validate(const ModelParams& p, const WeightParams& w);

ModelParams absorb_risk_premium(const ModelParams& p);

WeightParams default_weights(const ModelParams& p, double gamma);

std::string describe(const ValidityReport& rep);

}  // namespace heston
