#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "heston/config.hpp"
#include "heston/params.hpp"
#include "support.hpp"

using namespace heston;

namespace {

// Feller bound far above the strict bound, so beta_window is decided by the latter.
ModelParams roomy() {
  ModelParams p;
  p.sigma = 0.2;
  p.kappa = 3.0;
  p.theta = 0.09;
  p.rho = -0.3;
  return p;
}

}  // namespace

TEST(BetaBound, ExactValue) {
  EXPECT_EQ(beta_strict_bound(), (1.0 + std::sqrt(17.0)) / 2.0);
  EXPECT_NEAR(beta_strict_bound(), 2.5615528128088303, 1e-15);
  const double b = beta_strict_bound();
  EXPECT_LT(std::abs(b * (b - 1) - 4.0), 1e-14);
}

TEST(BetaBound, GateFlipsWithinOneUlp) {
  const ModelParams p = roomy();
  WeightParams w = default_weights(p, 2.5);
  double lo = 2.0, hi = 3.0;
  for (int k = 0; k < 200 && std::nextafter(lo, hi) < hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    w.beta = mid;
    (validate(p, w).beta_window.ok ? lo : hi) = mid;
  }
  EXPECT_EQ(std::nextafter(lo, 3.0), hi);
  EXPECT_EQ(hi, beta_strict_bound());
  w.beta = beta_strict_bound();
  EXPECT_FALSE(validate(p, w).beta_window.ok);
  w.beta = std::nextafter(beta_strict_bound(), 0.0);
  EXPECT_TRUE(validate(p, w).beta_window.ok);
}

TEST(BetaBound, LowerEndIsStrict) {
  const ModelParams p = roomy();
  WeightParams w = default_weights(p, 2.5);
  w.beta = 1.0;
  EXPECT_THROW(validate(p, w), ParamError);
  w.beta = std::nextafter(1.0, 2.0);
  EXPECT_TRUE(validate(p, w).beta_window.ok);
}

TEST(Gates, FellerAndCoercivity) {
  ModelParams p = roomy();
  const WeightParams w = default_weights(p, 2.5);
  const ValidityReport ok = validate(p, w);
  EXPECT_TRUE(ok.admissible());
  EXPECT_NEAR(ok.feller.margin, 3.0 * 0.09 - 0.02, 1e-15);
  EXPECT_NEAR(ok.beta_feller_bound, 13.5, 1e-12);

  p.kappa = 0.1;  // 2 kappa theta = 0.018 < sigma^2 = 0.04
  WeightParams w2 = w;
  w2.beta = 1.2;
  const ValidityReport bad = validate(p, w2);
  EXPECT_FALSE(bad.feller.ok);
  EXPECT_FALSE(bad.coercivity.ok);
  EXPECT_FALSE(bad.admissible());
}

TEST(Gates, DefaultWeightsStayInsideWindow) {
  for (const auto& s : heston::testing::kPinned) {
    const ModelParams p = heston::testing::model_of(s);
    const WeightParams w = default_weights(p, 2.5);
    EXPECT_GT(w.beta, 1.0) << s.name;
    EXPECT_LT(w.beta, beta_strict_bound()) << s.name;
    EXPECT_LE(w.beta, 2 * p.kappa * p.theta / (p.sigma * p.sigma)) << s.name;
    EXPECT_NEAR(w.mu_max, p.kappa / p.sigma - 2.5 * std::abs(p.rho), 1e-14) << s.name;
    EXPECT_TRUE(validate(p, w).admissible()) << s.name;
  }
}

TEST(Gates, VarpiWindowUsesSmallerCap) {
  const ModelParams p = roomy();
  const ValidityReport rep = validate(p, default_weights(p, 2.5));
  const double c2 = 2 * (p.kappa - p.sigma * p.rho) / p.sigma;
  EXPECT_EQ(rep.varpi_window.lo, 0.0);
  EXPECT_LE(rep.varpi_window.hi, c2);
  EXPECT_FALSE(rep.varpi_window.empty());
}

TEST(Fields, RejectsNonFiniteAndOutOfRange) {
  ModelParams p = roomy();
  p.sigma = std::numeric_limits<double>::quiet_NaN();
  p.rho = 1.5;
  try {
    check_fields(p);
    FAIL() << "expected ParamError";
  } catch (const ParamError& e) {
    EXPECT_GE(e.violations().size(), 2u);
  }
  EXPECT_THROW(default_weights(roomy(), -1.0), ParamError);
}

TEST(RiskPremium, FoldsIntoKappaTheta) {
  ModelParams p = roomy();
  p.lambda_risk = 0.5;
  const ModelParams a = absorb_risk_premium(p);
  EXPECT_DOUBLE_EQ(a.kappa, 3.5);
  EXPECT_DOUBLE_EQ(a.kappa * a.theta, p.kappa * p.theta);
  EXPECT_EQ(a.lambda_risk, 0.0);
  EXPECT_EQ(a.r, p.r);
}

TEST(Describe, ListsEveryGate) {
  const ModelParams p = roomy();
  const std::string s = describe(validate(p, default_weights(p, 2.5)));
  for (const char* key : {"feller", "coercivity", "beta_window", "gamma_call", "beta_strict_bound", "admissible 1"})
    EXPECT_NE(s.find(key), std::string::npos) << key;
}

TEST(Config, ParsesAndRendersRoundTrip) {
  const RunConfig c = heston::testing::pinned_config("set3");
  EXPECT_DOUBLE_EQ(c.model.sigma, 0.4);
  EXPECT_EQ(c.grid.nx, 200);
  EXPECT_DOUBLE_EQ(c.xi_max(), 5 * 0.09 / 0.4);
  const RunConfig again = parse_config(render_config(c));
  EXPECT_EQ(render_config(again), render_config(c));
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config("[model]\nsigma = 0.3\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config("sigma = 0.3\n"), ConfigError);
  EXPECT_THROW(parse_config("[model]\nsigma = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("[model]\nsigma = 0.3\nsigma = 0.4\n"), ConfigError);
  EXPECT_THROW(parse_config("[nope]\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\npoints = 1\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST(Config, PointsListAndComments) {
  const RunConfig c = parse_config("[run]\npoints = 0 0.1; 0.5 0.2 # two points\n");
  ASSERT_EQ(c.run.points.size(), 2u);
  EXPECT_DOUBLE_EQ(c.run.points[1].first, 0.5);
  EXPECT_DOUBLE_EQ(c.run.points[1].second, 0.2);
}
