#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "heston/traces.hpp"

using namespace heston;

TEST(HalfDisc, MomentMatchesQuadrature) {
  for (double beta : {1.2, 1.5, 2.0, 2.5})
    for (double r : {0.5, 1.0}) {
      double s = 0;
      for (const auto& q : half_disc_nodes(r)) s += q.w * std::pow(q.xi, beta - 1);
      EXPECT_NEAR(s / half_disc_moment(beta, r), 1.0, 1e-8) << "beta=" << beta << " r=" << r;
    }
  // beta = 1: half the disc area.
  EXPECT_NEAR(half_disc_moment(1.0, 2.0), 2 * std::numbers::pi, 1e-13);
}

TEST(TestFunctions, JetsAreConsistent) {
  for (Family fam : {Family::poly_bump, Family::random_trig, Family::xi_power})
    for (const auto& f : make_family(fam, 5, 4, 1.0)) EXPECT_LT(jet_consistency(f, 1.0, 0.0, 50, 9), 1e-6) << f.params;
}

TEST(TestFunctions, FamiliesAreReproducible) {
  const auto a = make_family(Family::poly_bump, 42, 3, 1.0), b = make_family(Family::poly_bump, 42, 3, 1.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].params, b[k].params);
    EXPECT_EQ(a[k].eval(0.1, 0.2).f, b[k].eval(0.1, 0.2).f);
  }
  // Compact support inside the unit half-disc.
  EXPECT_EQ(a[0].eval(0.9, 0.9).f, 0.0);
}

TEST(Norms, ScaledFunctionScalesNorms) {
  const TestFunction f = poly_bump(3, 0, 1.0);
  const TestFunction g = scaled(f, -2.5);
  EXPECT_NEAR(lp_norm_half_disc(g, 1.5, 6, 1.0), 2.5 * lp_norm_half_disc(f, 1.5, 6, 1.0), 1e-12);
  EXPECT_NEAR(w12_norm_half_disc(g, 1.5, 1.0), 2.5 * w12_norm_half_disc(f, 1.5, 1.0), 1e-12);
  EXPECT_NEAR(h2_norm_half_disc(g, 1.5, 1.0), 2.5 * h2_norm_half_disc(f, 1.5, 1.0), 1e-12);
  const TestFunction c = constant_function(2.0);
  EXPECT_NEAR(lp_norm_half_disc(c, 2.0, 2.0, 1.0), 2.0 * std::sqrt(half_disc_moment(2.0, 1.0)), 1e-10);
}

TEST(Sandwich, HoldsOnEachFamily) {
  for (double beta : {1.2, 2.0, 2.5})
    for (Family fam : {Family::poly_bump, Family::random_trig, Family::xi_power})
      for (const auto& f : make_family(fam, 17, 3, 1.0)) EXPECT_TRUE(check_sandwich(f, beta, 1.0).passed()) << f.params;
}

TEST(Sandwich, SidesOrderedAtAPoint) {
  Jet j;
  j.f = 1;
  j.fx = 0.5;
  j.fxi = -0.3;
  const SandwichSides s = sandwich_sides(j, 0.2, 1.5);
  EXPECT_LE(s.lower, s.middle);
  EXPECT_LE(s.middle, s.upper);
}

TEST(TraceLimit, ExtrapolatesForSmoothFunctions) {
  for (double beta : {1.2, 2.0}) {
    const TestFunction f = poly_bump(8, 1, 1.0);
    const TraceLimit t = trace_limit(f, beta, 1.0);
    EXPECT_TRUE(t.converged);
    EXPECT_LE(std::abs(t.limit), 1e-6 * std::max(1.0, t.scale));
    EXPECT_TRUE(check_trace_limit(f, beta, 1.0).passed());
  }
}

TEST(TraceLimit, RefusesFunctionsOutsideTheFlatClass) {
  const double beta = 1.5;
  EXPECT_THROW(require_flat_class(xi_power(1.0, 0, 1 - beta / 2), beta, 1.0), PreconditionError);
  EXPECT_THROW(check_trace_limit(xi_power(1.0, 0, 1 - beta / 2), beta, 1.0), PreconditionError);
  EXPECT_NO_THROW(require_flat_class(xi_power(1.0, 0, 1.5), beta, 1.0));
}

TEST(Imbedding, ConditionOnBeta) {
  EXPECT_TRUE(cond_beta(1.5, 6));
  EXPECT_FALSE(cond_beta(2.0, 6));  // beta - 1 = 1 = 4/(p-2)
  EXPECT_FALSE(cond_beta(2.4, 5));
  EXPECT_FALSE(cond_beta(1.0, 6));
  EXPECT_TRUE(cond_beta(1.9, 6));
}

TEST(Imbedding, PreconditionsRefuseOutsidePairs) {
  const auto fam = make_family(Family::poly_bump, 1, 4, 1.0);
  EXPECT_THROW(check_hardy_sobolev(fam, 2.0, 6, 1.0), PreconditionError);
  ImbeddingOptions opt;
  opt.solver_pipeline = true;
  EXPECT_THROW(check_h2_to_lp(fam, 1.5, 3.5, 1.0, opt), PreconditionError);
  opt = {};
  opt.allow_outside_condition = true;
  const ImbeddingResult r = check_hardy_sobolev(fam, 2.0, 6, 1.0, opt);
  EXPECT_FALSE(r.inside_condition);
  EXPECT_NE(r.report.checks[0].note.find("outside-condition"), std::string::npos);
}

TEST(Imbedding, BatchAgreesWithSingleRatios) {
  const auto fam = make_family(Family::poly_bump, 7, 6, 1.0);
  ImbeddingOptions opt;
  opt.allow_outside_condition = true;
  const auto both = check_imbeddings(fam, {{1.5, 6.0}, {2.4, 5.0}}, 1.0, opt);
  double hs = 0, h2 = 0;
  for (const auto& f : fam) {
    hs = std::max(hs, hs_ratio(f, 1.5, 6, 1.0));
    h2 = std::max(h2, h2_lp_ratio(f, 2.4, 5, 1.0));
  }
  EXPECT_NEAR(both[0].first.constant, hs, 1e-7 * hs);
  EXPECT_NEAR(both[1].second.constant, h2, 1e-7 * h2);
  EXPECT_EQ(check_hardy_sobolev(fam, 1.5, 6, 1.0).constant, both[0].first.constant);
}

// Empirical Hardy-Sobolev constant at (beta, p) = (1.5, 6), R = 1, over the
// 400-member polynomial-bump family used by the suite.
TEST(Imbedding, PinnedHardySobolevConstant) {
  const auto fam = make_family(Family::poly_bump, 20240103, 400, 1.0);
  const ImbeddingResult r = check_hardy_sobolev(fam, 1.5, 6, 1.0);
  EXPECT_NEAR(r.constant, 0.500847934, 1e-6);
  EXPECT_LE(r.relative_change, 0.05);
  EXPECT_TRUE(r.report.passed());
}

TEST(Suite, SmallRunPassesAndWritesCsv) {
  TracesSuiteConfig cfg;
  cfg.per_family = 4;
  cfg.trace_functions = 2;
  cfg.hs_family = 10;
  const TracesSuiteResult r = run_traces_suite(cfg);
  EXPECT_TRUE(r.report.passed()) << r.report.csv();
  const std::string csv = traces_csv(r.rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "check,family,params,status,constant,margin");
  EXPECT_NE(csv.find("flat_class_refusal"), std::string::npos);
}
