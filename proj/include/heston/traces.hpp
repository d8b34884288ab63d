#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heston/verdict.hpp"

namespace heston {

// Raised when an input lies outside the hypotheses of an inequality; never
// reported as an inequality failure.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Jet {
  double f = 0, fx = 0, fxi = 0, fxx = 0, fxxi = 0, fxixi = 0;
};

enum class Family { poly_bump, xi_power, random_trig };
const char* to_string(Family f);

struct TestFunction {
  Family family = Family::poly_bump;
  std::string params;  // short description for reports
  std::function<Jet(double x, double xi)> eval;
};

// P(X, Xi) chi with X = (x - x0)/R, Xi = xi/R, deg P <= 4, coefficients
// uniform in [-1, 1]; chi = exp(1 - 1/(1 - s)) for s = ((x-x0)^2 + xi^2)/R^2 < 1.
TestFunction poly_bump(std::uint64_t seed, std::uint64_t index, double R, double x0 = 0.0);
// c (x - x0)^m xi^a.
TestFunction xi_power(double c, int m, double a, double x0 = 0.0);
// chi times three random plane waves.
TestFunction random_trig(std::uint64_t seed, std::uint64_t index, double R, double x0 = 0.0);
TestFunction constant_function(double c);
TestFunction scaled(const TestFunction& f, double c);

// `count` members of one family, reproducible from (seed, index).
std::vector<TestFunction> make_family(Family fam, std::uint64_t seed, std::size_t count, double R, double x0 = 0.0);

// Max relative mismatch between the closed-form derivatives and fourth-order
// differences of the lower-order ones at `points` random points of B+_R.
double jet_consistency(const TestFunction& f, double R, double x0, std::size_t points, std::uint64_t seed);

// Integral of xi^{beta-1} over the half-disc of radius r.
double half_disc_moment(double beta, double r);

// Quadrature nodes (x, xi, weight) on B+_R(x0, 0), polar, graded toward the
// centre and toward both ends of the diameter.
struct QuadNode {
  double x, xi, w;
};
std::vector<QuadNode> half_disc_nodes(double R, double x0 = 0.0, int order = 8, int levels = 15);

double lp_norm_half_disc(const TestFunction& f, double beta, double p, double R, double x0 = 0.0);
double w12_norm_half_disc(const TestFunction& f, double beta, double R, double x0 = 0.0);
double h2_norm_half_disc(const TestFunction& f, double beta, double R, double x0 = 0.0);

// Flat norm over Q+_r with the xi-integral cut at eps * r.
double flat_norm_cut(const TestFunction& f, double beta, double r, double x0, double eps);
// Throws PreconditionError when the flat norm keeps growing as the cutoff
// shrinks from 1e-4 r to 1e-8 r.
void require_flat_class(const TestFunction& f, double beta, double R, double x0 = 0.0);

// Three sides of the pointwise xi-derivative sandwich at one point.
struct SandwichSides {
  double lower, middle, upper;
};
SandwichSides sandwich_sides(const Jet& j, double xi, double beta);

VerdictReport check_sandwich(const TestFunction& f, double beta, double R, double x0 = 0.0, int n = 40);

struct TraceLimit {
  double limit = 0;  // Richardson value
  double scale = 0;  // largest xi^beta int |grad f|^2 dx over the levels
  bool converged = true;
  std::vector<double> xi, values;
};
TraceLimit trace_limit(const TestFunction& f, double beta, double R, double x0 = 0.0);

VerdictReport check_trace_limit(const TestFunction& f, double beta, double R, double x0 = 0.0);

// 0 < beta - 1 < 4/(p - 2)
bool cond_beta(double beta, double p);

struct ImbeddingOptions {
  // Measure pairs outside cond_beta instead of refusing them; results are
  // labelled as outside the hypothesis.
  bool allow_outside_condition = false;
  // Additionally require p > max(4, 2 + beta) (the solver's use).
  bool solver_pipeline = false;
};

double hs_ratio(const TestFunction& f, double beta, double p, double R, double x0 = 0.0);
double h2_lp_ratio(const TestFunction& f, double beta, double p, double R, double x0 = 0.0);

struct ImbeddingResult {
  VerdictReport report;
  double constant = 0;       // max ratio over the whole family
  double constant_half = 0;  // max ratio over the first half
  double relative_change = 0;
  bool inside_condition = true;
};

ImbeddingResult check_hardy_sobolev(const std::vector<TestFunction>& family, double beta, double p, double R,
                                    const ImbeddingOptions& opt = {});
ImbeddingResult check_h2_to_lp(const std::vector<TestFunction>& family, double beta, double p, double R,
                               const ImbeddingOptions& opt = {});

// Both inequalities for every (beta, p) pair; each function is evaluated once.
std::vector<std::pair<ImbeddingResult, ImbeddingResult>> check_imbeddings(
    const std::vector<TestFunction>& family, const std::vector<std::pair<double, double>>& pairs, double R,
    const ImbeddingOptions& opt = {});

// One traces_report.csv row.
struct TraceRow {
  std::string check, family, params;
  Status status = Status::pass;
  double constant = 0, margin = 0;
};

struct TracesSuiteConfig {
  std::uint64_t seed = 20240101;
  double R = 1.0;
  std::vector<double> sandwich_betas{1.2, 2.0, 2.5};
  std::size_t per_family = 50;  // sandwich functions per family and beta
  std::vector<std::pair<double, double>> hs_pairs{{1.5, 6.0}, {2.0, 6.0}, {2.4, 5.0}};
  std::size_t hs_family = 200;
  std::size_t trace_functions = 10;
};

struct TracesSuiteResult {
  std::vector<TraceRow> rows;
  VerdictReport report;
};

TracesSuiteResult run_traces_suite(const TracesSuiteConfig& cfg);
std::string traces_csv(const std::vector<TraceRow>& rows);

}  // namespace heston
