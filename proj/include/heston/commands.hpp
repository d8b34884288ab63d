#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heston/config.hpp"
#include "heston/evolution.hpp"
#include "heston/operator.hpp"
#include "heston/spaces.hpp"
#include "heston/verdict.hpp"

namespace heston {

enum ExitCode : int { exit_ok = 0, exit_domain = 1, exit_usage = 2, exit_numeric = 3 };

inline constexpr const char* kVersion = "heston-degen 0.1.0";

struct CliOptions {
  std::string config;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string method = "pde";  // pde | mc | cf, comma separated, or all
  std::string suite;
  int levels = 3;
  bool timing = false;  // record wall-clock times (makes outputs run-dependent)
};

// ---- building blocks shared by the commands, the tests and the bindings ----

GridPtr make_grid(const RunConfig& cfg);
SolveConfig make_solve_config(const RunConfig& cfg);
std::shared_ptr<const DiscreteOperator> make_operator(const RunConfig& cfg, GridPtr grid);

// Comparison function of the maximum principle for the configured payoff:
// call -> (varpi, K0, K1, r0) = (0, 0, K, r); put -> (0, K, 0, 0).
struct ComparisonFunction {
  double varpi = 0, K0 = 0, K1 = 0, r0 = 0;
};
ComparisonFunction comparison_for(const RunConfig& cfg);

VerdictReport run_maxprinciple(const RunConfig& cfg, const EvolutionTrace& trace);
VerdictReport run_barrier_certification(const RunConfig& cfg);

struct SmoothingSetup {
  double T = 0.1;       // slopes are fitted over [T/100, T/10]
  double x_half = 0.6;  // x-range [-x_half, x_half]
  int nx = 600;
  int n_xi = 40;
  double box = 0.2;     // width of the indicator initial datum in x
  int samples = 8;      // log-spaced sample times
  int substeps = 20;    // steps per T/100
};
struct SmoothingResult {
  SmoothingTable table;
  Lambda0Estimate lambda0;
  VerdictReport report;
};
SmoothingResult run_smoothing(const RunConfig& cfg, const SmoothingSetup& setup = {});

struct BoundaryResult {
  double t = 0;
  std::vector<DecayRecord> records;
  VerdictReport report;
  std::string csv;  // x_star,xi,value
};
inline const std::vector<double> kBoundaryStations{-0.5, -0.25, 0.0, 0.25, 0.5};
BoundaryResult run_boundary(const RunConfig& cfg, const EvolutionTrace& trace, std::size_t check_levels = 6);

struct ConvergenceRow {
  std::string kind;  // time_ie | time_cn | space
  int level = 0, nx = 0, n_xi = 0, steps = 0;
  double price = 0, err_cf = 0, order_cf = 0, order_self = 0;
};
struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double cf = 0;
  // Last self-referenced orders of each study.
  double ie_order = 0, cn_order = 0, space_order = 0;
  std::string csv() const;
};
ConvergenceResult run_convergence(const RunConfig& cfg, int levels);

// ---- commands ----

int cmd_validate(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_price(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const CliOptions& opt, std::ostream& out, std::ostream& err);
int cmd_converge(const CliOptions& opt, std::ostream& out, std::ostream& err);

// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace heston
