#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heston/params.hpp"

namespace heston {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& msg)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class Scheme { implicit_euler, crank_nicolson };
enum class Payoff { call, put };
enum class FarField { outflow, asymptote };

struct GridSpec {
  double x_min = -6.0;
  double x_max = 6.0;
  int nx = 200;      // number of x cells
  int n_xi = 120;    // number of xi cells
  double xi_max = 0; // 0 selects 5*theta/sigma
  double grading = 2.0;
};

struct RunSpec {
  double T = 1.0;
  int steps = 400;
  Scheme scheme = Scheme::implicit_euler;
  Payoff payoff = Payoff::call;
  double K = 1.0;
  FarField far_field = FarField::outflow;
  std::vector<std::pair<double, double>> points{{0.0, 0.2}};  // (x, xi)
  std::uint64_t seed = 20240101;
  int paths = 100000;
  int mc_steps = 200;
  bool antithetic = true;
  int snapshots = 4;
};

struct RunConfig {
  ModelParams model;        // as written in the file
  ModelParams absorbed;     // after folding lambda_risk into kappa, theta
  double gamma = 2.5;
  std::optional<double> beta;
  std::optional<double> mu;
  GridSpec grid;
  RunSpec run;

  WeightParams weights() const;
  double xi_max() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical key = value rendering of a resolved configuration.
std::string render_config(const RunConfig& cfg);

}  // namespace heston
