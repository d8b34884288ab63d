#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heston/config.hpp"
#include "heston/grid.hpp"
#include "heston/operator.hpp"
#include "heston/params.hpp"

namespace heston {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SpaceTimeFn = std::function<double(double x, double xi, double t)>;

struct SolveConfig {
  double T_final = 1.0;
  int steps = 400;
  Scheme scheme = Scheme::implicit_euler;
  Payoff payoff = Payoff::call;
  double K = 1.0;
  FarField far_field = FarField::outflow;
  int cadence = 0;  // keep a snapshot every `cadence` steps; 0 keeps only the ends
  // Crank-Nicolson only: replace the first two steps by four implicit-Euler
  // half steps to damp the payoff kink.
  bool rannacher = true;

  std::optional<Field> custom_payoff;  // used when set, overriding `payoff`
  SpaceTimeFn dirichlet;               // optional override of all far-field data
  SpaceTimeFn forcing;                 // optional source term f in u_t + A u = f

  double dt() const { return T_final / steps; }
};

struct EdgeValues {
  std::vector<double> left;   // x = x_min, per xi node
  std::vector<double> right;  // x = x_max, per xi node
  std::vector<double> top;    // xi = xi_max, per x node
};

Field initial_field(Payoff payoff, double K, GridPtr grid);
Field initial_field(const SolveConfig& cfg, GridPtr grid);

EdgeValues far_field_values(double t, const Grid2D& grid, const SolveConfig& cfg, const ModelParams& p);

// Explicit characteristic update of the boundary row:
//   u(x, 0, t+dt) = I[u(., 0, t)](x - q_r dt) + kappa theta_sigma dt I[u_xi](x - q_r dt)
// with quadratic Lagrange interpolation I centred on the node nearest to the
// foot. Its leading error matches the central x-differences of the interior
// rows, so the boundary row and its neighbours stay mutually consistent.
// Feet outside the x-range are clamped and counted in `clamped`.
struct TransportResult {
  std::vector<double> row;
  std::size_t clamped = 0;
};
TransportResult boundary_transport_step(const std::vector<double>& x, const std::vector<double>& row,
                                        const std::vector<double>& u_xi, double dt, const ModelParams& p);

// Three-point Lagrange interpolation about the nearest node (clamped to the range).
double interp_quadratic(const std::vector<double>& x, const std::vector<double>& v, double at);

// One time level of the theta-scheme with a cached factorisation. The j = 0
// row is semi-Lagrangian in x with the kappa theta_sigma u_xi coupling
// taken at the same theta-weighting as the interior.
class Stepper {
 public:
  Stepper(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg, double dt, double theta);
  Field step(const Field& u) const;
  double dt() const { return dt_; }
  std::size_t clamped_feet() const { return clamped_; }

 private:
  std::vector<std::pair<std::size_t, double>> top_row(std::size_t i) const;

  std::shared_ptr<const DiscreteOperator> op_;
  const SolveConfig* cfg_;
  double dt_, theta_;
  SpMat lhs_, rhs_op_;  // rhs_op_ = I - (1-theta) dt L on interior rows
  Eigen::SparseLU<SpMat> lu_;
  std::vector<double> xi_weights_;  // u_xi stencil at xi = 0
  bool xi_first_order_ = false;
  mutable std::size_t clamped_ = 0;
};

struct SmoothingRow {
  double t = 0;
  double norm_f01 = 0;
  double norm_f02 = 0;
  double roundtrip = 0;  // max |resolvent(f01) - u(t)|
};

struct SmoothingTable {
  double lambda = 0;
  std::vector<SmoothingRow> rows;
  double slope_f01 = 0;
  double slope_f02 = 0;
};

struct EvolutionTrace {
  std::vector<Field> snapshots;  // increasing time
  std::vector<double> step_times;
  std::vector<double> step_norms;                   // ||u(t_n)||_H per step
  std::vector<std::vector<double>> boundary_rows;   // u(x, 0, t_n) per step
  SmoothingTable smoothing;
  std::size_t clamped_feet = 0;

  const Field& final() const { return snapshots.back(); }
};

EvolutionTrace solve(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg);
EvolutionTrace solve(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg, const Field& u0);

// Evolves u0 with the time step of cfg and records ||(lambda I + A_h)^k u(t)||_H,
// k = 1, 2, at each requested time. Times must be positive and increasing.
SmoothingTable smoothing_diagnostics(std::shared_ptr<const DiscreteOperator> op, const Field& u0,
                                     const std::vector<double>& t_list, double lambda, const SolveConfig& cfg);

double loglog_slope(const std::vector<double>& t, const std::vector<double>& v);

// CSV writers for the trace.
std::string surface_csv(const Field& f);
std::string boundary_csv(const EvolutionTrace& tr, const Grid2D& g);
std::string smoothing_csv(const SmoothingTable& s);

}  // namespace heston
