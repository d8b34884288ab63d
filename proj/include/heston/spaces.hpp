#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "heston/grid.hpp"
#include "heston/params.hpp"

namespace heston {

struct Point {
  double x = 0.0;
  double xi = 0.0;
};

// Closed half-disc centred at (x0, 0).
struct Disc {
  double x0 = 0.0;
  double R = 1.0;
  bool contains(double x, double xi) const { return (x - x0) * (x - x0) + xi * xi <= R * R; }
};

// xi^(beta-1) exp(-gamma|x| - mu xi); throws std::domain_error for xi <= 0.
double weight_w(double x, double xi, const WeightParams& w);

// Weight at a grid node, using the limit value 0 on the row xi = 0.
double weight_node(double x, double xi, const WeightParams& w);

double cyclo_dist(Point a, Point b);

double norm_l2w(const Field& f, const WeightParams& w);
double norm_h1w(const Field& f, const WeightParams& w);
double norm_h2w_local(const Field& f, const WeightParams& w, const Disc& disc);
// (int_{disc} |f|^p xi^(beta-1))^(1/p)
double norm_lpw(const Field& f, const WeightParams& w, double p, const Disc& disc);

struct HolderEstimate {
  double value = 0.0;       // sampled maximum: a lower bound on the true quantity
  std::size_t pairs = 0;    // number of pairs evaluated
  bool exhaustive = false;  // true when every pair inside the disc was used
};

HolderEstimate holder_seminorm(const Field& f, double alpha, const Disc& disc, std::size_t budget);
// Sum of C^alpha norms (sup + seminorm) of f, f_x, f_xi, xi f_xx, xi f_xxi, xi f_xixi.
HolderEstimate holder_2alpha(const Field& f, double alpha, const Disc& disc, std::size_t budget);

struct DecayRecord {
  double x_star = 0.0;
  std::vector<double> xi;      // the smallest positive xi levels, increasing
  std::vector<double> values;  // xi (|f_xx| + |f_xxi| + |f_xixi|) at (x_star, xi)
  double exponent = 0.0;       // least-squares slope of log(values) against log(xi); NaN if all zero
};

DecayRecord boundary_limit_xiD2(const Field& f, double x_star, std::size_t levels = 10);

struct NormReport {
  double time = 0.0;
  double l2w = 0.0;
  double h1w = 0.0;
  double h2w_local = 0.0;
  double lpw = 0.0;
  double p = 6.0;
  double holder_alpha = 0.0;
  double alpha = 0.5;
  double holder_2alpha = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

NormReport norm_report(const Field& f, const WeightParams& w, const Disc& disc, double p = 6.0,
                       double alpha = 0.5, std::size_t budget = 20000);

}  // namespace heston
