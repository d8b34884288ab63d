#include "heston/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "heston/rng.hpp"

namespace heston {

namespace {

std::string where(double x, double xi, double t) {
  std::ostringstream os;
  os << "x=" << fmt_num(x) << " xi=" << fmt_num(xi) << " t=" << fmt_num(t);
  return os.str();
}

}  // namespace

double majorizer_h0(double x, double xi, const BarrierParams& bp) {
  if (!(xi > 0)) throw std::domain_error("majorizer_h0: xi must be > 0");
  return std::pow(xi, -(bp.beta0 - 1.0)) * std::exp(bp.gamma0 * std::sqrt(1.0 + x * x) + bp.mu0 * xi);
}

double barrier_log_h(double x, double xi, double t, const BarrierParams& bp) {
  if (!(xi > 0)) throw std::domain_error("barrier_h: xi must be > 0");
  if (!(t < 1.0 / bp.omega)) throw std::domain_error("barrier_h: t must be < 1/omega");
  const double s = 1.0 - bp.omega * t;
  return (bp.gamma1 * std::sqrt(1.0 + x * x) + bp.mu1 * xi - (bp.beta1 - 1.0) * std::log(xi)) / s + bp.nu * t;
}

double barrier_h(double x, double xi, double t, const BarrierParams& bp) {
  return std::exp(barrier_log_h(x, xi, t, bp));
}

JCoeffs J_coefficients(double x, double xi, double t, const BarrierParams& bp, const ModelParams& p) {
  const double s = 1.0 - bp.omega * t;
  const double r2 = 1.0 + x * x, rt = std::sqrt(r2), X = x / rt;
  const double sg = p.sigma, g1 = bp.gamma1, m1 = bp.mu1, b1 = bp.beta1 - 1.0, w = bp.omega;
  JCoeffs J;
  J.J1 = sg / (2 * s) *
             (g1 * g1 / s * (1 - 1 / r2) + g1 / (r2 * rt) + 2 * p.rho * g1 * m1 / s * X + m1 * m1 / s - g1 * X) -
         p.kappa * m1 / s - w / (s * s) * (m1 - b1 * std::log(xi) / xi);
  J.J0 = -sg * p.rho * g1 * b1 / (s * s) * X - sg * m1 * b1 / (s * s) - p.q_r() * g1 / s * X +
         p.kappa * (p.theta_sigma() * m1 + b1) / s - w * g1 * rt / (s * s) - bp.nu;
  J.Jm1 = b1 / s * (sg * b1 / (2 * s) + sg / 2 - p.kappa * p.theta_sigma());
  return J;
}

double J_finite_difference(double x, double xi, double t, const BarrierParams& bp, const ModelParams& p) {
  const double E0 = barrier_log_h(x, xi, t, bp);
  auto H = [&](double a, double b, double c) { return std::exp(barrier_log_h(a, b, c, bp) - E0); };
  const double dx = 1e-3, dy = 1e-3 * xi, dt = 1e-3 * std::min(t, 1.0 / bp.omega - t);
  const double c1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  const double c2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  double hx = 0, hxx = 0, hy = 0, hyy = 0, ht = 0, hxy = 0;
  for (int k = 0; k < 5; ++k) {
    const double o = k - 2.0;
    const double fx = H(x + o * dx, xi, t), fy = H(x, xi + o * dy, t);
    hx += c1[k] * fx / dx;
    hxx += c2[k] * fx / (dx * dx);
    hy += c1[k] * fy / dy;
    hyy += c2[k] * fy / (dy * dy);
    ht += c1[k] * H(x, xi, t + o * dt) / dt;
    for (int l = 0; l < 5; ++l)
      if (c1[k] != 0 && c1[l] != 0) hxy += c1[k] * c1[l] * H(x + o * dx, xi + (l - 2.0) * dy, t) / (dx * dy);
  }
  const Coeffs c = heston_coeffs(p, xi);
  const double Ah = c.a * hxx + c.m * hxy + c.c * hyy + c.bx * hx + c.bxi * hy;
  return -(ht + Ah);  // h(P0)/h(P0) = 1
}

BarrierChoice choose_barrier_constants(const ModelParams& p, const WeightParams& w, const BarrierSeed& seed) {
  check_fields(p);
  const double D = 2 * p.kappa * p.theta / (p.sigma * p.sigma);
  if (!(D > 1)) throw std::invalid_argument("choose_barrier_constants: Feller condition violated");
  if (!(seed.beta0 >= 1 && seed.beta0 < D))
    throw std::invalid_argument("choose_barrier_constants: need 1 <= beta0 < 2 kappa theta / sigma^2");
  if (!(seed.T > 0)) throw std::invalid_argument("choose_barrier_constants: T must be > 0");

  BarrierChoice ch;
  BarrierParams& bp = ch.bp;
  bp.beta0 = seed.beta0;
  bp.mu0 = seed.mu0.value_or(w.mu);
  bp.gamma0 = seed.gamma0.value_or(w.gamma);
  if (!(bp.beta0 - 1 < bp.mu0)) throw std::invalid_argument("choose_barrier_constants: need beta0 - 1 < mu0");
  bp.gamma1 = seed.gamma1.value_or(bp.gamma0 + 1.0);
  bp.nu = seed.nu;

  ch.tau0 = (D - bp.beta0) / (D - 1);
  bp.tau = 0.5 * ch.tau0;
  ch.beta1_lo = bp.beta0;
  ch.beta1_hi = 1 + (1 - bp.tau) * (D - 1);
  if (!(ch.beta1_hi > ch.beta1_lo)) throw std::invalid_argument("choose_barrier_constants: empty beta1 interval");
  bp.beta1 = 0.5 * (ch.beta1_lo + ch.beta1_hi);
  bp.mu1 = std::max(bp.beta1 - 1, bp.mu0) + 1.0;

  const double om = 1 - bp.tau, g1 = bp.gamma1, m1 = bp.mu1, b1 = bp.beta1 - 1;
  ch.omega_J1 = (p.sigma / om * ((g1 + m1) * (g1 + m1) / (2 * om) + g1) - p.kappa * m1) / (m1 - b1);
  // Absolute values of rho and q_r: the x/sqrt(1+x^2) factors take both signs.
  ch.omega_J0 = (p.sigma * b1 * (std::abs(p.rho) * g1 / (om * om) - m1) +
                 (std::abs(p.q_r()) * g1 + p.kappa * (p.theta_sigma() * m1 + b1)) / om) /
                g1;
  ch.omega_T = bp.tau / seed.T;
  bp.omega = 2.0 * std::max({ch.omega_J1, ch.omega_J0, ch.omega_T});
  return ch;
}

VerdictReport certify_J_signs(const BarrierParams& bp, const ModelParams& p, const Grid2D& g, int time_samples) {
  VerdictReport rep;
  rep.suite = "barrier-signs";
  CheckResult cm1{"J_minus1<=0", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  CheckResult c1{"J_1<=0", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  CheckResult c0{"J_0+nu<=0", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  std::size_t count = 0;
  const double tmax = bp.tau / bp.omega;
  for (int k = 1; k <= time_samples; ++k) {
    const double t = tmax * k / time_samples;
    for (std::size_t j = 1; j < g.nxi(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const JCoeffs J = J_coefficients(g.x(i), g.xi(j), t, bp, p);
        ++count;
        auto upd = [&](CheckResult& c, double v) {
          if (-v < c.worst_margin) {
            c.worst_margin = -v;
            c.worst_location = where(g.x(i), g.xi(j), t);
          }
        };
        upd(cm1, J.Jm1);
        upd(c1, J.J1);
        upd(c0, J.J0 + bp.nu);
      }
  }
  for (auto* c : {&cm1, &c1, &c0}) {
    if (c->worst_margin < 0) c->status = Status::fail;
    c->note = std::to_string(count) + " points";
    rep.add(*c);
  }
  return rep;
}

VerdictReport check_J_reconstruction(const BarrierParams& bp, const ModelParams& p, double x_half_width,
                                     double xi_max, int samples, std::uint64_t seed, double rel_tol) {
  VerdictReport rep;
  rep.suite = "barrier-reconstruction";
  CheckResult c{"J_reconstruction", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  const double tmax = bp.tau / bp.omega;
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    const double x = -x_half_width + 2 * x_half_width * uniform01(seed, std::uint64_t(k), 0, 0);
    const double xi = 1e-3 + (xi_max - 1e-3) * uniform01(seed, std::uint64_t(k), 0, 1);
    const double t = tmax * (0.01 + 0.99 * uniform01(seed, std::uint64_t(k), 0, 2));
    const JCoeffs J = J_coefficients(x, xi, t, bp, p);
    const double scale = std::abs(J.J1 * xi) + std::abs(J.J0) + std::abs(J.Jm1 / xi);
    const double err = std::abs(J.combined(xi) - J_finite_difference(x, xi, t, bp, p)) / scale;
    if (err > worst) {
      worst = err;
      c.worst_location = where(x, xi, t);
    }
  }
  c.worst_margin = rel_tol - worst;
  c.status = worst <= rel_tol ? Status::pass : Status::fail;
  c.note = "max relative error " + fmt_num(worst);
  rep.add(c);
  return rep;
}

double supersolution_expression(double x, double xi, const ModelParams& p, double varpi, double K0, double K1,
                                double r0) {
  return r0 * K0 + K1 * std::exp(x + varpi * xi) *
                       (xi * varpi * (-p.sigma * varpi / 2 + (p.kappa - p.sigma * p.rho)) + r0 + p.q_r() -
                        p.kappa * p.theta_sigma() * varpi);
}

VerdictReport supersolution_check_U(const ModelParams& p, double varpi, double mu0, double K0, double K1, double r0,
                                    const Grid2D& g) {
  const double cap = std::min((r0 + p.q_r()) / (p.kappa * p.theta_sigma()), 2 * (p.kappa - p.sigma * p.rho) / p.sigma);
  // varpi only enters through the exponential part; a constant U has no window.
  if (K1 != 0 && !(varpi >= 0 && varpi < mu0 && varpi <= cap))
    throw std::invalid_argument("supersolution_check_U: varpi outside its admissible window");
  VerdictReport rep;
  rep.suite = "supersolution";
  CheckResult c{"U_supersolution", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  for (std::size_t j = 0; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const double v = supersolution_expression(g.x(i), g.xi(j), p, varpi, K0, K1, r0);
      if (v < c.worst_margin) {
        c.worst_margin = v;
        c.worst_location = where(g.x(i), g.xi(j), 0.0);
      }
    }
  // Allow roundoff when the expression vanishes identically.
  const double scale = std::abs(r0 * K0) + std::abs(K1) * std::exp(g.x().back() + varpi * g.xi().back());
  if (c.worst_margin < -1e-12 * scale) c.status = Status::fail;
  rep.add(c);
  return rep;
}

double max_principle_tolerance(const Grid2D& g, double dt) { return 10.0 * (g.hx_max() + g.hxi_min() + dt); }

VerdictReport verify_max_principle(const EvolutionTrace& tr, const ModelParams& p, double varpi, double K0, double K1,
                                   double r0, double tol, bool nonnegative_payoff) {
  (void)p;
  VerdictReport rep;
  rep.suite = "maxprinciple";
  CheckResult up{"upper_bound", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  CheckResult lo{"nonnegativity", Status::pass, std::numeric_limits<double>::infinity(), "", ""};
  std::size_t nodes = 0;
  for (const Field& f : tr.snapshots) {
    const Grid2D& g = *f.grid;
    const double grow = std::exp(r0 * f.time);
    for (std::size_t j = 0; j < g.nxi(); ++j)
      for (std::size_t i = 0; i < g.nx(); ++i) {
        const double u = f(i, j);
        const double U = grow * (K1 * std::exp(g.x(i) + varpi * g.xi(j)) + K0);
        ++nodes;
        if (U - std::abs(u) < up.worst_margin) {
          up.worst_margin = U - std::abs(u);
          up.worst_location = where(g.x(i), g.xi(j), f.time);
        }
        if (nonnegative_payoff && u < lo.worst_margin) {
          lo.worst_margin = u;
          lo.worst_location = where(g.x(i), g.xi(j), f.time);
        }
      }
  }
  up.status = up.worst_margin >= -tol ? Status::pass : Status::fail;
  up.note = std::to_string(nodes) + " node-times, tol " + fmt_num(tol);
  rep.add(up);
  if (nonnegative_payoff) {
    lo.status = lo.worst_margin >= -tol ? Status::pass : Status::fail;
    lo.note = up.note;
    rep.add(lo);
  }
  return rep;
}

}  // namespace heston
