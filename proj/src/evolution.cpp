#include "heston/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heston/spaces.hpp"
#include "heston/verdict.hpp"

namespace heston {

// Payoffs are averaged over the dual cell [x - h_left/2, x + h_right/2] of
// each node. This only changes the nodes next to the kink and restores the
// second-order behaviour of the price at the money.
Field initial_field(Payoff payoff, double K, GridPtr grid) {
  const auto& x = grid->x();
  const std::size_t n = x.size();
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i == 0 ? x[0] : 0.5 * (x[i - 1] + x[i]);
    const double b = i + 1 == n ? x[n - 1] : 0.5 * (x[i] + x[i + 1]);
    // Average of (e^s - 1)^+ over [a, b].
    double call;
    if (b - a <= 0) call = std::max(std::exp(x[i]) - 1.0, 0.0);
    else if (a >= 0) call = (std::exp(b) - std::exp(a)) / (b - a) - 1.0;
    else if (b <= 0) call = 0.0;
    else call = (std::exp(b) - 1.0 - b) / (b - a);
    const double mean_fwd = b - a <= 0 ? std::exp(x[i]) : (std::exp(b) - std::exp(a)) / (b - a);
    // Put from the same average: (1 - e^s)^+ = (e^s - 1)^+ - (e^s - 1).
    row[i] = K * (payoff == Payoff::call ? call : call - (mean_fwd - 1.0));
  }
  Field f(grid);
  for (std::size_t j = 0; j < grid->nxi(); ++j)
    for (std::size_t i = 0; i < n; ++i) f(i, j) = row[i];
  return f;
}

Field initial_field(const SolveConfig& cfg, GridPtr grid) {
  if (cfg.custom_payoff) {
    if (cfg.custom_payoff->values.size() != grid->size())
      throw std::invalid_argument("custom payoff table has the wrong shape");
    Field f(grid, cfg.custom_payoff->values, 0.0);
    return f;
  }
  return initial_field(cfg.payoff, cfg.K, grid);
}

EdgeValues far_field_values(double t, const Grid2D& g, const SolveConfig& cfg, const ModelParams& p) {
  EdgeValues e;
  e.left.resize(g.nxi());
  e.right.resize(g.nxi());
  e.top.resize(g.nx());
  const std::size_t ix = g.nx() - 1, jt = g.nxi() - 1;
  if (cfg.dirichlet) {
    for (std::size_t j = 0; j < g.nxi(); ++j) {
      e.left[j] = cfg.dirichlet(g.x(0), g.xi(j), t);
      e.right[j] = cfg.dirichlet(g.x(ix), g.xi(j), t);
    }
    for (std::size_t i = 0; i < g.nx(); ++i) e.top[i] = cfg.dirichlet(g.x(i), g.xi(jt), t);
    return e;
  }
  if (cfg.custom_payoff) {
    const Field& c = *cfg.custom_payoff;
    for (std::size_t j = 0; j < g.nxi(); ++j) {
      e.left[j] = c(0, j);
      e.right[j] = c(ix, j);
    }
    for (std::size_t i = 0; i < g.nx(); ++i) e.top[i] = c(i, jt);
    return e;
  }
  // Undiscounted forward of the asset in strike units: e^{x - q_r t}.
  const double K = cfg.K, drift = -p.q_r() * t;
  auto fwd = [&](double x) { return std::exp(x + drift); };
  if (cfg.payoff == Payoff::call) {
    for (std::size_t j = 0; j < g.nxi(); ++j) {
      e.left[j] = 0.0;
      e.right[j] = K * (fwd(g.x(ix)) - 1.0);
    }
    for (std::size_t i = 0; i < g.nx(); ++i) e.top[i] = K * fwd(g.x(i));
  } else {
    for (std::size_t j = 0; j < g.nxi(); ++j) {
      e.left[j] = K * (1.0 - fwd(g.x(0)));
      e.right[j] = 0.0;
    }
    for (std::size_t i = 0; i < g.nx(); ++i) e.top[i] = K;
  }
  return e;
}

double interp_quadratic(const std::vector<double>& x, const std::vector<double>& v, double at) {
  const std::size_t n = x.size();
  at = std::clamp(at, x.front(), x.back());
  std::size_t k = std::upper_bound(x.begin(), x.end(), at) - x.begin();
  k = std::clamp<std::size_t>(k, 1, n - 1);
  if (at - x[k - 1] < x[k] - at) --k;  // nearest node
  const std::size_t s = std::clamp<std::size_t>(k, 1, n - 2) - 1;
  const auto w = lagrange3(&x[s], at, 0);
  return w[0] * v[s] + w[1] * v[s + 1] + w[2] * v[s + 2];
}

TransportResult boundary_transport_step(const std::vector<double>& x, const std::vector<double>& row,
                                        const std::vector<double>& u_xi, double dt, const ModelParams& p) {
  if (row.size() != x.size() || u_xi.size() != x.size() || x.size() < 4)
    throw std::invalid_argument("boundary_transport_step: size mismatch");
  TransportResult r;
  r.row.resize(x.size());
  const double shift = p.q_r() * dt, src = p.kappa * p.theta_sigma() * dt;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double foot = x[i] - shift;
    if (foot < x.front() || foot > x.back()) ++r.clamped;
    r.row[i] = interp_quadratic(x, row, foot) + src * interp_quadratic(x, u_xi, foot);
  }
  return r;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg, double dt, double theta)
    : op_(std::move(op)), cfg_(&cfg), dt_(dt), theta_(theta) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be > 0");
  const Grid2D& g = op_->grid();
  const std::size_t nx = g.nx(), top = g.nxi() - 1;
  const ModelParams& p = op_->params();
  Eigen::SparseMatrix<double, Eigen::RowMajor> L = op_->matrix();

  xi_first_order_ = op_->convection() == Convection::upwind_when_dominated;
  const auto& z = g.xi();
  if (xi_first_order_) xi_weights_ = {-1.0 / z[1], 1.0 / z[1], 0.0};
  else {
    const auto w = lagrange3(&z[0], z[0], 1);
    xi_weights_.assign(w.begin(), w.end());
  }

  std::vector<Eigen::Triplet<double>> tl, tr;
  const double kts = p.kappa * p.theta_sigma();
  for (std::size_t j = 0; j <= top; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const int r = int(g.index(i, j));
      const bool dirichlet = i == 0 || i + 1 == nx || (j == top && cfg.far_field == FarField::asymptote);
      if (dirichlet) {
        tl.emplace_back(r, r, 1.0);
        continue;
      }
      if (j == 0) {
        tl.emplace_back(r, r, 1.0);
        for (int t = 0; t < 3; ++t)
          tl.emplace_back(r, int(g.index(i, t)), -theta_ * dt_ * kts * xi_weights_[t]);
        continue;
      }
      tl.emplace_back(r, r, 1.0);
      tr.emplace_back(r, r, 1.0);
      if (j == top) {
        for (auto [c, v] : top_row(i)) {
          tl.emplace_back(r, int(c), theta_ * dt_ * v);
          tr.emplace_back(r, int(c), -(1 - theta_) * dt_ * v);
        }
        continue;
      }
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(L, r); it; ++it) {
        tl.emplace_back(r, int(it.col()), theta_ * dt_ * it.value());
        tr.emplace_back(r, int(it.col()), -(1 - theta_) * dt_ * it.value());
      }
    }
  const int n = int(g.size());
  lhs_.resize(n, n);
  rhs_op_.resize(n, n);
  lhs_.setFromTriplets(tl.begin(), tl.end());
  rhs_op_.setFromTriplets(tr.begin(), tr.end());
  lhs_.makeCompressed();
  lu_.analyzePattern(lhs_);
  lu_.factorize(lhs_);
  if (lu_.info() != Eigen::Success) throw SolverError("step factorisation failed: " + lu_.lastErrorMessage());
}

// Outflow row at xi_max: the operator without u_xixi and the mixed term,
// u_xi differenced backward (the xi-drift points into the domain there
// because xi_max > theta_sigma).
std::vector<std::pair<std::size_t, double>> Stepper::top_row(std::size_t i) const {
  const Grid2D& g = op_->grid();
  const std::size_t top = g.nxi() - 1;
  Coeffs c = heston_coeffs(op_->params(), g.xi(top));
  std::vector<std::pair<std::size_t, double>> out;
  const auto& x = g.x();
  const auto dx1 = lagrange3(&x[i - 1], x[i], 1);
  const auto dx2 = lagrange3(&x[i - 1], x[i], 2);
  for (int t = 0; t < 3; ++t) out.emplace_back(g.index(i - 1 + t, top), c.a * dx2[t] + c.bx * dx1[t]);
  const auto& z = g.xi();
  if (xi_first_order_ || c.bxi < 0) {
    const double h = z[top] - z[top - 1];
    out.emplace_back(g.index(i, top), c.bxi / h);
    out.emplace_back(g.index(i, top - 1), -c.bxi / h);
  } else {
    const auto w = lagrange3(&z[top - 2], z[top], 1);
    for (int t = 0; t < 3; ++t) out.emplace_back(g.index(i, top - 2 + t), c.bxi * w[t]);
  }
  return out;
}

Field Stepper::step(const Field& u) const {
  const Grid2D& g = op_->grid();
  const ModelParams& p = op_->params();
  const std::size_t nx = g.nx(), top = g.nxi() - 1;
  const double t0 = u.time, t1 = u.time + dt_;

  Eigen::Map<const Eigen::VectorXd> un(u.values.data(), Eigen::Index(u.values.size()));
  Eigen::VectorXd b = rhs_op_ * un;

  if (cfg_->forcing) {
    for (std::size_t j = 1; j <= top; ++j)
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        if (j == top && cfg_->far_field == FarField::asymptote) continue;
        const double x = g.x(i), xi = g.xi(j);
        b[Eigen::Index(g.index(i, j))] +=
            dt_ * (theta_ * cfg_->forcing(x, xi, t1) + (1 - theta_) * cfg_->forcing(x, xi, t0));
      }
  }

  // Boundary row: semi-Lagrangian in x, implicit share of the u_xi coupling
  // already sits in the matrix.
  std::vector<double> row0(nx), uxi(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    row0[i] = u(i, 0);
    uxi[i] = xi_weights_[0] * u(i, 0) + xi_weights_[1] * u(i, 1) + xi_weights_[2] * u(i, 2);
  }
  const double kts = p.kappa * p.theta_sigma();
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double foot = g.x(i) - p.q_r() * dt_;
    if (foot < g.x(0) || foot > g.x(nx - 1)) ++clamped_;
    double v = interp_quadratic(g.x(), row0, foot) + (1 - theta_) * dt_ * kts * interp_quadratic(g.x(), uxi, foot);
    if (cfg_->forcing)
      v += dt_ * (theta_ * cfg_->forcing(g.x(i), 0.0, t1) + (1 - theta_) * cfg_->forcing(foot, 0.0, t0));
    b[Eigen::Index(g.index(i, 0))] = v;
  }

  const EdgeValues e = far_field_values(t1, g, *cfg_, p);
  for (std::size_t j = 0; j <= top; ++j) {
    b[Eigen::Index(g.index(0, j))] = e.left[j];
    b[Eigen::Index(g.index(nx - 1, j))] = e.right[j];
  }
  if (cfg_->far_field == FarField::asymptote)
    for (std::size_t i = 1; i + 1 < nx; ++i) b[Eigen::Index(g.index(i, top))] = e.top[i];

  Eigen::VectorXd next = lu_.solve(b);
  if (lu_.info() != Eigen::Success) throw SolverError("step: linear solve failed");
  if (!next.allFinite()) throw NumericError("step: non-finite values after solve");
  const double before = std::max(un.lpNorm<Eigen::Infinity>(), 1.0);
  if (next.lpNorm<Eigen::Infinity>() > 1e12 * before) throw NumericError("step: blow-up detected");
  return Field(op_->grid_ptr(), std::vector<double>(next.data(), next.data() + next.size()), t1);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> node_weights(const Grid2D& g, const WeightParams& w) {
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t j = 1; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      out[g.index(i, j)] = g.quad_weight(i, j) * weight_w(g.x(i), g.xi(j), w);
  return out;
}

double fast_l2w(const std::vector<double>& nw, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t k = 0; k < v.size(); ++k) s += nw[k] * v[k] * v[k];
  return std::sqrt(s);
}

// Drives a solve through the Rannacher start when needed, calling `visit`
// after every completed step of size dt.
template <class Visit>
void march(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg, Field u, int steps, Visit visit,
           std::size_t& clamped) {
  const double dt = cfg.dt();
  const bool cn = cfg.scheme == Scheme::crank_nicolson;
  Stepper main(op, cfg, dt, cn ? 0.5 : 1.0);
  int done = 0;
  if (cn && cfg.rannacher && steps >= 2) {
    Stepper half(op, cfg, 0.5 * dt, 1.0);
    for (int k = 0; k < 2; ++k) {
      u = half.step(half.step(u));
      u.time = (k + 1) * dt;
      visit(u, ++done);
    }
    clamped += half.clamped_feet();
  }
  for (; done < steps;) {
    u = main.step(u);
    u.time = (done + 1) * dt;
    visit(u, ++done);
  }
  clamped += main.clamped_feet();
}

}  // namespace

EvolutionTrace solve(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg) {
  return solve(op, cfg, initial_field(cfg, op->grid_ptr()));
}

EvolutionTrace solve(std::shared_ptr<const DiscreteOperator> op, const SolveConfig& cfg, const Field& u0) {
  if (!(cfg.T_final > 0) || cfg.steps < 1) throw std::invalid_argument("solve: T_final and steps must be positive");
  if (!u0.finite()) throw NumericError("solve: initial field not finite");
  const Grid2D& g = op->grid();
  const auto nw = node_weights(g, op->weights());
  EvolutionTrace tr;
  tr.snapshots.push_back(u0);
  tr.step_times.push_back(0.0);
  tr.step_norms.push_back(fast_l2w(nw, u0.values));
  tr.boundary_rows.emplace_back(u0.values.begin(), u0.values.begin() + long(g.nx()));
  march(
      op, cfg, u0, cfg.steps,
      [&](const Field& u, int n) {
        tr.step_times.push_back(u.time);
        tr.step_norms.push_back(fast_l2w(nw, u.values));
        tr.boundary_rows.emplace_back(u.values.begin(), u.values.begin() + long(g.nx()));
        if (n == cfg.steps || (cfg.cadence > 0 && n % cfg.cadence == 0)) tr.snapshots.push_back(u);
      },
      tr.clamped_feet);
  return tr;
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = double(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double lx = std::log(t[k]), ly = std::log(v[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

SmoothingTable smoothing_diagnostics(std::shared_ptr<const DiscreteOperator> op, const Field& u0,
                                     const std::vector<double>& t_list, double lambda, const SolveConfig& cfg) {
  if (t_list.empty()) throw std::invalid_argument("smoothing_diagnostics: empty time list");
  const double dt = cfg.dt();
  std::vector<int> at;
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    if (!(t_list[k] > 0) || (k && !(t_list[k] > t_list[k - 1])))
      throw std::invalid_argument("smoothing_diagnostics: times must be positive and increasing");
    const int n = int(std::lround(t_list[k] / dt));
    if (std::abs(n * dt - t_list[k]) > 1e-9 * t_list[k])
      throw std::invalid_argument("smoothing_diagnostics: times must be multiples of dt");
    at.push_back(n);
  }
  const auto nw = node_weights(op->grid(), op->weights());
  Resolvent res(op, lambda);
  SmoothingTable tab;
  tab.lambda = lambda;
  SolveConfig c = cfg;
  c.steps = at.back();
  c.T_final = at.back() * dt;
  std::size_t next = 0, clamped = 0;
  auto record = [&](const Field& u) {
    SmoothingRow row;
    row.t = u.time;
    const Field f01 = res.apply(u);
    const Field f02 = res.apply(f01);
    row.norm_f01 = fast_l2w(nw, f01.values);
    row.norm_f02 = fast_l2w(nw, f02.values);
    const Field back = res.solve(f01);
    for (std::size_t k = 0; k < back.values.size(); ++k)
      row.roundtrip = std::max(row.roundtrip, std::abs(back.values[k] - u.values[k]));
    tab.rows.push_back(row);
  };
  march(
      op, c, u0, c.steps,
      [&](const Field& u, int n) {
        while (next < at.size() && at[next] == n) {
          record(u);
          ++next;
        }
      },
      clamped);
  std::vector<double> ts, a, b;
  for (const auto& r : tab.rows) {
    ts.push_back(r.t);
    a.push_back(r.norm_f01);
    b.push_back(r.norm_f02);
  }
  if (ts.size() >= 2) {
    tab.slope_f01 = loglog_slope(ts, a);
    tab.slope_f02 = loglog_slope(ts, b);
  }
  return tab;
}

std::string surface_csv(const Field& f) {
  std::ostringstream os;
  os << "x,xi,u\n";
  const Grid2D& g = *f.grid;
  for (std::size_t j = 0; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      os << fmt_num(g.x(i)) << ',' << fmt_num(g.xi(j)) << ',' << fmt_num(f(i, j)) << '\n';
  return os.str();
}

std::string boundary_csv(const EvolutionTrace& tr, const Grid2D& g) {
  std::ostringstream os;
  os << "t,x,u\n";
  for (std::size_t n = 0; n < tr.boundary_rows.size(); ++n)
    for (std::size_t i = 0; i < g.nx(); ++i)
      os << fmt_num(tr.step_times[n]) << ',' << fmt_num(g.x(i)) << ',' << fmt_num(tr.boundary_rows[n][i]) << '\n';
  return os.str();
}

std::string smoothing_csv(const SmoothingTable& s) {
  std::ostringstream os;
  os << "t,norm_f01,norm_f02\n";
  for (const auto& r : s.rows) os << fmt_num(r.t) << ',' << fmt_num(r.norm_f01) << ',' << fmt_num(r.norm_f02) << '\n';
  return os.str();
}

}  // namespace heston
