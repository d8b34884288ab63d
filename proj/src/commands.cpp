#include "heston/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "heston/barriers.hpp"
#include "heston/manifest.hpp"
#include "heston/oracles.hpp"
#include "heston/params.hpp"
#include "heston/traces.hpp"

namespace heston {

GridPtr make_grid(const RunConfig& cfg) {
  const GridSpec& g = cfg.grid;
  return Grid2D::make(g.x_min, g.x_max, g.nx, cfg.xi_max(), g.n_xi, g.grading);
}

SolveConfig make_solve_config(const RunConfig& cfg) {
  SolveConfig s;
  s.T_final = cfg.run.T;
  s.steps = cfg.run.steps;
  s.scheme = cfg.run.scheme;
  s.payoff = cfg.run.payoff;
  s.K = cfg.run.K;
  s.far_field = cfg.run.far_field;
  s.cadence = cfg.run.snapshots > 0 ? std::max(1, cfg.run.steps / cfg.run.snapshots) : 0;
  return s;
}

std::shared_ptr<const DiscreteOperator> make_operator(const RunConfig& cfg, GridPtr grid) {
  return std::make_shared<DiscreteOperator>(std::move(grid), cfg.absorbed, cfg.weights());
}

ComparisonFunction comparison_for(const RunConfig& cfg) {
  if (cfg.run.payoff == Payoff::call) return {0.0, 0.0, cfg.run.K, cfg.absorbed.r};
  return {0.0, cfg.run.K, 0.0, 0.0};
}

VerdictReport run_maxprinciple(const RunConfig& cfg, const EvolutionTrace& trace) {
  const ComparisonFunction U = comparison_for(cfg);
  const Grid2D& g = *trace.final().grid;
  VerdictReport rep = supersolution_check_U(cfg.absorbed, U.varpi, cfg.weights().mu, U.K0, U.K1, U.r0, g);
  rep.merge(verify_max_principle(trace, cfg.absorbed, U.varpi, U.K0, U.K1, U.r0,
                                 max_principle_tolerance(g, cfg.run.T / cfg.run.steps)));
  rep.suite = "maxprinciple";
  return rep;
}

VerdictReport run_barrier_certification(const RunConfig& cfg) {
  BarrierSeed seed;
  seed.T = cfg.run.T;
  const BarrierChoice ch = choose_barrier_constants(cfg.absorbed, cfg.weights(), seed);
  // A 57 x 56 node sweep times 32 time samples gives just over 1e5 points.
  const auto g = Grid2D::make(cfg.grid.x_min, cfg.grid.x_max, 56, cfg.xi_max(), 56, cfg.grid.grading);
  VerdictReport rep = certify_J_signs(ch.bp, cfg.absorbed, *g, 32);
  rep.merge(check_J_reconstruction(ch.bp, cfg.absorbed, std::max(std::abs(cfg.grid.x_min), cfg.grid.x_max),
                                   cfg.xi_max(), 1000, cfg.run.seed));
  rep.suite = "barriers";
  return rep;
}

SmoothingResult run_smoothing(const RunConfig& cfg, const SmoothingSetup& s) {
  SmoothingResult res;
  const auto g = Grid2D::make(-s.x_half, s.x_half, s.nx, cfg.xi_max(), s.n_xi, cfg.grid.grading);
  const WeightParams w = cfg.weights();
  res.lambda0 = estimate_lambda0(assemble_form(g, cfg.absorbed, w));
  auto op = std::make_shared<const DiscreteOperator>(g, cfg.absorbed, w);

  const double tmin = s.T / 100, dt = tmin / s.substeps;
  std::vector<double> ts;
  for (int k = 0; k < s.samples; ++k) {
    const double t = tmin * std::pow(10.0, double(k) / (s.samples - 1));
    ts.push_back(std::round(t / dt) * dt);
  }
  SolveConfig c;
  c.scheme = Scheme::implicit_euler;
  c.steps = int(std::lround(ts.back() / dt));
  c.T_final = c.steps * dt;
  c.dirichlet = [](double, double, double) { return 0.0; };
  const double half = 0.5 * s.box;
  const Field u0 = Field::sample(g, [half](double x, double) { return std::abs(x) < half ? 1.0 : 0.0; });
  res.table = smoothing_diagnostics(op, u0, ts, res.lambda0.lambda0, c);

  res.report.suite = "smoothing";
  const double s1 = res.table.slope_f01, s2 = res.table.slope_f02;
  const std::string loc = "t in [" + fmt_num(ts.front()) + ", " + fmt_num(ts.back()) + "]";
  res.report.add({"slope_k1_in[-1.4,-0.6]", (s1 >= -1.4 && s1 <= -0.6) ? Status::pass : Status::fail,
                  std::min(s1 + 1.4, -0.6 - s1), loc, "slope " + fmt_num(s1)});
  res.report.add({"slope_k2_in[-2.6,-1.4]", (s2 >= -2.6 && s2 <= -1.4) ? Status::pass : Status::fail,
                  std::min(s2 + 2.6, -1.4 - s2), loc, "slope " + fmt_num(s2)});
  double rt = 0;
  for (const auto& r : res.table.rows) rt = std::max(rt, r.roundtrip);
  res.report.add({"resolvent_roundtrip", rt <= 1e-8 ? Status::pass : Status::fail, 1e-8 - rt, loc, ""});
  return res;
}

BoundaryResult run_boundary(const RunConfig& cfg, const EvolutionTrace& trace, std::size_t check_levels) {
  BoundaryResult res;
  // Snapshot closest to T/2.
  const Field* snap = &trace.snapshots.front();
  for (const Field& f : trace.snapshots)
    if (std::abs(f.time - 0.5 * cfg.run.T) < std::abs(snap->time - 0.5 * cfg.run.T)) snap = &f;
  res.t = snap->time;
  res.report.suite = "boundary";
  std::ostringstream csv;
  csv << "x_star,xi,value\n";
  for (double xs : kBoundaryStations) {
    const DecayRecord d = boundary_limit_xiD2(*snap, xs, 10);
    for (std::size_t k = 0; k < d.xi.size(); ++k)
      csv << fmt_num(xs) << ',' << fmt_num(d.xi[k]) << ',' << fmt_num(d.values[k]) << '\n';
    const std::size_t n = std::min(check_levels, d.values.size());
    // values are ordered by increasing xi; decreasing toward xi = 0 means
    // increasing along the vector.
    double mono = std::numeric_limits<double>::infinity(), lo = d.values[0], hi = d.values[0];
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double scale = std::max(std::abs(d.values[k + 1]), 1e-300);
      mono = std::min(mono, (d.values[k + 1] - d.values[k]) / scale);
    }
    for (std::size_t k = 0; k < n; ++k) {
      lo = std::min(lo, d.values[k]);
      hi = std::max(hi, d.values[k]);
    }
    const double ratio = hi > 0 ? lo / hi : 0.0;
    const std::string where = "x=" + fmt_num(xs) + " t=" + fmt_num(res.t);
    res.report.add({"decreasing_x=" + fmt_num(xs), mono > 0 ? Status::pass : Status::fail, mono, where,
                    "exponent " + fmt_num(d.exponent)});
    res.report.add({"ratio<=0.2_x=" + fmt_num(xs), ratio <= 0.2 ? Status::pass : Status::fail, 0.2 - ratio, where,
                    ""});
    res.records.push_back(d);
  }
  csv << "# fitted exponents\n";
  for (const auto& d : res.records) csv << "# x=" << fmt_num(d.x_star) << " exponent=" << fmt_num(d.exponent) << '\n';
  res.csv = csv.str();
  return res;
}

std::string ConvergenceResult::csv() const {
  std::ostringstream os;
  os << "kind,level,nx,n_xi,steps,price,err_cf,order_cf,order_self\n";
  for (const auto& r : rows)
    os << r.kind << ',' << r.level << ',' << r.nx << ',' << r.n_xi << ',' << r.steps << ',' << fmt_num(r.price) << ','
       << fmt_num(r.err_cf) << ',' << fmt_num(r.order_cf) << ',' << fmt_num(r.order_self) << '\n';
  return os.str();
}

namespace {

double atm_price(const RunConfig& cfg, int nx, int n_xi, int steps, Scheme scheme, double x0, double xi0) {
  RunConfig c = cfg;
  c.grid.nx = nx;
  c.grid.n_xi = n_xi;
  c.run.steps = steps;
  c.run.scheme = scheme;
  c.run.snapshots = 0;
  const auto g = make_grid(c);
  const EvolutionTrace tr = solve(make_operator(c, g), make_solve_config(c));
  return std::exp(-c.absorbed.r * c.run.T) * interpolate(tr.final(), x0, xi0);
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].order_cf = std::nan("");
    rows[k].order_self = std::nan("");
    if (k >= 1 && rows[k].err_cf > 0 && rows[k - 1].err_cf > 0)
      rows[k].order_cf = std::log2(rows[k - 1].err_cf / rows[k].err_cf);
    if (k >= 2) {
      const double a = std::abs(rows[k - 1].price - rows[k - 2].price), b = std::abs(rows[k].price - rows[k - 1].price);
      if (a > 0 && b > 0) rows[k].order_self = std::log2(a / b);
    }
  }
}

}  // namespace

ConvergenceResult run_convergence(const RunConfig& cfg, int levels) {
  if (levels < 3) throw std::invalid_argument("converge: --levels must be >= 3");
  const double x0 = cfg.run.points.front().first, xi0 = cfg.run.points.front().second;
  // The configured grid is the finest spatial level.
  const double finest = double(cfg.grid.nx + 1) * double(cfg.grid.n_xi + 1);
  if (finest > 2e6) throw std::invalid_argument("converge: finest grid exceeds the memory guard (2e6 nodes)");

  ConvergenceResult res;
  res.cf = price_reference(cfg.absorbed, cfg.run.payoff, cfg.run.K, x0, cfg.absorbed.sigma * xi0, cfg.run.T);
  auto study = [&](const std::string& kind, auto&& level) {
    std::vector<ConvergenceRow> rows;
    for (int k = 0; k < levels; ++k) {
      ConvergenceRow r = level(k);
      r.kind = kind;
      r.level = k;
      r.price = atm_price(cfg, r.nx, r.n_xi, r.steps, kind == "time_ie" ? Scheme::implicit_euler
                                                                        : Scheme::crank_nicolson, x0, xi0);
      r.err_cf = std::abs(r.price - res.cf);
      rows.push_back(r);
    }
    fill_orders(rows);
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    return rows.back().order_self;
  };

  // Time: configured grid, 25 * 2^k steps.
  auto time_level = [&](int k) {
    ConvergenceRow r;
    r.nx = cfg.grid.nx;
    r.n_xi = cfg.grid.n_xi;
    r.steps = 25 << k;
    return r;
  };
  res.ie_order = study("time_ie", time_level);
  res.cn_order = study("time_cn", time_level);

  // Space: both axes doubling up to the configured grid, Crank-Nicolson with
  // dt proportional to h so the time error stays below the spatial one.
  const int shift = levels - 1;
  const int nx0 = std::max(8, cfg.grid.nx >> shift), nxi0 = std::max(8, cfg.grid.n_xi >> shift);
  res.space_order = study("space", [&](int k) {
    ConvergenceRow r;
    r.nx = nx0 << k;
    r.n_xi = nxi0 << k;
    r.steps = 2 * r.nx;
    return r;
  });
  return res;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

RunConfig load(const CliOptions& opt) {
  RunConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.run.seed = *opt.seed;
  return cfg;
}

std::string run_manifest(const CliOptions& opt, const RunConfig& cfg, const std::string& command,
                         const std::string& grid_hash, const std::vector<std::pair<std::string, double>>& phases) {
  std::ostringstream os;
  os << "version " << kVersion << '\n';
  os << "command " << command << '\n';
  os << "seed " << cfg.run.seed << '\n';
  if (!grid_hash.empty()) os << "grid_hash " << grid_hash << '\n';
  if (opt.timing)
    for (const auto& [name, ms] : phases) os << "wall_ms " << name << ' ' << fmt_num(std::round(ms)) << '\n';
  os << "[config]\n" << render_config(cfg);
  return os.str();
}

// Admissibility gate shared by the commands that need it.
// A parameter set for which no admissible weight exists is a domain failure,
// not a malformed config.
std::optional<WeightParams> weights_or_report(const RunConfig& cfg, std::ostream& out) {
  try {
    return cfg.weights();
  } catch (const ParamError& e) {
    out << "weights unavailable: " << e.what() << '\n';
    for (const auto& v : e.violations()) out << "  " << v << '\n';
    out << "admissible 0\n";
    return std::nullopt;
  }
}

bool gate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto w = weights_or_report(cfg, out);
  if (!w) {
    err << "error: parameters are not admissible\n";
    return false;
  }
  const ValidityReport v = validate(cfg.absorbed, *w);
  if (v.admissible()) return true;
  out << describe(v);
  err << "error: parameters are not admissible\n";
  return false;
}

std::string verdict_summary(const VerdictReport& r, std::ostream& err) {
  if (r.count(Status::inconclusive) > 0)
    err << "warning: " << r.count(Status::inconclusive) << " inconclusive check(s) in suite " << r.suite << '\n';
  return r.summary();
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ParamError& e) {
    err << "config error: " << e.what() << '\n';
    for (const auto& v : e.violations()) err << "  " << v << '\n';
    return exit_usage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  } catch (const SolverError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  } catch (const OracleError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  } catch (const PreconditionError& e) {
    err << "precondition: " << e.what() << '\n';
    return exit_domain;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  }
}

std::vector<std::string> split_methods(const std::string& m) {
  if (m == "all") return {"pde", "mc", "cf"};
  std::vector<std::string> out;
  std::stringstream ss(m);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  for (const auto& s : out)
    if (s != "pde" && s != "mc" && s != "cf") throw std::invalid_argument("unknown method '" + s + "'");
  if (out.empty()) throw std::invalid_argument("empty --method");
  return out;
}

}  // namespace

int cmd_validate(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opt);
    const auto w = weights_or_report(cfg, out);
    if (!w) return int(exit_domain);
    const ValidityReport v = validate(cfg.absorbed, *w);
    out << describe(v);
    return v.admissible() ? int(exit_ok) : int(exit_domain);
  });
}

int cmd_price(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opt);
    const auto methods = split_methods(opt.method);
    if (!gate(cfg, out, err)) return int(exit_domain);
    const ModelParams& p = cfg.absorbed;
    const double T = cfg.run.T, K = cfg.run.K;

    OutputSet files(opt.out_dir);
    std::vector<std::pair<std::string, double>> phases;
    std::ostringstream price_csv;
    price_csv << "method,x,xi,price,half_width,runtime_ms\n";
    // comparison[point][method]
    std::vector<std::vector<double>> cmp(cfg.run.points.size(), std::vector<double>(methods.size()));
    std::string grid_hash;
    auto runtime = [&](double ms) { return opt.timing ? fmt_num(std::round(ms)) : std::string("-"); };

    for (std::size_t m = 0; m < methods.size(); ++m) {
      const std::string& meth = methods[m];
      const auto t0 = Clock::now();
      if (meth == "pde") {
        const auto g = make_grid(cfg);
        grid_hash = g->hash();
        for (const auto& [x, xi] : cfg.run.points)
          if (x < g->x().front() || x > g->x().back() || xi < 0 || xi > g->xi().back())
            throw std::out_of_range("evaluation point (" + fmt_num(x) + ", " + fmt_num(xi) + ") outside the grid");
        const auto op = make_operator(cfg, g);
        const EvolutionTrace tr = solve(op, make_solve_config(cfg));
        const double ms = ms_since(t0);
        phases.emplace_back("pde_solve", ms);
        for (std::size_t k = 0; k < cfg.run.points.size(); ++k) {
          const auto [x, xi] = cfg.run.points[k];
          const double v = std::exp(-p.r * T) * interpolate(tr.final(), x, xi);
          cmp[k][m] = v;
          price_csv << "pde," << fmt_num(x) << ',' << fmt_num(xi) << ',' << fmt_num(v) << ",0," << runtime(ms) << '\n';
        }
        std::ostringstream norms;
        norms << NormReport::csv_header() << '\n';
        for (std::size_t n = 0; n < tr.snapshots.size(); ++n) {
          files.write("surface_t" + std::to_string(n) + ".csv", surface_csv(tr.snapshots[n]));
          norms << norm_report(tr.snapshots[n], cfg.weights(), Disc{0.0, 1.0}).csv_row() << '\n';
        }
        files.write("boundary.csv", boundary_csv(tr, *g));
        files.write("norms.csv", norms.str());
        files.write("operator_triplets.txt", export_triplets(op->matrix()));
      } else if (meth == "mc") {
        McConfig mc;
        mc.paths = std::size_t(cfg.run.paths);
        mc.steps = cfg.run.mc_steps;
        mc.seed = cfg.run.seed;
        mc.antithetic = cfg.run.antithetic;
        for (std::size_t k = 0; k < cfg.run.points.size(); ++k) {
          const auto [x, xi] = cfg.run.points[k];
          const auto tk = Clock::now();
          const McPrice r = price_mc(p, cfg.run.payoff, K, x, p.sigma * xi, T, mc);
          cmp[k][m] = r.price;
          price_csv << "mc," << fmt_num(x) << ',' << fmt_num(xi) << ',' << fmt_num(r.price) << ','
                    << fmt_num(r.half_width) << ',' << runtime(ms_since(tk)) << '\n';
        }
        phases.emplace_back("mc", ms_since(t0));
      } else {
        for (std::size_t k = 0; k < cfg.run.points.size(); ++k) {
          const auto [x, xi] = cfg.run.points[k];
          const auto tk = Clock::now();
          const double v = price_reference(p, cfg.run.payoff, K, x, p.sigma * xi, T);
          cmp[k][m] = v;
          price_csv << "cf," << fmt_num(x) << ',' << fmt_num(xi) << ',' << fmt_num(v) << ",0,"
                    << runtime(ms_since(tk)) << '\n';
        }
        phases.emplace_back("cf", ms_since(t0));
      }
    }
    files.write("price.csv", price_csv.str());
    if (methods.size() > 1) {
      std::ostringstream c;
      c << "x,xi";
      for (const auto& m : methods) c << ',' << m;
      c << '\n';
      for (std::size_t k = 0; k < cfg.run.points.size(); ++k) {
        c << fmt_num(cfg.run.points[k].first) << ',' << fmt_num(cfg.run.points[k].second);
        for (double v : cmp[k]) c << ',' << fmt_num(v);
        c << '\n';
      }
      files.write("comparison.csv", c.str());
    }
    files.write("run_manifest.txt", run_manifest(opt, cfg, "price --method " + opt.method, grid_hash, phases));
    files.write_manifest();
    out << price_csv.str();
    return int(exit_ok);
  });
}

int cmd_verify(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string& s = opt.suite;
    if (s != "maxprinciple" && s != "traces" && s != "smoothing" && s != "boundary")
      throw std::invalid_argument("unknown suite '" + s + "' (expected maxprinciple|traces|smoothing|boundary)");
    const RunConfig cfg = load(opt);
    if (s != "traces" && !gate(cfg, out, err)) return int(exit_domain);

    OutputSet files(opt.out_dir);
    std::vector<std::pair<std::string, double>> phases;
    std::string grid_hash;
    VerdictReport rep;
    const auto t0 = Clock::now();
    if (s == "maxprinciple" || s == "boundary") {
      const auto g = make_grid(cfg);
      grid_hash = g->hash();
      SolveConfig sc = make_solve_config(cfg);
      if (s == "boundary") sc.cadence = std::max(1, cfg.run.steps / 2);
      const EvolutionTrace tr = solve(make_operator(cfg, g), sc);
      phases.emplace_back("solve", ms_since(t0));
      if (s == "maxprinciple") {
        rep = run_maxprinciple(cfg, tr);
        rep.merge(run_barrier_certification(cfg));
        rep.suite = "maxprinciple";
      } else {
        const BoundaryResult b = run_boundary(cfg, tr);
        rep = b.report;
        files.write("boundary_decay.csv", b.csv);
        out << b.csv;
      }
    } else if (s == "traces") {
      TracesSuiteConfig tc;
      tc.seed = cfg.run.seed;
      const TracesSuiteResult r = run_traces_suite(tc);
      rep = r.report;
      files.write("traces_report.csv", traces_csv(r.rows));
    } else {
      const SmoothingResult r = run_smoothing(cfg);
      rep = r.report;
      files.write("smoothing.csv", smoothing_csv(r.table));
      out << "lambda0 " << fmt_num(r.lambda0.lambda0) << " slope_f01 " << fmt_num(r.table.slope_f01) << " slope_f02 "
          << fmt_num(r.table.slope_f02) << '\n';
    }
    phases.emplace_back("suite", ms_since(t0));
    files.write("verdict_" + s + ".csv", rep.csv());
    files.write("run_manifest.txt", run_manifest(opt, cfg, "verify --suite " + s, grid_hash, phases));
    files.write_manifest();
    out << verdict_summary(rep, err) << '\n';
    return rep.passed() ? int(exit_ok) : int(exit_domain);
  });
}

int cmd_converge(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opt);
    if (opt.levels < 3) throw std::invalid_argument("--levels must be >= 3");
    if (!gate(cfg, out, err)) return int(exit_domain);
    const auto t0 = Clock::now();
    const ConvergenceResult r = run_convergence(cfg, opt.levels);
    OutputSet files(opt.out_dir);
    files.write("converge.csv", r.csv());
    files.write("run_manifest.txt",
                run_manifest(opt, cfg, "converge --levels " + std::to_string(opt.levels), make_grid(cfg)->hash(),
                             {{"converge", ms_since(t0)}}));
    files.write_manifest();
    out << r.csv();
    out << "order implicit_euler " << fmt_num(r.ie_order) << " crank_nicolson " << fmt_num(r.cn_order) << " space "
        << fmt_num(r.space_order) << '\n';
    return int(exit_ok);
  });
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver and verifier for the degenerate Heston PDE", "heston-degen"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  CliOptions opt;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "configuration file")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", seed, "override [run] seed");
    sub->add_flag("--timing", opt.timing, "record wall-clock times in the outputs");
  };
  CLI::App* v = app.add_subcommand("validate", "check the parameter gates");
  common(v);
  CLI::App* p = app.add_subcommand("price", "price at the configured points");
  common(p);
  p->add_option("--method", opt.method, "pde | mc | cf, comma separated, or all");
  CLI::App* ver = app.add_subcommand("verify", "run a verification suite");
  common(ver);
  ver->add_option("--suite", opt.suite, "maxprinciple | traces | smoothing | boundary")->required();
  CLI::App* c = app.add_subcommand("converge", "refinement study");
  common(c);
  c->add_option("--levels", opt.levels, "number of nested levels (>= 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  }
  for (CLI::App* sub : {v, p, ver, c})
    if (sub->parsed() && sub->count("--seed")) opt.seed = seed;

  if (v->parsed()) return cmd_validate(opt, out, err);
  if (p->parsed()) return cmd_price(opt, out, err);
  if (ver->parsed()) return cmd_verify(opt, out, err);
  return cmd_converge(opt, out, err);
}

}  // namespace heston
