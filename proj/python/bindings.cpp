#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "heston/commands.hpp"
#include "heston/oracles.hpp"
#include "heston/traces.hpp"

namespace py = pybind11;
using namespace heston;

namespace {

Payoff payoff_of(const std::string& s) {
  if (s == "call") return Payoff::call;
  if (s == "put") return Payoff::put;
  throw std::invalid_argument("payoff must be 'call' or 'put', got '" + s + "'");
}

const char* scheme_name(Scheme s) { return s == Scheme::crank_nicolson ? "crank-nicolson" : "implicit-euler"; }

std::vector<double> price_pde(const RunConfig& cfg) {
  const auto g = make_grid(cfg);
  RunConfig c = cfg;
  c.run.snapshots = 0;
  const EvolutionTrace tr = solve(make_operator(c, g), make_solve_config(c));
  const double disc = std::exp(-c.absorbed.r * c.run.T);
  std::vector<double> out;
  for (const auto& [x, xi] : c.run.points) out.push_back(disc * interpolate(tr.final(), x, xi));
  return out;
}

py::tuple cli(std::vector<std::string> args) {
  args.insert(args.begin(), "heston-degen");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(int(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

Family family_of(const std::string& s) {
  if (s == "poly_bump") return Family::poly_bump;
  if (s == "xi_power") return Family::xi_power;
  if (s == "random_trig") return Family::random_trig;
  throw std::invalid_argument("unknown family '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Solver and verifier for the degenerate Heston equation";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<OracleError>(m, "OracleError", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def(py::init([](double sigma, double kappa, double theta, double rho, double r, double q, double lambda_risk) {
             ModelParams p;
             p.sigma = sigma;
             p.kappa = kappa;
             p.theta = theta;
             p.rho = rho;
             p.r = r;
             p.q = q;
             p.lambda_risk = lambda_risk;
             return p;
           }),
           py::arg("sigma"), py::arg("kappa"), py::arg("theta"), py::arg("rho"), py::arg("r") = 0.0,
           py::arg("q") = 0.0, py::arg("lambda_risk") = 0.0)
      .def_readwrite("sigma", &ModelParams::sigma)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def_readwrite("theta", &ModelParams::theta)
      .def_readwrite("rho", &ModelParams::rho)
      .def_readwrite("r", &ModelParams::r)
      .def_readwrite("q", &ModelParams::q)
      .def_readwrite("lambda_risk", &ModelParams::lambda_risk)
      .def_property_readonly("q_r", &ModelParams::q_r)
      .def_property_readonly("theta_sigma", &ModelParams::theta_sigma)
      .def("__repr__", [](const ModelParams& p) {
        std::ostringstream os;
        os << "ModelParams(sigma=" << p.sigma << ", kappa=" << p.kappa << ", theta=" << p.theta << ", rho=" << p.rho
           << ", r=" << p.r << ", q=" << p.q << ")";
        return os.str();
      });

  py::class_<WeightParams>(m, "WeightParams")
      .def(py::init<>())
      .def_readwrite("beta", &WeightParams::beta)
      .def_readwrite("gamma", &WeightParams::gamma)
      .def_readwrite("mu", &WeightParams::mu)
      .def_readwrite("mu_max", &WeightParams::mu_max);

  py::class_<ValidityReport>(m, "ValidityReport")
      .def_property_readonly("admissible", &ValidityReport::admissible)
      .def_property_readonly("feller_margin", [](const ValidityReport& r) { return r.feller.margin; })
      .def_property_readonly("coercivity_margin", [](const ValidityReport& r) { return r.coercivity.margin; })
      .def_property_readonly("beta_margin", [](const ValidityReport& r) { return r.beta_window.margin; })
      .def_readonly("beta_feller_bound", &ValidityReport::beta_feller_bound)
      .def_readonly("beta_strict_bound", &ValidityReport::beta_strict_bound)
      .def_property_readonly("varpi_window",
                             [](const ValidityReport& r) { return py::make_tuple(r.varpi_window.lo, r.varpi_window.hi); })
      .def("describe", [](const ValidityReport& r) { return describe(r); });

  m.def("beta_strict_bound", &beta_strict_bound);
  m.def("default_weights", &default_weights, py::arg("model"), py::arg("gamma") = 2.5);
  m.def("validate", &validate, py::arg("model"), py::arg("weights"));

  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("model", &RunConfig::model)
      .def_readonly("absorbed", &RunConfig::absorbed)
      .def_property_readonly("weights", &RunConfig::weights)
      .def_property_readonly("T", [](const RunConfig& c) { return c.run.T; })
      .def_property_readonly("steps", [](const RunConfig& c) { return c.run.steps; })
      .def_property_readonly("scheme", [](const RunConfig& c) { return scheme_name(c.run.scheme); })
      .def_property_readonly("grid_shape", [](const RunConfig& c) { return py::make_tuple(c.grid.nx, c.grid.n_xi); })
      .def_property_readonly("points", [](const RunConfig& c) { return c.run.points; })
      .def("render", &render_config);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  m.def(
      "price_reference",
      [](const ModelParams& p, const std::string& payoff, double K, double x0, double v0, double T) {
        return price_reference(p, payoff_of(payoff), K, x0, v0, T);
      },
      py::arg("model"), py::arg("payoff"), py::arg("K"), py::arg("x0"), py::arg("v0"), py::arg("T"));

  m.def(
      "price_mc",
      [](const ModelParams& p, const std::string& payoff, double K, double x0, double v0, double T, std::size_t paths,
         int steps, std::uint64_t seed, bool antithetic) {
        McConfig cfg;
        cfg.paths = paths;
        cfg.steps = steps;
        cfg.seed = seed;
        cfg.antithetic = antithetic;
        McPrice r;
        {
          py::gil_scoped_release release;
          r = price_mc(p, payoff_of(payoff), K, x0, v0, T, cfg);
        }
        py::dict d;
        d["price"] = r.price;
        d["std_error"] = r.std_error;
        d["half_width"] = r.half_width;
        return d;
      },
      py::arg("model"), py::arg("payoff"), py::arg("K"), py::arg("x0"), py::arg("v0"), py::arg("T"),
      py::arg("paths") = 100000, py::arg("steps") = 200, py::arg("seed") = 20240101, py::arg("antithetic") = true);

  m.def(
      "price_pde", [](const RunConfig& c) { return price_pde(c); }, py::arg("config"),
      py::call_guard<py::gil_scoped_release>(),
      "Discounted PDE prices at the configured evaluation points.");

  m.def(
      "black_scholes",
      [](const std::string& payoff, double S0, double K, double r, double q, double v, double T) {
        return black_scholes(payoff_of(payoff), S0, K, r, q, v, T);
      },
      py::arg("payoff"), py::arg("S0"), py::arg("K"), py::arg("r"), py::arg("q"), py::arg("v"), py::arg("T"));
  m.def(
      "black_scholes_heat",
      [](const std::string& payoff, double S0, double K, double r, double q, double v, double T) {
        return black_scholes_heat(payoff_of(payoff), S0, K, r, q, v, T);
      },
      py::arg("payoff"), py::arg("S0"), py::arg("K"), py::arg("r"), py::arg("q"), py::arg("v"), py::arg("T"));

  m.def(
      "heat_convolve",
      [](std::vector<double> x, std::vector<double> u, double t) {
        const LineTable out = heat_convolve(LineTable{std::move(x), std::move(u)}, t);
        return py::make_tuple(out.x, out.u);
      },
      py::arg("x"), py::arg("u"), py::arg("t"),
      "Convolution with the heat kernel exp(-z^2/4t)/sqrt(4 pi t); returns the trimmed (x, u).");

  m.def(
      "imbedding_ratios",
      [](const std::string& family, std::uint64_t seed, std::size_t count, double beta, double p, double R) {
        const auto fam = make_family(family_of(family), seed, count, R);
        std::vector<std::pair<double, double>> out;
        for (const auto& f : fam) out.emplace_back(hs_ratio(f, beta, p, R), h2_lp_ratio(f, beta, p, R));
        return out;
      },
      py::arg("family"), py::arg("seed"), py::arg("count"), py::arg("beta"), py::arg("p"), py::arg("R") = 1.0,
      py::call_guard<py::gil_scoped_release>(),
      "Per-function (Hardy-Sobolev, H2 -> Lp) norm ratios on the half-disc of radius R.");

  m.def("run_cli", &cli, py::arg("args"), "Runs the command line; returns (exit_code, stdout, stderr).");
}
