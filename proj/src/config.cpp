#include "heston/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace heston {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, int line) {
  const char* s = v.c_str();
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(d))
    throw ConfigError(line, "expected a number, got '" + v + "'");
  return d;
}

long to_int(const std::string& v, int line) {
  long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(line, "expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

std::vector<std::pair<double, double>> to_points(const std::string& v, int line) {
  std::vector<std::pair<double, double>> pts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::stringstream is(item);
    std::string a, b, extra;
    is >> a >> b;
    if (a.empty() || b.empty() || (is >> extra))
      throw ConfigError(line, "point must be 'x xi', got '" + item + "'");
    pts.emplace_back(to_double(a, line), to_double(b, line));
  }
  if (pts.empty()) throw ConfigError(line, "points list is empty");
  return pts;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, std::map<std::string, Setter>>& table() {
  static const std::map<std::string, std::map<std::string, Setter>> t = {
      {"model",
       {{"sigma", [](RunConfig& c, const std::string& v, int l) { c.model.sigma = to_double(v, l); }},
        {"kappa", [](RunConfig& c, const std::string& v, int l) { c.model.kappa = to_double(v, l); }},
        {"theta", [](RunConfig& c, const std::string& v, int l) { c.model.theta = to_double(v, l); }},
        {"rho", [](RunConfig& c, const std::string& v, int l) { c.model.rho = to_double(v, l); }},
        {"r", [](RunConfig& c, const std::string& v, int l) { c.model.r = to_double(v, l); }},
        {"q", [](RunConfig& c, const std::string& v, int l) { c.model.q = to_double(v, l); }},
        {"lambda_risk",
         [](RunConfig& c, const std::string& v, int l) { c.model.lambda_risk = to_double(v, l); }}}},
      {"weights",
       {{"gamma", [](RunConfig& c, const std::string& v, int l) { c.gamma = to_double(v, l); }},
        {"beta", [](RunConfig& c, const std::string& v, int l) { c.beta = to_double(v, l); }},
        {"mu", [](RunConfig& c, const std::string& v, int l) { c.mu = to_double(v, l); }}}},
      {"grid",
       {{"x_min", [](RunConfig& c, const std::string& v, int l) { c.grid.x_min = to_double(v, l); }},
        {"x_max", [](RunConfig& c, const std::string& v, int l) { c.grid.x_max = to_double(v, l); }},
        {"nx", [](RunConfig& c, const std::string& v, int l) { c.grid.nx = int(to_int(v, l)); }},
        {"n_xi", [](RunConfig& c, const std::string& v, int l) { c.grid.n_xi = int(to_int(v, l)); }},
        {"xi_max", [](RunConfig& c, const std::string& v, int l) { c.grid.xi_max = to_double(v, l); }},
        {"grading",
         [](RunConfig& c, const std::string& v, int l) { c.grid.grading = to_double(v, l); }}}},
      {"run",
       {{"T", [](RunConfig& c, const std::string& v, int l) { c.run.T = to_double(v, l); }},
        {"steps", [](RunConfig& c, const std::string& v, int l) { c.run.steps = int(to_int(v, l)); }},
        {"scheme",
         [](RunConfig& c, const std::string& v, int l) {
           if (v == "implicit-euler" || v == "ie") c.run.scheme = Scheme::implicit_euler;
           else if (v == "crank-nicolson" || v == "cn") c.run.scheme = Scheme::crank_nicolson;
           else throw ConfigError(l, "unknown scheme '" + v + "'");
         }},
        {"payoff",
         [](RunConfig& c, const std::string& v, int l) {
           if (v == "call") c.run.payoff = Payoff::call;
           else if (v == "put") c.run.payoff = Payoff::put;
           else throw ConfigError(l, "unknown payoff '" + v + "'");
         }},
        {"K", [](RunConfig& c, const std::string& v, int l) { c.run.K = to_double(v, l); }},
        {"far_field",
         [](RunConfig& c, const std::string& v, int l) {
           if (v == "outflow") c.run.far_field = FarField::outflow;
           else if (v == "asymptote") c.run.far_field = FarField::asymptote;
           else throw ConfigError(l, "unknown far_field policy '" + v + "'");
         }},
        {"points", [](RunConfig& c, const std::string& v, int l) { c.run.points = to_points(v, l); }},
        {"seed",
         [](RunConfig& c, const std::string& v, int l) {
           const long s = to_int(v, l);
           if (s < 0) throw ConfigError(l, "seed must be >= 0");
           c.run.seed = std::uint64_t(s);
         }},
        {"paths", [](RunConfig& c, const std::string& v, int l) { c.run.paths = int(to_int(v, l)); }},
        {"mc_steps",
         [](RunConfig& c, const std::string& v, int l) { c.run.mc_steps = int(to_int(v, l)); }},
        {"antithetic",
         [](RunConfig& c, const std::string& v, int l) { c.run.antithetic = to_bool(v, l); }},
        {"snapshots",
         [](RunConfig& c, const std::string& v, int l) { c.run.snapshots = int(to_int(v, l)); }}}},
  };
  return t;
}

void check_ranges(const RunConfig& c) {
  if (c.grid.nx < 4 || c.grid.n_xi < 4) throw ConfigError(0, "grid needs at least 4 cells per axis");
  if (!(c.grid.x_max > c.grid.x_min)) throw ConfigError(0, "x_max must exceed x_min");
  if (c.grid.xi_max < 0) throw ConfigError(0, "xi_max must be >= 0");
  if (!(c.grid.grading >= 1)) throw ConfigError(0, "grading must be >= 1");
  if (!(c.run.T > 0)) throw ConfigError(0, "T must be > 0");
  if (c.run.steps < 1) throw ConfigError(0, "steps must be >= 1");
  if (!(c.run.K > 0)) throw ConfigError(0, "K must be > 0");
  if (c.run.paths < 1 || c.run.mc_steps < 1) throw ConfigError(0, "paths and mc_steps must be >= 1");
  if (c.run.snapshots < 1) throw ConfigError(0, "snapshots must be >= 1");
}

}  // namespace

WeightParams RunConfig::weights() const {
  WeightParams w = default_weights(absorbed, gamma);
  if (beta) w.beta = *beta;
  if (mu) w.mu = *mu;
  return w;
}

double RunConfig::xi_max() const {
  return grid.xi_max > 0 ? grid.xi_max : 5.0 * absorbed.theta / absorbed.sigma;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // '#' starts a comment anywhere; ';' only at line start, since it also
    // separates entries of the points list.
    std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty() || s.front() == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!table().count(section)) throw ConfigError(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(line, "key '" + key + "' outside any section");
    const auto& keys = table().at(section);
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second)
      throw ConfigError(line, "duplicate key '" + key + "' in [" + section + "]");
    if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");
    it->second(cfg, value, line);
  }
  check_ranges(cfg);
  try {
    cfg.absorbed = absorb_risk_premium(cfg.model);
  } catch (const ParamError& e) {
    std::string msg = e.what();
    for (const auto& v : e.violations()) msg += "; " + v;
    throw ConfigError(0, msg);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[model]\n"
     << "sigma = " << num(c.model.sigma) << "\nkappa = " << num(c.model.kappa)
     << "\ntheta = " << num(c.model.theta) << "\nrho = " << num(c.model.rho)
     << "\nr = " << num(c.model.r) << "\nq = " << num(c.model.q)
     << "\nlambda_risk = " << num(c.model.lambda_risk) << "\n[weights]\ngamma = " << num(c.gamma)
     << '\n';
  if (c.beta) os << "beta = " << num(*c.beta) << '\n';
  if (c.mu) os << "mu = " << num(*c.mu) << '\n';
  os << "[grid]\nx_min = " << num(c.grid.x_min) << "\nx_max = " << num(c.grid.x_max)
     << "\nnx = " << c.grid.nx << "\nn_xi = " << c.grid.n_xi << "\nxi_max = " << num(c.xi_max())
     << "\ngrading = " << num(c.grid.grading) << "\n[run]\nT = " << num(c.run.T)
     << "\nsteps = " << c.run.steps
     << "\nscheme = " << (c.run.scheme == Scheme::implicit_euler ? "implicit-euler" : "crank-nicolson")
     << "\npayoff = " << (c.run.payoff == Payoff::call ? "call" : "put") << "\nK = " << num(c.run.K)
     << "\nfar_field = " << (c.run.far_field == FarField::outflow ? "outflow" : "asymptote")
     << "\npoints = ";
  for (std::size_t i = 0; i < c.run.points.size(); ++i)
    os << (i ? "; " : "") << num(c.run.points[i].first) << ' ' << num(c.run.points[i].second);
  os << "\nseed = " << c.run.seed << "\npaths = " << c.run.paths << "\nmc_steps = " << c.run.mc_steps
     << "\nantithetic = " << (c.run.antithetic ? "true" : "false")
     << "\nsnapshots = " << c.run.snapshots << '\n';
  return os.str();
}

}  // namespace heston
