#include "heston/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "heston/verdict.hpp"

namespace heston {

double weight_w(double x, double xi, const WeightParams& w) {
  if (!(xi > 0)) throw std::domain_error("weight_w: xi must be > 0");
  return std::pow(xi, w.beta - 1.0) * std::exp(-w.gamma * std::abs(x) - w.mu * xi);
}

double weight_node(double x, double xi, const WeightParams& w) {
  return xi > 0 ? weight_w(x, xi, w) : 0.0;
}

double cyclo_dist(Point a, Point b) {
  const double d = std::hypot(a.x - b.x, a.xi - b.xi);
  if (d == 0.0) return 0.0;
  return d / std::sqrt(a.xi + b.xi + d);
}

double norm_l2w(const Field& f, const WeightParams& w) {
  const Grid2D& g = *f.grid;
  double s = 0;
  for (std::size_t j = 1; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      s += g.quad_weight(i, j) * f(i, j) * f(i, j) * weight_w(g.x(i), g.xi(j), w);
  return std::sqrt(s);
}

double norm_h1w(const Field& f, const WeightParams& w) {
  const Grid2D& g = *f.grid;
  const Derivatives d = derivatives(f);
  double semi = 0;
  for (std::size_t j = 1; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      semi += g.quad_weight(i, j) * (d.fx[n] * d.fx[n] + d.fxi[n] * d.fxi[n]) * g.xi(j) *
              weight_w(g.x(i), g.xi(j), w);
    }
  const double l2 = norm_l2w(f, w);
  return std::sqrt(l2 * l2 + semi);
}

namespace {

void require_disc(const Grid2D& g, const Disc& disc) {
  for (std::size_t j = 0; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      if (disc.contains(g.x(i), g.xi(j))) return;
  throw std::invalid_argument("disc does not intersect the grid");
}

}  // namespace

double norm_h2w_local(const Field& f, const WeightParams& w, const Disc& disc) {
  const Grid2D& g = *f.grid;
  require_disc(g, disc);
  const Derivatives d = derivatives(f);
  double s = 0;
  for (std::size_t j = 1; j < g.nxi(); ++j) {
    const double xi = g.xi(j);
    const double lo = std::pow(xi, w.beta - 1.0), hi = std::pow(xi, w.beta + 1.0);
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (!disc.contains(g.x(i), xi)) continue;
      const std::size_t n = g.index(i, j);
      const double second = d.fxx[n] * d.fxx[n] + d.fxxi[n] * d.fxxi[n] + d.fxixi[n] * d.fxixi[n];
      const double first = d.fx[n] * d.fx[n] + d.fxi[n] * d.fxi[n];
      s += g.quad_weight(i, j) * (second * hi + (first + f(i, j) * f(i, j)) * lo);
    }
  }
  return std::sqrt(s);
}

double norm_lpw(const Field& f, const WeightParams& w, double p, const Disc& disc) {
  if (!(p >= 1)) throw std::invalid_argument("norm_lpw: p must be >= 1");
  const Grid2D& g = *f.grid;
  require_disc(g, disc);
  double s = 0;
  for (std::size_t j = 1; j < g.nxi(); ++j) {
    const double lo = std::pow(g.xi(j), w.beta - 1.0);
    for (std::size_t i = 0; i < g.nx(); ++i)
      if (disc.contains(g.x(i), g.xi(j)))
        s += g.quad_weight(i, j) * std::pow(std::abs(f(i, j)), p) * lo;
  }
  return std::pow(s, 1.0 / p);
}

namespace {

struct Sample {
  Point at;
  double v;
};

std::vector<Sample> disc_samples(const Grid2D& g, const Disc& disc, const std::vector<double>& vals) {
  std::vector<Sample> out;
  for (std::size_t j = 0; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      if (disc.contains(g.x(i), g.xi(j))) out.push_back({{g.x(i), g.xi(j)}, vals[g.index(i, j)]});
  return out;
}

// Pairs are enumerated in a fixed order and every s-th one is kept, where s
// is the smallest power of two that fits the budget. Doubling the budget
// halves s (or keeps it), so the sampled set only grows.
HolderEstimate sampled_seminorm(const std::vector<Sample>& pts, double alpha, std::size_t budget) {
  HolderEstimate est;
  const std::size_t n = pts.size();
  const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;
  std::size_t stride = 1;
  while (budget > 0 && total / stride > budget) stride *= 2;
  est.exhaustive = stride == 1;
  std::size_t k = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b, ++k) {
      if (k % stride) continue;
      const double s = cyclo_dist(pts[a].at, pts[b].at);
      if (s == 0) continue;
      est.value = std::max(est.value, std::abs(pts[a].v - pts[b].v) / std::pow(s, alpha));
      ++est.pairs;
    }
  return est;
}

}  // namespace

HolderEstimate holder_seminorm(const Field& f, double alpha, const Disc& disc, std::size_t budget) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("holder_seminorm: alpha must lie in (0,1)");
  return sampled_seminorm(disc_samples(*f.grid, disc, f.values), alpha, budget);
}

HolderEstimate holder_2alpha(const Field& f, double alpha, const Disc& disc, std::size_t budget) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("holder_2alpha: alpha must lie in (0,1)");
  const Grid2D& g = *f.grid;
  const Derivatives d = derivatives(f);
  std::vector<double> xfxx(g.size()), xfxxi(g.size()), xfxixi(g.size());
  for (std::size_t j = 0; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const std::size_t n = g.index(i, j);
      xfxx[n] = g.xi(j) * d.fxx[n];
      xfxxi[n] = g.xi(j) * d.fxxi[n];
      xfxixi[n] = g.xi(j) * d.fxixi[n];
    }
  HolderEstimate total;
  total.exhaustive = true;
  const std::vector<const std::vector<double>*> comps = {&f.values, &d.fx, &d.fxi, &xfxx, &xfxxi, &xfxixi};
  for (const std::vector<double>* v : comps) {
    const auto pts = disc_samples(g, disc, *v);
    double sup = 0;
    for (const auto& p : pts) sup = std::max(sup, std::abs(p.v));
    const HolderEstimate e = sampled_seminorm(pts, alpha, budget);
    total.value += sup + e.value;
    total.pairs += e.pairs;
    total.exhaustive = total.exhaustive && e.exhaustive;
  }
  return total;
}

DecayRecord boundary_limit_xiD2(const Field& f, double x_star, std::size_t levels) {
  const Grid2D& g = *f.grid;
  if (!(x_star > g.x().front() && x_star < g.x().back()))
    throw std::invalid_argument("boundary_limit_xiD2: x_star must lie strictly inside the x-range");
  const std::size_t avail = g.nxi() - 1;
  if (avail < 4) throw std::invalid_argument("boundary_limit_xiD2: fewer than 4 positive xi levels");
  levels = std::min(levels, avail);

  const Derivatives d = derivatives(f);
  const auto& X = g.x();
  std::size_t i = std::upper_bound(X.begin(), X.end(), x_star) - X.begin() - 1;
  i = std::min(i, X.size() - 2);
  const double s = (x_star - X[i]) / (X[i + 1] - X[i]);

  DecayRecord rec;
  rec.x_star = x_star;
  for (std::size_t j = 1; j <= levels; ++j) {
    auto mag = [&](std::size_t ii) {
      const std::size_t n = g.index(ii, j);
      return std::abs(d.fxx[n]) + std::abs(d.fxxi[n]) + std::abs(d.fxixi[n]);
    };
    rec.xi.push_back(g.xi(j));
    rec.values.push_back(g.xi(j) * ((1 - s) * mag(i) + s * mag(i + 1)));
  }
  // Least squares on the positive entries only.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < rec.values.size(); ++k) {
    if (!(rec.values[k] > 0)) continue;
    const double lx = std::log(rec.xi[k]), ly = std::log(rec.values[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  rec.exponent = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx)
                        : std::numeric_limits<double>::quiet_NaN();
  return rec;
}

std::string NormReport::csv_header() {
  return "time,l2w,h1w,h2w_local,lpw,p,holder_alpha,alpha,holder_2alpha";
}

std::string NormReport::csv_row() const {
  std::ostringstream os;
  os << fmt_num(time) << ',' << fmt_num(l2w) << ',' << fmt_num(h1w) << ',' << fmt_num(h2w_local) << ','
     << fmt_num(lpw) << ',' << fmt_num(p) << ',' << fmt_num(holder_alpha) << ',' << fmt_num(alpha) << ','
     << fmt_num(holder_2alpha);
  return os.str();
}

NormReport norm_report(const Field& f, const WeightParams& w, const Disc& disc, double p, double alpha,
                       std::size_t budget) {
  NormReport r;
  r.time = f.time;
  r.l2w = norm_l2w(f, w);
  r.h1w = norm_h1w(f, w);
  r.h2w_local = norm_h2w_local(f, w, disc);
  r.p = p;
  r.lpw = norm_lpw(f, w, p, disc);
  r.alpha = alpha;
  r.holder_alpha = holder_seminorm(f, alpha, disc, budget).value;
  r.holder_2alpha = holder_2alpha(f, alpha, disc, budget).value;
  return r;
}

}  // namespace heston
