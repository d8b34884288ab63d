#include "heston/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>

namespace heston {

namespace {

std::vector<double> trapezoid(const std::vector<double>& z) {
  std::vector<double> w(z.size(), 0.0);
  for (std::size_t k = 0; k + 1 < z.size(); ++k) {
    const double h = z[k + 1] - z[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

}  // namespace

Grid2D::Grid2D(std::vector<double> x_nodes, std::vector<double> xi_nodes, double grading)
    : x_(std::move(x_nodes)), xi_(std::move(xi_nodes)), grading_(grading) {
  if (x_.size() < 3 || xi_.size() < 3) throw std::invalid_argument("grid needs >= 3 nodes per axis");
  for (std::size_t k = 1; k < x_.size(); ++k)
    if (!(x_[k] > x_[k - 1])) throw std::invalid_argument("x nodes must increase strictly");
  for (std::size_t k = 1; k < xi_.size(); ++k)
    if (!(xi_[k] > xi_[k - 1])) throw std::invalid_argument("xi nodes must increase strictly");
  if (xi_[0] != 0.0) throw std::invalid_argument("xi nodes must start at 0");
  wx_ = trapezoid(x_);
  wxi_ = trapezoid(xi_);
}

std::shared_ptr<const Grid2D> Grid2D::make(double x_min, double x_max, int nx_cells, double xi_max,
                                           int n_xi_cells, double q) {
  if (nx_cells < 2 || n_xi_cells < 2) throw std::invalid_argument("need >= 2 cells per axis");
  if (!(x_max > x_min) || !(xi_max > 0) || !(q >= 1)) throw std::invalid_argument("bad grid extents");
  std::vector<double> x(nx_cells + 1), xi(n_xi_cells + 1);
  const double hx = (x_max - x_min) / nx_cells;
  for (int i = 0; i <= nx_cells; ++i) x[i] = x_min + i * hx;
  x[nx_cells] = x_max;
  // A node exactly at x = 0 when the interval is symmetric and the cell count even.
  for (auto& v : x)
    if (std::abs(v) < 1e-14 * (x_max - x_min)) v = 0.0;
  for (int j = 0; j <= n_xi_cells; ++j) xi[j] = xi_max * std::pow(double(j) / n_xi_cells, q);
  xi[n_xi_cells] = xi_max;
  return std::make_shared<const Grid2D>(std::move(x), std::move(xi), q);
}

double Grid2D::hx_max() const {
  double h = 0;
  for (std::size_t k = 1; k < x_.size(); ++k) h = std::max(h, x_[k] - x_[k - 1]);
  return h;
}

std::string Grid2D::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](const std::vector<double>& v) {
    for (double d : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ULL;
      }
    }
  };
  feed(x_);
  feed(xi_);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Field::Field(GridPtr g, std::vector<double> v, double t) : grid(std::move(g)), values(std::move(v)), time(t) {
  if (values.size() != grid->size()) throw std::invalid_argument("field shape does not match grid");
}

bool Field::finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double Field::sup() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void require_same_grid(const Field& a, const Field& b) {
  if (a.grid != b.grid && !a.grid->same_as(*b.grid)) throw std::invalid_argument("grid mismatch");
}

std::array<double, 3> lagrange3(const double* z, double at, int deriv) {
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    const double den = (z[k] - z[a]) * (z[k] - z[b]);
    switch (deriv) {
      case 0: w[k] = (at - z[a]) * (at - z[b]) / den; break;
      case 1: w[k] = ((at - z[a]) + (at - z[b])) / den; break;
      case 2: w[k] = 2.0 / den; break;
      default: throw std::invalid_argument("lagrange3: derivative order must be 0..2");
    }
  }
  return w;
}

Derivatives derivatives(const Field& f) {
  const Grid2D& g = *f.grid;
  const std::size_t nx = g.nx(), ny = g.nxi();
  Derivatives d;
  for (auto* v : {&d.fx, &d.fxi, &d.fxx, &d.fxxi, &d.fxixi}) v->assign(g.size(), 0.0);

  std::vector<std::array<double, 3>> dx1(nx), dx2(nx), dy1(ny), dy2(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const std::size_t s = stencil_start(i, nx);
    dx1[i] = lagrange3(&g.x()[s], g.x(i), 1);
    dx2[i] = lagrange3(&g.x()[s], g.x(i), 2);
  }
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t s = stencil_start(j, ny);
    dy1[j] = lagrange3(&g.xi()[s], g.xi(j), 1);
    dy2[j] = lagrange3(&g.xi()[s], g.xi(j), 2);
  }
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t sj = stencil_start(j, ny);
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t si = stencil_start(i, nx);
      const std::size_t n = g.index(i, j);
      for (int a = 0; a < 3; ++a) {
        const double ux = f(si + a, j), uy = f(i, sj + a);
        d.fx[n] += dx1[i][a] * ux;
        d.fxx[n] += dx2[i][a] * ux;
        d.fxi[n] += dy1[j][a] * uy;
        d.fxixi[n] += dy2[j][a] * uy;
        for (int b = 0; b < 3; ++b) d.fxxi[n] += dx1[i][a] * dy1[j][b] * f(si + a, sj + b);
      }
    }
  }
  return d;
}

double interpolate(const Field& f, double x, double xi) {
  const Grid2D& g = *f.grid;
  const auto& X = g.x();
  const auto& Y = g.xi();
  if (x < X.front() || x > X.back() || xi < Y.front() || xi > Y.back())
    throw std::out_of_range("evaluation point outside grid");
  std::size_t i = std::upper_bound(X.begin(), X.end(), x) - X.begin();
  std::size_t j = std::upper_bound(Y.begin(), Y.end(), xi) - Y.begin();
  i = std::clamp<std::size_t>(i, 1, X.size() - 1) - 1;
  j = std::clamp<std::size_t>(j, 1, Y.size() - 1) - 1;
  const double sx = (x - X[i]) / (X[i + 1] - X[i]);
  const double sy = (xi - Y[j]) / (Y[j + 1] - Y[j]);
  return (1 - sx) * (1 - sy) * f(i, j) + sx * (1 - sy) * f(i + 1, j) + (1 - sx) * sy * f(i, j + 1) +
         sx * sy * f(i + 1, j + 1);
}

}  // namespace heston
