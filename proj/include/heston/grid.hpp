#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace heston {

// Tensor grid over (x, xi). Node (i, j) has flat index j * nx() + i, so each
// xi-level (in particular the boundary row j = 0) is contiguous.
class Grid2D {
 public:
  Grid2D(std::vector<double> x_nodes, std::vector<double> xi_nodes, double grading);

  // Uniform in x with nx cells, xi_j = xi_max * (j / n_xi)^q.
  static std::shared_ptr<const Grid2D> make(double x_min, double x_max, int nx_cells, double xi_max,
                                            int n_xi_cells, double q);

  std::size_t nx() const { return x_.size(); }
  std::size_t nxi() const { return xi_.size(); }
  std::size_t size() const { return x_.size() * xi_.size(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * x_.size() + i; }

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& xi() const { return xi_; }
  double x(std::size_t i) const { return x_[i]; }
  double xi(std::size_t j) const { return xi_[j]; }
  double grading() const { return grading_; }

  // Trapezoid weights per axis; cell weight of node (i, j) is wx[i] * wxi[j].
  const std::vector<double>& wx() const { return wx_; }
  const std::vector<double>& wxi() const { return wxi_; }
  double quad_weight(std::size_t i, std::size_t j) const { return wx_[i] * wxi_[j]; }

  double hx_max() const;
  double hxi_min() const { return xi_[1] - xi_[0]; }

  // Stable textual hash of the node coordinates (FNV-1a over the bit patterns).
  std::string hash() const;

  bool same_as(const Grid2D& o) const { return x_ == o.x_ && xi_ == o.xi_; }

 private:
  std::vector<double> x_, xi_, wx_, wxi_;
  double grading_;
};

using GridPtr = std::shared_ptr<const Grid2D>;

struct Field {
  GridPtr grid;
  std::vector<double> values;
  double time = 0.0;

  Field() = default;
  Field(GridPtr g, double t = 0.0) : grid(std::move(g)), values(grid->size(), 0.0), time(t) {}
  Field(GridPtr g, std::vector<double> v, double t = 0.0);

  double& operator()(std::size_t i, std::size_t j) { return values[grid->index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return values[grid->index(i, j)]; }

  template <class F>
  static Field sample(GridPtr g, F&& f, double t = 0.0) {
    Field out(g, t);
    for (std::size_t j = 0; j < g->nxi(); ++j)
      for (std::size_t i = 0; i < g->nx(); ++i) out(i, j) = f(g->x(i), g->xi(j));
    return out;
  }

  bool finite() const;
  double sup() const;
};

void require_same_grid(const Field& a, const Field& b);

// Three-point Lagrange derivative weights: derivative of order `deriv`
// (0, 1, 2) at `at` of the interpolant through nodes z[0..2].
std::array<double, 3> lagrange3(const double* z, double at, int deriv);

// Offset of the first stencil node for a derivative at node k of an axis
// with n nodes: k-1 in the interior, k at the low edge, k-2 at the high edge.
inline std::size_t stencil_start(std::size_t k, std::size_t n) {
  if (k == 0) return 0;
  if (k + 1 >= n) return n - 3;
  return k - 1;
}

// Grid derivatives of a field; second order in the interior, one-sided
// three-point at edges.
struct Derivatives {
  std::vector<double> fx, fxi, fxx, fxxi, fxixi;
};
Derivatives derivatives(const Field& f);

// Bilinear interpolation; throws std::out_of_range outside the grid.
double interpolate(const Field& f, double x, double xi);

}  // namespace heston
