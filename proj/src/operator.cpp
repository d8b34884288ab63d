#include "heston/operator.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "heston/spaces.hpp"

namespace heston {

Coeffs heston_coeffs(const ModelParams& p, double xi) {
  const double s = 0.5 * p.sigma * xi;
  // -(s)[(u_x + 2 rho u_xi)_x + u_xixi] + (q_r + s) u_x - kappa(theta_sigma - xi) u_xi
  return {-s, -2.0 * p.rho * s, -s, p.q_r() + s, -p.kappa * (p.theta_sigma() - xi)};
}

Coeffs remainder_coeffs(const ModelParams& p, double xi) {
  const double s = 0.5 * p.sigma * xi;
  return {s, 2.0 * p.rho * s, s, -s, -p.kappa * xi};
}

Coeffs boundary_coeffs(const ModelParams& p) { return {0, 0, 0, p.q_r(), -p.kappa * p.theta_sigma()}; }

namespace {

// 1D row pieces: second-derivative and first-derivative weights on the
// three nodes starting at s, possibly switched to upwind.
struct Row1D {
  std::array<double, 3> w{};  // a * D2 + b * D1 contributions
  std::array<double, 3> d1{}; // first-derivative weights used for the mixed term
  std::size_t start = 0;
};

Row1D row_1d(const std::vector<double>& z, std::size_t k, double a, double b, bool allow_upwind) {
  Row1D r;
  r.start = stencil_start(k, z.size());
  const double* zz = &z[r.start];
  const auto d1 = lagrange3(zz, z[k], 1);
  const auto d2 = lagrange3(zz, z[k], 2);
  r.d1 = d1;
  for (int t = 0; t < 3; ++t) r.w[t] = a * d2[t] + b * d1[t];
  if (!allow_upwind || r.start + 1 != k) return r;
  // Off-diagonal entries of the operator row must be <= 0 for an M-matrix.
  const double tol = 1e-12 * (std::abs(r.w[0]) + std::abs(r.w[1]) + std::abs(r.w[2]));
  if (r.w[0] <= tol && r.w[2] <= tol) return r;
  for (int t = 0; t < 3; ++t) r.w[t] = a * d2[t];
  if (b > 0) {
    const double h = z[k] - z[k - 1];
    r.w[0] -= b / h;
    r.w[1] += b / h;
  } else {
    const double h = z[k + 1] - z[k];
    r.w[1] -= b / h;
    r.w[2] += b / h;
  }
  return r;
}

}  // namespace

DiscreteOperator::DiscreteOperator(GridPtr grid, const ModelParams& p, const WeightParams& w,
                                   Convection conv)
    : grid_(std::move(grid)), params_(p), weights_(w), conv_(conv) {
  check_fields(params_);
  const std::size_t n = grid_->size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * n);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t j = 0; j < grid_->nxi(); ++j)
    for (std::size_t i = 0; i < grid_->nx(); ++i) {
      if (far_field(i, j)) continue;
      row.clear();
      if (j == 0) boundary_row(i, row);
      else stencil_row(i, j, heston_coeffs(params_, grid_->xi(j)), row);
      const std::size_t r = grid_->index(i, j);
      for (auto [c, v] : row) trip.emplace_back(int(r), int(c), v);
    }
  mat_.resize(int(n), int(n));
  mat_.setFromTriplets(trip.begin(), trip.end());
  mat_.makeCompressed();
}

void DiscreteOperator::stencil_row(std::size_t i, std::size_t j, const Coeffs& c,
                                   std::vector<std::pair<std::size_t, double>>& out) const {
  const bool up = conv_ == Convection::upwind_when_dominated;
  const Row1D rx = row_1d(grid_->x(), i, c.a, c.bx, up);
  const Row1D ry = row_1d(grid_->xi(), j, c.c, c.bxi, up);
  for (int t = 0; t < 3; ++t) {
    out.emplace_back(grid_->index(rx.start + t, j), rx.w[t]);
    out.emplace_back(grid_->index(i, ry.start + t), ry.w[t]);
  }
  if (c.m != 0.0)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        out.emplace_back(grid_->index(rx.start + a, ry.start + b), c.m * rx.d1[a] * ry.d1[b]);
}

void DiscreteOperator::boundary_row(std::size_t i, std::vector<std::pair<std::size_t, double>>& out) const {
  const Coeffs c = boundary_coeffs(params_);
  const bool up = conv_ == Convection::upwind_when_dominated;
  const Row1D rx = row_1d(grid_->x(), i, 0.0, c.bx, up);
  for (int t = 0; t < 3; ++t) out.emplace_back(grid_->index(rx.start + t, 0), rx.w[t]);
  const auto& z = grid_->xi();
  if (up) {
    // First-order forward difference keeps the sign pattern of an M-matrix.
    out.emplace_back(grid_->index(i, 0), -c.bxi / z[1]);
    out.emplace_back(grid_->index(i, 1), c.bxi / z[1]);
  } else {
    const auto d1 = lagrange3(&z[0], z[0], 1);
    for (int t = 0; t < 3; ++t) out.emplace_back(grid_->index(i, t), c.bxi * d1[t]);
  }
}

Field DiscreteOperator::apply_rows(const Field& f, Coeffs (*coef)(const ModelParams&, double)) const {
  require_same_grid(f, Field(grid_));
  Field out(grid_, f.time);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t j = 1; j + 1 < grid_->nxi(); ++j)
    for (std::size_t i = 1; i + 1 < grid_->nx(); ++i) {
      row.clear();
      stencil_row(i, j, coef(params_, grid_->xi(j)), row);
      // Difference form: every stencil sums to zero in exact arithmetic, and
      // writing it against the centre value keeps A(1) = 0 in floating point too.
      const double centre = f(i, j);
      double s = 0;
      for (auto [c, v] : row) s += v * (f.values[c] - centre);
      out(i, j) = s;
    }
  return out;
}

Field DiscreteOperator::apply_A(const Field& f) const { return apply_rows(f, heston_coeffs); }

Field DiscreteOperator::apply_g(const Field& f) const { return apply_rows(f, remainder_coeffs); }

std::vector<double> DiscreteOperator::apply_B(const Field& f) const {
  require_same_grid(f, Field(grid_));
  const Coeffs c = boundary_coeffs(params_);
  const auto& x = grid_->x();
  const auto& z = grid_->xi();
  const auto dxi = lagrange3(&z[0], z[0], 1);
  std::vector<double> out(grid_->nx());
  for (std::size_t i = 0; i < grid_->nx(); ++i) {
    const std::size_t s = stencil_start(i, x.size());
    const auto dx = lagrange3(&x[s], x[i], 1);
    double ux = 0, uxi = 0;
    for (int t = 0; t < 3; ++t) {
      ux += dx[t] * (f(s + t, 0) - f(i, 0));
      uxi += dxi[t] * (f(i, t) - f(i, 0));
    }
    out[i] = c.bx * ux + c.bxi * uxi;
  }
  return out;
}

std::vector<std::size_t> DiscreteOperator::m_matrix_violations() const {
  std::vector<std::size_t> bad;
  Eigen::SparseMatrix<double, Eigen::RowMajor> rm = mat_;
  for (int r = 0; r < rm.outerSize(); ++r) {
    double diag = 0, scale = 0;
    bool off_bad = false;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rm, r); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rm, r); it; ++it) {
      if (it.col() == r) diag = it.value();
      else if (it.value() > 1e-12 * scale) off_bad = true;
    }
    if (scale > 0 && (off_bad || diag < 0)) bad.push_back(std::size_t(r));
  }
  return bad;
}

std::string export_triplets(const SpMat& m) {
  std::vector<std::tuple<int, int, double>> t;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  std::sort(t.begin(), t.end());
  std::ostringstream os;
  char buf[96];
  for (auto& [r, c, v] : t) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r, c, v);
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Galerkin form

FormAssembly assemble_form(GridPtr grid, const ModelParams& p, const WeightParams& w, unsigned terms,
                           Convection conv) {
  const ValidityReport rep = validate(p, w);
  if (!rep.admissible()) throw std::invalid_argument("assemble_form: parameters are not admissible");

  FormAssembly fa;
  fa.op = std::make_shared<DiscreteOperator>(grid, p, w, conv);
  const Grid2D& g = *grid;
  const std::size_t n = g.size();

  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                   0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                   0.3478548451374538};

  std::vector<Eigen::Triplet<double>> tp, td;
  fa.gram = Eigen::VectorXd::Zero(Eigen::Index(n));
  const double sg = p.sigma, rho = p.rho, ka = p.kappa;

  for (std::size_t j = 0; j + 1 < g.nxi(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
      const double x0 = g.x(i), x1 = g.x(i + 1), y0 = g.xi(j), y1 = g.xi(j + 1);
      const double hx = x1 - x0, hy = y1 - y0;
      const std::size_t node[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)};
      double P[4][4] = {}, D[4][4] = {}, M[4] = {};
      for (int qa = 0; qa < 4; ++qa)
        for (int qb = 0; qb < 4; ++qb) {
          const double sx = 0.5 * (1 + gx[qa]), sy = 0.5 * (1 + gx[qb]);
          const double x = x0 + sx * hx, xi = y0 + sy * hy;
          const double wq = 0.25 * gw[qa] * gw[qb] * hx * hy * weight_w(x, xi, w);
          const double sgn = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
          const double phi[4] = {(1 - sx) * (1 - sy), sx * (1 - sy), (1 - sx) * sy, sx * sy};
          const double px[4] = {-(1 - sy) / hx, (1 - sy) / hx, -sy / hx, sy / hx};
          const double py[4] = {-(1 - sx) / hy, -sx / hy, (1 - sx) / hy, sx / hy};
          const double cx1 = 0.5 * sg * (1 - w.gamma * sgn) * xi;
          const double cy1 = (ka - w.gamma * rho * sg * sgn - 0.5 * w.mu * sg) * xi;
          const double cx0 = p.q_r();
          const double cy0 = 0.5 * w.beta * sg - ka * p.theta_sigma();
          for (int a = 0; a < 4; ++a) {
            M[a] += phi[a] * wq;
            for (int b = 0; b < 4; ++b) {
              P[a][b] += 0.5 * sg * (px[b] * px[a] + 2 * rho * py[b] * px[a] + py[b] * py[a]) * xi * wq;
              D[a][b] += ((cx1 + cx0) * px[b] + (cy1 + cy0) * py[b]) * phi[a] * wq;
            }
          }
        }
      for (int a = 0; a < 4; ++a) {
        fa.gram[Eigen::Index(node[a])] += M[a];
        for (int b = 0; b < 4; ++b) {
          if (terms & principal_terms) tp.emplace_back(int(node[a]), int(node[b]), P[a][b]);
          if (terms & drift_terms) td.emplace_back(int(node[a]), int(node[b]), D[a][b]);
        }
      }
    }
  fa.principal.resize(int(n), int(n));
  fa.drift.resize(int(n), int(n));
  fa.principal.setFromTriplets(tp.begin(), tp.end());
  fa.drift.setFromTriplets(td.begin(), td.end());
  for (std::size_t j = 0; j < g.nxi(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      if (!fa.op->far_field(i, j)) fa.dofs.push_back(g.index(i, j));
  return fa;
}

namespace {

using Ldlt = Eigen::SimplicialLDLT<SpMat, Eigen::Lower>;

SpMat shifted(const SpMat& C, double s) {
  SpMat I(C.rows(), C.cols());
  I.setIdentity();
  return C - s * I;
}

// Number of eigenvalues of C below s, or -1 if the factorisation broke down.
int count_below(const SpMat& C, double s) {
  Ldlt ldlt(shifted(C, s));
  if (ldlt.info() != Eigen::Success) return -1;
  const Eigen::VectorXd d = ldlt.vectorD();
  int neg = 0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!std::isfinite(d[k])) return -1;
    if (d[k] < 0) ++neg;
  }
  return neg;
}

}  // namespace

Lambda0Estimate estimate_lambda0(const FormAssembly& fa, int max_iter) {
  const SpMat F = fa.form();
  const SpMat S = 0.5 * (F + SpMat(F.transpose()));
  const std::size_t m = fa.dofs.size();
  std::vector<int> pos(fa.gram.size(), -1);
  for (std::size_t k = 0; k < m; ++k) pos[fa.dofs[k]] = int(k);

  // C = G^{-1/2} S G^{-1/2} on the dof set.
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < S.outerSize(); ++k)
    for (SpMat::InnerIterator it(S, k); it; ++it) {
      const int r = pos[it.row()], c = pos[it.col()];
      if (r < 0 || c < 0) continue;
      t.emplace_back(r, c, it.value() / std::sqrt(fa.gram[it.row()] * fa.gram[it.col()]));
    }
  SpMat C(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  C.setFromTriplets(t.begin(), t.end());

  // Gershgorin lower bound.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(int(m)), rad = Eigen::VectorXd::Zero(int(m));
  for (int k = 0; k < C.outerSize(); ++k)
    for (SpMat::InnerIterator it(C, k); it; ++it) {
      if (it.row() == it.col()) diag[it.row()] += it.value();
      else rad[it.row()] += std::abs(it.value());
    }
  double lo = (diag - rad).minCoeff();
  lo -= 1e-9 * (1.0 + std::abs(lo));

  Eigen::VectorXd x(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) x[int(k)] = 1.0 + 0.25 * std::sin(0.7 * double(k));
  x.normalize();
  double hi = x.dot(C * x);

  // Bisection on the inertia brackets lambda_min in [lo, hi].
  Lambda0Estimate est;
  for (int it = 0; it < 200 && hi - lo > 1e-7 * (1.0 + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    int cnt = count_below(C, mid);
    if (cnt < 0) {
      mid += 1e-6 * (hi - lo);
      cnt = count_below(C, mid);
      if (cnt < 0) break;
    }
    if (cnt == 0) lo = mid;
    else hi = mid;
  }

  // Inverse iteration just below the bracket.
  const double shift = lo - 1e-9 * (1.0 + std::abs(lo));
  Ldlt ldlt(shifted(C, shift));
  double rq = hi;
  if (ldlt.info() == Eigen::Success) {
    for (int it = 0; it < max_iter; ++it) {
      Eigen::VectorXd y = ldlt.solve(x);
      x = y.normalized();
      const double next = x.dot(C * x);
      est.iterations = it + 1;
      if (std::abs(next - rq) <= 1e-12 * (1.0 + std::abs(next))) {
        rq = next;
        est.converged = true;
        break;
      }
      rq = next;
    }
  }
  est.lambda_min = rq;
  est.lower = std::min(lo, rq);
  est.lambda0 = std::max(0.0, -est.lower);
  return est;
}

// ---------------------------------------------------------------------------

Resolvent::Resolvent(std::shared_ptr<const DiscreteOperator> op, double lambda)
    : op_(std::move(op)), lambda_(lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw std::invalid_argument("resolvent: lambda must be > 0");
  SpMat I(op_->matrix().rows(), op_->matrix().cols());
  I.setIdentity();
  sys_ = op_->matrix() + lambda * I;
  sys_.makeCompressed();
  lu_.analyzePattern(sys_);
  lu_.factorize(sys_);
  if (lu_.info() != Eigen::Success) throw SolverError("resolvent factorisation failed: " + lu_.lastErrorMessage());
}

Field Resolvent::apply(const Field& u) const {
  require_same_grid(u, Field(op_->grid_ptr()));
  Eigen::Map<const Eigen::VectorXd> v(u.values.data(), Eigen::Index(u.values.size()));
  Eigen::VectorXd r = sys_ * v;
  return Field(op_->grid_ptr(), std::vector<double>(r.data(), r.data() + r.size()), u.time);
}

Field Resolvent::solve(const Field& rhs) const {
  require_same_grid(rhs, Field(op_->grid_ptr()));
  Eigen::Map<const Eigen::VectorXd> b(rhs.values.data(), Eigen::Index(rhs.values.size()));
  Eigen::VectorXd u = lu_.solve(b);
  const double bn = b.norm();
  Eigen::VectorXd res = b - sys_ * u;
  if (bn > 0 && res.norm() > 1e-12 * bn) {
    u += lu_.solve(res);  // one step of iterative refinement
    res = b - sys_ * u;
  }
  residual_ = bn > 0 ? res.norm() / bn : res.norm();
  if (!u.allFinite()) throw SolverError("resolvent solve produced non-finite values");
  if (residual_ > 1e-10) throw SolverError("resolvent residual above 1e-10");
  return Field(op_->grid_ptr(), std::vector<double>(u.data(), u.data() + u.size()), rhs.time);
}

Field resolvent_solve(const FormAssembly& fa, double lambda, const Field& rhs) {
  return Resolvent(fa.op, lambda).solve(rhs);
}

}  // namespace heston
