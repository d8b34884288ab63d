#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "heston/operator.hpp"
#include "support.hpp"

using namespace heston;

namespace {

// Analytic A u from the derivatives of u, written out independently of the
// coefficient tables.
double A_exact(const ModelParams& p, double xi, double ux, double uxi, double uxx, double uxxi, double uxixi) {
  return -0.5 * p.sigma * xi * (uxx + 2 * p.rho * uxxi + uxixi) + (p.q_r() + 0.5 * p.sigma * xi) * ux -
         p.kappa * (p.theta_sigma() - xi) * uxi;
}

struct Monomial {
  int a, b;  // x^a xi^b
  double operator()(double x, double xi) const { return std::pow(x, a) * std::pow(xi, b); }
  double d(double x, double xi, int dx, int dxi) const {
    double c = 1;
    for (int k = 0; k < dx; ++k) c *= a - k;
    for (int k = 0; k < dxi; ++k) c *= b - k;
    if (c == 0) return 0;
    return c * std::pow(x, a - dx) * std::pow(xi, b - dxi);
  }
};

std::shared_ptr<DiscreteOperator> make_op(int n, const ModelParams& p, double grading = 2.0) {
  const auto g = Grid2D::make(-2, 2, n, 2.0, n, grading);
  return std::make_shared<DiscreteOperator>(g, p, default_weights(p, 2.5));
}

ModelParams pinned(int k) { return heston::testing::model_of(heston::testing::kPinned[k]); }

bool interior(const DiscreteOperator& op, std::size_t i, std::size_t j) { return j > 0 && !op.far_field(i, j); }

}  // namespace

TEST(Coefficients, SplitIntoBoundaryPartAndRemainder) {
  const ModelParams p = pinned(0);
  for (double xi : {0.0, 0.1, 1.0, 3.7}) {
    const Coeffs a = heston_coeffs(p, xi), b = boundary_coeffs(p), g = remainder_coeffs(p, xi);
    EXPECT_DOUBLE_EQ(a.a, b.a - g.a);
    EXPECT_DOUBLE_EQ(a.m, b.m - g.m);
    EXPECT_DOUBLE_EQ(a.c, b.c - g.c);
    EXPECT_NEAR(a.bx, b.bx - g.bx, 1e-15);
    EXPECT_NEAR(a.bxi, b.bxi - g.bxi, 1e-15);
  }
}

TEST(Operator, AnnihilatesConstants) {
  const auto op = make_op(40, pinned(1));
  const Field one = Field::sample(op->grid_ptr(), [](double, double) { return 1.0; });
  const Field a = op->apply_A(one);
  for (double v : a.values) EXPECT_EQ(v, 0.0);
  for (double v : op->apply_B(one)) EXPECT_EQ(v, 0.0);
}

TEST(Operator, EqualsBMinusGOnCubicMonomials) {
  const ModelParams p = pinned(2);
  const auto op = make_op(40, p);
  const Grid2D& g = op->grid();
  std::vector<std::pair<std::size_t, double>> row;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b) {
      const Monomial m{a, b};
      const Field f = Field::sample(op->grid_ptr(), m);
      const Field Af = op->apply_A(f), gf = op->apply_g(f);
      double worst = 0, scale = 0;
      for (std::size_t j = 1; j < g.nxi(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
          if (!interior(*op, i, j)) continue;
          row.clear();
          op->stencil_row(i, j, boundary_coeffs(p), row);
          double Bf = 0;
          for (const auto& [c, w] : row) Bf += w * f.values[c];
          worst = std::max(worst, std::abs(Af(i, j) - (Bf - gf(i, j))));
          scale = std::max(scale, std::abs(Af(i, j)));
        }
      EXPECT_LE(worst, 1e-10 * std::max(scale, 1.0)) << "x^" << a << " xi^" << b;
    }
}

TEST(Operator, ExactOnQuadratics) {
  const ModelParams p = pinned(0);
  const auto op = make_op(30, p);
  const Grid2D& g = op->grid();
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b) {
      const Monomial m{a, b};
      const Field Af = op->apply_A(Field::sample(op->grid_ptr(), m));
      for (std::size_t j = 1; j < g.nxi(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
          if (!interior(*op, i, j)) continue;
          const double x = g.x(i), xi = g.xi(j);
          const double e = A_exact(p, xi, m.d(x, xi, 1, 0), m.d(x, xi, 0, 1), m.d(x, xi, 2, 0), m.d(x, xi, 1, 1),
                                   m.d(x, xi, 0, 2));
          ASSERT_NEAR(Af(i, j), e, 1e-10 * (1 + std::abs(e))) << "x^" << a << " xi^" << b;
        }
    }
}

TEST(Operator, BoundaryRowIsTransportOperator) {
  const ModelParams p = pinned(3);
  const auto op = make_op(30, p);
  // B u = q_r u_x - kappa theta_sigma u_xi, exact on quadratics.
  const Field f = Field::sample(op->grid_ptr(), [](double x, double xi) { return x * x + 3 * xi - xi * xi + x * xi; });
  const auto Bf = op->apply_B(f);
  for (std::size_t i = 1; i + 1 < op->grid().nx(); ++i) {
    const double x = op->grid().x(i);
    EXPECT_NEAR(Bf[i], p.q_r() * 2 * x - p.kappa * p.theta_sigma() * (3 + x), 1e-9);
  }
}

TEST(Operator, FarFieldRowsAreEmptyAndTripletsSorted) {
  const auto op = make_op(10, pinned(0));
  const SpMat& M = op->matrix();
  const Grid2D& g = op->grid();
  for (Eigen::Index c = 0; c < M.outerSize(); ++c)
    for (SpMat::InnerIterator it(M, c); it; ++it) {
      const std::size_t r = std::size_t(it.row());
      EXPECT_FALSE(op->far_field(r % g.nx(), r / g.nx())) << "row " << r;
    }
  std::istringstream in(export_triplets(M));
  long r0 = -1, c0 = -1, r, c;
  double v;
  std::size_t n = 0;
  while (in >> r >> c >> v) {
    EXPECT_TRUE(r > r0 || (r == r0 && c > c0));
    r0 = r;
    c0 = c;
    ++n;
  }
  EXPECT_EQ(n, std::size_t(M.nonZeros()));
}

TEST(Resolvent, RoundTripOnFortyGrid) {
  const auto op = make_op(40, pinned(0));
  const Resolvent R(op, 2.0);
  const Field u = Field::sample(op->grid_ptr(), [](double x, double xi) { return std::exp(-x * x) * (1 + xi * xi); });
  const Field back = R.solve(R.apply(u));
  double err = 0;
  for (std::size_t k = 0; k < u.values.size(); ++k) err = std::max(err, std::abs(back.values[k] - u.values[k]));
  EXPECT_LE(err, 1e-8);
  EXPECT_LE(R.last_residual(), 1e-10);
}

TEST(Resolvent, ManufacturedSolutionConvergesUnderRefinement) {
  const ModelParams p = pinned(0);
  const double lambda = 1.5;
  auto u = [](double x, double xi) { return std::exp(-4 * x * x - 2 * (xi - 0.5) * (xi - 0.5)); };
  auto rhs = [&](double x, double xi) {
    const double f = u(x, xi), gx = -8 * x, gy = -4 * (xi - 0.5);
    const double ux = gx * f, uxi = gy * f, uxx = (gx * gx - 8) * f, uxixi = (gy * gy - 4) * f, uxxi = gx * gy * f;
    return lambda * f + A_exact(p, xi, ux, uxi, uxx, uxxi, uxixi);
  };
  double prev = 0;
  for (int n : {20, 40, 80}) {
    const auto op = make_op(n, p);
    Field f = Field::sample(op->grid_ptr(), rhs);
    // Far-field rows carry lambda u = rhs: feed them the exact values.
    for (std::size_t j = 0; j < op->grid().nxi(); ++j)
      for (std::size_t i = 0; i < op->grid().nx(); ++i)
        if (op->far_field(i, j)) f(i, j) = lambda * u(op->grid().x(i), op->grid().xi(j));
    const Field sol = Resolvent(op, lambda).solve(f);
    double err = 0;
    for (std::size_t j = 0; j < op->grid().nxi(); ++j)
      for (std::size_t i = 0; i < op->grid().nx(); ++i)
        if (!op->far_field(i, j)) err = std::max(err, std::abs(sol(i, j) - u(op->grid().x(i), op->grid().xi(j))));
    if (prev > 0) EXPECT_GT(std::log2(prev / err), 1.5) << "n=" << n;
    prev = err;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(Form, LambdaEstimateIsCertifiedFromBelow) {
  const ModelParams p = pinned(0);
  const auto g = Grid2D::make(-1, 1, 24, 1.0, 16, 2.0);
  const FormAssembly fa = assemble_form(g, p, default_weights(p, 2.5));
  const Lambda0Estimate e = estimate_lambda0(fa);
  EXPECT_TRUE(e.converged);
  EXPECT_LE(e.lower, e.lambda_min + 1e-12);
  EXPECT_GE(e.lambda0, 0.0);
  EXPECT_EQ(e.lambda0, std::max(0.0, -e.lower));
}

TEST(Form, DualityWithCollocationImprovesUnderRefinement) {
  const ModelParams p = pinned(1);
  const WeightParams w = default_weights(p, 2.5);
  auto u = [](double x, double xi) { return std::exp(-6 * x * x - 6 * (xi - 0.6) * (xi - 0.6)); };
  auto v = [](double x, double xi) { return std::exp(-5 * (x - 0.1) * (x - 0.1) - 8 * (xi - 0.5) * (xi - 0.5)); };
  std::vector<double> gaps;
  for (int n : {24, 48, 96}) {
    const auto g = Grid2D::make(-2, 2, n, 1.6, n, 1.0);
    const FormAssembly fa = assemble_form(g, p, w);
    const Field fu = Field::sample(g, u), fv = Field::sample(g, v);
    const Field Au = fa.op->apply_A(fu);
    const auto dim = Eigen::Index(g->size());
    Eigen::VectorXd U = Eigen::VectorXd::Zero(dim), V = Eigen::VectorXd::Zero(dim), AU = Eigen::VectorXd::Zero(dim);
    for (std::size_t k : fa.dofs) {
      U[Eigen::Index(k)] = fu.values[k];
      V[Eigen::Index(k)] = fv.values[k];
      AU[Eigen::Index(k)] = Au.values[k];
    }
    const double form = V.dot(fa.form() * U);
    const double gram = V.dot(fa.gram.cwiseProduct(AU));
    gaps.push_back(std::abs(form - gram) / std::abs(form));
  }
  EXPECT_LT(gaps[1], gaps[0]);
  EXPECT_LT(gaps[2], gaps[1]);
  EXPECT_GT(std::log2(gaps[1] / gaps[2]), 0.9);
}
