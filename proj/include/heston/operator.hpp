#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "heston/grid.hpp"
#include "heston/params.hpp"

namespace heston {

using SpMat = Eigen::SparseMatrix<double>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How first-derivative terms are differenced. `central` is second order
// everywhere; `upwind_when_dominated` falls back to first-order one-sided
// differences in a direction whose central row would have an off-diagonal
// entry of the wrong sign (cell Peclet number above 2).
enum class Convection { central, upwind_when_dominated };

// Coefficients of a u_xx + m u_xxi + c u_xixi + b_x u_x + b_xi u_xi at a node.
struct Coeffs {
  double a = 0, m = 0, c = 0, bx = 0, bxi = 0;
};

Coeffs heston_coeffs(const ModelParams& p, double xi);     // the operator A
Coeffs remainder_coeffs(const ModelParams& p, double xi);  // g
Coeffs boundary_coeffs(const ModelParams& p);              // B

// Finite-difference realisation of A on a Grid2D. Rows of the sparse matrix:
//   interior nodes          -> A_h
//   boundary row j = 0      -> B_h (one-sided second-order u_xi)
//   far-field edges (i = 0, i = nx-1, j = nxi-1) -> empty rows
class DiscreteOperator {
 public:
  DiscreteOperator(GridPtr grid, const ModelParams& p, const WeightParams& w,
                   Convection conv = Convection::central);

  const Grid2D& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const WeightParams& weights() const { return weights_; }
  Convection convection() const { return conv_; }
  const SpMat& matrix() const { return mat_; }

  bool far_field(std::size_t i, std::size_t j) const {
    return i == 0 || i + 1 == grid_->nx() || j + 1 == grid_->nxi();
  }

  // A u at interior nodes; zero on the boundary row and far-field edges.
  Field apply_A(const Field& f) const;
  // B u on the boundary row, one value per x node (edges one-sided in x).
  std::vector<double> apply_B(const Field& f) const;
  // g at interior nodes, zero elsewhere.
  Field apply_g(const Field& f) const;

  // Interior or boundary-row nodes whose matrix row breaks the M-matrix sign
  // pattern (positive diagonal, non-positive off-diagonals).
  std::vector<std::size_t> m_matrix_violations() const;

  // Stencil row of a general coefficient set at interior node (i, j),
  // appended as (column, value) pairs.
  void stencil_row(std::size_t i, std::size_t j, const Coeffs& c,
                   std::vector<std::pair<std::size_t, double>>& out) const;
  // Boundary-row stencil (j = 0) of B at x node i.
  void boundary_row(std::size_t i, std::vector<std::pair<std::size_t, double>>& out) const;

  std::string grid_hash() const { return grid_->hash(); }

 private:
  Field apply_rows(const Field& f, Coeffs (*coef)(const ModelParams&, double)) const;

  GridPtr grid_;
  ModelParams params_;
  WeightParams weights_;
  Convection conv_;
  SpMat mat_;
};

// Matrices in coordinate triplet text: "row col value" per line, sorted.
std::string export_triplets(const SpMat& m);

enum FormTerms : unsigned { principal_terms = 1u, drift_terms = 2u, all_terms = 3u };

// Galerkin assembly of the sesquilinear form against bilinear hat functions,
// with a 4x4 Gauss rule per cell. Entry (a, b) is a(phi_b, phi_a), so that
// w^T F u = a(u, w). `gram` is the lumped mass matrix of the weighted inner
// product (diagonal, entries int phi_a w).
struct FormAssembly {
  std::shared_ptr<const DiscreteOperator> op;
  SpMat principal;  // (sigma/2) int (u_x w_x + 2 rho u_xi w_x + u_xi w_xi) xi w
  SpMat drift;      // the four first-order integrals
  Eigen::VectorXd gram;
  std::vector<std::size_t> dofs;  // grid indices of the non-far-field nodes

  SpMat form() const { return principal + drift; }
};

FormAssembly assemble_form(GridPtr grid, const ModelParams& p, const WeightParams& w,
                           unsigned terms = all_terms, Convection conv = Convection::central);

struct Lambda0Estimate {
  double lambda0 = 0.0;     // max(0, -lambda_min_lower)
  double lambda_min = 0.0;  // Rayleigh-quotient estimate of the smallest eigenvalue
  double lower = 0.0;       // certified lower bound (Sylvester inertia)
  int iterations = 0;
  bool converged = false;
};

// Smallest eigenvalue of the symmetric part of the form against the Gram
// matrix on the non-far-field nodes, by shifted inverse iteration, then
// certified from below by an inertia count.
Lambda0Estimate estimate_lambda0(const FormAssembly& fa, int max_iter = 500);

// Cached factorisation of (lambda I + A_h); far-field rows reduce to
// lambda u = rhs.
class Resolvent {
 public:
  Resolvent(std::shared_ptr<const DiscreteOperator> op, double lambda);
  Field solve(const Field& rhs) const;
  // (lambda I + A_h) u, with lambda u on far-field rows.
  Field apply(const Field& u) const;
  double lambda() const { return lambda_; }
  double last_residual() const { return residual_; }

 private:
  std::shared_ptr<const DiscreteOperator> op_;
  double lambda_;
  SpMat sys_;
  Eigen::SparseLU<SpMat> lu_;
  mutable double residual_ = 0.0;
};

Field resolvent_solve(const FormAssembly& fa, double lambda, const Field& rhs);

}  // namespace heston
