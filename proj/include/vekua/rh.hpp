#pragma once

// Riemann-Hilbert problem Re[t^{-m} V(t)] = g(t) on |t| = R for the
// Carleman-Vekua equation with singular point 0, in all index regimes, and
// the variant with a prescribed zero of order nu at the origin.

#include "vekua/fredholm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vekua {

/// Which reflection exponents to use in the homogeneous generators.
enum class Phi0mForm {
  as_printed,  // alpha: R^{2(k-m-1)}, beta: i(z^k - R^{2(k-m+1)} z^{2m-k-2})
  corrected,   // alpha: R^{2(k-m+1)}, beta: i(z^k + R^{2(k-m+1)} z^{2m-k-2})
};

/// The 2m - 1 generators alpha_0..alpha_{m-2}, beta_0..beta_{m-2}, beta_m.
std::vector<expr::Expr> phi0m_basis(int m, double R, Phi0mForm form = Phi0mForm::as_printed);

struct RHProblem {
  std::shared_ptr<const Mesh> mesh;  // centred at the singular point 0
  Grid grid;                         // boundary circle of the same radius
  int m = 1;
  RVector g;                         // boundary data on grid nodes
  Coefficients coeffs;
  CVector F;
  double beta = 0.5;
  std::vector<double> free_params;   // m >= 1: alpha_k, beta_k, beta_m (default 0)

  void validate() const;
};

/// Samples a real-valued expression on the grid; rejects complex values.
RVector sample_boundary(const Grid& grid, const expr::Expr& g);

struct RHOptions {
  SolverOptions solver;
  double solvability_tol = 1e-6;  // relative to the data scale
  Phi0mForm form = Phi0mForm::corrected;
  bool compute_basis = true;
};

struct RHSolution {
  int m = 0;
  std::optional<SolutionField> particular;  // absent when m = 0 is unsolvable
  std::vector<SolutionField> homogeneous_basis;
  std::vector<expr::Expr> generators;

  // m = 0: (D_0 g)(0). m < 0: a_0..a_k and the 2k + 1 real defects
  // Re a_0, Im a_0, ..., Re a_{k-1}, Im a_{k-1}, Re a_k.
  std::optional<double> d0;
  std::vector<Complex> a;
  std::vector<double> defects;
  double c0 = 0;
  double data_scale = 1;
  bool solvable = true;

  double boundary_residual = 0;
  std::vector<double> basis_residuals;
  double basis_min_singular_value = 0;

  // Substitution bookkeeping for the initial-condition variant.
  int substitution_k = 0;
  int n = 0;
  std::optional<double> nu;
  std::vector<std::string> warnings;

  std::string verdict() const { return solvable ? "solvable" : "unsolvable"; }
};

RHSolution solve_rh_positive(const RHProblem& prob, const RHOptions& opt = {});
RHSolution solve_rh_zero(const RHProblem& prob, const RHOptions& opt = {});
RHSolution solve_rh_negative(const RHProblem& prob, const RHOptions& opt = {});
RHSolution solve_rh(const RHProblem& prob, const RHOptions& opt = {});

/// Problem with V = O(|z|^nu) at 0 and Re[t^{-n} V] = g. prob.m and
/// prob.beta are ignored; prob.coeffs and prob.F refer to the V-equation.
RHSolution solve_rh0(double nu, int n, const RHProblem& prob, const RHOptions& opt = {});

/// max_l |Re[t_l^{-m} V(t_l)] - g_l| with V evaluated at 0.98R, 0.96R, 0.94R
/// and extrapolated quadratically to R.
double boundary_residual(const SolutionField& V, int m, const Grid& grid, const RVector& g);

/// Smallest singular value of the column-normalized [Re; Im] sample matrix.
double min_normalized_singular_value(const std::vector<CVector>& columns);

/// Relative least-squares residual of v against the span of the columns.
double span_residual(const std::vector<CVector>& columns, const CVector& v);

}  // namespace vekua
