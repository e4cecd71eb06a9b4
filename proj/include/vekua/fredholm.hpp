#pragma once

// Solver for V + P_{G,a} V = T_{G,a} F + (z - a) Phi on a disk mesh, with
// the pole transform, contraction estimate and a-posteriori diagnostics.

#include "vekua/expr.hpp"
#include "vekua/mesh.hpp"
#include "vekua/operators.hpp"

#include <Eigen/LU>

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vekua {

using Coefficients = CoefficientPair<double>;
using Field = FieldOnMesh<double>;
using PointFunction = std::function<Complex(Complex)>;

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Provenance { direct, gmres, picard, rh };
const char* to_string(Provenance p);

struct SolveInfo {
  std::string method;
  int iterations = 0;
  double rcond = std::numeric_limits<double>::quiet_NaN();
  double discrete_residual = std::numeric_limits<double>::quiet_NaN();
  double contraction_ratio = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
};

struct SolverOptions {
  Eigen::Index dense_limit = 4096;  // node count above which GMRES is used
  double min_rcond = 1e-13;
  double gmres_tol = 1e-12;
  int gmres_max_iter = 2000;
  int gmres_restart = 80;
  NodeSelfRule self_rule = NodeSelfRule::constant_exact;
};

struct ProblemSpec {
  std::shared_ptr<const Mesh> mesh;
  Coefficients coeffs;
  CVector F;          // right-hand side sampled on nodes
  PointFunction phi;  // holomorphic factor; empty means 0
  double beta = 0.5;
  int k = 0;
  std::optional<double> nu;
  std::optional<double> q;  // recorded only
  bool strict_class = false;

  /// Throws SpecError on invalid input; returns warnings otherwise.
  std::vector<std::string> validate() const;
};

/// Convenience: builds a spec from expressions evaluated on the nodes.
ProblemSpec make_spec(std::shared_ptr<const Mesh> mesh, const expr::Expr& A0,
                      const expr::Expr& B0, const expr::Expr& F,
                      const std::optional<expr::Expr>& phi = {}, double beta = 0.5);

PointFunction phi_from_expr(const expr::Expr& e, Complex a);
CVector sample(const Mesh& mesh, const expr::Expr& e);

struct SolutionField {
  std::shared_ptr<const Mesh> mesh;
  CVector values;
  double beta = 0.5;
  Provenance provenance = Provenance::direct;
  SolveInfo info;
  std::vector<std::string> warnings;
  /// Nystrom evaluation at arbitrary points of the closed disk through the
  /// defining integral equation.
  std::function<CVector(const CVector&)> evaluator;

  CVector evaluate(const CVector& targets) const;
};

/// The real-linear map L V = V + C1 V + C2 conj(V) built from the pinned area
/// operator and, when reflection_m is set, the disk reflection term
/// z Q_m(V*). Dense LU up to dense_limit nodes, GMRES above.
class NystromSystem {
 public:
  NystromSystem(std::shared_ptr<const Mesh> mesh, Coefficients coeffs,
                std::optional<int> reflection_m, SolverOptions options);

  CVector apply(const CVector& V) const;
  CVector solve(const CVector& rhs, SolveInfo& info) const;
  bool dense() const { return dense_; }
  double rcond() const { return rcond_; }

  /// (P^ V)(t): pinned area term plus reflection term at arbitrary targets.
  CVector compact_at(const CVector& star, const CVector& targets) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Coefficients coeffs_;
  std::optional<int> m_;
  SolverOptions opt_;
  bool dense_ = false;
  double rcond_ = std::numeric_limits<double>::quiet_NaN();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Right-hand side T_{G,a} F + (z - a) Phi on the nodes.
CVector main_rhs(const ProblemSpec& spec, NodeSelfRule rule = NodeSelfRule::constant_exact);

SolutionField solve_main(const ProblemSpec& spec, const SolverOptions& options = {});

struct PicardOptions {
  int max_iter = 200;
  double tol = 1e-12;
  std::optional<double> relaxation;  // default 1, or 0.5 when mu*M_beta >= 1
};

SolutionField picard_solve(const ProblemSpec& spec, const PicardOptions& options = {});

struct ContractionEstimate {
  double mu = 0;
  double m_beta = 0;
  double product = 0;
  std::vector<std::string> warnings;
};

ContractionEstimate estimate_contraction(const Coefficients& coeffs, const Mesh& mesh,
                                         double beta);

/// Closed-form M_beta for the disk of radius R centred at the singular point.
double m_beta_centered_disk(double beta);

struct PoleTransform {
  ProblemSpec problem;  // the W-problem
  int k = 0;
  CVector factor;       // (z - a)^k on the nodes
  CVector back_map(const CVector& W) const { return factor.cwiseProduct(W); }
};

/// V = (z - a)^k W: B -> B e^{-2ik phi}, F -> (z - a)^{-k} F.
PoleTransform transform_pole(const ProblemSpec& spec);

struct ResidualReport {
  double max = 0;
  CVector pointwise;            // zero outside the included rings
  std::vector<bool> included;
};

/// Finite-difference d/dzbar on the polar grid: 3-point nonuniform in r,
/// spectral in theta. Innermost and outermost rings use one-sided radial
/// stencils.
CVector fd_dbar(const Mesh& mesh, const CVector& V);

/// Pointwise residual of dV/dzbar + A V + B conj(V) - F, maximized over all
/// rings except the innermost and outermost. Nodes with |z - a| < min_radius
/// are left out as well.
ResidualReport residual(const CVector& V, const ProblemSpec& spec, double min_radius = 0);

/// Boundary samples of a mesh field: quadratic extrapolation in r over the
/// three outermost rings, then trigonometric interpolation in theta.
CVector boundary_trace(const Mesh& mesh, const CVector& V, const Grid& grid);

/// max |V - (-P_{G,a} V + K_{Gamma,a} V + T_{G,a} F)| over nodes with
/// |z - c| <= 0.8 R.
double check_first_type(const CVector& V, const ProblemSpec& spec, const Grid& grid);

struct SimilarityReport {
  CVector omega;
  CVector phi;
  double holo_defect = 0;
  double masked_fraction = 0;
  bool reliable = true;
};

/// holo_defect is taken over the same node set as residual().
SimilarityReport similarity_factor(const CVector& V, const Coefficients& coeffs, const Mesh& mesh,
                                   double min_radius = 0);

/// Least-squares slope of log(mean |V| per ring) against log(ring radius)
/// over the three innermost rings.
double inner_decay_slope(const Mesh& mesh, const CVector& V);

}  // namespace vekua
