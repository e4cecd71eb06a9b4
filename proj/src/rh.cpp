#include "vekua/rh.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vekua {

namespace {

constexpr double kPi = std::numbers::pi;

Complex ipow(Complex x, int n) {
  if (n < 0) return Complex(1) / ipow(x, -n);
  Complex r{1, 0};
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

std::string format(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

using Evaluator = std::function<CVector(const CVector&)>;

/// D_m g + T_{G,0} F + z Q_m F on the nodes.
CVector data_rhs(const Mesh& mesh, const Grid& grid, const RVector& g, int m, const CVector& F,
                 NodeSelfRule rule) {
  CVector rhs = schwarz_dm(grid, g, m, mesh.nodes).values;
  if (!F.isZero(0)) {
    rhs += t_area_pinned_nodes(mesh, F, rule);
    rhs += z_qm_nodes(mesh, F, m);
  }
  return rhs;
}

/// t -> D_m g(t) + T_{G,0}(F - V*)(t) + t Q_m(F - V*)(t) + extra(t).
Evaluator rh_evaluator(std::shared_ptr<const Mesh> mesh, const Grid& grid, const RVector& g,
                       int m, const Coefficients& coeffs, const CVector& F, const CVector& V,
                       PointFunction extra) {
  CVector density = F - apply_star(coeffs, V);
  const bool has_g = !g.isZero(0);
  return [mesh, grid, g, m, density, extra, has_g](const CVector& t) {
    CVector out = t_area_pinned(*mesh, density, t, OffGridRule::taylor) +
                  z_qm_area(*mesh, density, m, t, OffGridRule::taylor);
    if (has_g) out += schwarz_dm(grid, g, m, t).values;
    if (extra)
      for (Eigen::Index i = 0; i < t.size(); ++i) out(i) += extra(t(i));
    return out;
  };
}

double data_scale(const RHProblem& p) {
  double s = p.g.size() ? p.g.cwiseAbs().maxCoeff() : 0.0;
  if (p.F.size()) {
    const double area = (p.mesh->weights.array() * p.F.array().abs()).sum();
    s = std::max(s, area / (kPi * p.mesh->radius));
  }
  return s > 0 ? s : 1.0;
}

SolutionField make_field(std::shared_ptr<const Mesh> mesh, CVector values, double beta,
                         const SolveInfo& info, Evaluator ev) {
  SolutionField f;
  f.mesh = std::move(mesh);
  f.values = std::move(values);
  f.beta = beta;
  f.provenance = Provenance::rh;
  f.info = info;
  f.evaluator = std::move(ev);
  return f;
}

/// Multiplies a field and its evaluator by t^p.
SolutionField scale_by_power(SolutionField f, int p) {
  const Mesh& mesh = *f.mesh;
  for (Eigen::Index j = 0; j < mesh.size(); ++j) f.values(j) *= ipow(mesh.nodes(j), p);
  auto inner = f.evaluator;
  f.evaluator = [inner, p](const CVector& t) {
    CVector v = inner(t);
    for (Eigen::Index i = 0; i < t.size(); ++i) v(i) *= ipow(t(i), p);
    return v;
  };
  return f;
}

/// Coefficients with B replaced by B * (z / |z|)^{2s}.
Coefficients rotate_b(const Mesh& mesh, const Coefficients& c, int s) {
  CVector B0 = c.B0;
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const Complex u = mesh.nodes(j) / std::abs(mesh.nodes(j));
    B0(j) *= s >= 0 ? ipow(u, 2 * s) : ipow(std::conj(u), -2 * s);
  }
  std::optional<double> mu;
  if (c.mu_overridden) mu = c.mu;
  return make_coefficients<double>(mesh, c.A0, B0, mu);
}

void finish_basis(RHSolution& sol, const RHProblem& prob) {
  std::vector<CVector> cols;
  const RVector zero = RVector::Zero(prob.grid.size());
  for (const auto& b : sol.homogeneous_basis) {
    cols.push_back(b.values);
    sol.basis_residuals.push_back(boundary_residual(b, sol.m, prob.grid, zero));
  }
  sol.basis_min_singular_value = cols.empty() ? 0.0 : min_normalized_singular_value(cols);
}

}  // namespace

// ---------------------------------------------------------------- generators

std::vector<expr::Expr> phi0m_basis(int m, double R, Phi0mForm form) {
  using namespace expr;
  if (m < 1) throw SpecError("phi0m_basis: m must be >= 1");
  if (!(R > 0) || !std::isfinite(R)) throw SpecError("phi0m_basis: R must be positive");
  const Expr z = variable(Op::Z);
  const Expr iu = constant({0, 1});
  std::vector<Expr> alphas, betas;
  for (int k = 0; k <= m - 2; ++k) {
    const int e = 2 * m - k - 2;
    const double ca = form == Phi0mForm::as_printed ? std::pow(R, 2 * (k - m - 1))
                                                    : std::pow(R, 2 * (k - m + 1));
    const double cb = std::pow(R, 2 * (k - m + 1));
    alphas.push_back(sub(pow(z, k), mul(constant(ca), pow(z, e))));
    const Expr inner = form == Phi0mForm::as_printed ? sub(pow(z, k), mul(constant(cb), pow(z, e)))
                                                     : add(pow(z, k), mul(constant(cb), pow(z, e)));
    betas.push_back(mul(iu, inner));
  }
  std::vector<Expr> out = alphas;
  out.insert(out.end(), betas.begin(), betas.end());
  out.push_back(mul(iu, pow(z, m - 1)));
  return out;
}

// ------------------------------------------------------------------ problem

void RHProblem::validate() const {
  if (!mesh) throw SpecError("rh: mesh is missing");
  if (mesh->center != Complex{} || mesh->singular_point != Complex{})
    throw SpecError("rh: the disk must be centred at the singular point 0");
  if (grid.center != Complex{} || grid.radius != mesh->radius)
    throw SpecError("rh: boundary grid must be the circle |t| = R of the mesh");
  if (g.size() != grid.size()) throw SpecError("rh: g sample count differs from boundary nodes");
  if (!g.allFinite()) throw SpecError("rh: g is not finite");
  if (F.size() != mesh->size()) throw SpecError("rh: F sample count differs from node count");
  if (!F.allFinite()) throw SpecError("rh: F is not finite");
  if (coeffs.A.size() != mesh->size() || coeffs.B.size() != mesh->size())
    throw SpecError("rh: coefficient sample count differs from node count");
  if (!(beta > 0 && beta < 1)) throw SpecError("rh: beta must lie in (0, 1)");
  if (m >= 1 && free_params.size() > static_cast<std::size_t>(2 * m - 1))
    throw SpecError("rh: at most 2m - 1 free parameters");
  if (m < 1 && !free_params.empty())
    throw SpecError("rh: free parameters apply to m >= 1 only");
}

RVector sample_boundary(const Grid& grid, const expr::Expr& g) {
  RVector out(grid.size());
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    const Complex v = expr::eval(g, grid.nodes(l), grid.center);
    if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real())))
      throw SpecError("rh: boundary data g must be real on the circle");
    out(l) = v.real();
  }
  return out;
}

// -------------------------------------------------------------------- m >= 1

RHSolution solve_rh_positive(const RHProblem& prob, const RHOptions& opt) {
  prob.validate();
  if (prob.m < 1) throw SpecError("solve_rh_positive: m must be >= 1");
  const Mesh& mesh = *prob.mesh;
  const int m = prob.m;
  RHSolution sol;
  sol.m = m;
  sol.data_scale = data_scale(prob);
  sol.generators = phi0m_basis(m, mesh.radius, opt.form);

  const NystromSystem sys(prob.mesh, prob.coeffs, m, opt.solver);

  expr::Expr phi0m = expr::constant(0);
  for (std::size_t i = 0; i < prob.free_params.size(); ++i)
    phi0m = expr::add(phi0m, expr::mul(expr::constant(prob.free_params[i]), sol.generators[i]));
  const PointFunction zphi = [phi0m](Complex t) { return t * expr::eval(phi0m, t); };

  CVector rhs = data_rhs(mesh, prob.grid, prob.g, m, prob.F, opt.solver.self_rule);
  for (Eigen::Index j = 0; j < mesh.size(); ++j) rhs(j) += zphi(mesh.nodes(j));
  SolveInfo info;
  CVector V = sys.solve(rhs, info);
  Evaluator ev = rh_evaluator(prob.mesh, prob.grid, prob.g, m, prob.coeffs, prob.F, V,
                              prob.free_params.empty() ? PointFunction{} : zphi);
  sol.particular = make_field(prob.mesh, std::move(V), prob.beta, info, std::move(ev));
  sol.boundary_residual = boundary_residual(*sol.particular, m, prob.grid, prob.g);

  if (opt.compute_basis) {
    const RVector zero_g = RVector::Zero(prob.grid.size());
    const CVector zero_F = CVector::Zero(mesh.size());
    for (const auto& gen : sol.generators) {
      const PointFunction zgen = [gen](Complex t) { return t * expr::eval(gen, t); };
      CVector rh(mesh.size());
      for (Eigen::Index j = 0; j < mesh.size(); ++j) rh(j) = zgen(mesh.nodes(j));
      SolveInfo hi;
      CVector Vh = sys.solve(rh, hi);
      Evaluator hev = rh_evaluator(prob.mesh, prob.grid, zero_g, m, prob.coeffs, zero_F, Vh, zgen);
      sol.homogeneous_basis.push_back(
          make_field(prob.mesh, std::move(Vh), prob.beta, hi, std::move(hev)));
    }
    finish_basis(sol, prob);
  }
  sol.solvable = true;
  return sol;
}

// --------------------------------------------------------------------- m = 0

RHSolution solve_rh_zero(const RHProblem& prob, const RHOptions& opt) {
  prob.validate();
  if (prob.m != 0) throw SpecError("solve_rh_zero: m must be 0");
  const Mesh& mesh = *prob.mesh;
  RHSolution sol;
  sol.m = 0;
  sol.data_scale = data_scale(prob);
  const double delta = prob.g.mean();
  sol.d0 = delta;
  sol.defects = {delta};
  sol.c0 = 0;
  sol.solvable = std::abs(delta) <= opt.solvability_tol * sol.data_scale;
  if (!sol.solvable) return sol;

  const NystromSystem sys(prob.mesh, prob.coeffs, 0, opt.solver);
  const CVector rhs = data_rhs(mesh, prob.grid, prob.g, 0, prob.F, opt.solver.self_rule);
  SolveInfo info;
  CVector V = sys.solve(rhs, info);
  Evaluator ev = rh_evaluator(prob.mesh, prob.grid, prob.g, 0, prob.coeffs, prob.F, V, {});
  sol.particular = make_field(prob.mesh, std::move(V), prob.beta, info, std::move(ev));
  sol.boundary_residual = boundary_residual(*sol.particular, 0, prob.grid, prob.g);

  CVector origin(1);
  origin(0) = 0;
  const double v0 = std::abs(sol.particular->evaluate(origin)(0));
  if (v0 > opt.solvability_tol * sol.data_scale)
    sol.warnings.push_back("solution does not vanish at the singular point: |V(0)| = " +
                           format(v0));
  return sol;
}

// --------------------------------------------------------------------- m < 0

namespace {

/// Coefficient of z^n (n >= 1) in D_1 g + T_{G,0} f + z Q_1 f.
Complex taylor_coefficient(int n, const Mesh& mesh, const Grid& grid, const RVector* g,
                           const CVector& f) {
  const double R2 = mesh.radius * mesh.radius;
  Complex s{};
  if (g) {
    Complex d{};
    for (Eigen::Index l = 0; l < grid.size(); ++l) d += (*g)(l) * ipow(grid.nodes(l), -(n - 1));
    d /= double(grid.size());
    s += n == 1 ? d : 2.0 * d;
  }
  Complex t{}, q{};
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const Complex zeta = mesh.nodes(j);
    const double w = mesh.weights(j);
    t += w * f(j) * ipow(zeta, -(n + 1));
    if (n == 2) q += w * std::conj(f(j) / zeta);
    if (n >= 3) q += w * std::conj(f(j)) * ipow(std::conj(zeta), n - 3);
  }
  s += -t / kPi;
  if (n == 2) s += -q / (kPi * R2);
  if (n >= 3) s += -q / (kPi * R2 * std::pow(R2, n - 2));
  return s;
}

}  // namespace

RHSolution solve_rh_negative(const RHProblem& prob, const RHOptions& opt) {
  prob.validate();
  if (prob.m > -1) throw SpecError("solve_rh_negative: m must be <= -1");
  const Mesh& mesh = *prob.mesh;
  const int k = -prob.m;
  RHSolution sol;
  sol.m = prob.m;
  sol.data_scale = data_scale(prob);

  // W = z^{k+1} V solves the m = 1 problem with B e^{2(k+1) i phi} and
  // z^{k+1} F; continuity of V at 0 becomes vanishing of the first k + 1
  // Taylor coefficients of W.
  const Coefficients cw = rotate_b(mesh, prob.coeffs, k + 1);
  CVector Fw(mesh.size());
  for (Eigen::Index j = 0; j < mesh.size(); ++j) Fw(j) = ipow(mesh.nodes(j), k + 1) * prob.F(j);

  const NystromSystem sys(prob.mesh, cw, 1, opt.solver);
  SolveInfo info, hinfo;
  const CVector Wp = sys.solve(data_rhs(mesh, prob.grid, prob.g, 1, Fw, opt.solver.self_rule), info);
  CVector iz = Complex(0, 1) * mesh.nodes;
  const CVector Wh = sys.solve(iz, hinfo);

  const CVector fp = Fw - apply_star(cw, Wp);
  const CVector fh = -apply_star(cw, Wh);
  std::vector<Complex> tp(k + 2), th(k + 2);
  for (int n = 1; n <= k + 1; ++n) {
    tp[n] = taylor_coefficient(n, mesh, prob.grid, &prob.g, fp);
    th[n] = taylor_coefficient(n, mesh, prob.grid, nullptr, fh) + (n == 1 ? Complex(0, 1) : 0.0);
  }
  if (th[1].imag() == 0) throw SolveError("solve_rh_negative: c0 cannot be determined");
  sol.c0 = -tp[1].imag() / th[1].imag();

  const CVector W = Wp + sol.c0 * Wh;
  sol.a.resize(k + 1);
  for (int j = 0; j <= k; ++j) sol.a[j] = tp[k + 1 - j] + sol.c0 * th[k + 1 - j];
  for (int j = 0; j < k; ++j) {
    sol.defects.push_back(sol.a[j].real());
    sol.defects.push_back(sol.a[j].imag());
  }
  sol.defects.push_back(sol.a[k].real());
  double worst = 0;
  for (double d : sol.defects) worst = std::max(worst, std::abs(d));
  sol.solvable = worst <= opt.solvability_tol * sol.data_scale;

  const double c0 = sol.c0;
  const PointFunction ic0 = [c0](Complex t) { return Complex(0, c0) * t; };
  Evaluator wev = rh_evaluator(prob.mesh, prob.grid, prob.g, 1, cw, Fw, W, ic0);
  const bool ok = sol.solvable;
  Evaluator vev = [wev, k, ok](const CVector& t) {
    CVector w = wev(t);
    for (Eigen::Index i = 0; i < t.size(); ++i)
      w(i) = t(i) == Complex{} ? (ok ? Complex{} : Complex(NAN, NAN)) : w(i) / ipow(t(i), k + 1);
    return w;
  };
  CVector V(mesh.size());
  for (Eigen::Index j = 0; j < mesh.size(); ++j) V(j) = W(j) / ipow(mesh.nodes(j), k + 1);
  sol.particular = make_field(prob.mesh, std::move(V), prob.beta, info, std::move(vev));
  sol.boundary_residual = boundary_residual(*sol.particular, prob.m, prob.grid, prob.g);
  if (!sol.solvable)
    sol.warnings.push_back("continuity conditions violated: the returned field is singular at 0");
  return sol;
}

RHSolution solve_rh(const RHProblem& prob, const RHOptions& opt) {
  if (prob.m >= 1) return solve_rh_positive(prob, opt);
  if (prob.m == 0) return solve_rh_zero(prob, opt);
  return solve_rh_negative(prob, opt);
}

// ---------------------------------------------------------- initial condition

RHSolution solve_rh0(double nu, int n, const RHProblem& prob, const RHOptions& opt) {
  if (!(nu > 0) || !std::isfinite(nu)) throw SpecError("rh0: nu must be positive");
  const double kf = std::floor(nu);
  if (kf == nu) throw SpecError("rh0: nu must not be an integer (beta = 1 - nu + [nu] would be 1)");
  const int k = static_cast<int>(kf);
  RHProblem p = prob;
  p.m = n - k;
  p.beta = 1 - nu + k;
  if (k == 0) {
    RHSolution sol = solve_rh(p, opt);
    sol.n = n;
    sol.nu = nu;
    return sol;
  }
  if (!prob.mesh) throw SpecError("rh0: mesh is missing");
  const Mesh& mesh = *prob.mesh;
  p.coeffs = rotate_b(mesh, prob.coeffs, -k);
  for (Eigen::Index j = 0; j < mesh.size(); ++j) p.F(j) = prob.F(j) / ipow(mesh.nodes(j), k);

  RHSolution sol = solve_rh(p, opt);
  sol.n = n;
  sol.nu = nu;
  sol.substitution_k = k;
  if (sol.particular) {
    sol.particular = scale_by_power(std::move(*sol.particular), k);
    sol.boundary_residual = boundary_residual(*sol.particular, n, prob.grid, prob.g);
  }
  for (auto& b : sol.homogeneous_basis) b = scale_by_power(std::move(b), k);
  if (!sol.homogeneous_basis.empty()) {
    sol.basis_residuals.clear();
    const int m_saved = sol.m;
    sol.m = n;
    finish_basis(sol, prob);
    sol.m = m_saved;
  }
  return sol;
}

// ---------------------------------------------------------------- diagnostics

double boundary_residual(const SolutionField& V, int m, const Grid& grid, const RVector& g) {
  if (g.size() != grid.size()) throw SpecError("boundary_residual: size mismatch");
  if (!V.evaluator) throw SpecError("boundary_residual: field has no evaluator");
  const Eigen::Index nb = grid.size();
  const double radii[3] = {0.98, 0.96, 0.94};
  Eigen::MatrixXd h(nb, 3);
  for (int r = 0; r < 3; ++r) {
    CVector t(nb);
    for (Eigen::Index l = 0; l < nb; ++l)
      t(l) = grid.center + radii[r] * (grid.nodes(l) - grid.center);
    const CVector v = V.evaluate(t);
    for (Eigen::Index l = 0; l < nb; ++l) h(l, r) = (ipow(t(l), -m) * v(l)).real();
  }
  double worst = 0;
  for (Eigen::Index l = 0; l < nb; ++l) {
    const double ext = 3 * h(l, 0) - 3 * h(l, 1) + h(l, 2);
    worst = std::max(worst, std::abs(ext - g(l)));
  }
  return worst;
}

double min_normalized_singular_value(const std::vector<CVector>& columns) {
  if (columns.empty()) return 0;
  const Eigen::Index n = columns.front().size();
  Eigen::MatrixXd M(2 * n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    M.col(c).head(n) = columns[c].real();
    M.col(c).tail(n) = columns[c].imag();
    const double norm = M.col(c).norm();
    if (norm > 0) M.col(c) /= norm;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::Index c = M.cols();
  Eigen::MatrixXd Rm = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Rm);
  return svd.singularValues().minCoeff();
}

double span_residual(const std::vector<CVector>& columns, const CVector& v) {
  const Eigen::Index n = v.size();
  Eigen::MatrixXd M(2 * n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    M.col(c).head(n) = columns[c].real();
    M.col(c).tail(n) = columns[c].imag();
  }
  Eigen::VectorXd b(2 * n);
  b.head(n) = v.real();
  b.tail(n) = v.imag();
  const Eigen::VectorXd x = M.colPivHouseholderQr().solve(b);
  return (M * x - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace vekua
