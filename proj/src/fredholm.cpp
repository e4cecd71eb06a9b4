#include "vekua/fredholm.hpp"

#include "vekua/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vekua {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd stack(const CVector& v) {
  Eigen::VectorXd x(2 * v.size());
  x.head(v.size()) = v.real();
  x.tail(v.size()) = v.imag();
  return x;
}

CVector unstack(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size() / 2;
  CVector v(n);
  v.real() = x.head(n);
  v.imag() = x.tail(n);
  return v;
}

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

}  // namespace

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::direct: return "direct";
    case Provenance::gmres: return "gmres";
    case Provenance::picard: return "picard";
    case Provenance::rh: return "rh";
  }
  return "?";
}

// ------------------------------------------------------------------- spec

std::vector<std::string> ProblemSpec::validate() const {
  if (!mesh) throw SpecError("problem: mesh is missing");
  const Eigen::Index n = mesh->size();
  if (F.size() != n) throw SpecError("problem: F sample count differs from node count");
  if (!F.allFinite()) throw SpecError("problem: F is not finite at every node");
  if (coeffs.A.size() != n || coeffs.B.size() != n)
    throw SpecError("problem: coefficient sample count differs from node count");
  if (!(beta > 0 && beta < 1)) throw SpecError("problem: beta must lie in (0, 1)");
  if (nu && !(*nu > 0)) throw SpecError("problem: nu must be positive");

  std::vector<std::string> warnings = mesh->warnings;
  const double lower = std::max(0.0, 1 - 8 * coeffs.mu);
  if (coeffs.mu > 0 && beta <= lower) {
    const std::string msg = "beta = " + format(beta) + " is outside the class window (" +
                            format(lower) + ", 1) for mu = " + format(coeffs.mu);
    if (strict_class) throw SpecError("problem: " + msg);
    warnings.push_back(msg);
  }
  if (q && beta >= 2 / *q)
    warnings.push_back("beta = " + format(beta) + " is not below 2/q = " + format(2 / *q));
  return warnings;
}

CVector sample(const Mesh& mesh, const expr::Expr& e) {
  CVector v(mesh.size());
  for (Eigen::Index j = 0; j < mesh.size(); ++j)
    v(j) = expr::eval(e, mesh.nodes(j), mesh.singular_point);
  return v;
}

PointFunction phi_from_expr(const expr::Expr& e, Complex a) {
  return [e, a](Complex z) { return expr::eval(e, z, a); };
}

ProblemSpec make_spec(std::shared_ptr<const Mesh> mesh, const expr::Expr& A0,
                      const expr::Expr& B0, const expr::Expr& F,
                      const std::optional<expr::Expr>& phi, double beta) {
  ProblemSpec s;
  s.coeffs = make_coefficients<double>(*mesh, sample(*mesh, A0), sample(*mesh, B0));
  s.F = sample(*mesh, F);
  if (phi) s.phi = phi_from_expr(*phi, mesh->singular_point);
  s.beta = beta;
  s.mesh = std::move(mesh);
  return s;
}

CVector SolutionField::evaluate(const CVector& targets) const {
  if (!evaluator) throw SolveError("solution has no off-grid evaluator");
  return evaluator(targets);
}

// ---------------------------------------------------------------- system

NystromSystem::NystromSystem(std::shared_ptr<const Mesh> mesh, Coefficients coeffs,
                             std::optional<int> reflection_m, SolverOptions options)
    : mesh_(std::move(mesh)), coeffs_(std::move(coeffs)), m_(reflection_m), opt_(options) {
  const Eigen::Index n = mesh_->size();
  if (coeffs_.is_zero()) {
    dense_ = true;
    rcond_ = 1;
    return;
  }
  if (n > opt_.dense_limit) return;
  dense_ = true;

  // C1 V + C2 conj(V) with C1 = M diag(A) + Z diag(conj B),
  // C2 = M diag(B) + Z diag(conj A).
  CMatrix C1 = t_area_pinned_matrix(*mesh_, opt_.self_rule);
  CMatrix C2 = C1 * coeffs_.B.asDiagonal();
  C1 = C1 * coeffs_.A.asDiagonal();
  if (m_) {
    CMatrix Z = z_qm_matrix(*mesh_, *m_);
    C1.noalias() += Z * coeffs_.B.conjugate().asDiagonal();
    C2.noalias() += Z * coeffs_.A.conjugate().asDiagonal();
  }
  // V = x + i y:  C1 V + C2 conj V = (C1 + C2) x + i (C1 - C2) y.
  Eigen::MatrixXd S(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex s = C1(i, j) + C2(i, j);
      const Complex d = C1(i, j) - C2(i, j);
      S(i, j) = s.real();
      S(i, n + j) = -d.imag();
      S(n + i, j) = s.imag();
      S(n + i, n + j) = d.real();
    }
  }
  C1.resize(0, 0);
  C2.resize(0, 0);
  S.diagonal().array() += 1.0;
  lu_.compute(S);
  rcond_ = lu_.rcond();
  if (!(rcond_ >= opt_.min_rcond)) {
    throw SolveError("discrete system is singular or ill-conditioned (rcond = " +
                     format(rcond_) + ", n = " + std::to_string(n) +
                     "); the continuous problem is uniquely solvable, so the discretization "
                     "failed");
  }
}

CVector NystromSystem::apply(const CVector& V) const {
  if (coeffs_.is_zero()) return V;
  const CVector star = apply_star(coeffs_, V);
  CVector out = V + t_area_pinned_nodes(*mesh_, star, opt_.self_rule);
  if (m_) out += z_qm_nodes(*mesh_, star, *m_);
  return out;
}

CVector NystromSystem::compact_at(const CVector& star, const CVector& targets) const {
  CVector out = t_area_pinned(*mesh_, star, targets, OffGridRule::taylor);
  if (m_) out += z_qm_area(*mesh_, star, *m_, targets, OffGridRule::taylor);
  return out;
}

CVector NystromSystem::solve(const CVector& rhs, SolveInfo& info) const {
  if (rhs.size() != mesh_->size()) throw SolveError("solve: right-hand side size mismatch");
  if (!rhs.allFinite()) throw SolveError("solve: right-hand side is not finite");
  CVector V;
  info.rcond = rcond_;
  if (coeffs_.is_zero()) {
    info.method = "identity";
    info.iterations = 0;
    V = rhs;
  } else if (dense_) {
    info.method = "dense-lu";
    info.iterations = 0;
    V = unstack(lu_.solve(stack(rhs)));
  } else {
    info.method = "gmres";
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)> op =
        [this](const Eigen::VectorXd& x) { return stack(apply(unstack(x))); };
    Eigen::VectorXd x = stack(rhs);
    GmresResult g = gmres<double>(op, stack(rhs), x, opt_.gmres_tol, opt_.gmres_max_iter,
                                  opt_.gmres_restart);
    info.iterations = g.iterations;
    info.converged = g.converged;
    V = unstack(x);
    if (!g.converged)
      throw SolveError("GMRES did not converge in " + std::to_string(g.iterations) +
                       " iterations (relative residual " + format(g.relative_residual) + ")");
  }
  const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
  info.discrete_residual = (apply(V) - rhs).cwiseAbs().maxCoeff() / scale;
  if (rhs.isZero(0)) info.discrete_residual = (apply(V) - rhs).cwiseAbs().maxCoeff();
  return V;
}

// ------------------------------------------------------------ main solve

CVector main_rhs(const ProblemSpec& spec, NodeSelfRule rule) {
  const Mesh& mesh = *spec.mesh;
  CVector rhs = t_area_pinned_nodes(mesh, spec.F, rule);
  if (spec.phi) {
    for (Eigen::Index j = 0; j < mesh.size(); ++j) {
      const Complex z = mesh.nodes(j);
      rhs(j) += (z - mesh.singular_point) * spec.phi(z);
    }
  }
  return rhs;
}

namespace {

std::function<CVector(const CVector&)> main_evaluator(const ProblemSpec& spec,
                                                      const CVector& V) {
  auto mesh = spec.mesh;
  CVector density = spec.F - apply_star(spec.coeffs, V);
  PointFunction phi = spec.phi;
  return [mesh, density, phi](const CVector& t) {
    CVector out = t_area_pinned(*mesh, density, t, OffGridRule::taylor);
    if (phi)
      for (Eigen::Index i = 0; i < t.size(); ++i)
        out(i) += (t(i) - mesh->singular_point) * phi(t(i));
    return out;
  };
}

SolutionField back_mapped(const PoleTransform& pt, SolutionField W) {
  SolutionField V = std::move(W);
  V.values = pt.back_map(V.values);
  const auto inner = V.evaluator;
  const Complex a = pt.problem.mesh->singular_point;
  const int k = pt.k;
  V.evaluator = [inner, a, k](const CVector& t) {
    CVector w = inner(t);
    for (Eigen::Index i = 0; i < t.size(); ++i) w(i) *= ipow(t(i) - a, k);
    return w;
  };
  return V;
}

}  // namespace

SolutionField solve_main(const ProblemSpec& spec, const SolverOptions& options) {
  std::vector<std::string> warnings = spec.validate();
  if (spec.k != 0) {
    const PoleTransform pt = transform_pole(spec);
    SolutionField V = back_mapped(pt, solve_main(pt.problem, options));
    V.warnings.insert(V.warnings.begin(), warnings.begin(), warnings.end());
    return V;
  }
  SolutionField out;
  out.mesh = spec.mesh;
  out.beta = spec.beta;
  out.warnings = std::move(warnings);
  const CVector rhs = main_rhs(spec, options.self_rule);
  NystromSystem sys(spec.mesh, spec.coeffs, std::nullopt, options);
  out.values = sys.solve(rhs, out.info);
  out.provenance = out.info.method == "gmres" ? Provenance::gmres : Provenance::direct;
  out.evaluator = main_evaluator(spec, out.values);
  return out;
}

SolutionField picard_solve(const ProblemSpec& spec, const PicardOptions& options) {
  SolutionField out;
  out.mesh = spec.mesh;
  out.beta = spec.beta;
  out.warnings = spec.validate();
  out.provenance = Provenance::picard;
  out.info.method = "picard";
  if (options.max_iter < 0) throw SpecError("picard: max_iter must be >= 0");
  if (!(options.tol >= 0)) throw SpecError("picard: tol must be >= 0");
  if (options.relaxation && !(*options.relaxation > 0 && *options.relaxation <= 1))
    throw SpecError("picard: relaxation must lie in (0, 1]");

  double w = options.relaxation.value_or(1.0);
  if (!spec.coeffs.is_zero() && options.max_iter > 0) {
    const ContractionEstimate ce = estimate_contraction(spec.coeffs, *spec.mesh, spec.beta);
    if (ce.product >= 1) {
      out.warnings.push_back("contraction product mu*M_beta = " + format(ce.product) +
                             " >= 1; fixed-point iteration may diverge");
      if (!options.relaxation) w = 0.5;
    }
  }

  const Mesh& mesh = *spec.mesh;
  const CVector rhs = main_rhs(spec);
  CVector V = rhs;
  double prev = std::numeric_limits<double>::infinity();
  int growth = 0;
  out.info.converged = options.max_iter == 0 && options.tol == 0;
  for (int it = 1; it <= options.max_iter; ++it) {
    CVector next = rhs - t_area_pinned_nodes(mesh, apply_star(spec.coeffs, V));
    if (w != 1) next = (1 - w) * V + w * next;
    const double diff = (next - V).cwiseAbs().maxCoeff();
    V = std::move(next);
    out.info.iterations = it;
    if (std::isfinite(prev) && prev > 0) out.info.contraction_ratio = diff / prev;
    if (diff <= options.tol) {
      out.info.converged = true;
      break;
    }
    growth = diff > prev ? growth + 1 : 0;
    prev = diff;
    if (growth >= 5 || !std::isfinite(diff))
      throw SolveError("fixed-point iteration diverges (difference " + format(diff) +
                       " growing for 5 consecutive steps at iteration " + std::to_string(it) +
                       ")");
  }
  if (!out.info.converged && options.max_iter > 0)
    out.warnings.push_back("fixed-point iteration stopped at max_iter without reaching tol");
  out.values = V;
  out.info.discrete_residual =
      (V + t_area_pinned_nodes(mesh, apply_star(spec.coeffs, V)) - rhs).cwiseAbs().maxCoeff() /
      std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
  out.evaluator = main_evaluator(spec, V);
  return out;
}

// ----------------------------------------------------------- contraction

double m_beta_centered_disk(double beta) {
  return std::tgamma((1 - beta) / 2) * std::tgamma(beta / 2) /
         (std::tgamma((1 + beta) / 2) * std::tgamma(1 - beta / 2));
}

ContractionEstimate estimate_contraction(const Coefficients& coeffs, const Mesh& mesh,
                                         double beta) {
  if (!(beta > 0 && beta < 1)) throw SpecError("estimate_contraction: beta must lie in (0, 1)");
  ContractionEstimate ce;
  ce.mu = coeffs.mu;
  const Complex a = mesh.singular_point;
  const double dth = mesh.angular_step();

  if (!mesh.centered_at_singular_point()) {
    ce.warnings.push_back("singular point is off-center: M_beta uses the plain node maximum");
    for (Eigen::Index i = 0; i < mesh.size(); ++i) {
      const Complex zi = mesh.nodes(i);
      double s = 2 * kPi * mesh.cell_radius(i) * std::pow(std::abs(zi - a), -1 - beta);
      for (Eigen::Index j = 0; j < mesh.size(); ++j)
        if (j != i)
          s += mesh.weights(j) * std::pow(std::abs(mesh.nodes(j) - a), -1 - beta) /
               std::abs(mesh.nodes(j) - zi);
      ce.m_beta = std::max(ce.m_beta, std::pow(std::abs(zi - a), beta) * s / kPi);
    }
    ce.product = ce.mu * ce.m_beta;
    return ce;
  }

  // One target per ring; near cells are split into s x s sub-cells. The
  // factor |zeta - a|^{-1-beta} is integrated exactly in r.
  constexpr int s = 9;
  constexpr double near = 3.0;
  const auto& rb = mesh.breakpoints;
  auto moment = [beta](double r0, double r1) {
    return (std::pow(r1, 1 - beta) - std::pow(r0, 1 - beta)) / (1 - beta);
  };
  for (int i = 0; i < mesh.n_r; ++i) {
    const Complex zt = mesh.nodes(mesh.index(i, 0));
    const double rt = std::abs(zt - a);
    double total = 0;
    for (int ii = 0; ii < mesh.n_r; ++ii) {
      const double r0 = rb(ii), r1 = rb(ii + 1);
      const double diam = std::max(r1 - r0, r1 * dth);
      const double mom = moment(r0, r1) * dth;
      for (int k = 0; k < mesh.n_t; ++k) {
        const Complex c = mesh.nodes(mesh.index(ii, k));
        const double dist = std::abs(c - zt);
        if (dist > near * diam) {
          total += mom / dist;
          continue;
        }
        const double th0 = mesh.angles(k) - dth / 2;
        for (int p = 0; p < s; ++p) {
          const double sr0 = r0 + (r1 - r0) * p / s, sr1 = r0 + (r1 - r0) * (p + 1) / s;
          const double sm = moment(sr0, sr1) * dth / s;
          for (int q = 0; q < s; ++q) {
            if (ii == i && k == 0 && p == s / 2 && q == s / 2) {
              const double area = 0.5 * (sr1 * sr1 - sr0 * sr0) * dth / s;
              total += 2 * kPi * std::sqrt(area / kPi) * std::pow(rt, -1 - beta);
              continue;
            }
            const Complex cc = a + std::polar(0.5 * (sr0 + sr1), th0 + (q + 0.5) * dth / s);
            total += sm / std::abs(cc - zt);
          }
        }
      }
    }
    ce.m_beta = std::max(ce.m_beta, std::pow(rt, beta) * total / kPi);
  }
  ce.product = ce.mu * ce.m_beta;
  return ce;
}

// ------------------------------------------------------------ pole transform

PoleTransform transform_pole(const ProblemSpec& spec) {
  if (!spec.mesh) throw SpecError("transform_pole: mesh is missing");
  const Mesh& mesh = *spec.mesh;
  PoleTransform pt;
  pt.k = spec.k;
  pt.problem = spec;
  pt.problem.k = 0;
  const Eigen::Index n = mesh.size();
  pt.factor.resize(n);
  CVector B0k(n), Fk(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = mesh.nodes(j) - mesh.singular_point;
    const Complex u = d / std::abs(d);
    pt.factor(j) = ipow(d, spec.k);
    // e^{-2ik phi} = u^{-2k}
    const Complex phase = spec.k >= 0 ? ipow(std::conj(u), 2 * spec.k) : ipow(u, -2 * spec.k);
    B0k(j) = spec.coeffs.B0(j) * phase;
    Fk(j) = spec.F(j) / pt.factor(j);
  }
  std::optional<double> mu;
  if (spec.coeffs.mu_overridden) mu = spec.coeffs.mu;
  pt.problem.coeffs = make_coefficients<double>(mesh, spec.coeffs.A0, B0k, mu);
  pt.problem.F = Fk;
  return pt;
}

// -------------------------------------------------------------- diagnostics

namespace {

Eigen::MatrixXd spectral_diff_matrix(int n, double h) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const double x = (j - k) * h / 2;
      const double sign = ((j - k) % 2 == 0) ? 1.0 : -1.0;
      D(j, k) = n % 2 == 0 ? 0.5 * sign / std::tan(x) : 0.5 * sign / std::sin(x);
    }
  }
  return D;
}

void check_fd_mesh(const Mesh& mesh, const char* who) {
  if (mesh.n_r < 4 || mesh.n_t < 8)
    throw SpecError(std::string(who) + ": mesh too coarse (need n_r >= 4 and n_t >= 8)");
}

}  // namespace

CVector fd_dbar(const Mesh& mesh, const CVector& V) {
  if (V.size() != mesh.size()) throw SpecError("fd_dbar: size mismatch");
  if (mesh.n_r < 3) throw SpecError("fd_dbar: need at least 3 rings");
  const int nr = mesh.n_r, nt = mesh.n_t;
  const Eigen::MatrixXd Dt = spectral_diff_matrix(nt, mesh.angular_step());
  const auto& rm = mesh.ring_radius;
  CVector out(mesh.size());
  for (int i = 0; i < nr; ++i) {
    const int i0 = std::clamp(i - 1, 0, nr - 3);
    std::array<double, 3> xs{rm(i0), rm(i0 + 1), rm(i0 + 2)}, L{}, D{};
    detail::lagrange(rm(i), xs, 3, L, D);
    const CVector ring = V.segment(mesh.index(i, 0), nt);
    const CVector ft = Dt.cast<Complex>() * ring;
    for (int k = 0; k < nt; ++k) {
      Complex fr{};
      for (int p = 0; p < 3; ++p) fr += D[p] * V(mesh.index(i0 + p, k));
      const Complex e = std::polar(1.0, mesh.angles(k));
      out(mesh.index(i, k)) = 0.5 * e * (fr + Complex(0, 1) / rm(i) * ft(k));
    }
  }
  return out;
}

ResidualReport residual(const CVector& V, const ProblemSpec& spec, double min_radius) {
  if (!spec.mesh) throw SpecError("residual: mesh is missing");
  const Mesh& mesh = *spec.mesh;
  check_fd_mesh(mesh, "residual");
  if (V.size() != mesh.size()) throw SpecError("residual: size mismatch");
  ResidualReport r;
  const CVector full =
      fd_dbar(mesh, V) + spec.coeffs.A.cwiseProduct(V) + spec.coeffs.B.cwiseProduct(V.conjugate()) -
      spec.F;
  r.pointwise = CVector::Zero(mesh.size());
  r.included.assign(mesh.size(), false);
  for (int i = 1; i < mesh.n_r - 1; ++i) {
    for (int k = 0; k < mesh.n_t; ++k) {
      const Eigen::Index j = mesh.index(i, k);
      if (std::abs(mesh.nodes(j) - mesh.singular_point) < min_radius) continue;
      r.pointwise(j) = full(j);
      r.included[j] = true;
      r.max = std::max(r.max, std::abs(full(j)));
    }
  }
  return r;
}

CVector boundary_trace(const Mesh& mesh, const CVector& V, const Grid& grid) {
  if (V.size() != mesh.size()) throw SpecError("boundary_trace: size mismatch");
  const int nr = mesh.n_r, nt = mesh.n_t;
  const int np = std::min(3, nr);
  std::array<double, 3> xs{}, L{}, D{};
  for (int p = 0; p < np; ++p) xs[p] = mesh.ring_radius(nr - np + p);
  detail::lagrange(mesh.radius, xs, np, L, D);
  CVector edge = CVector::Zero(nt);
  for (int k = 0; k < nt; ++k)
    for (int p = 0; p < np; ++p) edge(k) += L[p] * V(mesh.index(nr - np + p, k));

  // Band-limited interpolation through the equispaced angular samples.
  CVector out(grid.size());
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    const double th = std::arg(grid.nodes(l) - mesh.center);
    Complex s{};
    for (int k = 0; k < nt; ++k) {
      const double x = th - mesh.angles(k);
      const double sx = std::sin(x / 2);
      double w;
      if (std::abs(sx) < 1e-15) {
        w = 1;
      } else if (nt % 2 == 0) {
        w = std::sin(nt * x / 2) / (nt * std::tan(x / 2));
      } else {
        w = std::sin(nt * x / 2) / (nt * sx);
      }
      s += w * edge(k);
    }
    out(l) = s;
  }
  return out;
}

double check_first_type(const CVector& V, const ProblemSpec& spec, const Grid& grid) {
  if (!spec.mesh) throw SpecError("check_first_type: mesh is missing");
  const Mesh& mesh = *spec.mesh;
  if (V.size() != mesh.size()) throw SpecError("check_first_type: size mismatch");
  if (grid.center != mesh.center || grid.radius != mesh.radius)
    throw SpecError("check_first_type: boundary grid does not match the mesh");
  const CVector h = boundary_trace(mesh, V, grid);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < mesh.size(); ++j)
    if (std::abs(mesh.nodes(j) - mesh.center) <= 0.8 * mesh.radius) idx.push_back(j);
  CVector targets(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) targets(i) = mesh.nodes(idx[i]);
  const CVector PV = t_area_pinned_nodes(mesh, apply_star(spec.coeffs, V));
  const CVector TF = t_area_pinned_nodes(mesh, spec.F);
  const CVector K = cauchy_boundary_pinned(grid, h, targets, mesh.singular_point).values;
  double defect = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Eigen::Index j = idx[i];
    defect = std::max(defect, std::abs(V(j) - (-PV(j) + K(i) + TF(j))));
  }
  return defect;
}

SimilarityReport similarity_factor(const CVector& V, const Coefficients& coeffs,
                                   const Mesh& mesh, double min_radius) {
  check_fd_mesh(mesh, "similarity_factor");
  if (V.size() != mesh.size()) throw SpecError("similarity_factor: size mismatch");
  SimilarityReport r;
  const double threshold = 1e-8 * std::max(V.cwiseAbs().maxCoeff(), 1e-300);
  const CVector star = apply_star(coeffs, V);
  CVector hat = CVector::Zero(mesh.size());
  std::vector<bool> masked(mesh.size(), false);
  Eigen::Index n_masked = 0;
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    if (std::abs(V(j)) < threshold) {
      masked[j] = true;
      ++n_masked;
    } else {
      hat(j) = star(j) / V(j);
    }
  }
  r.masked_fraction = double(n_masked) / double(mesh.size());
  r.reliable = r.masked_fraction <= 0.2;
  r.omega = t_area_nodes(mesh, hat);
  r.phi = V.cwiseProduct(r.omega.array().exp().matrix());
  const CVector d = fd_dbar(mesh, r.phi);
  for (int i = 1; i < mesh.n_r - 1; ++i)
    for (int k = 0; k < mesh.n_t; ++k) {
      const Eigen::Index j = mesh.index(i, k);
      if (std::abs(mesh.nodes(j) - mesh.singular_point) < min_radius) continue;
      if (!masked[j]) r.holo_defect = std::max(r.holo_defect, std::abs(d(j)));
    }
  return r;
}

double inner_decay_slope(const Mesh& mesh, const CVector& V) {
  if (mesh.n_r < 3) throw SpecError("inner_decay_slope: need at least 3 rings");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    const double x = std::log(mesh.ring_radius(i));
    const double y = std::log(V.segment(mesh.index(i, 0), mesh.n_t).cwiseAbs().mean());
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
}

}  // namespace vekua
