#include "vekua/run.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <map>
#include <random>

using namespace vekua;

namespace {

const Complex I{0, 1};

std::shared_ptr<const Mesh> disk(int n_r, int n_t, double R = 1, Complex a = 0,
                                 double grading = 2) {
  return std::make_shared<const Mesh>(build_disk_mesh<double>(R, a, n_r, n_t, grading));
}

ProblemSpec spec_of(std::shared_ptr<const Mesh> m, const char* A0, const char* B0, const char* F,
                    const char* phi = nullptr) {
  std::optional<expr::Expr> p;
  if (phi) p = expr::parse(phi);
  return make_spec(std::move(m), expr::parse(A0), expr::parse(B0), expr::parse(F), p);
}

RunConfig manufactured(const std::string& A0, const std::string& B0) {
  RunConfig c;
  c.A0 = A0;
  c.B0 = B0;
  c.F = "manufactured:conj(z)*absz";
  c.mesh.n_b = 1024;
  return c;
}

struct Manufactured {
  BuiltProblem bp;
  SolutionField V;
  CVector exact;
};

const Manufactured& manufactured_solution(int n_r) {
  static std::map<int, Manufactured> cache;
  auto it = cache.find(n_r);
  if (it == cache.end()) {
    Manufactured m;
    m.bp = build_problem(manufactured("0.3", "0.2i"), n_r, 2 * n_r);
    m.V = solve_main(m.bp.spec);
    m.exact = sample(*m.bp.mesh, *m.bp.exact);
    it = cache.emplace(n_r, std::move(m)).first;
  }
  return it->second;
}

double max_within(const Mesh& m, const CVector& v, double radius) {
  double s = 0;
  for (Eigen::Index j = 0; j < m.size(); ++j)
    if (std::abs(m.nodes(j) - m.center) <= radius) s = std::max(s, std::abs(v(j)));
  return s;
}

}  // namespace

TEST_CASE("solve_main: zero operators reproduce (z - a) Phi") {
  for (Complex a : {Complex(0), Complex(0.2, -0.1)}) {
    const auto m = disk(12, 24, 1.0, a);
    const SolutionField V = solve_main(spec_of(m, "0", "0", "0", "1"));
    CHECK((V.values - (m->nodes.array() - a).matrix()).cwiseAbs().maxCoeff() <= 1e-12);
    CVector t(3);
    t << Complex(0.5, 0.1), a, Complex(-0.3, 0.9);
    CHECK((V.evaluate(t) - (t.array() - a).matrix()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(V.provenance == Provenance::direct);
  }
}

TEST_CASE("solve_main: F = 1 gives conj(z)") {
  const auto m = disk(48, 96);
  const SolutionField V = solve_main(spec_of(m, "0", "0", "1"));
  CHECK(max_within(*m, V.values - m->nodes.conjugate(), 1.0) <= 5e-3);
  CVector t(2);
  t << Complex(0.5, 0), Complex(-0.2, 0.7);
  CHECK((V.evaluate(t) - t.conjugate()).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("solve_main: manufactured solution converges") {
  const Manufactured& lo = manufactured_solution(16);
  const Manufactured& hi = manufactured_solution(32);
  const double e_lo = manufactured_error(*lo.bp.mesh, lo.V.values, lo.exact).relative;
  const double e_hi = manufactured_error(*hi.bp.mesh, hi.V.values, hi.exact).relative;
  CHECK(e_hi <= 2e-2);
  CHECK(e_lo / e_hi >= 1.8);
  CHECK(hi.V.info.discrete_residual <= 1e-10);
  CHECK(std::isfinite(hi.V.info.rcond));
}

TEST_CASE("solve_main: GMRES path agrees with dense LU") {
  const auto m = disk(12, 24);
  const ProblemSpec s = spec_of(m, "0.3", "0.2i*exp(i*phi)", "conj(z) + 1", "1 - z");
  SolverOptions o;
  o.dense_limit = 100;
  const SolutionField g = solve_main(s, o);
  const SolutionField d = solve_main(s);
  CHECK(g.provenance == Provenance::gmres);
  CHECK((g.values - d.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("solve_main: uniqueness beyond small coefficients") {
  for (auto [A0, B0] : {std::pair{"0.3", "0.2i"}, std::pair{"0.5", "0.5i"},
                        std::pair{"0.9*exp(i*phi)", "0.6i"}, std::pair{"1.2", "0.8*z"}}) {
    const auto m = disk(12, 24);
    const ProblemSpec s = spec_of(m, A0, B0, "0");
    CHECK(s.coeffs.mu >= 0.5);
    const SolutionField V = solve_main(s);
    CHECK(V.values.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(std::isfinite(V.info.rcond));
    CHECK(V.info.rcond > SolverOptions{}.min_rcond);

    NystromSystem sys(m, s.coeffs, std::nullopt, {});
    std::mt19937 rng(7);
    std::normal_distribution<double> n;
    CVector rhs(m->size());
    for (Eigen::Index j = 0; j < rhs.size(); ++j) rhs(j) = {n(rng), n(rng)};
    SolveInfo info;
    const CVector x = sys.solve(rhs, info);
    CHECK((sys.apply(x) - rhs).cwiseAbs().maxCoeff() <= 1e-8 * rhs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("solve_main: real-linearity of the solve map") {
  const auto m = disk(12, 24);
  const ProblemSpec s1 = spec_of(m, "0.3", "0.2i", "conj(z)*absz", "1 + z");
  const ProblemSpec s2 = spec_of(m, "0.3", "0.2i", "exp(z) - 2i", "z^2");
  const ProblemSpec s12 = spec_of(m, "0.3", "0.2i", "conj(z)*absz + exp(z) - 2i", "1 + z + z^2");
  const CVector sum = solve_main(s1).values + solve_main(s2).values;
  CHECK((solve_main(s12).values - sum).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("solve_main: pole transform") {
  const auto m = disk(12, 24);
  ProblemSpec s = spec_of(m, "0", "0", "0", "1");
  s.k = 1;
  const SolutionField V = solve_main(s);
  CHECK((V.values - m->nodes.cwiseProduct(m->nodes)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("picard_solve: examples") {
  const auto m = disk(12, 24);
  {
    const ProblemSpec s = spec_of(m, "0", "0", "conj(z)", "1");
    const SolutionField P = picard_solve(s);
    CHECK(P.info.iterations == 1);
    CHECK(P.info.converged);
    CHECK((P.values - main_rhs(s)).cwiseAbs().maxCoeff() == 0);
  }
  {
    const ProblemSpec s = spec_of(m, "0.3", "0.2i", "conj(z)", "1");
    PicardOptions o;
    o.max_iter = 0;
    o.tol = 0;
    const SolutionField P = picard_solve(s, o);
    CHECK(P.info.iterations == 0);
    CHECK((P.values - main_rhs(s)).cwiseAbs().maxCoeff() == 0);
  }
  {
    // mu * M_beta close to 0.4
    const ProblemSpec s = spec_of(m, "0.03", "0.015i", "conj(z)*absz", "1 + z");
    const ContractionEstimate ce = estimate_contraction(s.coeffs, *m, s.beta);
    CHECK(ce.product == doctest::Approx(0.4).epsilon(0.05));
    const SolutionField P = picard_solve(s);
    CHECK(P.info.converged);
    CHECK(P.info.contraction_ratio <= 0.5);
    CHECK((P.values - solve_main(s).values).cwiseAbs().maxCoeff() <= 1e-8);
  }
  {
    const ProblemSpec s = spec_of(m, "5", "3i", "conj(z)", "1");
    PicardOptions o;
    o.relaxation = 1.0;
    CHECK_THROWS_AS(picard_solve(s, o), SolveError);
    o.relaxation = 1.5;
    CHECK_THROWS_AS(picard_solve(s, o), SpecError);
  }
}

TEST_CASE("estimate_contraction") {
  const auto m = disk(32, 64);
  const ContractionEstimate zero = estimate_contraction(zero_coefficients(*m), *m, 0.5);
  CHECK(zero.mu == 0);
  CHECK(zero.product == 0);
  CHECK(zero.m_beta > 0);
  CHECK_THROWS_AS(estimate_contraction(zero_coefficients(*m), *m, 1.0), SpecError);

  const auto fine = disk(64, 128);
  for (double beta : {0.3, 0.5, 0.7}) {
    // Independent reference: the supremum over |z| is approached as z -> 0,
    // where the disk integral tends to the whole-plane value.
    const double rho = 1e-6;
    const double whole = oracle::m_beta_at(beta, rho) + 2 * std::pow(rho, beta) / beta;
    CHECK(m_beta_centered_disk(beta) == doctest::Approx(whole).epsilon(1e-3));
    for (double r : {0.01, 0.1, 0.5, 0.9})
      CHECK(oracle::m_beta_at(beta, r) <= m_beta_centered_disk(beta));

    const double coarse_est = estimate_contraction(zero_coefficients(*m), *m, beta).m_beta;
    const double fine_est = estimate_contraction(zero_coefficients(*fine), *fine, beta).m_beta;
    CHECK(std::abs(fine_est - coarse_est) <= 0.05 * fine_est);
    CHECK(coarse_est == doctest::Approx(m_beta_centered_disk(beta)).epsilon(0.05));
  }
  const Coefficients c = make_coefficients<double>(*m, CVector::Constant(m->size(), 0.3),
                                                   CVector::Constant(m->size(), Complex(0, 0.2)));
  const ContractionEstimate e = estimate_contraction(c, *m, 0.5);
  CHECK(e.mu == doctest::Approx(0.5));
  CHECK(e.product == doctest::Approx(e.mu * e.m_beta));
}

TEST_CASE("transform_pole") {
  const auto m = disk(4, 6);
  ProblemSpec s = spec_of(m, "0.3", "0.2i + 0.1*z", "conj(z) + 1");
  {
    s.k = 0;
    const PoleTransform pt = transform_pole(s);
    CHECK((pt.problem.coeffs.B - s.coeffs.B).cwiseAbs().maxCoeff() == 0);
    CHECK((pt.problem.F - s.F).cwiseAbs().maxCoeff() == 0);
  }
  {
    s.k = 1;
    const PoleTransform pt = transform_pole(s);
    // node (ring 2, k = 1) sits at angle pi/2
    const Eigen::Index j = m->index(2, 1);
    CHECK(std::abs(m->nodes(j).real()) <= 1e-15);
    CHECK(std::abs(pt.problem.coeffs.B(j) + s.coeffs.B(j)) <= 1e-15);
    CHECK((pt.problem.coeffs.A - s.coeffs.A).cwiseAbs().maxCoeff() == 0);
    CHECK(pt.problem.k == 0);
  }
  {
    const auto big = disk(8, 16);
    ProblemSpec r;
    std::mt19937 rng(3);
    std::normal_distribution<double> n;
    CVector A0(big->size()), B0(big->size()), F(big->size());
    for (Eigen::Index j = 0; j < big->size(); ++j) {
      A0(j) = {n(rng), n(rng)};
      B0(j) = {n(rng), n(rng)};
      F(j) = {n(rng), n(rng)};
    }
    r.mesh = big;
    r.coeffs = make_coefficients<double>(*big, A0, B0);
    r.F = F;
    r.k = 2;
    const PoleTransform fwd = transform_pole(r);
    ProblemSpec w = fwd.problem;
    w.k = -2;
    const PoleTransform back = transform_pole(w);
    CHECK((back.problem.coeffs.B0 - B0).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((back.problem.F - F).cwiseAbs().maxCoeff() <= 1e-13 * F.cwiseAbs().maxCoeff());
    CHECK((fwd.factor.cwiseProduct(back.factor).array() - 1.0).abs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("residual: examples") {
  const auto m = disk(16, 32);
  {
    const ProblemSpec s = spec_of(m, "0", "0", "0", "1");
    CHECK(residual(solve_main(s).values, s).max <= 1e-10);
  }
  {
    const ProblemSpec s = spec_of(m, "0", "0", "1");
    CHECK(residual(CVector(m->nodes.conjugate()), s).max <= 1e-10);
  }
  {
    const ProblemSpec s = spec_of(disk(3, 16), "0", "0", "0");
    CHECK_THROWS_AS(residual(CVector::Zero(48), s), SpecError);
    const ProblemSpec t = spec_of(disk(8, 6), "0", "0", "0");
    CHECK_THROWS_AS(residual(CVector::Zero(48), t), SpecError);
  }
  const Manufactured& lo = manufactured_solution(16);
  const Manufactured& hi = manufactured_solution(32);
  const double r_lo = residual(lo.V.values, lo.bp.spec).max;
  const double r_hi = residual(hi.V.values, hi.bp.spec).max;
  CHECK(r_hi <= 5e-2);
  CHECK(r_lo / r_hi >= 2.0);
  // the exact solution is a polynomial in r per Fourier mode
  CHECK(residual(hi.exact, hi.bp.spec).max <= 1e-10);
}

TEST_CASE("check_first_type: examples") {
  const auto m = disk(16, 32);
  const Grid g = build_boundary_grid<double>(0, 1.0, 256);
  const ProblemSpec s = spec_of(m, "0", "0", "0", "1");
  const CVector V = m->nodes;
  CHECK(check_first_type(V, s, g) <= 1e-8);

  CVector bad = V;
  bad(m->index(8, 3)) += 0.1;
  CHECK(check_first_type(bad, s, g) >= 0.05);

  const Grid mismatch = build_boundary_grid<double>(0, 2.0, 256);
  CHECK_THROWS_AS(check_first_type(V, s, mismatch), SpecError);

  const Manufactured& lo = manufactured_solution(16);
  const Manufactured& hi = manufactured_solution(32);
  const Grid gb = build_boundary_grid<double>(0, 1.0, 1024);
  const double d_lo = check_first_type(lo.V.values, lo.bp.spec, gb);
  const double d_hi = check_first_type(hi.V.values, hi.bp.spec, gb);
  CHECK(d_hi <= 5e-2);
  CHECK(d_lo / d_hi >= 2.0);
  // Solutions pass Eq. (1) and the first-type identity at the same time.
  CHECK(residual(hi.V.values, hi.bp.spec).max <= 5e-2);
}

TEST_CASE("similarity_factor") {
  {
    const auto m = disk(16, 32);
    const CVector V = sample(*m, expr::parse("z*conj(z) + z"));
    const ProblemSpec s = spec_of(m, "0", "0", "0");
    const SimilarityReport r = similarity_factor(V, s.coeffs, *m);
    CHECK(r.omega.cwiseAbs().maxCoeff() == 0);
    CHECK((r.phi - V).cwiseAbs().maxCoeff() == 0);
    CHECK(r.holo_defect == doctest::Approx(residual(V, s).max).epsilon(1e-14));
    CHECK(r.reliable);
  }
  {
    const auto m = disk(16, 32);
    const ProblemSpec s = spec_of(m, "0.4", "0", "0");
    const CVector V = sample(*m, expr::parse("1 + z^2"));
    const SimilarityReport r = similarity_factor(V, s.coeffs, *m);
    CHECK((r.omega - t_area_nodes(*m, s.coeffs.A)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  {
    // homogeneous solutions: level on the whole mesh, refinement away from a
    double whole[2], outer[2];
    for (int l = 0; l < 2; ++l) {
      const auto m = disk(16 << l, 32 << l);
      const ProblemSpec s = spec_of(m, "0.3", "0.05i", "0", "1 + z/2");
      const SolutionField V = solve_main(s);
      whole[l] = similarity_factor(V.values, s.coeffs, *m).holo_defect;
      outer[l] = similarity_factor(V.values, s.coeffs, *m, 0.1).holo_defect;
    }
    CHECK(whole[1] <= 1e-1);
    CHECK(outer[1] < outer[0]);
  }
  {
    const auto m = disk(8, 16);
    CVector V = CVector::Zero(m->size());
    V.head(10).setOnes();
    const SimilarityReport r = similarity_factor(V, zero_coefficients(*m), *m);
    CHECK_FALSE(r.reliable);
  }
}

TEST_CASE("class decay") {
  const Manufactured& hi = manufactured_solution(32);
  CHECK(inner_decay_slope(*hi.bp.mesh, hi.V.values) >= (1 - 0.5) - 0.15);

  // innermost ring bounded by C r^{1 - beta - 0.1} with C fitted on the others
  const Mesh& m = *hi.bp.mesh;
  const double p = 1 - 0.5 - 0.1;
  auto ring_max = [&](int i) { return hi.V.values.segment(m.index(i, 0), m.n_t).cwiseAbs().maxCoeff(); };
  double C = 0;
  for (int i = 1; i < m.n_r; ++i) C = std::max(C, ring_max(i) / std::pow(m.ring_radius(i), p));
  CHECK(ring_max(0) <= C * std::pow(m.ring_radius(0), p));

  const auto mesh = disk(16, 32);
  const ProblemSpec s = spec_of(mesh, "0.3", "0.2i", "0", "1");
  CHECK(inner_decay_slope(*mesh, solve_main(s).values) >= (1 - 0.5) - 0.15);
}

TEST_CASE("problem validation") {
  const auto m = disk(8, 16);
  ProblemSpec s = spec_of(m, "0.3", "0.2i", "1");
  CHECK(s.validate().empty());
  s.beta = 1.0;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s.beta = 0.0;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s.beta = 0.5;
  s.F(3) = Complex(INFINITY, 0);
  CHECK_THROWS_AS(s.validate(), SpecError);
  CHECK_THROWS_AS(solve_main(s), SpecError);

  ProblemSpec w = spec_of(m, "0.03", "0.02", "1");
  w.beta = 0.3;  // window is (0.6, 1) for mu = 0.05
  CHECK(w.validate().size() == 1);
  w.strict_class = true;
  CHECK_THROWS_AS(w.validate(), SpecError);

  ProblemSpec q = spec_of(m, "0", "0", "1");
  q.q = 3.0;
  q.beta = 0.8;
  CHECK(q.validate().size() == 1);
  q.nu = -1.0;
  CHECK_THROWS_AS(q.validate(), SpecError);
}
