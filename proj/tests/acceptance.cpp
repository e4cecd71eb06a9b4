// One PASS/FAIL line per acceptance criterion, plus INFO lines with context.
// Exit status is nonzero when any criterion fails.

#include "vekua/run.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

using namespace vekua;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("[%s] %2d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void info(int id, const std::string& what) {
  std::printf("[INFO] %2d %s\n", id, what.c_str());
  std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::shared_ptr<const Mesh> disk(int n_r, int n_t, double R = 1, Complex a = 0) {
  return std::make_shared<const Mesh>(build_disk_mesh<double>(R, a, n_r, n_t, 2.0));
}

double max_within(const Mesh& m, const CVector& v, double radius) {
  double s = 0;
  for (Eigen::Index j = 0; j < m.size(); ++j)
    if (std::abs(m.nodes(j) - m.center) <= radius) s = std::max(s, std::abs(v(j)));
  return s;
}

RunConfig manufactured(const std::string& A0, const std::string& B0) {
  RunConfig c;
  c.A0 = A0;
  c.B0 = B0;
  c.F = "manufactured:conj(z)*absz";
  c.mesh.n_b = 1024;
  return c;
}

struct ManufacturedRun {
  double relative = 0;
  double residual = 0;
  double residual_outer = 0;
  double slope = 0;
  double mu = 0;
};

ManufacturedRun solve_manufactured(const RunConfig& cfg, int n_r) {
  const BuiltProblem bp = build_problem(cfg, n_r, 2 * n_r);
  const SolutionField V = solve_main(bp.spec, solver_options(cfg));
  const CVector exact = sample(*bp.mesh, *bp.exact);
  return {manufactured_error(*bp.mesh, V.values, exact).relative,
          residual(V.values, bp.spec).max, residual(V.values, bp.spec, 0.1).max,
          inner_decay_slope(*bp.mesh, V.values), bp.spec.coeffs.mu};
}

RHProblem rh_problem(int m, const std::string& g, const std::string& A0, const std::string& B0,
                     int n_r = 16, int n_t = 32) {
  RHProblem p;
  p.mesh = disk(n_r, n_t);
  p.grid = build_boundary_grid<double>(0, 1.0, 1024);
  p.m = m;
  p.g = sample_boundary(p.grid, expr::parse(g));
  p.coeffs = make_coefficients<double>(*p.mesh, sample(*p.mesh, expr::parse(A0)),
                                       sample(*p.mesh, expr::parse(B0)));
  p.F = CVector::Zero(p.mesh->size());
  return p;
}

void criterion_1() {
  const auto t0 = Clock::now();
  double err[2];
  for (int l = 0; l < 2; ++l) {
    const auto m = disk(32 << l, 64 << l);
    const CVector f = m->nodes.cwiseAbs2().cast<Complex>();
    err[l] = max_within(*m, fd_dbar(*m, t_area_nodes(*m, f)) - f, 0.8);
  }
  const double t = seconds_since(t0);
  verdict(1, err[0] <= 5e-2 && err[0] / err[1] >= 2 && t <= 30,
          fmt("Pompeiu: error %.3e at 32x64, %.3e at 64x128 (ratio %.2f), %.1f s", err[0], err[1],
              err[0] / err[1], t));
}

void criterion_2() {
  // Oracle: adaptive polar quadrature about each target.
  double oracle_dev = 0;
  for (Complex z : {Complex(0.5, 0), Complex(0.3, -0.6), Complex(-0.85, 0.2)})
    oracle_dev = std::max(
        oracle_dev,
        std::abs(oracle::cauchy_area([](Complex) { return Complex(1); }, z, 1.0) - std::conj(z)));
  info(2, fmt("adaptive quadrature confirms T_G 1 = conj(z) to %.1e", oracle_dev));

  const auto m = disk(48, 96);
  const CVector ones = CVector::Ones(m->size());
  const double nodes = max_within(*m, t_area_nodes(*m, ones) - m->nodes.conjugate(), 0.9);
  // off-grid targets on |z| <= 0.9
  CVector t(0);
  std::vector<Complex> pts;
  for (int i = 1; i <= 9; ++i)
    for (int k = 0; k < 13; ++k) pts.push_back(std::polar(0.1 * i, 0.37 + 2 * oracle::pi * k / 13));
  t.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) t(i) = pts[i];
  const double off = (t_area(*m, ones, t) - t.conjugate()).cwiseAbs().maxCoeff();
  verdict(2, nodes <= 5e-3 && off <= 5e-3 && oracle_dev <= 1e-8,
          fmt("T_G 1 = conj(z) at 48x96: node error %.2e, off-grid error %.2e", nodes, off));
  const double drop = max_within(*m, t_area_nodes(*m, ones, NodeSelfRule::drop) -
                                         m->nodes.conjugate(), 0.9);
  info(2, fmt("plain drop self rule at 48x96: node error %.2e (first order)", drop));
}

void criterion_3() {
  const Complex a{0.2, 0.1};
  const auto m = disk(16, 32, 1.0, a);
  const ProblemSpec s = make_spec(m, expr::parse("0"), expr::parse("0"), expr::parse("0"),
                                  expr::parse("1"));
  const SolutionField V = solve_main(s);
  const double err = (V.values - (m->nodes.array() - a).matrix()).cwiseAbs().maxCoeff();
  verdict(3, err <= 1e-12, fmt("trivial solve: max |V - (z - a)| = %.2e", err));
}

ManufacturedRun c4_hi;

void criterion_4() {
  const auto t0 = Clock::now();
  const RunConfig cfg = manufactured("0.3", "0.2i");
  const ManufacturedRun lo = solve_manufactured(cfg, 32);
  c4_hi = solve_manufactured(cfg, 64);
  const double t = seconds_since(t0);
  const double ratio = lo.relative / c4_hi.relative;
  verdict(4, lo.relative <= 2e-2 && ratio >= 1.8 && t <= 120,
          fmt("manufactured: relative error %.3e at 32x64, %.3e at 64x128 (ratio %.2f), %.1f s",
              lo.relative, c4_hi.relative, ratio, t));
}

ManufacturedRun c5_runs[2][2];

void criterion_5() {
  bool ok = true;
  const std::pair<const char*, const char*> sets[] = {{"0.5", "0.3i"}, {"0.9", "0.6i*exp(i*phi)"}};
  for (int s = 0; s < 2; ++s) {
    const RunConfig cfg = manufactured(sets[s].first, sets[s].second);
    for (int l = 0; l < 2; ++l) c5_runs[s][l] = solve_manufactured(cfg, 16 << l);
    const ManufacturedRun& lo = c5_runs[s][0];
    const ManufacturedRun& hi = c5_runs[s][1];
    ok = ok && hi.residual <= 5e-2 && hi.residual < lo.residual;
    info(5, fmt("mu = %.2f: residual %.3e at 16x32, %.3e at 32x64; relative error %.3e", hi.mu,
                lo.residual, hi.residual, hi.relative));
  }
  verdict(5, ok, "direct solver succeeds for mu ~ 0.8 and mu ~ 1.5 with refining residual <= 5e-2");
}

void criterion_6() {
  const auto m = disk(16, 32);
  const ProblemSpec s = make_spec(m, expr::parse("0.03"), expr::parse("0.015i"),
                                  expr::parse("conj(z)*absz"), expr::parse("1 + z"));
  const ContractionEstimate ce = estimate_contraction(s.coeffs, *m, s.beta);
  const SolutionField P = picard_solve(s);
  const SolutionField D = solve_main(s);
  const double diff = (P.values - D.values).cwiseAbs().maxCoeff();
  verdict(6, ce.product <= 0.5 && diff <= 1e-8,
          fmt("Picard/direct: product %.3f, %d iterations, observed ratio %.3f, difference %.2e",
              ce.product, P.info.iterations, P.info.contraction_ratio, diff));
}

void criterion_7() {
  bool ok = true;
  for (int m : {1, 2}) {
    const RHSolution s = solve_rh(rh_problem(m, "re(z) + 0.3*im(z^2)", "0.2", "0.1i"));
    double worst = 0;
    for (double r : s.basis_residuals) worst = std::max(worst, r);
    const bool good = s.homogeneous_basis.size() == std::size_t(2 * m - 1) && worst <= 1e-3 &&
                      s.basis_min_singular_value > 1e-6;
    ok = ok && good;
    info(7, fmt("m = %d: %zu homogeneous solutions, max boundary residual %.2e, min singular "
                "value %.3f",
                m, s.homogeneous_basis.size(), worst, s.basis_min_singular_value));
  }
  RHOptions printed;
  printed.form = Phi0mForm::as_printed;
  const RHSolution s = solve_rh(rh_problem(2, "re(z)", "0.2", "0.1i"), printed);
  double worst = 0;
  for (double r : s.basis_residuals) worst = std::max(worst, r);
  info(7, fmt("generators with the printed beta sign: max boundary residual %.2f", worst));
  verdict(7, ok, "RH dimension law at mu = 0.3: 1 and 3 independent solutions, residual <= 1e-3");
}

void criterion_8() {
  const RHSolution one = solve_rh(rh_problem(0, "1", "0", "0"));
  const RHSolution cs = solve_rh(rh_problem(0, "re(z)", "0", "0"));
  const double err = cs.particular
                         ? (cs.particular->values - cs.particular->mesh->nodes).cwiseAbs().maxCoeff()
                         : INFINITY;
  const bool ok = !one.solvable && std::abs(*one.d0 - 1) <= 1e-10 && cs.solvable &&
                  std::abs(*cs.d0) <= 1e-10 && cs.boundary_residual <= 1e-3;
  verdict(8, ok,
          fmt("m = 0 gate: g = 1 defect %.12f rejected; g = cos defect %.1e, |V - z| %.1e, "
              "boundary residual %.1e",
              *one.d0, std::abs(*cs.d0), err, cs.boundary_residual));
}

void criterion_9() {
  const RHSolution z = solve_rh(rh_problem(-1, "0", "0.2", "0.1i"));
  double worst = 0;
  for (double d : z.defects) worst = std::max(worst, std::abs(d));
  const RHSolution c = solve_rh(rh_problem(-1, "re(z^2)", "0", "0"));
  double cd = 0;
  for (double d : c.defects) cd = std::max(cd, std::abs(d));
  info(9, fmt("g = cos 2theta: max defect %.1e, solvable %s", cd, c.solvable ? "yes" : "no"));
  verdict(9, z.defects.size() == 3 && c.defects.size() == 3 && worst <= 1e-10,
          fmt("m = -1: %zu real defects; zero data max defect %.1e", z.defects.size(), worst));
}

RHSolution c10_rh0;

void criterion_10() {
  const RHProblem p = rh_problem(0, "re(z^3)", "0.2", "0.1i");
  c10_rh0 = solve_rh0(1.5, 3, p);
  const RHSolution n1 = solve_rh0(1.5, 1, p);
  RHProblem q = rh_problem(0, "re(z^2)", "0.2", "0.1i");
  const RHSolution half = solve_rh0(0.5, 2, q);
  q.m = 2;
  const RHSolution direct = solve_rh(q);
  const bool same = half.particular && direct.particular &&
                    std::memcmp(half.particular->values.data(), direct.particular->values.data(),
                                sizeof(Complex) * direct.particular->values.size()) == 0;
  const bool ok = c10_rh0.substitution_k == 1 && c10_rh0.homogeneous_basis.size() == 3 &&
                  n1.m == 0 && n1.d0.has_value() && half.substitution_k == 0 && same;
  verdict(10, ok,
          fmt("rh0: nu 1.5 n 3 gives %zu solutions; nu 1.5 n 1 uses m = %d with defect %.1e; "
              "nu 0.5 identical to direct: %s",
              c10_rh0.homogeneous_basis.size(), n1.m, n1.d0.value_or(NAN), same ? "yes" : "no"));
}

void criterion_11() {
  const double bound = (1 - 0.5) - 0.15;
  const RHSolution rh = solve_rh(rh_problem(1, "re(z) + 0.3*im(z^2)", "0.2", "0.1i"));
  const double rh_slope = inner_decay_slope(*rh.particular->mesh, rh.particular->values);
  const double rh0_beta = 1 - 1.5 + 1;
  const double rh0_slope =
      inner_decay_slope(*c10_rh0.particular->mesh, c10_rh0.particular->values);
  const bool ok = c4_hi.slope >= bound && rh_slope >= bound && rh0_slope >= (1 - rh0_beta) - 0.15;
  verdict(11, ok,
          fmt("inner log-slope: manufactured %.3f, RH m = 1 %.3f (bound %.2f); rh0 %.3f (bound "
              "%.2f)",
              c4_hi.slope, rh_slope, bound, rh0_slope, (1 - rh0_beta) - 0.15));
}

void criterion_12() {
  const auto clean = verify_suite();
  const auto again = verify_suite();
  const auto mutated = verify_suite({true});
  bool clean_ok = clean.size() >= kMinVerifyProperties, same = clean.size() == again.size();
  for (std::size_t i = 0; i < clean.size(); ++i) {
    clean_ok = clean_ok && clean[i].passed;
    if (same) same = std::memcmp(&clean[i].value, &again[i].value, sizeof(double)) == 0;
  }
  bool mutated_fails = false;
  for (const auto& p : mutated)
    if (p.name == "pompeiu_identity" && !p.passed) mutated_fails = true;
  verdict(12, clean_ok && same && mutated_fails,
          fmt("verify: %zu properties, clean %s, repeat identical %s, mutation detected %s",
              clean.size(), clean_ok ? "pass" : "fail", same ? "yes" : "no",
              mutated_fails ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::function<void()> all[] = {criterion_1, criterion_2, criterion_3,  criterion_4,
                                       criterion_5, criterion_6, criterion_7,  criterion_8,
                                       criterion_9, criterion_10, criterion_11, criterion_12};
  int id = 1;
  for (const auto& c : all) {
    try {
      c();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("exception: ") + e.what());
    }
    ++id;
  }
  std::printf("%d of 12 criteria passed in %.1f s\n", 12 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
