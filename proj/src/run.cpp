#include "vekua/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

namespace vekua {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json cnum(Complex z) { return Json::array({z.real(), z.imag()}); }

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json info_json(const SolveInfo& info, Provenance p) {
  return {{"method", info.method},
          {"provenance", to_string(p)},
          {"iterations", info.iterations},
          {"rcond", finite_or_null(info.rcond)},
          {"discrete_residual", finite_or_null(info.discrete_residual)},
          {"contraction_ratio", finite_or_null(info.contraction_ratio)},
          {"converged", info.converged}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_grid(const std::filesystem::path& path, const Mesh& mesh, const CVector& V,
                const CVector* exact) {
  std::string s = "x,y,r,re_v,im_v";
  if (exact) s += ",re_exact,im_exact,abs_err";
  s += "\n";
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const Complex z = mesh.nodes(j);
    s += num(z.real()) + "," + num(z.imag()) + "," + num(std::abs(z - mesh.singular_point)) +
         "," + num(V(j).real()) + "," + num(V(j).imag());
    if (exact)
      s += "," + num((*exact)(j).real()) + "," + num((*exact)(j).imag()) + "," +
           num(std::abs(V(j) - (*exact)(j)));
    s += "\n";
  }
  write_text(path, s);
}

std::vector<std::string> merged_warnings(const std::vector<std::string>& a,
                                         const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  for (const auto& w : b)
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  return out;
}

struct SolveOutcome {
  SolutionField V;
  std::optional<CVector> exact;
};

SolveOutcome solve_configured(const RunConfig& cfg, const BuiltProblem& bp) {
  SolveOutcome o;
  if (cfg.solver.method == "picard") {
    PicardOptions po;
    po.max_iter = cfg.solver.picard_max_iter;
    po.tol = cfg.solver.picard_tol;
    po.relaxation = cfg.solver.relaxation;
    if (bp.spec.k != 0) {
      const PoleTransform pt = transform_pole(bp.spec);
      o.V = picard_solve(pt.problem, po);
      o.V.values = pt.back_map(o.V.values);
      auto inner = o.V.evaluator;
      const Complex a = bp.mesh->singular_point;
      const int k = bp.spec.k;
      o.V.evaluator = [inner, a, k](const CVector& t) {
        CVector w = inner(t);
        for (Eigen::Index i = 0; i < t.size(); ++i) w(i) *= std::pow(t(i) - a, k);
        return w;
      };
    } else {
      o.V = picard_solve(bp.spec, po);
    }
  } else {
    o.V = solve_main(bp.spec, solver_options(cfg));
  }
  if (bp.exact) o.exact = sample(*bp.mesh, *bp.exact);
  return o;
}

Json solve_section(const RunConfig& cfg, const BuiltProblem& bp, const SolveOutcome& o,
                   std::vector<std::string>& warnings) {
  Json j;
  j["solution"] = info_json(o.V.info, o.V.provenance);
  if (bp.spec.coeffs.mu > 0) {
    const ContractionEstimate ce = estimate_contraction(bp.spec.coeffs, *bp.mesh, bp.spec.beta);
    j["contraction"] = {{"mu", ce.mu}, {"m_beta", ce.m_beta}, {"product", ce.product}};
    warnings = merged_warnings(warnings, ce.warnings);
  } else {
    j["contraction"] = {{"mu", 0.0}, {"m_beta", nullptr}, {"product", 0.0}};
  }

  Json diag;
  if (bp.mesh->n_r >= 4 && bp.mesh->n_t >= 8) {
    diag["residual_max"] = residual(o.V.values, bp.spec).max;
    diag["residual_max_outer"] = residual(o.V.values, bp.spec, 0.1 * cfg.mesh.R).max;
  } else {
    diag["residual_max"] = nullptr;
    diag["residual_max_outer"] = nullptr;
    warnings.push_back("mesh too coarse for the finite-difference residual");
  }
  diag["inner_decay_slope"] = finite_or_null(inner_decay_slope(*bp.mesh, o.V.values));
  diag["decay_bound"] = 1 - cfg.beta - 0.15;
  j["diagnostics"] = diag;
  if (o.exact) {
    const ManufacturedError e = manufactured_error(*bp.mesh, o.V.values, *o.exact);
    j["exact"] = {{"expression", cfg.exact_expr()},
                  {"max_abs_error", e.max_abs},
                  {"relative_error", e.relative}};
  }
  return j;
}

Json rh_section(const RHSolution& s, const RHOptions& opt) {
  Json a = Json::array();
  for (const auto& v : s.a) a.push_back(cnum(v));
  Json gens = Json::array();
  for (const auto& g : s.generators) gens.push_back(expr::print(g));
  Json j = {{"m", s.m},
            {"verdict", s.verdict()},
            {"solvable", s.solvable},
            {"defects", s.defects},
            {"d0", s.d0 ? Json(*s.d0) : Json(nullptr)},
            {"a", a},
            {"c0", s.c0},
            {"data_scale", s.data_scale},
            {"solvability_tol", opt.solvability_tol},
            {"boundary_residual", s.particular ? Json(s.boundary_residual) : Json(nullptr)},
            {"basis_count", s.homogeneous_basis.size()},
            {"basis_residuals", s.basis_residuals},
            {"basis_min_singular_value", s.basis_min_singular_value},
            {"generator_form",
             opt.form == Phi0mForm::corrected ? "corrected" : "as_printed"},
            {"generators", gens}};
  if (s.nu) {
    j["nu"] = *s.nu;
    j["n"] = s.n;
    j["substitution_k"] = s.substitution_k;
  }
  return j;
}

int run_rh_modes(const RunConfig& cfg, const BuiltProblem& bp, Json& report,
                 std::vector<std::string>& warnings, const std::filesystem::path& out_dir) {
  RHProblem prob = build_rh_problem(cfg, bp);
  RHOptions opt;
  opt.solver = solver_options(cfg);
  opt.solvability_tol = cfg.solvability_tol;
  opt.form = cfg.generators == "as_printed" ? Phi0mForm::as_printed : Phi0mForm::corrected;
  RHSolution s;
  if (cfg.mode == Mode::rh) {
    s = solve_rh(prob, opt);
  } else {
    s = solve_rh0(*cfg.nu, *cfg.n, prob, opt);
    report["class_beta"] = 1 - *cfg.nu + std::floor(*cfg.nu);
  }
  report["rh"] = rh_section(s, opt);
  warnings = merged_warnings(warnings, s.warnings);
  if (s.particular) {
    report["solution"] = info_json(s.particular->info, s.particular->provenance);
    Json diag;
    diag["inner_decay_slope"] = finite_or_null(inner_decay_slope(*bp.mesh, s.particular->values));
    report["diagnostics"] = diag;
    write_grid(out_dir / cfg.grid_file, *bp.mesh, s.particular->values, nullptr);
  }
  return s.solvable ? kExitOk : kExitUnsolvable;
}

int run_convergence(const RunConfig& cfg, Json& report, std::vector<std::string>& warnings,
                    const std::filesystem::path& out_dir, std::ostream& log) {
  std::string table = "n_r,n_t,error,ratio\n";
  Json levels = Json::array();
  double prev = NAN, min_ratio = INFINITY;
  bool monotone = true;
  for (const auto& [nr, nt] : cfg.levels) {
    const BuiltProblem bp = build_problem(cfg, nr, nt);
    const SolveOutcome o = solve_configured(cfg, bp);
    warnings = merged_warnings(warnings, o.V.warnings);
    const double err = manufactured_error(*bp.mesh, o.V.values, *o.exact).relative;
    const double ratio = std::isnan(prev) ? NAN : prev / err;
    if (!std::isnan(ratio)) {
      min_ratio = std::min(min_ratio, ratio);
      monotone = monotone && err < prev;
    }
    table += std::to_string(nr) + "," + std::to_string(nt) + "," + num(err) + "," +
             (std::isnan(ratio) ? std::string() : num(ratio)) + "\n";
    levels.push_back({{"n_r", nr},
                      {"n_t", nt},
                      {"error", err},
                      {"ratio", finite_or_null(ratio)},
                      {"iterations", o.V.info.iterations}});
    log << "level " << nr << "x" << nt << ": error " << num(err) << "\n";
    prev = err;
    if (levels.size() == cfg.levels.size())
      write_grid(out_dir / cfg.grid_file, *bp.mesh, o.V.values, &*o.exact);
  }
  write_text(out_dir / cfg.table_file, table);
  report["convergence"] = {{"levels", levels},
                           {"monotone", monotone},
                           {"min_ratio", finite_or_null(min_ratio)}};
  return kExitOk;
}

}  // namespace

// ------------------------------------------------------------------ problems

CVector manufactured_rhs(const expr::Expr& exact, const Mesh& mesh, const Coefficients& c) {
  const expr::Expr d = expr::dbar(exact);
  CVector F(mesh.size());
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const Complex z = mesh.nodes(j);
    const Complex v = expr::eval(exact, z, mesh.singular_point);
    F(j) = expr::eval(d, z, mesh.singular_point) + c.A(j) * v + c.B(j) * std::conj(v);
  }
  return F;
}

PointFunction manufactured_phi(const expr::Expr& exact, const Grid& grid, Complex a, int k) {
  const Eigen::Index nb = grid.size();
  CVector h(nb);
  for (Eigen::Index l = 0; l < nb; ++l) {
    const Complex t = grid.nodes(l);
    h(l) = expr::eval(exact, t, a) / std::pow(t - a, k);
  }
  // K_Gamma h = sum_{n >= 0} c_n u^n with u = (z - center) / R.
  const Eigen::Index N = nb / 2 - 1;
  CVector c = CVector::Zero(N + 1);
  for (Eigen::Index n = 0; n <= N; ++n) {
    Complex s{};
    for (Eigen::Index l = 0; l < nb; ++l) s += h(l) * std::polar(1.0, -double(n) * grid.angles(l));
    c(n) = s / double(nb);
  }
  // (P(u) - P(u_a)) / (u - u_a) by synthetic division.
  const Complex ua = (a - grid.center) / grid.radius;
  CVector b = CVector::Zero(std::max<Eigen::Index>(N, 1));
  if (N >= 1) {
    b(N - 1) = c(N);
    for (Eigen::Index j = N - 1; j >= 1; --j) b(j - 1) = c(j) + ua * b(j);
  }
  const Complex center = grid.center;
  const double R = grid.radius;
  return [b, center, R](Complex z) {
    const Complex u = (z - center) / R;
    Complex s{};
    for (Eigen::Index j = b.size() - 1; j >= 0; --j) s = s * u + b(j);
    return s / R;
  };
}

ManufacturedError manufactured_error(const Mesh& mesh, const CVector& V, const CVector& exact) {
  ManufacturedError e;
  double num_max = 0, den_max = 0;
  for (Eigen::Index j = 0; j < mesh.size(); ++j) {
    const double d = std::abs(V(j) - exact(j));
    e.max_abs = std::max(e.max_abs, d);
    const double r = std::abs(mesh.nodes(j) - mesh.singular_point);
    if (r >= 0.1 * mesh.radius && r <= 0.9 * mesh.radius) {
      num_max = std::max(num_max, d);
      den_max = std::max(den_max, std::abs(exact(j)));
    }
  }
  e.relative = den_max > 0 ? num_max / den_max : num_max;
  return e;
}

BuiltProblem build_problem(const RunConfig& cfg, int n_r, int n_t) {
  BuiltProblem bp;
  bp.mesh = std::make_shared<const Mesh>(
      build_disk_mesh<double>(cfg.mesh.R, cfg.mesh.a, n_r, n_t, cfg.mesh.grading));
  bp.grid = build_boundary_grid<double>({0, 0}, cfg.mesh.R, cfg.mesh.n_b);
  const Mesh& mesh = *bp.mesh;
  ProblemSpec& s = bp.spec;
  s.mesh = bp.mesh;
  s.coeffs = make_coefficients<double>(mesh, sample(mesh, expr::parse(cfg.A0)),
                                       sample(mesh, expr::parse(cfg.B0)), cfg.mu);
  if (cfg.manufactured()) {
    bp.exact = expr::parse(cfg.exact_expr());
    s.F = manufactured_rhs(*bp.exact, mesh, s.coeffs);
    s.phi = manufactured_phi(*bp.exact, bp.grid, mesh.singular_point, cfg.k);
  } else {
    s.F = sample(mesh, expr::parse(cfg.F));
    if (cfg.phi) s.phi = phi_from_expr(expr::parse(*cfg.phi), mesh.singular_point);
  }
  s.beta = cfg.beta;
  s.k = cfg.k;
  s.q = cfg.q;
  s.strict_class = cfg.strict_class;
  return bp;
}

RHProblem build_rh_problem(const RunConfig& cfg, const BuiltProblem& bp) {
  RHProblem p;
  p.mesh = bp.mesh;
  p.grid = bp.grid;
  p.m = cfg.m.value_or(0);
  p.g = sample_boundary(bp.grid, expr::parse(*cfg.g));
  p.coeffs = bp.spec.coeffs;
  p.F = bp.spec.F;
  p.beta = cfg.beta;
  p.free_params = cfg.free_params;
  return p;
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.dense_limit = cfg.solver.dense_limit;
  o.min_rcond = cfg.solver.min_rcond;
  o.gmres_tol = cfg.solver.gmres_tol;
  o.gmres_max_iter = cfg.solver.gmres_max_iter;
  o.gmres_restart = cfg.solver.gmres_restart;
  o.self_rule =
      cfg.solver.self_rule == "drop" ? NodeSelfRule::drop : NodeSelfRule::constant_exact;
  return o;
}

// ----------------------------------------------------------------------- run

RunResult run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
              const VerifyOptions& vopt) {
  const auto start = Clock::now();
  std::filesystem::create_directories(out_dir);
  RunResult r;
  Json& report = r.report;
  report["config"] = to_json(cfg);
  std::vector<std::string> warnings;

  switch (cfg.mode) {
    case Mode::solve: {
      const BuiltProblem bp = build_problem(cfg, cfg.mesh.n_r, cfg.mesh.n_t);
      warnings = bp.spec.validate();
      const SolveOutcome o = solve_configured(cfg, bp);
      warnings = merged_warnings(warnings, o.V.warnings);
      const Json sec = solve_section(cfg, bp, o, warnings);
      for (const auto& [key, val] : sec.items()) report[key] = val;
      write_grid(out_dir / cfg.grid_file, *bp.mesh, o.V.values, o.exact ? &*o.exact : nullptr);
      break;
    }
    case Mode::rh:
    case Mode::rh0: {
      const BuiltProblem bp = build_problem(cfg, cfg.mesh.n_r, cfg.mesh.n_t);
      r.exit_code = run_rh_modes(cfg, bp, report, warnings, out_dir);
      break;
    }
    case Mode::convergence:
      r.exit_code = run_convergence(cfg, report, warnings, out_dir, log);
      break;
    case Mode::verify: {
      const auto results = verify_suite(vopt);
      const bool ok = print_verify(results, log);
      Json props = Json::array();
      for (const auto& p : results)
        props.push_back({{"name", p.name},
                         {"value", finite_or_null(p.value)},
                         {"threshold", p.threshold},
                         {"passed", p.passed},
                         {"detail", p.detail}});
      report["verify"] = {{"count", results.size()},
                          {"all_passed", ok},
                          {"mutate_kernel_sign", vopt.mutate_kernel_sign},
                          {"properties", props}};
      r.exit_code = ok ? kExitOk : kExitNumerical;
      break;
    }
  }
  report["warnings"] = warnings;
  report["exit_code"] = r.exit_code;
  report["timing"] = {
      {"seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  write_text(out_dir / cfg.report_file, report.dump(2) + "\n");
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  return r;
}

int run_command(const std::string& mode_name, const CliOptions& opt, std::ostream& log) {
  try {
    const Mode mode = parse_mode(mode_name);
    RunConfig cfg;
    if (opt.config_path) {
      cfg = load_config(*opt.config_path, mode);
    } else if (mode == Mode::verify) {
      cfg.mode = Mode::verify;
    } else {
      throw ConfigError("--config is required for mode '" + mode_name + "'");
    }
    const RunResult r = run(cfg, opt.out_dir, log, {opt.mutate_kernel_sign});
    if (r.exit_code == kExitUnsolvable) log << "Riemann-Hilbert problem is unsolvable\n";
    return r.exit_code;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SpecError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MeshError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const expr::ParseError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const expr::EvalError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const expr::UnsupportedError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace vekua
