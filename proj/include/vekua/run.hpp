#pragma once

// Batch workflows behind the command-line tool.
//
// Output files (all written to the output directory):
//   solution grid  CSV, header "x,y,r,re_v,im_v", one row per mesh node in
//                  ring-major order; r = |z - a|. With a manufactured F the
//                  columns "re_exact,im_exact,abs_err" follow.
//   report         JSON: "config" (complete echo), mode-specific sections,
//                  "warnings", and a separate "timing" section.
//   convergence    CSV, header "n_r,n_t,error,ratio"; ratio is empty on the
//                  first level.
// Numbers are printed with 17 significant digits.

#include "vekua/config.hpp"
#include "vekua/fredholm.hpp"
#include "vekua/rh.hpp"
#include "vekua/verify.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace vekua {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumerical = 2,
  kExitUnsolvable = 3,
};

struct BuiltProblem {
  std::shared_ptr<const Mesh> mesh;
  Grid grid;
  ProblemSpec spec;
  std::optional<expr::Expr> exact;  // manufactured solution
};

/// Mesh, coefficients, F and Phi for the configuration at resolution n_r x n_t.
BuiltProblem build_problem(const RunConfig& cfg, int n_r, int n_t);

/// F = dV/dzbar + A V + B conj(V) for the exact solution V.
CVector manufactured_rhs(const expr::Expr& exact, const Mesh& mesh, const Coefficients& c);

/// Phi with (z - a) Phi = K_{Gamma,a} h, h = V / (z - a)^k sampled on the
/// grid, from the nonnegative Fourier modes of h. Regular at z = a.
PointFunction manufactured_phi(const expr::Expr& exact, const Grid& grid, Complex a, int k);

struct ManufacturedError {
  double max_abs = 0;
  double relative = 0;  // over 0.1 R <= |z - a| <= 0.9 R
};

ManufacturedError manufactured_error(const Mesh& mesh, const CVector& V, const CVector& exact);

RHProblem build_rh_problem(const RunConfig& cfg, const BuiltProblem& bp);
SolverOptions solver_options(const RunConfig& cfg);

struct RunResult {
  int exit_code = kExitOk;
  Json report;
};

/// Runs a validated configuration and writes its files to out_dir.
RunResult run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
              const VerifyOptions& vopt = {});

struct CliOptions {
  std::optional<std::string> config_path;
  std::string out_dir = ".";
  bool mutate_kernel_sign = false;  // verify mode only
};

/// Full command: load, run, map failures to exit codes.
int run_command(const std::string& mode, const CliOptions& opt, std::ostream& log);

}  // namespace vekua
