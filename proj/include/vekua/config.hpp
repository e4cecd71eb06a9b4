#pragma once

// Run configuration: a JSON document describing the mesh, the equation data
// and the workflow. Missing optional keys take the defaults below; unknown
// keys are rejected.
//
//   {
//     "mode": "solve",
//     "mesh": {"R": 1, "a": [0, 0], "n_r": 32, "n_t": 64, "grading": 2, "n_b": 1024},
//     "coefficients": {"A0": "0.3", "B0": "0.2i", "mu": null},
//     "F": "manufactured:conj(z)*absz",
//     "phi": null,
//     "class": {"beta": 0.5, "k": 0, "q": null, "strict": false},
//     "rh": {"m": 1, "g": "re(z)", "nu": null, "n": null, "free_params": [],
//            "generators": "corrected", "solvability_tol": 1e-6},
//     "solver": {"method": "direct", "dense_limit": 4096, "min_rcond": 1e-13,
//                "gmres_tol": 1e-12, "gmres_max_iter": 2000, "gmres_restart": 80,
//                "self_rule": "constant_exact", "picard_max_iter": 200,
//                "picard_tol": 1e-12, "relaxation": null},
//     "convergence": {"levels": [[16, 32], [32, 64], [64, 128]]},
//     "output": {"grid": "solution.csv", "report": "report.json",
//                "table": "convergence.csv"}
//   }

#include "vekua/mesh.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vekua {

using Json = nlohmann::ordered_json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Mode { solve, rh, rh0, verify, convergence };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

inline constexpr const char* kManufacturedPrefix = "manufactured:";

struct MeshConfig {
  double R = 1;
  Complex a{0, 0};
  int n_r = 32;
  int n_t = 64;
  double grading = 2;
  int n_b = 1024;
};

struct SolverConfig {
  std::string method = "direct";  // direct | picard
  long dense_limit = 4096;
  double min_rcond = 1e-13;
  double gmres_tol = 1e-12;
  int gmres_max_iter = 2000;
  int gmres_restart = 80;
  std::string self_rule = "constant_exact";  // constant_exact | drop
  int picard_max_iter = 200;
  double picard_tol = 1e-12;
  std::optional<double> relaxation;
};

struct RunConfig {
  Mode mode = Mode::solve;
  MeshConfig mesh;

  std::string A0 = "0";
  std::string B0 = "0";
  std::optional<double> mu;
  std::string F = "0";
  std::optional<std::string> phi;

  double beta = 0.5;
  int k = 0;
  std::optional<double> q;
  bool strict_class = false;

  std::optional<int> m;
  std::optional<std::string> g;
  std::optional<double> nu;
  std::optional<int> n;
  std::vector<double> free_params;
  std::string generators = "corrected";  // corrected | as_printed
  double solvability_tol = 1e-6;

  SolverConfig solver;
  std::vector<std::pair<int, int>> levels{{16, 32}, {32, 64}, {64, 128}};

  std::string grid_file = "solution.csv";
  std::string report_file = "report.json";
  std::string table_file = "convergence.csv";

  bool manufactured() const { return F.rfind(kManufacturedPrefix, 0) == 0; }
  std::string exact_expr() const { return F.substr(std::string(kManufacturedPrefix).size()); }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses and validates. When mode_hint is given it must agree with the
/// document's "mode" key, or supplies it when the key is absent.
RunConfig parse_config(const Json& doc, std::optional<Mode> mode_hint = {});
RunConfig load_config(const std::string& path, std::optional<Mode> mode_hint = {});

/// Complete configuration with every default filled in. parse_config of the
/// result reproduces the same RunConfig.
Json to_json(const RunConfig& cfg);

}  // namespace vekua
