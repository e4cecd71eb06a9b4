#include "vekua/config.hpp"

#include "vekua/expr.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vekua {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::rh: return "rh";
    case Mode::rh0: return "rh0";
    case Mode::verify: return "verify";
    case Mode::convergence: return "convergence";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::solve, Mode::rh, Mode::rh0, Mode::verify, Mode::convergence})
    if (s == to_string(m)) return m;
  throw ConfigError("mode: unknown mode '" + s + "'");
}

namespace {

void check_keys(const Json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const Json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
void read(const Json& obj, const char* key, const std::string& where, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T v;
  read(obj, key, where, v);
  out = v;
}

// Strict integer read: 3.0 is accepted, 3.5 is not.
void read_int(const Json& obj, const char* key, const std::string& where, int& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  const Json& v = obj.at(key);
  if (v.is_number_integer()) {
    out = v.get<int>();
    return;
  }
  if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
    out = static_cast<int>(v.get<double>());
    return;
  }
  throw ConfigError(where + "." + key + ": expected an integer");
}

void read_int(const Json& obj, const char* key, const std::string& where, std::optional<int>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  int v = 0;
  read_int(obj, key, where, v);
  out = v;
}

Complex read_point(const Json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + ": expected a number or [re, im]");
}

void check_expr(const std::string& text, const std::string& where) {
  try {
    expr::parse(text);
  } catch (const expr::ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(mesh.R) && mesh.R > 0, "mesh.R: must be positive");
  require(std::isfinite(mesh.a.real()) && std::isfinite(mesh.a.imag()), "mesh.a: not finite");
  require(std::abs(mesh.a) < mesh.R, "mesh.a: must lie inside the disk");
  require(mesh.n_r >= 2, "mesh.n_r: must be >= 2");
  require(mesh.n_t >= 4, "mesh.n_t: must be >= 4");
  require(std::isfinite(mesh.grading) && mesh.grading >= 1, "mesh.grading: must be >= 1");
  require(mesh.n_b >= 8 && mesh.n_b % 2 == 0, "mesh.n_b: must be even and >= 8");

  check_expr(A0, "coefficients.A0");
  check_expr(B0, "coefficients.B0");
  if (mu) require(std::isfinite(*mu) && *mu >= 0, "coefficients.mu: must be >= 0");
  if (manufactured()) {
    require(!exact_expr().empty(), "F: manufactured solution expression is empty");
    check_expr(exact_expr(), "F");
    require(!phi, "phi: not allowed with a manufactured F (it is derived from the exact solution)");
  } else {
    check_expr(F, "F");
  }
  if (phi) check_expr(*phi, "phi");

  require(beta > 0 && beta < 1, "class.beta: must lie in (0, 1)");
  if (q) require(std::isfinite(*q) && *q > 2, "class.q: must exceed 2");

  require(generators == "corrected" || generators == "as_printed",
          "rh.generators: expected 'corrected' or 'as_printed'");
  require(solvability_tol > 0 && std::isfinite(solvability_tol),
          "rh.solvability_tol: must be positive");
  for (double p : free_params) require(std::isfinite(p), "rh.free_params: not finite");

  require(solver.method == "direct" || solver.method == "picard",
          "solver.method: expected 'direct' or 'picard'");
  require(solver.self_rule == "constant_exact" || solver.self_rule == "drop",
          "solver.self_rule: expected 'constant_exact' or 'drop'");
  require(solver.dense_limit >= 0, "solver.dense_limit: must be >= 0");
  require(solver.min_rcond >= 0, "solver.min_rcond: must be >= 0");
  require(solver.gmres_tol > 0, "solver.gmres_tol: must be positive");
  require(solver.gmres_max_iter >= 1, "solver.gmres_max_iter: must be >= 1");
  require(solver.gmres_restart >= 1, "solver.gmres_restart: must be >= 1");
  require(solver.picard_max_iter >= 0, "solver.picard_max_iter: must be >= 0");
  require(solver.picard_tol >= 0, "solver.picard_tol: must be >= 0");
  if (solver.relaxation)
    require(*solver.relaxation > 0 && *solver.relaxation <= 1,
            "solver.relaxation: must lie in (0, 1]");

  const bool rh_mode = mode == Mode::rh || mode == Mode::rh0;
  if (rh_mode) {
    require(mesh.a == Complex{}, "mesh.a: must be 0 for Riemann-Hilbert problems");
    require(g.has_value(), "rh.g: required in " + std::string(to_string(mode)) + " mode");
    check_expr(*g, "rh.g");
    require(k == 0, "class.k: pole order is not used in Riemann-Hilbert modes");
  }
  if (mode == Mode::rh) {
    require(m.has_value(), "rh.m: required in rh mode");
    if (*m >= 1)
      require(free_params.size() <= static_cast<std::size_t>(2 * *m - 1),
              "rh.free_params: at most 2m - 1 values");
    else
      require(free_params.empty(), "rh.free_params: only used for m >= 1");
  }
  if (mode == Mode::rh0) {
    require(nu.has_value(), "rh.nu: required in rh0 mode");
    require(n.has_value(), "rh.n: required in rh0 mode");
    require(std::isfinite(*nu) && *nu > 0, "rh.nu: must be positive");
    require(std::floor(*nu) != *nu, "rh.nu: must not be an integer");
  }
  if (mode == Mode::convergence) {
    require(manufactured(), "F: convergence mode needs a manufactured solution");
    require(levels.size() >= 3, "convergence.levels: at least 3 levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      require(levels[i].first >= 2 && levels[i].second >= 4,
              "convergence.levels: n_r >= 2 and n_t >= 4");
      if (i > 0)
        require(levels[i].first > levels[i - 1].first && levels[i].second > levels[i - 1].second,
                "convergence.levels: must be strictly increasing");
    }
  }
  require(!grid_file.empty() && !report_file.empty() && !table_file.empty(),
          "output: file names must not be empty");
}

RunConfig parse_config(const Json& doc, std::optional<Mode> mode_hint) {
  check_keys(doc, "config",
             {"mode", "mesh", "coefficients", "F", "phi", "class", "rh", "solver", "convergence",
              "output"});
  RunConfig c;
  if (doc.contains("mode") && !doc.at("mode").is_null()) {
    std::string s;
    read(doc, "mode", "config", s);
    c.mode = parse_mode(s);
    if (mode_hint && *mode_hint != c.mode)
      throw ConfigError("mode: config says '" + s + "' but '" + to_string(*mode_hint) +
                        "' was requested");
  } else if (mode_hint) {
    c.mode = *mode_hint;
  } else {
    throw ConfigError("mode: missing");
  }

  if (doc.contains("mesh")) {
    const Json& m = doc.at("mesh");
    check_keys(m, "mesh", {"R", "a", "n_r", "n_t", "grading", "n_b"});
    read(m, "R", "mesh", c.mesh.R);
    if (m.contains("a") && !m.at("a").is_null()) c.mesh.a = read_point(m.at("a"), "mesh.a");
    read_int(m, "n_r", "mesh", c.mesh.n_r);
    read_int(m, "n_t", "mesh", c.mesh.n_t);
    read(m, "grading", "mesh", c.mesh.grading);
    read_int(m, "n_b", "mesh", c.mesh.n_b);
  }
  if (doc.contains("coefficients")) {
    const Json& m = doc.at("coefficients");
    check_keys(m, "coefficients", {"A0", "B0", "mu"});
    read(m, "A0", "coefficients", c.A0);
    read(m, "B0", "coefficients", c.B0);
    read(m, "mu", "coefficients", c.mu);
  }
  read(doc, "F", "config", c.F);
  read(doc, "phi", "config", c.phi);
  if (doc.contains("class")) {
    const Json& m = doc.at("class");
    check_keys(m, "class", {"beta", "k", "q", "strict"});
    read(m, "beta", "class", c.beta);
    read_int(m, "k", "class", c.k);
    read(m, "q", "class", c.q);
    read(m, "strict", "class", c.strict_class);
  }
  if (doc.contains("rh")) {
    const Json& m = doc.at("rh");
    check_keys(m, "rh",
               {"m", "g", "nu", "n", "free_params", "generators", "solvability_tol"});
    read_int(m, "m", "rh", c.m);
    read(m, "g", "rh", c.g);
    read(m, "nu", "rh", c.nu);
    read_int(m, "n", "rh", c.n);
    read(m, "free_params", "rh", c.free_params);
    read(m, "generators", "rh", c.generators);
    read(m, "solvability_tol", "rh", c.solvability_tol);
  }
  if (doc.contains("solver")) {
    const Json& m = doc.at("solver");
    check_keys(m, "solver",
               {"method", "dense_limit", "min_rcond", "gmres_tol", "gmres_max_iter",
                "gmres_restart", "self_rule", "picard_max_iter", "picard_tol", "relaxation"});
    read(m, "method", "solver", c.solver.method);
    read(m, "dense_limit", "solver", c.solver.dense_limit);
    read(m, "min_rcond", "solver", c.solver.min_rcond);
    read(m, "gmres_tol", "solver", c.solver.gmres_tol);
    read_int(m, "gmres_max_iter", "solver", c.solver.gmres_max_iter);
    read_int(m, "gmres_restart", "solver", c.solver.gmres_restart);
    read(m, "self_rule", "solver", c.solver.self_rule);
    read_int(m, "picard_max_iter", "solver", c.solver.picard_max_iter);
    read(m, "picard_tol", "solver", c.solver.picard_tol);
    read(m, "relaxation", "solver", c.solver.relaxation);
  }
  if (doc.contains("convergence")) {
    const Json& m = doc.at("convergence");
    check_keys(m, "convergence", {"levels"});
    if (m.contains("levels")) {
      const Json& lv = m.at("levels");
      if (!lv.is_array()) throw ConfigError("convergence.levels: expected an array");
      c.levels.clear();
      for (const Json& p : lv) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
            !p[1].is_number_integer())
          throw ConfigError("convergence.levels: each level is [n_r, n_t]");
        c.levels.emplace_back(p[0].get<int>(), p[1].get<int>());
      }
    }
  }
  if (doc.contains("output")) {
    const Json& m = doc.at("output");
    check_keys(m, "output", {"grid", "report", "table"});
    read(m, "grid", "output", c.grid_file);
    read(m, "report", "output", c.report_file);
    read(m, "table", "output", c.table_file);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, std::optional<Mode> mode_hint) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, mode_hint);
}

Json to_json(const RunConfig& c) {
  Json levels = Json::array();
  for (const auto& [nr, nt] : c.levels) levels.push_back({nr, nt});
  Json doc;
  doc["mode"] = to_string(c.mode);
  doc["mesh"] = {{"R", c.mesh.R},
                 {"a", {c.mesh.a.real(), c.mesh.a.imag()}},
                 {"n_r", c.mesh.n_r},
                 {"n_t", c.mesh.n_t},
                 {"grading", c.mesh.grading},
                 {"n_b", c.mesh.n_b}};
  doc["coefficients"] = {{"A0", c.A0}, {"B0", c.B0}, {"mu", opt(c.mu)}};
  doc["F"] = c.F;
  doc["phi"] = opt(c.phi);
  doc["class"] = {{"beta", c.beta}, {"k", c.k}, {"q", opt(c.q)}, {"strict", c.strict_class}};
  doc["rh"] = {{"m", opt(c.m)},
               {"g", opt(c.g)},
               {"nu", opt(c.nu)},
               {"n", opt(c.n)},
               {"free_params", c.free_params},
               {"generators", c.generators},
               {"solvability_tol", c.solvability_tol}};
  doc["solver"] = {{"method", c.solver.method},
                   {"dense_limit", c.solver.dense_limit},
                   {"min_rcond", c.solver.min_rcond},
                   {"gmres_tol", c.solver.gmres_tol},
                   {"gmres_max_iter", c.solver.gmres_max_iter},
                   {"gmres_restart", c.solver.gmres_restart},
                   {"self_rule", c.solver.self_rule},
                   {"picard_max_iter", c.solver.picard_max_iter},
                   {"picard_tol", c.solver.picard_tol},
                   {"relaxation", opt(c.solver.relaxation)}};
  doc["convergence"] = {{"levels", levels}};
  doc["output"] = {{"grid", c.grid_file}, {"report", c.report_file}, {"table", c.table_file}};
  return doc;
}

}  // namespace vekua
