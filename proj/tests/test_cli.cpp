#include "vekua/run.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace vekua;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("vekua_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(VEKUA_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const char* name) { return std::string(VEKUA_CONFIG_DIR) + "/" + name; }

Json report(const fs::path& dir) { return Json::parse(slurp(dir / "report.json")); }

std::vector<std::vector<double>> csv(const fs::path& p, std::string& header) {
  std::ifstream in(p);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      row.push_back(cell.empty() ? NAN : std::stod(cell));
    if (!line.empty() && line.back() == ',') row.push_back(NAN);
    rows.push_back(row);
  }
  return rows;
}

RunConfig parse(const std::string& text) { return parse_config(Json::parse(text)); }

}  // namespace

TEST_CASE("config: defaults and echo round-trip") {
  const RunConfig c = parse(R"j({"mode": "solve", "F": "1"})j");
  CHECK(c.mesh.R == 1);
  CHECK(c.mesh.n_r == 32);
  CHECK(c.mesh.grading == 2);
  CHECK(c.solver.method == "direct");
  CHECK(c.beta == 0.5);

  for (const char* f : {"trivial.json", "manufactured.json", "convergence.json", "rh_m2.json",
                        "rh0.json", "rh_m0_constant.json"}) {
    const RunConfig a = load_config(config(f));
    const Json echo = to_json(a);
    const RunConfig b = parse_config(echo);
    CHECK_MESSAGE(to_json(b) == echo, f);
  }
}

TEST_CASE("config: validation errors") {
  const char* bad[] = {
      R"j({"mode": "solve", "F": "1", "extra": 1})j",
      R"j({"mode": "solve", "mesh": {"R": -1}})j",
      R"j({"mode": "solve", "mesh": {"n_rr": 4}})j",
      R"j({"mode": "solve", "mesh": {"a": [2, 0]}})j",
      R"j({"mode": "solve", "class": {"beta": 1.2}})j",
      R"j({"mode": "solve", "F": "z +"})j",
      R"j({"mode": "solve", "coefficients": {"A0": "foo"}})j",
      R"j({"mode": "solve", "F": "manufactured:z*absz", "phi": "1"})j",
      R"j({"mode": "fly"})j",
      R"j({"mode": "rh", "rh": {"g": "re(z)"}})j",
      R"j({"mode": "rh", "rh": {"m": 1}})j",
      R"j({"mode": "rh", "mesh": {"a": [0.1, 0]}, "rh": {"m": 1, "g": "1"}})j",
      R"j({"mode": "rh0", "rh": {"nu": 2, "n": 3, "g": "1"}})j",
      R"j({"mode": "rh0", "rh": {"nu": -0.5, "n": 3, "g": "1"}})j",
      R"j({"mode": "rh0", "rh": {"g": "1"}})j",
      R"j({"mode": "convergence", "F": "1"})j",
      R"j({"mode": "convergence", "F": "manufactured:z", "convergence": {"levels": [[8, 16], [16, 32]]}})j",
      R"j({"mode": "convergence", "F": "manufactured:z", "convergence": {"levels": [[8, 16], [8, 16], [16, 32]]}})j",
      R"j({"mode": "solve", "solver": {"method": "newton"}})j",
      R"j({"mode": "solve", "solver": {"self_rule": "other"}})j",
      R"j({"mode": "rh", "rh": {"m": 1, "g": "1", "generators": "other"}})j",
      R"j({"mode": "solve", "mesh": {"n_r": "many"}})j",
  };
  for (const char* text : bad) CHECK_THROWS_AS_MESSAGE(parse(text), ConfigError, text);
  CHECK_THROWS_AS(parse_config(Json::parse(R"j({"mode": "solve"})j"), Mode::rh), ConfigError);
  CHECK(parse_config(Json::parse(R"j({"F": "1"})j"), Mode::solve).mode == Mode::solve);
  CHECK_THROWS_AS(load_config((scratch() / "missing.json").string()), ConfigError);
  CHECK_THROWS_AS(load_config(write("broken.json", "{ not json").string()), ConfigError);
}

TEST_CASE("cli: trivial solve") {
  const fs::path out = scratch() / "trivial";
  REQUIRE(cli("solve --config " + config("trivial.json") + " --out " + out.string()) == 0);
  std::string header;
  const auto rows = csv(out / "solution.csv", header);
  CHECK(header == "x,y,r,re_v,im_v");
  REQUIRE(rows.size() == 12 * 24);
  double err = 0;
  for (const auto& r : rows) {
    err = std::max(err, std::abs(Complex(r[3], r[4]) - Complex(r[0] - 0.2, r[1] - 0.1)));
    CHECK(std::abs(r[2] - std::abs(Complex(r[0] - 0.2, r[1] - 0.1))) <= 1e-15);
  }
  CHECK(err <= 1e-12);
  const Json j = report(out);
  CHECK(j["exit_code"] == 0);
  CHECK(j["diagnostics"]["residual_max"].get<double>() <= 1e-12);
  CHECK(j.contains("timing"));
  CHECK(parse_config(j["config"]).mesh.n_r == 12);
}

TEST_CASE("cli: exit codes") {
  const fs::path out = scratch() / "codes";
  CHECK(cli("rh --config " + config("rh_m0_constant.json") + " --out " + out.string()) == 3);
  const Json j = report(out);
  CHECK(j["rh"]["d0"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(j["rh"]["verdict"] == "unsolvable");
  CHECK(j["exit_code"] == 3);

  CHECK(cli("solve --config " + write("bad.json", R"j({"mode": "solve", "F": "z^-1"})j").string() +
            " --out " + out.string()) == 1);
  CHECK(cli("solve --config " + (scratch() / "nope.json").string()) == 1);
  CHECK(cli("solve") == 1);
  CHECK(cli("frobnicate --config x") == 1);
  CHECK(cli("rh --config " + config("trivial.json") + " --out " + out.string()) == 1);

  const fs::path diverge = write("diverge.json", R"j({
    "mode": "solve", "mesh": {"n_r": 8, "n_t": 16},
    "coefficients": {"A0": "5", "B0": "3i"}, "F": "conj(z)", "phi": "1",
    "solver": {"method": "picard", "relaxation": 1}})j");
  CHECK(cli("solve --config " + diverge.string() + " --out " + out.string()) == 2);
}

TEST_CASE("cli: RH runs report their counts") {
  const fs::path out = scratch() / "rh";
  REQUIRE(cli("rh --config " + config("rh_m2.json") + " --out " + out.string()) == 0);
  Json j = report(out);
  CHECK(j["rh"]["basis_count"] == 3);
  CHECK(j["rh"]["verdict"] == "solvable");
  REQUIRE(cli("rh0 --config " + config("rh0.json") + " --out " + out.string()) == 0);
  j = report(out);
  CHECK(j["rh"]["basis_count"] == 3);
  CHECK(j["rh"]["substitution_k"] == 1);
}

TEST_CASE("cli: manufactured solve and determinism") {
  const fs::path cfg = write("small.json", R"j({
    "mode": "solve", "mesh": {"n_r": 12, "n_t": 24, "n_b": 256},
    "coefficients": {"A0": "0.3", "B0": "0.2i"}, "F": "manufactured:conj(z)*absz"})j");
  const fs::path a = scratch() / "det_a", b = scratch() / "det_b";
  REQUIRE(cli("solve --config " + cfg.string() + " --out " + a.string()) == 0);
  REQUIRE(cli("solve --config " + cfg.string() + " --out " + b.string()) == 0);
  CHECK(slurp(a / "solution.csv") == slurp(b / "solution.csv"));
  Json ja = report(a), jb = report(b);
  ja.erase("timing");
  jb.erase("timing");
  CHECK(ja == jb);

  std::string header;
  csv(a / "solution.csv", header);
  CHECK(header == "x,y,r,re_v,im_v,re_exact,im_exact,abs_err");
  CHECK(ja["exact"]["relative_error"].get<double>() <= 2e-2);

  // the echoed configuration reproduces the run
  const fs::path echo = write("echo.json", ja["config"].dump(2));
  const fs::path c = scratch() / "det_c";
  REQUIRE(cli("solve --config " + echo.string() + " --out " + c.string()) == 0);
  Json jc = report(c);
  jc.erase("timing");
  CHECK(jc == ja);
}

TEST_CASE("cli: convergence table") {
  const fs::path out = scratch() / "conv";
  REQUIRE(cli("convergence --config " + config("convergence.json") + " --out " + out.string()) ==
          0);
  std::string header;
  const auto rows = csv(out / "convergence.csv", header);
  CHECK(header == "n_r,n_t,error,ratio");
  REQUIRE(rows.size() == 3);
  CHECK(std::isnan(rows[0][3]));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][2] < rows[i - 1][2]);
    CHECK(rows[i][3] >= 1.8);
    CHECK(rows[i][3] == doctest::Approx(rows[i - 1][2] / rows[i][2]));
  }
}

TEST_CASE("cli: verify suite") {
  const fs::path out = scratch() / "verify";
  CHECK(cli("verify --out " + out.string()) == 0);
  const Json j = report(out);
  CHECK(j["verify"]["all_passed"] == true);
  CHECK(j["verify"]["count"].get<std::size_t>() >= kMinVerifyProperties);

  CHECK(cli("verify --mutate-kernel-sign --out " + out.string()) == 2);
  const Json m = report(out);
  bool pompeiu_failed = false;
  for (const auto& p : m["verify"]["properties"])
    if (p["name"] == "pompeiu_identity") pompeiu_failed = !p["passed"].get<bool>();
  CHECK(pompeiu_failed);
}
