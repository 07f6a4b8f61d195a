#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "catch_amalgamated.hpp"

#include "dressing_forge/pipeline.hpp"

using namespace dressing_forge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = DF_SCENARIO_DIR;

json minimal() {
  return json::parse(R"({
    "schema_version": 1, "n": 2,
    "seed": {"profiles": [{"type": "constant", "r": 1.0}, {"type": "constant", "r": 0.7}]},
    "grid": [[-0.5, 0.5, 6], [-0.5, 0.5, 5]],
    "lambdas": [1.0, [0.3, 0.2]],
    "chain": [{"type": "real", "alpha": 0.4, "projection": {"span": [[1.0], [0.5]]}}]
  })");
}

ErrorKind kind_of(const json& j) {
  try {
    build_frame(parse_scenario(j));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;  // "no error" sentinel for these tests
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("df_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(DF_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_lines(const std::string& text, const std::string& prefix = "") {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
  const Scenario s = parse_scenario(minimal());
  CHECK(s.n == 2);
  CHECK(s.grid.size() == 30);
  CHECK(s.lambdas.size() == 2);
  CHECK(s.lambdas[1] == cd(0.3, 0.2));
  CHECK(s.tol("position") == 1e-3);
  CHECK(s.tol("permutability") == 1e-9);
  CHECK(s.enabled("oracle"));
  CHECK_FALSE(s.exports.has_value());
  const ExtendedFrame f = build_frame(s);
  CHECK(f.depth() == 1);
}

TEST_CASE("malformed scenarios raise ParseError") {
  CHECK(kind_of(json::array()) == ErrorKind::ParseError);
  json j = minimal();
  j.erase("schema_version");
  CHECK(kind_of(j) == ErrorKind::ParseError);
  j = minimal();
  j["chain"][0]["type"] = "quadratic";
  CHECK(kind_of(j) == ErrorKind::ParseError);
  j = minimal();
  j["chain"][0]["alpha"] = "big";
  CHECK(kind_of(j) == ErrorKind::ParseError);
  j = minimal();
  j["seed"]["profiles"][0] = {{"type", "exotic"}};
  CHECK(kind_of(j) == ErrorKind::ParseError);

  const fs::path dir = temp_dir("parse");
  std::ofstream(dir / "bad.json") << "{ not json";
  try {
    load_scenario(dir / "bad.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
  CHECK_THROWS_AS(load_scenario(dir / "missing.json"), Error);
}

TEST_CASE("semantic violations raise ValidationError") {
  json j = minimal();
  j["schema_version"] = 2;
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["chain"][0]["projection"]["span"] = {{1.0}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["chain"][0]["projection"]["span"] = {{0.0}, {0.0}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["verify"] = {{"telepathy", true}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["tolerances"] = {{"nonsense", 1.0}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["chain"][0]["alpha"] = 0.0;
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["chain"][0] = {{"type", "two_pole"}, {"z", {0.0, 0.5}}, {"projection", {{"span", {{1.0}, {0.5}}}}}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["seed"]["profiles"][0] = {{"type", "polynomial"}, {"coeffs", {1.0, 0.1}}, {"domain", {-0.2, 0.2}}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j = minimal();
  j["lambdas"] = {{0.0, 0.4}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
}

TEST_CASE("spherical violation names the rule") {
  try {
    build_frame(load_scenario(kScenarios / "spherical_violation.json"));
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
    const std::string msg = e.what();
    CHECK(msg.find("orthogonal to h(0)") != std::string::npos);
    CHECK(msg.find("chain[0]") != std::string::npos);
    CHECK(msg.find("ValidationError: ValidationError") == std::string::npos);
  }
}

TEST_CASE("csv and obj exports") {
  json j = minimal();
  j["export"] = {{"format", "csv"}, {"slice_axes", {0, 1}}};
  Scenario s = parse_scenario(j);
  const ExtendedFrame f = build_frame(s);
  const std::string csv = export_csv(s, f, *s.exports, s.lambdas[0]);
  CHECK(count_lines(csv) == 1 + 30);
  CHECK(csv.rfind("u1,u2,re_X1,im_X1,re_X2,im_X2\n", 0) == 0);
  CHECK(csv == export_csv(s, f, *s.exports, s.lambdas[0]));

  j["export"] = {{"format", "obj"}, {"slice_axes", {0, 1}}};
  s = parse_scenario(j);
  const std::string obj = export_obj(s, f, *s.exports, s.lambdas[0]);
  CHECK(count_lines(obj, "v ") == 30);
  CHECK(count_lines(obj, "f ") == 2 * 5 * 4);

  j["export"] = {{"format", "obj"}, {"slice_axes", {0}}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
  j["export"] = {{"format", "png"}, {"slice_axes", {0}}};
  CHECK(kind_of(j) == ErrorKind::ValidationError);
}

TEST_CASE("shipped flat torus scenario verifies") {
  const Scenario s = load_scenario(kScenarios / "flat_torus.json");
  const auto report = run_verification(s, build_frame(s));
  CHECK(report.all_pass());
  const json out = report_to_json(report);
  CHECK(out["all_pass"].get<bool>());
  CHECK(out["checks"].size() == report.records().size());
  CHECK(report.find("oracle_rk4_vs_closed_form") == nullptr);
}

TEST_CASE("verification catches a broken tolerance") {
  json j = minimal();
  j["tolerances"] = {{"position", 1e-14}};
  const Scenario s = parse_scenario(j);
  const auto report = run_verification(s, build_frame(s));
  CHECK_FALSE(report.all_pass());
  CHECK_FALSE(report.find("position_equation@(1,0)")->pass);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = temp_dir("cli");
  const std::string out = " --out " + dir.string();
  CHECK(run_cli("verify --scenario " + (kScenarios / "flat_torus.json").string() + out, dir / "a.log") == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(run_cli("dress --scenario " + (kScenarios / "spherical_violation.json").string() + out, dir / "b.log") == 2);
  CHECK(slurp(dir / "b.log").find("orthogonal to h(0)") != std::string::npos);

  std::ofstream(dir / "bad.json") << "[1, 2";
  CHECK(run_cli("verify --scenario " + (dir / "bad.json").string() + out, dir / "c.log") == 1);
  CHECK(run_cli("verify" + out, dir / "d.log") == 1);
  CHECK(run_cli("frobnicate", dir / "e.log") == 1);

  json j = minimal();
  j["tolerances"] = {{"position", 1e-14}};
  std::ofstream(dir / "strict.json") << j.dump();
  CHECK(run_cli("verify --scenario " + (dir / "strict.json").string() + out, dir / "f.log") == 3);
  CHECK(slurp(dir / "f.log").find("FAIL") != std::string::npos);
}

TEST_CASE("command-line exports are reproducible") {
  const fs::path a = temp_dir("export_a");
  const fs::path b = temp_dir("export_b");
  const std::string scn = " --scenario " + (kScenarios / "flat_torus.json").string();
  REQUIRE(run_cli("export" + scn + " --out " + a.string(), a / "log") == 0);
  REQUIRE(run_cli("export" + scn + " --out " + b.string(), b / "log") == 0);
  const std::string first = slurp(a / "flat_torus.csv");
  CHECK_FALSE(first.empty());
  CHECK(first == slurp(b / "flat_torus.csv"));
  // 21 x 21 slice plus the header
  CHECK(count_lines(first) == 1 + 21 * 21);
}

TEST_CASE("sweep reports a real limit net") {
  const fs::path dir = temp_dir("sweep");
  REQUIRE(run_cli("sweep --scenario " + (kScenarios / "flat_torus.json").string() + " --out " + dir.string(), dir / "log") == 0);
  const std::string log = slurp(dir / "log");
  CHECK(log.find("PASS  lambda=0 slice real") != std::string::npos);
  CHECK(count_lines(slurp(dir / "sweep.csv")) == 1 + 4 * 21 * 21);
}
