#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "manifest.hpp"
#include "run.hpp"

using namespace bergman;
using namespace bergman::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch_dir() {
  const auto d = fs::temp_directory_path() / "bergman_cli_test";
  fs::create_directories(d);
  return d;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_main(std::vector<std::string> args) {
  args.insert(args.begin(), "bergman");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

const char* kFockDescribe = R"(geometry:
  family: fock
  params: {lambda: [1.0]}
command: describe
points: [0.0]
)";

const char* kCp1Compare = R"(geometry:
  family: cp1_fs
command: compare
points: [[0.3, 0.1]]
k_list: [10, 20, 30, 40, 50, 60, 70, 80]
)";

}  // namespace

TEST_CASE("manifest hash") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_string(0xabcULL) == "fnv1a64:0000000000000abc");
  CHECK(parse_manifest(kFockDescribe).hash == fnv1a64(kFockDescribe));
}

TEST_CASE("manifest validation reports positions") {
  auto expect_error = [](const std::string& text, int line) {
    try {
      parse_manifest(text);
      FAIL("expected a manifest error");
    } catch (const ManifestError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_error("command: describe\ngeometry:\n  family: fock\n  params: {lambda: [1]}\npoints: [0]\nk_list: [4, -2]\n", 6);
  expect_error("command: exact\ngeometry: {family: fock, params: {lambda: [1]}}\npoints: [0]\nk_list: [8, 8]\n", 4);
  expect_error("command: describe\ngeometry: {family: sphere}\npoints: [0]\n", 2);
  expect_error("command: describe\ngeometry: {family: fock, params: {lambda: [1]}}\npoints: [[0, 0, 0]]\n", 3);
  expect_error("command: describe\ngeometry: {family: fock, params: {lambda: [1]}}\npoints: [0]\nbogus: 1\n", 4);
  expect_error("command: [unclosed\n", 2);
  expect_error("command: morse\ngeometry: {family: cp1_fs}\nk_list: [4]\nk_list: [-4]\n", 4);
  expect_error("command: compare\ngeometry: {family: cp1_fs}\npoints: [0]\nk_list: [1, 2, 3]\n", 4);
  // Point outside a finite chart.
  expect_error("command: describe\ngeometry:\n  family: fock\n  params: {lambda: [1]}\n  chart: {radius: 1}\npoints: [2.0]\n", 6);
  // Family construction errors surface as manifest errors.
  CHECK_THROWS_AS(parse_manifest("command: describe\ngeometry: {family: torus, params: {tau: [0, -1]}}\npoints: [0]\n"),
                  ManifestError);
  CHECK_THROWS_AS(
      parse_manifest("command: describe\ngeometry: {family: chart_expression, n: 1, params: {weight: 'abs(z)'}}\npoints: [0]\n"),
      ManifestError);
}

TEST_CASE("manifest parsing") {
  auto m = parse_manifest(R"(geometry:
  family: chart_expression
  n: 2
  params:
    weight: "abs2(z_1) + 2*abs2(z_2) + c*abs2(z_1)^2"
    theta: [identity]
    constants: {c: 0.1}
  chart: {radius: 2}
command: coeffs
grid: {re: [0, 0.5, 2], im: [0, 0.2, 2], base: [0, [0.1, 0]]}
tolerances: {degeneracy: 1.0e-9, derivative: 1.0e-5}
output: {format: csv, path: out.csv, plot_data: true}
)");
  CHECK(m.geometry->n() == 2);
  CHECK(m.points.size() == 4);
  CHECK(m.points[3][0] == cplx(0.5, 0.2));
  CHECK(m.points[3][1] == cplx(0.1, 0.0));
  CHECK(m.tolerances.degeneracy == 1e-9);
  CHECK(m.output.format == Format::csv);
  CHECK(m.output.plot_data);
  CHECK(m.geometry->chart().radius == 2.0);
}

TEST_CASE("describe the Fock model") {
  auto out = execute(parse_manifest(kFockDescribe), {});
  auto j = json::parse(out.content);
  CHECK(j["version"] == kToolVersion);
  CHECK(j["manifest_hash"] == hash_string(fnv1a64(kFockDescribe)));
  const auto& rep = j["result"][0];
  CHECK(rep["rdot"][0][0].get<double>() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rep["r"].get<double>() == 0.0);
  CHECK(out.content.find("-0.0") == std::string::npos);
  CHECK(rep["stratum"] == "M(0)");
}

TEST_CASE("compare on the sphere") {
  auto out = execute(parse_manifest(kCp1Compare), {});
  auto fit = json::parse(out.content)["result"][0]["fit"];
  const double b = 1.0 / (2 * std::numbers::pi);
  CHECK(std::abs(fit["fitted_b"][0].get<double>() - b) < 1e-6);
  CHECK(std::abs(fit["fitted_b"][1].get<double>() - b) < 1e-6);
  CHECK(std::abs(fit["fitted_b"][2].get<double>()) < 1e-6);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(fit["fitted_b"][i].get<double>() - fit["predicted_b"][i].get<double>()) < 1e-6);
}

TEST_CASE("outputs are identical across runs and thread counts") {
  const auto m = parse_manifest(std::string(kCp1Compare) + "output: {plot_data: true}\n");
  RunOptions one, three;
  three.threads = 3;
  const auto a = execute(m, one), b = execute(m, one), c = execute(m, three);
  CHECK(a.content == b.content);
  CHECK(a.content == c.content);
  REQUIRE(a.side_files.size() == c.side_files.size());
  for (std::size_t i = 0; i < a.side_files.size(); ++i) CHECK(a.side_files[i].content == c.side_files[i].content);

  RunOptions csv;
  csv.format = Format::csv;
  const auto t = execute(m, csv);
  CHECK(t.content.rfind("# bergman 0.1.0 schema 1 manifest " + hash_string(m.hash), 0) == 0);
  CHECK(t.content.find("index,k,value,residual") != std::string::npos);
}

TEST_CASE("command line exit codes and files") {
  const auto dir = scratch_dir();
  const auto out = dir / "fock.json";
  fs::remove(out);
  const auto good = write_file("fock.yaml", kFockDescribe);
  CHECK(run_main({"--manifest", good, "--out", out.string()}) == 0);
  CHECK(fs::exists(out));
  CHECK(json::parse(read_file(out))["command"] == "describe");
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().string().find(".tmp.") == std::string::npos);

  const auto bad_out = dir / "bad.json";
  fs::remove(bad_out);
  const auto bad = write_file("bad.yaml", "geometry: {family: cp1_fs}\ncommand: compare\npoints: [0.3]\nk_list: [-4, 8, 16, 32, 64]\n");
  CHECK(run_main({"--manifest", bad, "--out", bad_out.string()}) == 2);
  const auto neg = write_file("neg.yaml",
                              "geometry: {family: cp1_fs}\ncommand: morse\nk_list: [-3, 4]\n");
  CHECK(run_main({"--manifest", neg, "--out", bad_out.string()}) == 2);
  CHECK_FALSE(fs::exists(bad_out));
  CHECK(run_main({"--manifest", (dir / "missing.yaml").string()}) == 2);
  CHECK(run_main({"--manifest", good, "--format", "xml"}) == 2);

  // Stratum integrals are not defined on the Fock model: a numerical failure.
  const auto num = write_file("num.yaml", "geometry: {family: fock, params: {lambda: [1]}}\ncommand: morse\nk_list: [4]\n");
  CHECK(run_main({"--manifest", num, "--out", bad_out.string()}) == 3);
  CHECK_FALSE(fs::exists(bad_out));
}

TEST_CASE("morse command writes the margins table") {
  const auto dir = scratch_dir();
  const auto path = write_file("morse.yaml", "geometry: {family: cp1_fs, params: {degree: -1}}\ncommand: morse\nk_list: [10, 40]\n");
  const auto out = dir / "morse.json";
  CHECK(run_main({"--manifest", path, "--out", out.string()}) == 0);
  const auto j = json::parse(read_file(out));
  CHECK(j["result"]["report"]["q_integrals"][1].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(j["result"]["report"]["exact_dims"]["40"][1] == 39);
  const auto table = read_file(dir / "morse.margins.csv");
  CHECK(table.find("k,q,dim,lower_margin") != std::string::npos);
  CHECK(table.find("40,1,39,") != std::string::npos);

  // Supplied dims replace the closed-form counts.
  auto m = parse_manifest("geometry: {family: cp1_fs}\ncommand: morse\nk_list: [5]\ndims: [[2, 0]]\n");
  auto r = json::parse(execute(m, {}).content);
  CHECK(r["result"]["inequalities"][0]["all_hold"] == false);
}

TEST_CASE("heat command") {
  auto m = parse_manifest("command: heat\nheat: {eigenvalues: [0.0], t: [2.0], q: 0, random_draws: 200}\n");
  RunOptions o;
  o.seed = 11;
  auto j = json::parse(execute(m, o).content)["result"];
  CHECK(j["rows"][0]["density"].get<double>() == doctest::Approx(1 / (4 * std::numbers::pi)).epsilon(1e-15));
  CHECK(j["random"]["draws"] == 200);
  CHECK(j["random"]["all_hold"] == true);
  CHECK(execute(m, o).content == execute(m, o).content);

  // Spectra taken from curvature at manifest points.
  auto g = parse_manifest(
      "command: heat\ngeometry: {family: fock, params: {lambda: [1, -2]}}\npoints: [[0, 0]]\nheat: {t: [50.0], q: 1}\n");
  auto rows = json::parse(execute(g, {}).content)["result"]["rows"];
  CHECK(rows[0]["density"].get<double>() == doctest::Approx(2.0 * 4.0 / std::pow(2 * std::numbers::pi, 2)).epsilon(1e-9));
}

TEST_CASE("exact command with plot data") {
  auto m = parse_manifest(R"(geometry: {family: fock, params: {lambda: [1]}}
command: exact
points: [0.0, 0.5]
pairs: [[0.0, 0.2], [0.1, 0.6]]
k_list: [8, 16]
output: {plot_data: true}
)");
  auto out = execute(m, {});
  auto j = json::parse(out.content)["result"];
  for (const auto& e : j) {
    const double k = e["k"].get<double>();
    for (const auto& v : e["values"]) CHECK(v["value"].get<double>() == doctest::Approx(k / std::numbers::pi).epsilon(1e-10));
    for (const auto& o : e["offdiag"]) {
      const double d = o["distance"].get<double>();
      CHECK(o["modulus"].get<double>() == doctest::Approx(k / std::numbers::pi * std::exp(-k * d * d)).epsilon(1e-10));
    }
  }
  CHECK(out.side_files.size() == 4);
  CHECK(out.side_files[0].suffix == ".offdiag_k8.csv");
}
