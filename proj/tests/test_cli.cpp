#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sublab/cli.hpp"
#include "sublab/generate.hpp"
#include "sublab/matrix_market.hpp"
#include "sublab/theory.hpp"

using namespace sublab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "sublab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"krylov-sublab"};
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("solve CSV on the identity matches the canonical two-row shape") {
  SystemInstance sys;
  sys.a = DenseMatrix::identity(4);
  sys.b = DenseVector(std::vector<Complex>{0.5, 0.5, 0.5, 0.5});
  sys.x0 = DenseVector(4);
  sys.klass = MatrixClass::normal;
  ConvergenceReport report = restarted_gmres(sys, 2, 10, 0.0);
  std::vector<std::string> lines = split_lines(report_to_csv(report));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "cycle,residual_norm,ratio");
  CHECK(lines[1] == "0,1,");
  CHECK(lines[2] == "1,0,0");
}

TEST_CASE("gen then solve-from-files equals solving in memory byte for byte") {
  fs::path gen_dir = temp_dir("pipeline_gen");
  fs::path solve_a = temp_dir("pipeline_solve_a");
  fs::path solve_b = temp_dir("pipeline_solve_b");

  CHECK(cli({"gen", "--n", "100", "--class", "normal", "--spectrum", "annulus:1,2", "--seed",
             "42", "--out", gen_dir.string()}) == 0);
  CHECK(cli({"solve", "--in", gen_dir.string(), "--m", "5", "--max-cycles", "30", "--rtol", "0",
             "--out", solve_a.string()}) == 0);
  CHECK(cli({"solve", "--n", "100", "--class", "normal", "--spectrum", "annulus:1,2", "--seed",
             "42", "--m", "5", "--max-cycles", "30", "--rtol", "0", "--out",
             solve_b.string()}) == 0);

  CHECK(slurp(solve_a / "solve.csv") == slurp(solve_b / "solve.csv"));
  CHECK(slurp(solve_a / "solve.json") == slurp(solve_b / "solve.json"));
}

TEST_CASE("identical invocations produce byte-identical outputs") {
  fs::path a = temp_dir("det_a");
  fs::path b = temp_dir("det_b");
  for (const fs::path& dir : {a, b}) {
    CHECK(cli({"solve", "--n", "50", "--class", "normal", "--spectrum", "real-interval:1,2",
               "--seed", "7", "--m", "3", "--out", dir.string()}) == 0);
    CHECK(cli({"verify", "--suite", "lemma2", "--out", dir.string()}) == 0);
    CHECK(cli({"figure", "--which", "1", "--out", dir.string()}) == 0);
  }
  CHECK(slurp(a / "solve.csv") == slurp(b / "solve.csv"));
  CHECK(slurp(a / "solve.json") == slurp(b / "solve.json"));
  CHECK(slurp(a / "verdict.json") == slurp(b / "verdict.json"));
  CHECK(slurp(a / "figure1.csv") == slurp(b / "figure1.csv"));
  CHECK(slurp(a / "figure1.svg") == slurp(b / "figure1.svg"));
}

TEST_CASE("CSV norms equal JSON report norms exactly") {
  SystemInstance sys = gen_normal(30, SpectrumSpec::annulus(1.0, 2.0), 11);
  ConvergenceReport report = restarted_gmres(sys, 3, 10, 0.0);
  std::vector<std::string> lines = split_lines(report_to_csv(report));
  REQUIRE(lines.size() == report.cycles.size() + 2);  // header + cycle-0 row
  for (std::size_t i = 2; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string cycle, norm_text;
    std::getline(row, cycle, ',');
    std::getline(row, norm_text, ',');
    CHECK(std::stod(norm_text) == report.cycles[i - 2].exit_norm);
  }
}

TEST_CASE("figure 1 CSV curve is log-convex above the floor") {
  fs::path dir = temp_dir("fig1_prop");
  CHECK(cli({"figure", "--which", "1", "--out", dir.string()}) == 0);
  std::vector<std::string> lines = split_lines(slurp(dir / "figure1.csv"));
  std::vector<double> norms;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string cycle, norm_text;
    std::getline(row, cycle, ',');
    std::getline(row, norm_text, ',');
    norms.push_back(std::stod(norm_text));
  }
  REQUIRE(norms.size() >= 3);
  for (std::size_t k = 1; k + 1 < norms.size(); ++k) {
    if (norms[k + 1] <= 1e-8 * norms[0]) {
      break;
    }
    const double margin =
        std::log(norms[k + 1]) - 2.0 * std::log(norms[k]) + std::log(norms[k - 1]);
    CHECK(margin >= -1e-8);
  }
}

TEST_CASE("figure 2 finds and annotates a superlinear instance") {
  fs::path dir = temp_dir("fig2");
  CHECK(cli({"figure", "--which", "2", "--budget", "64", "--out", dir.string()}) == 0);
  const std::string svg = slurp(dir / "figure2.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("superlinear segment") != std::string::npos);
  const std::string sidecar = slurp(dir / "figure2.json");
  CHECK(sidecar.find("\"found\": true") != std::string::npos);
}

TEST_CASE("verify exit status reflects pass/fail and bad suite names") {
  fs::path dir = temp_dir("verify_exit");
  CHECK(cli({"verify", "--suite", "lemma1", "--out", dir.string()}) == 0);
  CHECK(cli({"verify", "--suite", "nonsense", "--out", dir.string()}) == 2);
}

TEST_CASE("guarded checks convert contract violations into failing records") {
  CheckRecord rec = run_check_guarded("theorem1/ratio-pairs", "injected nonnormal", [] {
    throw contract_error("theorem1_check: requires a normal-class run");
    return CheckRecord{};
  });
  CHECK(!rec.pass);
  CHECK(rec.note.find("contract violation") != std::string::npos);
}

TEST_CASE("verdict summary counts equal record tallies") {
  std::vector<SuiteResult> suites(2);
  suites[0].name = "alpha";
  suites[0].records = {CheckRecord{"a", "x", 0.0, 1.0, true, ""},
                       CheckRecord{"b", "x", 2.0, 1.0, false, ""}};
  suites[1].name = "beta";
  suites[1].records = {CheckRecord{"c", "y", 0.0, 1.0, true, ""}};
  const std::string text = verdicts_to_json_text(suites, "all", SuiteConfig{});
  CHECK(text.find("\"total\": 3") != std::string::npos);
  CHECK(text.find("\"passed\": 2") != std::string::npos);
  CHECK(text.find("\"failed\": 1") != std::string::npos);
}

TEST_CASE("environment seed applies only when the flag is absent") {
  fs::path env_dir = temp_dir("env_seed");
  setenv("KRYLOV_SUBLAB_SEED", "77", 1);
  CHECK(cli({"gen", "--n", "6", "--class", "normal", "--spectrum", "annulus:1,2", "--out",
             env_dir.string()}) == 0);
  CHECK(slurp(env_dir / "instance.json").find("\"seed\": 77") != std::string::npos);

  CHECK(cli({"gen", "--n", "6", "--class", "normal", "--spectrum", "annulus:1,2", "--seed", "5",
             "--out", env_dir.string()}) == 0);
  CHECK(slurp(env_dir / "instance.json").find("\"seed\": 5") != std::string::npos);
  unsetenv("KRYLOV_SUBLAB_SEED");
}

TEST_CASE("config file supplies values and flags win on conflict") {
  fs::path dir = temp_dir("config_file");
  const fs::path cfg = dir / "run.json";
  {
    std::ofstream out(cfg);
    out << R"({"n": 8, "class": "hermitian", "spectrum": "pm-pairs:1,2", "seed": 3})";
  }
  CHECK(cli({"gen", "--config", cfg.string(), "--out", dir.string()}) == 0);
  std::string sidecar = slurp(dir / "instance.json");
  CHECK(sidecar.find("\"class\": \"hermitian\"") != std::string::npos);
  CHECK(sidecar.find("\"seed\": 3") != std::string::npos);

  CHECK(cli({"gen", "--config", cfg.string(), "--seed", "9", "--out", dir.string()}) == 0);
  CHECK(slurp(dir / "instance.json").find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("restart parameter range is enforced before dispatch") {
  fs::path dir = temp_dir("m_range");
  CHECK(cli({"solve", "--n", "8", "--class", "normal", "--spectrum", "annulus:1,2", "--m", "8",
             "--out", dir.string()}) == 2);
}

TEST_CASE("gen at kappa 1 records the normal-equivalent class") {
  fs::path dir = temp_dir("gen_kappa1");
  CHECK(cli({"gen", "--n", "8", "--class", "diagonalizable-nonnormal", "--kappa", "1", "--seed",
             "2", "--spectrum", "annulus:1,2", "--out", dir.string()}) == 0);
  CHECK(slurp(dir / "instance.json").find("\"class\": \"normal\"") != std::string::npos);
}

TEST_CASE("generated hermitian instance read back passes its class defect check") {
  fs::path dir = temp_dir("gen_roundtrip");
  CHECK(cli({"gen", "--n", "8", "--class", "hermitian", "--spectrum", "pm-pairs:1,2", "--seed",
             "1", "--out", dir.string()}) == 0);
  DenseMatrix a = read_matrix_market(dir / "A.mtx");
  CHECK(frobenius_norm(a - hermitian_transpose(a)) <= 1e-12 * frobenius_norm(a));
}
