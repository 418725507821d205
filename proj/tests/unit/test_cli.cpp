#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mmnl/harness.hpp"
#include "mmnl/text_io.hpp"

#ifndef MMNL_CLI_PATH
#error "MMNL_CLI_PATH must point at the mmnl binary"
#endif

using namespace mmnl;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with stderr discarded and stdout captured.
Run cli(const std::string& args) {
  const std::string command = std::string(MMNL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mmnl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::map<std::string, std::string> porcelain(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(line);
  std::string field;
  while (ss >> field) {
    const auto eq = field.find('=');
    kv[field.substr(0, eq)] = field.substr(eq + 1);
  }
  return kv;
}

std::string generate_flags(const fs::path& dir, const std::string& tag = "") {
  return "generate --m 10 --n 10 --rank 2 --T 100 --K 3 --seed 1 --out-data " +
         (dir / ("data" + tag + ".txt")).string() + " --out-truth " +
         (dir / ("truth" + tag + ".txt")).string();
}

}  // namespace

TEST_CASE("generate writes the header and is repeatable") {
  const auto dir = scratch("generate");
  REQUIRE(cli(generate_flags(dir, "a")).code == 0);
  REQUIRE(cli(generate_flags(dir, "b")).code == 0);
  const std::string data = slurp(dir / "dataa.txt");
  CHECK(data.rfind("10 10 100\n", 0) == 0);
  CHECK(data == slurp(dir / "datab.txt"));
  CHECK(slurp(dir / "trutha.txt") == slurp(dir / "truthb.txt"));
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  const std::string out = " --out-data " + (dir / "d").string() + " --out-truth " + (dir / "t").string();
  CHECK(cli("generate --m 10 --n 10 --rank 2 --T 100 --K 11 --seed 1" + out).code == 2);
  CHECK(cli("generate --m 10").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);

  REQUIRE(cli(generate_flags(dir)).code == 0);
  const std::string data = (dir / "data.txt").string();
  const std::string est = (dir / "est.txt").string();
  CHECK(cli("fit --method fgd --data " + data + " --out " + est + " --lambda 0.1 --lambda-rule theorem")
            .code == 2);
  CHECK(cli("fit --method svd --data " + data + " --out " + est).code == 2);
  CHECK(cli("fit --method fgd --data " + data + " --out " + est + " --beta-dec 1.5").code == 2);
  CHECK(cli("evaluate --estimate " + est + " --truth " + est + " --bound").code == 2);
  CHECK(cli("plot --results " + data + " --out " + est + " --x sideways").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("runtime errors exit with 1") {
  const auto dir = scratch("runtime");
  spit(dir / "bad.txt", "2 2 1\n0 5 1 5\n");
  CHECK(cli("fit --method mle --data " + (dir / "bad.txt").string() + " --out " +
            (dir / "o.txt").string())
            .code == 1);
  CHECK(cli("fit --method mle --data " + (dir / "missing.txt").string() + " --out " +
            (dir / "o.txt").string())
            .code == 1);
  spit(dir / "a.txt", "2 2\n0 0\n0 0\n");
  spit(dir / "b.txt", "2 3\n0 0 0\n0 0 0\n");
  CHECK(cli("evaluate --estimate " + (dir / "a.txt").string() + " --truth " + (dir / "b.txt").string())
            .code == 1);
  fs::remove_all(dir);
}

TEST_CASE("fgd on singleton assortments writes zeros") {
  const auto dir = scratch("singleton");
  spit(dir / "data.txt", "2 3 3\n0 1 1 1\n1 2 1 2\n0 0 1 0\n");
  const auto est = dir / "est.txt";
  REQUIRE(cli("fit --method fgd --data " + (dir / "data.txt").string() + " --out " + est.string() +
              " --lambda 0.1")
              .code == 0);
  CHECK(load_matrix(est.string()).isZero(0.0));
  fs::remove_all(dir);
}

TEST_CASE("mle on the three-to-one counts") {
  const auto dir = scratch("mle");
  spit(dir / "data.txt", "1 2 4\n0 0 2 0 1\n0 0 2 0 1\n0 0 2 0 1\n0 1 2 0 1\n");
  const auto est = dir / "est.txt";
  const auto report = dir / "report.txt";
  REQUIRE(cli("fit --method mle --data " + (dir / "data.txt").string() + " --out " + est.string() +
              " --report " + report.string())
              .code == 0);
  const Matrix theta = load_matrix(est.string());
  CHECK(std::abs(theta(0, 0) + 0.549306) <= 1e-5);
  CHECK(std::abs(theta(0, 1) - 0.549306) <= 1e-5);
  CHECK(slurp(report).rfind("0 ", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("evaluate reports rmse and the bound") {
  const auto dir = scratch("evaluate");
  spit(dir / "zero.txt", "2 2\n0 0\n0 0\n");
  spit(dir / "threes.txt", "2 2\n3 3\n3 3\n");
  const std::string zero = (dir / "zero.txt").string();
  const std::string threes = (dir / "threes.txt").string();

  auto kv = porcelain(cli("evaluate --porcelain --estimate " + zero + " --truth " + zero).out);
  CHECK(kv.at("rmse") == "0");
  kv = porcelain(cli("evaluate --porcelain --estimate " + threes + " --truth " + zero).out);
  CHECK(std::stod(kv.at("rmse")) == 3.0);
  CHECK(std::stod(kv.at("frob_error")) == 6.0);

  REQUIRE(cli(generate_flags(dir)).code == 0);
  const std::string truth = (dir / "truth.txt").string();
  const Run run =
      cli("evaluate --porcelain --bound --K 3 --T 100 --rank 2 --estimate " + truth + " --truth " + truth);
  REQUIRE(run.code == 0);
  kv = porcelain(run.out);
  const double expected = theorem_bound(bound_inputs_from_truth(load_matrix(truth), 3, 100, 2));
  CHECK(std::stod(kv.at("theorem_bound")) == expected);
  CHECK(kv.at("within_bound") == "true");
  CHECK(kv.count("alpha") == 1);
  CHECK(kv.count("sigma_tail") == 1);
  fs::remove_all(dir);
}

TEST_CASE("sweep and plot") {
  const auto dir = scratch("sweep");
  spit(dir / "grid.cfg", "[experiment]\nm = 60\nn = 60\nrank = 2\nK = 5\nT = 3000\nmethods = zero\nreplications = 1\n");
  const auto csv = dir / "out.csv";
  REQUIRE(cli("sweep --config " + (dir / "grid.cfg").string() + " --out " + csv.string()).code == 0);
  std::ifstream in(csv);
  const auto records = parse_results_csv(in);
  REQUIRE(records.size() == 1);
  CHECK(std::abs(records[0].rmse - 1.0) <= 0.02);

  spit(dir / "broken.cfg", "[experiment]\nm = 60\nwidth = 3\n");
  CHECK(cli("sweep --config " + (dir / "broken.cfg").string() + " --out " + csv.string()).code == 1);

  spit(dir / "empty.csv", std::string(kResultsHeader) + "\n");
  const auto svg_a = dir / "a.svg";
  const auto svg_b = dir / "b.svg";
  REQUIRE(cli("plot --results " + (dir / "empty.csv").string() + " --out " + svg_a.string()).code == 0);
  CHECK(slurp(svg_a).find("no data") != std::string::npos);

  REQUIRE(cli("plot --x per-row --results " + csv.string() + " --out " + svg_a.string()).code == 0);
  REQUIRE(cli("plot --x per-row --results " + csv.string() + " --out " + svg_b.string()).code == 0);
  CHECK(slurp(svg_a) == slurp(svg_b));
  fs::remove_all(dir);
}

TEST_CASE("generate, fit, evaluate round trip is bit-identical") {
  const auto dir = scratch("roundtrip");
  std::string reports[2];
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k);
    REQUIRE(cli(generate_flags(dir, tag)).code == 0);
    const std::string data = (dir / ("data" + tag + ".txt")).string();
    const std::string truth = (dir / ("truth" + tag + ".txt")).string();
    const std::string est = (dir / ("est" + tag + ".txt")).string();
    REQUIRE(cli("fit --method fgd --rank 2 --max-iters 300 --data " + data + " --out " + est).code == 0);
    const Run ev = cli("evaluate --porcelain --estimate " + est + " --truth " + truth);
    REQUIRE(ev.code == 0);
    reports[k] = ev.out;
  }
  CHECK(slurp(dir / "est0.txt") == slurp(dir / "est1.txt"));
  CHECK(reports[0] == reports[1]);
  fs::remove_all(dir);
}
