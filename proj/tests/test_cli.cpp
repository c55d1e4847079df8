#include "cli_app.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace mcdr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "mcdr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("mcdr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string gen(const std::string& name, std::vector<std::string> args) {
    args.insert(args.begin(), "gen");
    args.push_back("--output");
    args.push_back(path(name));
    const Outcome r = invoke(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path dir_;
};

double max_abs_diff(const json& a, const json& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i].get<double>() - b[i].get<double>()));
  return m;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string c;
    std::istringstream ls(line);
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_F(Cli, GapInstanceWithMw) {
  const std::string in = gen("gap.json", {"--kind", "gap"});
  const Outcome r = invoke({"--quiet", "solve", in, "--objective", "mm-var", "--solver", "mw", "--d", "1", "--eps", "1e-3",
                     "--eta-mult", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  EXPECT_NEAR(rep["relaxation"]["value"].get<double>(), 1.75, 1e-3);
  EXPECT_EQ(rep["relaxation"]["solver"], "mw");
  EXPECT_LE(rep["solution"]["rank"].get<int>(), 2);
  EXPECT_FALSE(rep.contains("wall_seconds"));
}

TEST_F(Cli, OrthogonalGroupsEqualVariances) {
  const std::string in = gen("orth.json", {"--kind", "orthogonal", "--n", "4", "--equal"});
  const Outcome r = invoke({"--quiet", "solve", in, "--d", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json z = json::parse(r.out)["solution"]["z"];
  EXPECT_NEAR(z[0].get<double>(), z[1].get<double>(), 1e-4);
}

TEST_F(Cli, MarginalLossEqualizesTwoGroups) {
  const std::string in = gen("r2.json", {"--seed", "5", "--kind", "random", "--k", "2", "--n", "5"});
  const Outcome r = invoke({"--quiet", "solve", in, "--objective", "mm-loss", "--d", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json sol = json::parse(r.out)["solution"];
  const auto in_cov = io::covariances_from_json(io::read_json_file(in)["covariances"]);
  const auto b = beta(in_cov, 2);
  EXPECT_NEAR(sol["losses"][0].get<double>(), sol["losses"][1].get<double>(), 1e-4 * std::max(b[0], b[1]));
  EXPECT_EQ(sol["rank"].get<int>(), 2);
  EXPECT_EQ(sol["form"], "projection");
}

TEST_F(Cli, ExitCodes) {
  const std::string in = gen("gap.json", {"--kind", "gap"});
  EXPECT_EQ(invoke({"solve", path("missing.json"), "--d", "1"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"solve", in, "--d", "5"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"solve", in, "--d", "1", "--objective", "bogus"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"solve", in, "--d", "1", "--no-such-flag"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
  const Outcome u = invoke({"--quiet", "solve", in, "--d", "1", "--solver", "mw", "--max-iters", "5", "--eps", "1e-9"});
  EXPECT_EQ(u.code, cli::kExitUnconverged);
  EXPECT_EQ(json::parse(u.out)["status"], "UNCONVERGED");
  const Outcome e = invoke({"solve", in, "--d", "9"});
  EXPECT_NE(e.err.find("error:"), std::string::npos);
  EXPECT_TRUE(e.out.empty());
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = MCDR_CLI_PATH;
  const std::string in = gen("gap.json", {"--kind", "gap"});
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("solve " + in + " --d 1"), 0);
  EXPECT_EQ(status("solve " + in + " --d 1 --solver mw --max-iters 5 --eps 1e-9"), 2);
  EXPECT_EQ(status("solve " + path("nope.csv") + " --d 1"), 1);
}

TEST_F(Cli, DeterministicOutputs) {
  const std::string in = gen("r.json", {"--seed", "9", "--kind", "random", "--k", "4", "--n", "6"});
  for (int rep = 0; rep < 2; ++rep) {
    const std::string tag = std::to_string(rep);
    const Outcome r = invoke({"--quiet", "--seed", "3", "solve", in, "--d", "2", "--solver", "mw", "--report",
                       path("rep" + tag + ".json"), "--projection", path("p" + tag + ".csv"), "--solution",
                       path("x" + tag + ".json")});
    ASSERT_NE(r.code, cli::kExitError) << r.err;
  }
  EXPECT_EQ(slurp(path("rep0.json")), slurp(path("rep1.json")));
  EXPECT_EQ(slurp(path("p0.csv")), slurp(path("p1.csv")));
  EXPECT_EQ(slurp(path("x0.json")), slurp(path("x1.json")));
  EXPECT_EQ(slurp(gen("a.json", {"--seed", "4", "--kind", "random"})), slurp(gen("b.json", {"--seed", "4", "--kind", "random"})));
}

TEST_F(Cli, SolveEvalRoundTrip) {
  const std::string in = gen("r.json", {"--seed", "11", "--kind", "random", "--k", "3", "--n", "6"});
  const Outcome r = invoke({"--quiet", "solve", in, "--d", "3", "--report", path("rep.json"), "--projection", path("p.csv"),
                     "--solution", path("x.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = io::read_json_file(path("rep.json"));
  ASSERT_EQ(rep["solution"]["form"], "projection");
  const json z = rep["solution"]["z"];

  const Outcome e = invoke({"eval", in, "--solution", path("p.csv")});
  ASSERT_EQ(e.code, 0) << e.err;
  const json ev = json::parse(e.out);
  EXPECT_LE(max_abs_diff(ev["z"], z), 1e-9);
  EXPECT_NEAR(ev["values"]["mm-var"].get<double>(), rep["solution"]["value"].get<double>(), 1e-9);
  EXPECT_TRUE(ev["checks"]["orthonormal"].get<bool>());
  EXPECT_EQ(ev["d"], 3);

  const Outcome x = invoke({"eval", in, "--solution", path("x.json")});
  ASSERT_EQ(x.code, 0) << x.err;
  const json xv = json::parse(x.out);
  EXPECT_LE(max_abs_diff(xv["z"], z), 1e-9);
  EXPECT_TRUE(xv["checks"]["in_fantope"].get<bool>());

  // csv stdout carries the same projection
  const Outcome c = invoke({"--quiet", "--format", "csv", "solve", in, "--d", "3"});
  EXPECT_EQ(c.out, slurp(path("p.csv")));
}

TEST_F(Cli, EvalKnownPoints) {
  const std::string in = gen("gap.json", {"--kind", "gap"});
  std::ofstream(path("id.csv")) << "1,0\n0,1\n";
  const json full = json::parse(invoke({"eval", in, "--solution", path("id.csv")}).out);
  EXPECT_NEAR(full["z"][0].get<double>(), 3.0, 1e-15);
  EXPECT_NEAR(full["z"][1].get<double>(), 3.0, 1e-15);
  EXPECT_NEAR(full["z"][2].get<double>(), 4.0, 1e-15);

  Matrix xhat(2, 2);
  xhat << 16, 4, 4, 1;
  xhat /= 17.0;
  std::ofstream(path("xhat.json")) << io::point_to_json(FantopePoint(xhat, 1)).dump();
  const json g = json::parse(invoke({"eval", in, "--solution", path("xhat.json")}).out);
  EXPECT_NEAR(g["values"]["mm-var"].get<double>(), 26.0 / 17.0, 1e-12);
  EXPECT_TRUE(g["values"]["nsw"].is_number());

  std::ofstream(path("axis.csv")) << "1\n0\n";
  std::ofstream(path("bad.csv")) << "1,2\n";
  std::ofstream(path("skew.csv")) << "1\n1\n";
  const json skew = json::parse(invoke({"eval", in, "--solution", path("skew.csv")}).out);
  EXPECT_FALSE(skew["checks"]["orthonormal"].get<bool>());
  EXPECT_EQ(invoke({"eval", in, "--solution", path("bad.csv")}).code, cli::kExitError);
}

TEST_F(Cli, EvalMatchesLibrary) {
  const std::string in = gen("r.json", {"--seed", "2", "--kind", "random", "--k", "3", "--n", "4"});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix a(4, 2);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  const Matrix p = orthonormalize(a);
  std::ofstream f(path("p.csv"));
  io::write_projection_csv(f, p);
  f.close();
  const json ev = json::parse(invoke({"eval", in, "--solution", path("p.csv"), "--p", "0.5"}).out);
  const auto cov = io::covariances_from_json(io::read_json_file(in)["covariances"]);
  const Matrix x = p * p.transpose();
  const Vector z = utilities(cov, x);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(ev["z"][static_cast<std::size_t>(i)].get<double>(), z[i]);
  EXPECT_EQ(ev["values"]["power-mean"].get<double>(), evaluate(Objective::power_mean(0.5), cov, x).value);
}

TEST_F(Cli, SweepRowsAndBaselines) {
  const std::string in = gen("r4.json", {"--seed", "21", "--kind", "random", "--k", "4", "--n", "6"});
  const Outcome r = invoke({"--quiet", "sweep", in, "--d-range", "1..5", "--objective", "mm-loss", "--solver", "sdp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1u + 40u);
  EXPECT_EQ(rows[0][0], "d");
  int solution = 0, baseline = 0;
  for (int d = 1; d <= 5; ++d) {
    double fair = 0.0, base = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (std::stoi(rows[i][0]) != d) continue;
      const double loss = std::stod(rows[i][6]);
      if (rows[i][3] == "solution") {
        fair = std::max(fair, loss);
        ++solution;
      } else {
        base = std::max(base, loss);
        ++baseline;
      }
    }
    EXPECT_GE(base, fair - 1e-9) << "d = " << d;
  }
  EXPECT_EQ(solution, 20);
  EXPECT_EQ(baseline, 20);
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_GE(std::stoi(rows[i][0]), std::stoi(rows[i - 1][0]));
}

TEST_F(Cli, SweepNswNotBelowBaseline) {
  const std::string in = gen("r3.json", {"--seed", "22", "--kind", "random", "--k", "3", "--n", "5"});
  const Outcome r = invoke({"--quiet", "sweep", in, "--d-range", "1..3", "--objective", "nsw", "--eps", "1e-7",
                     "--output", path("s.csv"), "--timing"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(path("s.csv")));
  ASSERT_EQ(rows.size(), 1u + 18u);
  EXPECT_EQ(rows[0].back(), "runtime");
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    ASSERT_EQ(rows[i][3], "solution");
    ASSERT_EQ(rows[i + 1][3], "baseline");
    EXPECT_GE(std::stod(rows[i][7]), std::stod(rows[i + 1][7]) - 1e-9);
  }
}

TEST_F(Cli, SweepBadRange) {
  const std::string in = gen("gap.json", {"--kind", "gap"});
  EXPECT_EQ(invoke({"sweep", in, "--d-range", "0..3"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"sweep", in, "--d-range", "x"}).code, cli::kExitError);
}

TEST_F(Cli, RoundExtremeAndIterative) {
  const std::string t = gen("t.json", {"--kind", "tightness", "--n", "4", "--d", "1", "--s", "1"});
  const json bundle = io::read_json_file(t);
  std::ofstream(path("sys.json")) << bundle["system"].dump();
  Matrix x = Matrix::Zero(4, 4);
  x(0, 0) = x(1, 1) = 0.5;
  std::ofstream(path("pt.json")) << io::point_to_json(FantopePoint(x, 1)).dump();
  const Outcome r = invoke({"round", "--system", path("sys.json"), "--point", path("pt.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json out = json::parse(r.out);
  EXPECT_EQ(out["rank"], 2);
  EXPECT_NEAR(out["objective"].get<double>(), 0.5, 1e-12);
  EXPECT_TRUE(out["trace"]["steps"].empty());
  EXPECT_EQ(json::parse(invoke({"round", "--system", t, "--point", path("pt.json")}).out)["rank"], 2);

  ConstraintSystem s;
  s.sense = Sense::MINIMIZE;
  s.d = 1;
  s.C = Matrix::Zero(3, 3);
  s.C.diagonal() << -3, -2, -1;
  Matrix a = Matrix::Zero(3, 3);
  a(1, 1) = 1;
  s.constraints.push_back({a, Relation::GE, 0.25});
  std::ofstream(path("ineq.json")) << io::system_to_json(s).dump();
  const Outcome it = invoke({"round", "--system", path("ineq.json"), "--iterative", "--output", path("it.json")});
  ASSERT_EQ(it.code, 0) << it.err;
  const json iv = io::read_json_file(path("it.json"));
  EXPECT_EQ(iv["rank"], 1);
  EXPECT_LE(iv["max_violation"].get<double>(), iv["delta"]["value"].get<double>() + 1e-9);
  EXPECT_EQ(invoke({"round", "--system", path("sys.json")}).code, cli::kExitError);
  EXPECT_EQ(invoke({"round", "--system", path("sys.json"), "--iterative"}).code, cli::kExitError);
}

TEST_F(Cli, GenKinds) {
  const std::string g = gen("g.json", {"--kind", "maxcut", "--graph", std::string(MCDR_DATA_DIR) + "/graph_small.txt",
                                       "--b", "3"});
  const InstanceBundle b = io::bundle_from_json(io::read_json_file(g));
  EXPECT_EQ(b.kind, "maxcut");
  EXPECT_EQ(b.covariances->k(), 9u);
  EXPECT_EQ(b.graph->edges.size(), 4u);
  const Outcome solved = invoke({"--quiet", "solve", g});
  EXPECT_EQ(json::parse(solved.out)["d"], 1);
  EXPECT_EQ(invoke({"gen", "--kind", "maxcut"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"gen", "--kind", "nope"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"gen", "--kind", "tightness", "--n", "2", "--d", "2", "--s", "1"}).code, cli::kExitError);
  EXPECT_EQ(invoke({"solve", gen("t.json", {"--kind", "tightness"}), "--d", "1"}).code, cli::kExitError);
}

TEST_F(Cli, CsvInput) {
  const std::string data = std::string(MCDR_DATA_DIR) + "/credit_small.csv";
  const Outcome r = invoke({"--quiet", "solve", data, "--group-col", "sex", "--center", "--scale", "--d", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep["k"], 2);
  EXPECT_EQ(rep["n"], 4);
  EXPECT_EQ(invoke({"solve", data, "--d", "2"}).code, cli::kExitError);  // no "group" column
}
