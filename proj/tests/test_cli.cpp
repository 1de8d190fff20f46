#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace hornopt;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hornopt_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& content) {
    fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(std::move(args), out_, err_);
  }
  std::string out() const { return out_.str(); }

  std::string catalog(const std::string& problem, const std::string& what,
                      std::vector<std::string> graph = {}) {
    std::string p = path(problem + "." + what);
    std::vector<std::string> args{"catalog", problem, "--emit", what, "--out", p};
    args.insert(args.end(), graph.begin(), graph.end());
    EXPECT_EQ(run(args), cli::kOk) << err_.str();
    return p;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

bool has_line(const std::string& text, const std::string& line) {
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);)
    if (l == line) return true;
  return false;
}

const char* kUnary = "problem u\ndirection max\nso S 1\nobjective w : S(w)\n";

}  // namespace

TEST(ParseLimit, Forms) {
  EXPECT_EQ(cli::parse_limit("2^30"), 1ull << 30);
  EXPECT_EQ(cli::parse_limit("1000"), 1000u);
  EXPECT_THROW(cli::parse_limit("3^4"), InputError);
  EXPECT_THROW(cli::parse_limit("2^64"), InputError);
  EXPECT_THROW(cli::parse_limit("0"), InputError);
  EXPECT_THROW(cli::parse_limit("ten"), InputError);
}

TEST_F(Cli, CheckMaxflow) {
  std::string spec = catalog("maxflow-pb", "spec");
  EXPECT_EQ(run({"check", spec}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "horn=yes"));
  EXPECT_TRUE(has_line(out(), "class=PI1"));
  EXPECT_TRUE(has_line(out(), "poly_bound=n^1"));
}

TEST_F(Cli, CheckReportsOffendingClause) {
  std::string spec = file("bad.spec",
                          "problem bad\ndirection max\nconst s t\nso P 2\nso S 2\n"
                          "objective a : P(a,a)\n"
                          "feasible forall x. forall z. P(x,z) | S(s,t)\n");
  EXPECT_EQ(run({"check", spec}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "horn=no"));
  EXPECT_TRUE(has_line(out(), "offending_clause=P(x,z) | S(s,t)")) << out();
}

TEST_F(Cli, CheckShortestPath) {
  std::string spec = catalog("shortest-path", "spec");
  EXPECT_EQ(run({"check", spec}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "horn=no"));
  EXPECT_TRUE(has_line(out(), "offending_formula=feasible.5")) << out();
  EXPECT_TRUE(has_line(out(), "class=PI2"));
}

TEST_F(Cli, MalformedSpec) {
  std::string spec = file("broken.spec", "problem p\ndirection max\nso S 1\nobjective w : S(w,w)\n");
  EXPECT_EQ(run({"check", spec}), cli::kInput);
  EXPECT_NE(err_.str().find("4:"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"check", path("missing.spec")}), cli::kInput);
  EXPECT_EQ(run({"frobnicate"}), cli::kInput);
}

TEST_F(Cli, Classify) {
  std::string spec = catalog("shortest-path", "spec");
  EXPECT_EQ(run({"classify", spec}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "feasible.5.class=PI2"));
  EXPECT_TRUE(has_line(out(), "feasible.1.class=SIGMA0"));
  EXPECT_TRUE(has_line(out(), "objective.class=SIGMA0"));
}

TEST_F(Cli, SolveShortestPath) {
  std::string spec = catalog("shortest-path", "spec");
  std::string chain = catalog("shortest-path", "struct",
                              {"--vertices", "3", "--edge", "0,1", "--edge", "1,2"});
  EXPECT_EQ(run({"solve", spec, chain, "--witness"}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "status=optimal value=2"));
  EXPECT_TRUE(has_line(out(), "witness.S=(0,1) (1,2)")) << out();

  std::string cut = catalog("shortest-path", "struct", {"--vertices", "3", "--edge", "1,2"});
  EXPECT_EQ(run({"solve", spec, cut}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "status=infeasible"));
}

TEST_F(Cli, SolveEnginesAgree) {
  std::string spec = catalog("maxflow-pb", "spec");
  std::string m = catalog("maxflow-pb", "struct");
  EXPECT_EQ(run({"solve", spec, m}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "status=optimal value=2"));
  EXPECT_EQ(run({"solve", spec, m, "--engine", "reduction"}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "status=optimal value=2"));
  EXPECT_EQ(run({"solve", spec, m, "--engine", "simplex"}), cli::kInput);
}

TEST_F(Cli, SolveWeighted) {
  std::string spec = catalog("matching", "spec");
  std::string m = catalog("matching", "struct");
  EXPECT_EQ(run({"solve", spec, m}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "status=optimal value=4"));
  EXPECT_EQ(run({"check", spec}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "poly_bound=W*n^2"));
  EXPECT_TRUE(has_line(out(), "polynomially_bound=no"));
}

TEST_F(Cli, SolveLimit) {
  std::string spec = catalog("maxflow-pb", "spec");
  std::vector<std::string> args{"--vertices", "5"};
  for (int u = 0; u < 5; ++u)
    for (int v = 0; v < 5; ++v)
      if (u != v) {
        args.push_back("--edge");
        args.push_back(std::to_string(u) + "," + std::to_string(v));
      }
  std::string m = catalog("maxflow-pb", "struct", args);
  EXPECT_EQ(run({"solve", spec, m}), cli::kLimit);
  EXPECT_TRUE(has_line(out(), "status=limit"));
  EXPECT_NE(out().find("2^125"), std::string::npos);
  EXPECT_EQ(run({"solve", spec, m, "--limit", "zero"}), cli::kInput);
}

TEST_F(Cli, CompileFlow) {
  std::string spec = file("u.spec", kUnary);
  std::string m = file("three.struct", "universe 3\n");
  std::string dimacs = path("out.dimacs");
  EXPECT_EQ(run({"compile-flow", spec, m, "--out", dimacs}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "vertices=5"));
  EXPECT_TRUE(has_line(out(), "edges=6"));
  EXPECT_TRUE(has_line(out(), "flow=3"));
  std::ifstream in(dimacs);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "p max 5 6");

  std::string mf = catalog("maxflow-pb", "spec");
  std::string mm = catalog("maxflow-pb", "struct");
  EXPECT_EQ(run({"compile-flow", mf, mm}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "flow=2"));
  EXPECT_TRUE(has_line(out(), "p max 5 5"));

  std::string min = file("min.spec", "problem m\ndirection min\nso S 1\nobjective w : S(w)\n");
  EXPECT_EQ(run({"compile-flow", min, m}), cli::kInput);
}

TEST_F(Cli, CatalogRoundTrip) {
  for (const char* problem : {"maxflow-pb", "shortest-path", "matching"}) {
    std::string spec = catalog(problem, "spec");
    std::string m = catalog(problem, "struct");
    EXPECT_EQ(run({"solve", spec, m, "--witness"}), cli::kOk);
    std::string first = out();
    std::string again = path(std::string(problem) + ".again");
    EXPECT_EQ(run({"catalog", problem, "--emit", "spec"}), cli::kOk);
    std::ofstream(again) << out();
    EXPECT_EQ(run({"solve", again, m, "--witness"}), cli::kOk);
    EXPECT_EQ(out(), first) << problem;
  }
  EXPECT_EQ(run({"catalog", "sorting"}), cli::kInput);
}

TEST_F(Cli, Sweep) {
  EXPECT_EQ(run({"sweep", "shortest-path", "--count", "20", "--seed", "5"}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "instances=20"));
  EXPECT_TRUE(has_line(out(), "mismatches=0"));
  EXPECT_EQ(run({"sweep", "matching", "--count", "10", "--vertices", "4"}), cli::kOk);
  EXPECT_TRUE(has_line(out(), "mismatches=0"));
}
