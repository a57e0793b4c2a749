#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lpball/cli.hpp"

using namespace lpball;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"lpball"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  const std::string prefix = key + " = ";
  while (std::getline(is, line))
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  return {};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lpball_cli_" + name);
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"clt", "--bogus"}).code, 2);
  EXPECT_EQ(run({"constants"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("constants"), std::string::npos);
  EXPECT_EQ(run({"clt", "--help"}).code, 0);
}

TEST(Cli, ConfigErrorsNameTheField) {
  auto r = run({"clt", "--p", "2", "--q", "2", "--dry-run"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("q:"), std::string::npos) << r.err;
  r = run({"clt", "--n", "many", "--dry-run"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n:"), std::string::npos) << r.err;
  r = run({"intersect", "--p", "0.5", "--dry-run"});
  EXPECT_EQ(r.code, 2);
  r = run({"window", "--r", "1.5", "--dry-run"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grid:"), std::string::npos) << r.err;
}

TEST(Cli, ConstantsGaussianPair) {
  const auto r = run({"constants", "--p", "2", "--q", "1", "--n", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(value_of(r.out, "c_11")), (std::numbers::pi - 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(std::stod(value_of(r.out, "M_p(q)")), std::sqrt(2.0 / std::numbers::pi), 1e-15);
  EXPECT_FALSE(value_of(r.out, "A_pqn").empty());
  EXPECT_FALSE(value_of(r.out, "gumbel_c_n").empty());
}

TEST(Cli, ConstantsJson) {
  const auto r = run({"constants", "--p", "inf", "--q", "1", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("c_11").get<double>(), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(j.at("p"), "inf");
}

TEST(Cli, RateValues) {
  auto r = run({"rate", "--p", "1", "--q", "2", "--z", "1.5,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "regime"), "p_lt_q");
  EXPECT_NEAR(std::stod(value_of(r.out, "I(1.5)")), 0.5, 1e-12);
  EXPECT_EQ(value_of(r.out, "I(1)"), "inf");
  r = run({"rate", "--p", "inf", "--q", "1", "--z", "0.5", "--conjugate-of", "mgf"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(value_of(r.out, "I(0.5)")), -1.0, 1e-9);
  EXPECT_EQ(run({"rate", "--p", "2", "--q", "inf", "--z", "0.5"}).code, 2);
}

TEST(Cli, SampleIsReproducible) {
  const auto a = run({"sample", "--p", "1.5", "--n", "4", "--count", "3", "--seed", "5"});
  const auto b = run({"sample", "--p", "1.5", "--n", "4", "--count", "3", "--seed", "5"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 3);
  EXPECT_NE(a.out, run({"sample", "--p", "1.5", "--n", "4", "--count", "3", "--seed", "5", "--stream", "1"}).out);
  EXPECT_EQ(run({"sample", "--p", "inf", "--measure", "cone"}).code, 2);
}

TEST(Cli, DryRunPrecedence) {
  const auto path = temp_path("prec.ini");
  {
    std::ofstream out(path);
    out << "[common]\nseed = 3\nn = 500\n[clt]\nsamples = 777\n";
  }
  ::setenv(kSeedEnv, "4", 1);
  auto r = run({"clt", "-c", path.string().c_str(), "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("seed"), 4);
  EXPECT_EQ(j.at("n"), 500);
  EXPECT_EQ(j.at("samples"), 777);
  r = run({"clt", "-c", path.string().c_str(), "--seed", "5", "--dry-run"});
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("seed"), 5);
  ::unsetenv(kSeedEnv);
  r = run({"clt", "-c", path.string().c_str(), "--dry-run"});
  EXPECT_EQ(nlohmann::json::parse(r.out).at("seed"), 3);
  std::filesystem::remove(path);
}

TEST(Cli, ByteIdenticalAcrossRunsAndWorkers) {
  const auto a = run({"intersect", "--n", "200", "-N", "3000", "--seed", "9"});
  const auto b = run({"intersect", "--n", "200", "-N", "3000", "--seed", "9"});
  const auto c = run({"intersect", "--n", "200", "-N", "3000", "--seed", "9", "--workers", "3"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(a.out.rfind(kCsvHeader, 0), 0u);
}

TEST(Cli, FailedCriterionExitsOne) {
  // n = 5 is far from the exponential limit.
  const auto r = run({"noncentral", "--n", "5", "-N", "20000"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find(",false"), std::string::npos);
}

TEST(Cli, OutputFileAndFormat) {
  const auto path = temp_path("out.json");
  const auto r = run({"disjoint", "--n-grid", "1,2", "-N", "1000", "-o", path.string().c_str(), "--timing"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("experiment"), "disjoint");
  EXPECT_TRUE(j.contains("wall_time"));
  std::filesystem::remove(path);
  EXPECT_EQ(run({"disjoint", "-N", "10", "-o", "/nonexistent-dir/r.csv"}).code, 2);
}

TEST(Cli, GridAliases) {
  const auto r = run({"ldp", "--z", "0.3,0.4", "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("grid").size(), 2u);
}
