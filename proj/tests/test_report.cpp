#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "lpball/config.hpp"
#include "lpball/experiments.hpp"
#include "lpball/report.hpp"

using namespace lpball;

namespace {

ExperimentReport sample_report() {
  ExperimentReport r;
  r.experiment = "demo";
  r.config["seed"] = 3;
  ReportRow a;
  a.name = "ks";
  a.estimate = 0.0123;
  a.reference = 0.0;
  a.reference_provenance = "N(0, 1)";
  a.tolerance = 0.01;
  a.pass = false;
  r.add(a);
  ReportRow b;
  b.name = "tail, with comma";
  b.reference = std::numeric_limits<double>::infinity();
  b.reference_provenance = "rate \"quoted\"";
  b.note = "beyond Monte Carlo reach";
  r.add(b);
  ReportRow c;
  c.name = "info";
  c.estimate = -1.0 / 3.0;
  c.stderr_estimate = 1e-300;
  r.add(c);
  return r;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lpball_test_" + name);
}

}  // namespace

TEST(Report, PassedReflectsCriteria) {
  auto r = sample_report();
  EXPECT_FALSE(r.passed());
  r.rows[0].pass = true;
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.find("info")->name, "info");
  EXPECT_EQ(r.find("missing"), nullptr);
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  ExperimentReport r;
  r.experiment = "empty";
  std::ostringstream os;
  write_report(r, ReportFormat::csv, os);
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
}

TEST(Report, CsvRows) {
  std::ostringstream os;
  write_csv(sample_report(), os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, kCsvHeader);
  std::getline(is, line);
  EXPECT_EQ(line, "demo,ks,0.0123,,0,\"N(0, 1)\",0.01,false");
}

TEST(Report, CsvQuoting) {
  EXPECT_EQ(detail::csv_field("plain"), "plain");
  EXPECT_EQ(detail::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(detail::csv_field("say \"x\""), "\"say \"\"x\"\"\"");
  std::ostringstream os;
  write_csv(sample_report(), os);
  EXPECT_NE(os.str().find("demo,\"tail, with comma\",,,inf,\"rate \"\"quoted\"\"\",,"), std::string::npos) << os.str();
}

TEST(Report, NumbersRoundTripExactly) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.123456789}) {
    EXPECT_EQ(std::stod(detail::format_number(x)), x);
  }
  EXPECT_EQ(detail::format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(detail::format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(detail::format_number(std::nan("")), "nan");
}

TEST(Report, JsonRoundTrip) {
  auto r = sample_report();
  r.rows[2].estimate = std::numeric_limits<double>::quiet_NaN();
  r.wall_time = 1.5;
  const auto j = to_json(r, true);
  EXPECT_EQ(j.at("passed"), false);
  EXPECT_EQ(j.at("rows")[1].at("reference"), "inf");
  EXPECT_TRUE(j.at("rows")[1].at("estimate").is_null());
  auto back = report_from_json(nlohmann::ordered_json::parse(j.dump()));
  EXPECT_TRUE(std::isnan(*back.rows[2].estimate));
  back.rows[2].estimate = r.rows[2].estimate = 0.0;
  EXPECT_EQ(back, r);
}

TEST(Report, TimingOnlyWhenAsked) {
  auto r = sample_report();
  r.wall_time = 2.0;
  EXPECT_FALSE(to_json(r, false).contains("wall_time"));
  std::ostringstream os;
  write_report(r, ReportFormat::json, os);
  EXPECT_EQ(os.str().find("wall_time"), std::string::npos);
}

TEST(Report, EmitToFile) {
  const auto path = temp_path("emit.json");
  emit_report(sample_report(), ReportFormat::json, path.string());
  std::ifstream in(path);
  const auto j = nlohmann::ordered_json::parse(in);
  EXPECT_EQ(report_from_json(j), sample_report());
  std::filesystem::remove(path);
  EXPECT_THROW(emit_report(sample_report(), ReportFormat::csv, "/nonexistent-dir/x.csv"), ConfigError);
}

TEST(Report, RejectsUnknownTokens) {
  EXPECT_THROW(detail::number_from_json(nlohmann::ordered_json("many")), ConfigError);
}

TEST(ConfigParse, Counts) {
  EXPECT_EQ(parse_count("n", "1e6"), 1000000u);
  EXPECT_EQ(parse_count("n", " 42 "), 42u);
  EXPECT_THROW(parse_count("n", "1.5"), ConfigError);
  EXPECT_THROW(parse_count("n", "-3"), ConfigError);
  EXPECT_THROW(parse_count("n", "ten"), ConfigError);
  EXPECT_EQ(parse_count_list("n_grid", "1e3, 31623,1e6"), (std::vector<std::uint64_t>{1000, 31623, 1000000}));
  EXPECT_EQ(parse_real_list("grid", "0.8,1, 1.2"), (std::vector<double>{0.8, 1.0, 1.2}));
}

TEST(ConfigParse, SettingsAndErrors) {
  auto c = default_config(ExperimentKind::clt);
  apply_setting(c, "p", "3");
  apply_setting(c, "q", "1,2");
  apply_setting(c, "measure", "cone");
  apply_setting(c, "workers", "2");
  EXPECT_EQ(c.p, Exponent::finite(3));
  EXPECT_EQ(c.qs.size(), 2u);
  EXPECT_EQ(c.measure, Measure::cone_boundary);
  EXPECT_EQ(c.workers, 2u);
  try {
    apply_setting(c, "colour", "blue");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "colour");
  }
  EXPECT_THROW(apply_setting(c, "measure", "gaussian"), ConfigError);
  EXPECT_THROW(apply_setting(c, "workers", "0"), ConfigError);
  EXPECT_THROW(apply_setting(c, "p", "0.5"), ConfigError);
}

TEST(ConfigFile, SectionsOverrideCommon) {
  const auto path = temp_path("cfg.ini");
  {
    std::ofstream out(path);
    out << "[common]\nseed = 9\nsamples = 1e4\n[clt]\nseed = 11\nq = 1, 3\n[gumbel]\np = 2\n";
  }
  auto c = default_config(ExperimentKind::clt);
  load_config_file(c, path.string());
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.samples, 10000u);
  EXPECT_EQ(c.qs.back(), Exponent::finite(3));
  EXPECT_TRUE(c.p.is_infinite());
  auto g = default_config(ExperimentKind::gumbel);
  load_config_file(g, path.string());
  EXPECT_EQ(g.seed, 9u);
  EXPECT_EQ(g.p, Exponent::finite(2));
  std::filesystem::remove(path);
  EXPECT_THROW(load_config_file(c, "/nonexistent.ini"), ConfigError);
}

TEST(ConfigFile, SeedFromEnvironment) {
  auto c = default_config(ExperimentKind::clt);
  ::setenv(kSeedEnv, "1234", 1);
  apply_seed_env(c);
  EXPECT_EQ(c.seed, 1234u);
  ::setenv(kSeedEnv, "x", 1);
  EXPECT_THROW(apply_seed_env(c), ConfigError);
  ::unsetenv(kSeedEnv);
  apply_seed_env(c);
  EXPECT_EQ(c.seed, 1234u);
}

TEST(ConfigFile, DeskSettingsValidate) {
  for (auto k : {ExperimentKind::clt, ExperimentKind::noncentral, ExperimentKind::gumbel, ExperimentKind::intersect,
                 ExperimentKind::window, ExperimentKind::multi_intersect, ExperimentKind::neighbors,
                 ExperimentKind::project, ExperimentKind::ldp, ExperimentKind::disjoint}) {
    auto c = default_config(k);
    load_config_file(c, std::string(LPBALL_CONFIG_DIR) + "/desk.ini");
    EXPECT_NO_THROW(validate(c)) << to_string(k);
    EXPECT_EQ(c.seed, 1u);
  }
}
