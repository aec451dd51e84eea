#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "uplift_zero/io.hpp"
#include "uplift_zero/scarf.hpp"

using namespace uplift_zero;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scarf_file(double d) {
  const auto path = std::filesystem::temp_directory_path() / ("uz_cli_scarf" + std::to_string(int(d)) + ".json");
  std::ofstream(path) << scarf_instance_json(d).dump(2);
  return path.string();
}

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, DispatchPrintsCostAndWritesSchedule) {
  const auto out_path = (std::filesystem::temp_directory_path() / "uz_cli_schedule.json").string();
  auto r = run({"dispatch", scarf_file(10), "--out", out_path});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "f* = 65.0000")) << r.out;
  const auto j = read_json_file(out_path);
  EXPECT_EQ(j.at("High Tech-1").at("g")[0].get<double>(), 7.0);
  EXPECT_EQ(j.at("Med Tech-1").at("g")[0].get<double>(), 3.0);

  r = run({"dispatch", scarf_file(40)});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "f* = 254.0000"));
}

TEST(Cli, ExitCodes) {
  auto r = run({"dispatch", "/nonexistent/file.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(has(r.err, "/nonexistent/file.json"));

  MarketInstance short_fleet{1, {100.0}, {{"a", 0, 10, 1, 0, 0, 0, 0}}, {}};
  const auto path = (std::filesystem::temp_directory_path() / "uz_cli_short.json").string();
  write_json_file(path, instance_to_json(short_fleet));
  r = run({"dispatch", path});
  EXPECT_EQ(r.code, 2);

  MarketInstance gap{1, {3.0}, {{"a", 5, 10, 1, 0, 0, 0, 0}}, {}};
  write_json_file(path, instance_to_json(gap));
  r = run({"dispatch", path});
  EXPECT_EQ(r.code, 1);

  EXPECT_EQ(run({"dispatch"}).code, 2);
  EXPECT_EQ(run({"price", "--scarf", "10", "--method", "bogus"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, PriceMethods) {
  auto r = run({"price", scarf_file(10), "--method", "chp"});
  EXPECT_TRUE(has(r.out, "6.2857")) << r.out;
  EXPECT_TRUE(has(r.out, "dual value: 62.8571"));
  r = run({"price", scarf_file(40), "--method", "chp"});
  EXPECT_TRUE(has(r.out, "6.3125"));
  r = run({"price", scarf_file(10), "--method", "marginal"});
  EXPECT_TRUE(has(r.out, "7.0000"));
  r = run({"price", "--scarf", "40", "--json"});
  EXPECT_EQ(Json::parse(r.out).at("price")[0].get<double>(), 3.0 + 53.0 / 16.0);
}

TEST(Cli, UpliftCsv) {
  const auto r = run({"uplift", "--scarf", "40"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "unit_id,pi_star,pi_plus,uplift\n"));
  EXPECT_TRUE(has(r.out, "High Tech-4,0,0.1875,0.1875\n"));
  EXPECT_TRUE(has(r.out, "Med Tech-1,-2.0625,0,2.0625\n"));
}

TEST(Cli, ReportConvexHullDemand10) {
  const auto r = run({"report", scarf_file(10), "--family", "convex-hull", "--formulation", "xu"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "High Tech     1       7.0000"));
  EXPECT_TRUE(has(r.out, "Med Tech      1       3.0000"));
  EXPECT_TRUE(has(r.out, "market price (chp): 6.2857"));
  EXPECT_TRUE(has(r.out, "total uplift before amendment: 2.1429"));
  EXPECT_TRUE(has(r.out, "N[Med Tech-1] = 2.143*min[g - 2*u, 2*u - 0.3333*g]"));
  EXPECT_TRUE(has(r.out, "total uplift after amendment: 0.0000"));
}

TEST(Cli, ReportLinearUnitDemand40) {
  const auto r = run({"report", scarf_file(40), "--family", "linear-unit"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has(r.out, "N[High Tech-4] = 0.1875*(1 - u)"));
  EXPECT_TRUE(has(r.out, "N[Med Tech-1] = 1.031*(g - 2*u) + 0.3438*(6*u - g)"));
  EXPECT_TRUE(has(r.out, "total uplift after amendment: 0.0000"));
}

TEST(Cli, StatusDeltaUnderChpReportsPrecondition) {
  const auto r = run({"report", scarf_file(10), "--family", "status-delta", "--price-method", "chp"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(has(r.err, "status-delta needs the dispatched output to maximize profit for the dispatched status"));
  EXPECT_EQ(run({"report", "--scarf", "10", "--family", "status-delta", "--price-method", "marginal"}).code, 0);
}

TEST(Cli, ReportIsDeterministic) {
  const std::vector<std::string> args{"report", "--scarf", "40", "--family", "convex-hull"};
  const auto a = run(args), b = run(args);
  EXPECT_EQ(a.out, b.out);
  const auto ja = run({"report", "--scarf", "40", "--json"}), jb = run({"report", "--scarf", "40", "--json"});
  EXPECT_EQ(ja.out, jb.out);
  EXPECT_TRUE(Json::parse(ja.out).at("pass").get<bool>());
}

TEST(Cli, AmendThenVerifyFromFile) {
  const auto path = (std::filesystem::temp_directory_path() / "uz_cli_bundles.json").string();
  auto r = run({"amend", "--scarf", "10", "--family", "uplift-delta", "--out", path});
  EXPECT_EQ(r.code, 0);
  r = run({"verify", "--scarf", "10", "--amendments", path});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(has(r.out, "zero total uplift: pass"));

  auto j = read_json_file(path);
  j["Med Tech-1"]["N"] = Json{{"op", "const"}, {"value", 1.0}};
  write_json_file(path, j);
  r = run({"verify", "--scarf", "10", "--amendments", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(has(r.out, "Med Tech-1: FAIL"));
}

TEST(Cli, BinaryRunsFromShell) {
  const std::string cmd = std::string(UZ_TOOL_PATH) + " dispatch --scarf 10 > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  const std::string bad = std::string(UZ_TOOL_PATH) + " dispatch /nonexistent.json 2> /dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);
}
