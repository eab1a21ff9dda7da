#include "cli_commands.hpp"
#include "cli_config.hpp"
#include "cli_output.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace roughlab::cli {
namespace {

RunConfig unusual_config() {
  RunConfig c;
  c.subcommand = "homogenize";
  c.driver = "ou";
  c.friction = "1,1;0,1";
  c.epsilon = 0.1;
  c.mesh = 2000;
  c.map_gamma = 0.4;
  c.observable = "centered-id,cos";
  c.n = 2048;
  c.replicas = 123456;
  c.p = 2.3;
  c.q = 1.25;
  c.tol = 1.0 / 3.0;
  c.alpha = 0.001;
  c.n_list = {8, 16, 1024};
  c.b = "heisenberg";
  c.drift_rate = -0.7;
  c.xi = 1e-300;
  c.sde_steps = 4096;
  c.seed = (std::uint64_t{1} << 63) - 1;
  c.output = "out dir/res,1.csv";
  c.format = "json";
  return c;
}

TEST(RunConfig, TomlRoundTripIsExact) {
  for (const auto& cfg : {RunConfig{}, unusual_config()}) {
    const std::string text = to_toml(cfg);
    const RunConfig back = from_toml(text);
    EXPECT_EQ(back, cfg) << text;
    EXPECT_EQ(to_toml(back), text);
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
}

TEST(RunConfig, FileValuesOverlayDefaults) {
  const auto cfg = from_toml("[estimate]\nn = 77\nobservable = 'cos'\n", "estimate");
  EXPECT_EQ(cfg.n, 77u);
  EXPECT_EQ(cfg.observable, "cos");
  EXPECT_EQ(cfg.replicas, RunConfig{}.replicas);
  // Other subcommand tables are ignored; a missing table means defaults.
  EXPECT_EQ(from_toml("[moments]\nn = 5\n", "estimate").n, RunConfig{}.n);
}

TEST(RunConfig, RejectsMalformedFiles) {
  EXPECT_THROW(from_toml("[estimate]\nbogus = 1\n"), std::invalid_argument);
  EXPECT_THROW(from_toml("[estimate]\nn = -3\n"), std::invalid_argument);
  EXPECT_THROW(from_toml("[estimate]\nn = 'ten'\n"), std::invalid_argument);
  EXPECT_THROW(from_toml("[nonsense]\n"), std::invalid_argument);
  EXPECT_THROW(from_toml("[estimate]\n[moments]\n"), std::invalid_argument);
  EXPECT_THROW(from_toml("n = [\n"), std::invalid_argument);
}

TEST(RunConfig, ValidationNamesTheField) {
  auto expect_field = [](RunConfig c, const std::string& field) {
    try {
      validate(c);
      ADD_FAILURE() << "accepted invalid " << field;
    } catch (const std::invalid_argument& e) {
      EXPECT_EQ(std::string(e.what()).rfind(field, 0), 0u) << e.what();
    }
  };
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  auto bad = c;
  bad.n = 0;
  expect_field(bad, "n:");
  bad = c;
  bad.p = 3.0;
  expect_field(bad, "p:");
  bad = c;
  bad.driver = "tent";
  expect_field(bad, "driver:");
  bad = c;
  bad.observable = "sin";
  expect_field(bad, "observable:");
  bad = c;
  bad.driver = "lsv";
  bad.map_gamma = 0.5;
  expect_field(bad, "map_gamma:");
  bad = c;
  bad.driver = "ou";
  bad.epsilon = 0.5;
  bad.mesh = 10;
  expect_field(bad, "ou driver:");
  bad = c;
  bad.subcommand = "homogenize";
  bad.replicas = 999;
  expect_field(bad, "replicas:");
  bad = c;
  bad.subcommand = "homogenize";
  bad.replicas = 1000;
  bad.b = "heisenberg";
  expect_field(bad, "b:");
  bad = c;
  bad.subcommand = "moments";
  bad.n_list = {64, 32};
  expect_field(bad, "n_list:");
  bad = c;
  bad.format = "xml";
  expect_field(bad, "format:");
  bad = c;
  bad.seed = ~std::uint64_t{0};
  expect_field(bad, "seed:");
}

TEST(RunConfig, ParsesFrictionMatrices) {
  const Matrix m = parse_matrix("1, 1; 0,1");
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m(1, 0), 0.0);
  EXPECT_THROW(parse_matrix("1,2;3"), std::invalid_argument);
  EXPECT_THROW(parse_matrix("1,x"), std::invalid_argument);
}

TEST(CsvOutput, QuotesPerRfc4180) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333333333");
}

TEST(CsvOutput, RowsHaveFixedColumnCount) {
  RunConfig cfg;
  cfg.observable = "centered-id,cos";
  std::vector<ResultRow> rows{{"e", "k=1;j=2", "sigma[0,1]", 0.5, 0.1, 0.25, true},
                              {"e", "", "x", 1.0, std::nullopt, std::nullopt, std::nullopt}};
  std::ostringstream os;
  write_csv(os, cfg, rows);
  const std::string text = os.str();
  EXPECT_NE(text.find("\"centered-id,cos\""), std::string::npos);
  EXPECT_NE(text.find(",1,,,\r\n"), std::string::npos);
  const auto json = rows_to_json(cfg, rows);
  EXPECT_TRUE(json["rows"][1]["pass"].is_null());
  EXPECT_EQ(json["rows"][0]["reference"], 0.25);
}

TEST(Commands, LiftCheckPassesAndIsDeterministic) {
  RunConfig cfg;
  cfg.subcommand = "lift-check";
  cfg.cases = 200;
  cfg.seed = 9;
  const auto a = run_subcommand(cfg);
  ASSERT_EQ(a.size(), 5u);
  for (const auto& r : a) EXPECT_TRUE(r.pass.value_or(false)) << r.experiment;
  std::ostringstream x, y;
  write_csv(x, cfg, a);
  write_csv(y, cfg, run_subcommand(cfg));
  EXPECT_EQ(x.str(), y.str());
}

TEST(Commands, EstimateReportsOracleColumns) {
  RunConfig cfg;
  cfg.n = 2000;
  cfg.replicas = 400;
  cfg.seed = 7;
  const auto rows = run_subcommand(cfg);
  bool saw_sigma = false, saw_gamma = false;
  for (const auto& r : rows) {
    if (r.experiment == "estimate:batch" && r.quantity == "sigma[0,0]") {
      saw_sigma = true;
      EXPECT_EQ(r.reference, 0.25);
    }
    if (r.experiment == "estimate:batch" && r.quantity == "gamma[0,0]") {
      saw_gamma = true;
      EXPECT_NEAR(*r.reference, 1.0 / 12.0, 1e-15);
    }
  }
  EXPECT_TRUE(saw_sigma && saw_gamma);
}

TEST(Commands, OuEstimateCarriesClosedFormReference) {
  // M = [[1,1],[0,1]]: M^{-1}M^{-T} = [[2,-1],[-1,1]]; M P + P M^T = I gives
  // P = [[3/4,-1/4],[-1/4,1/2]] and antisym(P M^{-T})_{01} = 1/4.
  RunConfig cfg;
  cfg.driver = "ou";
  cfg.friction = "1,1;0,1";
  cfg.replicas = 200;
  cfg.seed = 3;
  int seen = 0;
  for (const auto& r : run_subcommand(cfg)) {
    if (r.quantity == "sigma[0,1]") {
      EXPECT_NEAR(*r.reference, -1.0, 1e-12);
      ++seen;
    }
    if (r.quantity == "gamma[0,1]") {
      EXPECT_NEAR(*r.reference, 0.25, 1e-12);
      ++seen;
    }
  }
  EXPECT_EQ(seen, 2);
}

TEST(Commands, SdeStepsFollowDriverResolution) {
  RunConfig cfg;
  cfg.n = 2048;
  EXPECT_EQ(effective_sde_steps(cfg), 2048u);
  cfg.n = 10000;
  EXPECT_EQ(effective_sde_steps(cfg), 10016u);
  cfg.driver = "ou";
  cfg.mesh = 1000;
  EXPECT_EQ(effective_sde_steps(cfg), 1024u);
  cfg.sde_steps = 64;
  EXPECT_EQ(effective_sde_steps(cfg), 64u);
}

}  // namespace
}  // namespace roughlab::cli
