#include "md53c/run.hpp"

#include <gtest/gtest.h>

using namespace md53c;

TEST(Parse, Point) {
  const Cov5 p = parse_point("1,-2.5,0,3e-1, 4");
  EXPECT_EQ(p.alpha, 1.0);
  EXPECT_EQ(p.beta, -2.5);
  EXPECT_EQ(p.delta, 0.3);
  EXPECT_EQ(p.sigma, 4.0);
  EXPECT_THROW(parse_point("1,2,3"), std::invalid_argument);
  EXPECT_THROW(parse_point("1,2,3,4,x"), std::invalid_argument);
}

TEST(Parse, Word) {
  const FlowWord w = parse_word("2:0.5,1:-1");
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].direction, 2);
  EXPECT_EQ(w[0].time, 0.5);
  EXPECT_EQ(w[1].direction, 1);
  EXPECT_EQ(w[1].time, -1.0);
  EXPECT_THROW(parse_word("6:1"), std::invalid_argument);
  EXPECT_THROW(parse_word("2"), std::invalid_argument);
  EXPECT_THROW(parse_word("1.5:1"), std::invalid_argument);
}

TEST(Config, Validation) {
  RunConfig c;
  c.samples = 0;
  EXPECT_THROW(run(Command::Catalog, c), std::invalid_argument);
  c = {};
  c.tol_leaf = 0;
  EXPECT_THROW(run(Command::Catalog, c), std::invalid_argument);
  c = {};
  c.scenario = "other";
  EXPECT_THROW(run(Command::KTheory, c), std::invalid_argument);
  EXPECT_THROW(command_from_string("plot"), std::invalid_argument);
  EXPECT_EQ(command_from_string("verify-claims"), Command::VerifyClaims);
}

TEST(CountFailures, Nested) {
  const nlohmann::json j = {{"failures", {1, 2}},
                            {"reports", {{{"failures", nlohmann::json::array()}}, {{"failures", {3}}}}},
                            {"x", {{"y", {{"failures", {4}}}}}}};
  EXPECT_EQ(count_failures(j), 4u);
  EXPECT_EQ(count_failures(nlohmann::json::object()), 0u);
}

TEST(Run, Catalog) {
  const auto r = run(Command::Catalog, {});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["schema"], 1);
  EXPECT_EQ(r.report["families"].size(), 8u);
  EXPECT_EQ(r.report["count"], list_catalog().size());
}

TEST(Run, VerifyMdSeed1729) {
  RunConfig c;
  c.samples = 500;
  const auto r = run(Command::VerifyMd, c);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(count_failures(r.report), 0u);
  EXPECT_EQ(r.report["reports"].size(), list_catalog().size());
}

TEST(Run, KTheoryPaper) {
  RunConfig c;
  c.scenario = "paper";
  const auto r = run(Command::KTheory, c);
  EXPECT_EQ(r.exit_code, 0);
  const auto& s = r.report["scenarios"][0];
  EXPECT_EQ(s["middle"]["K0"]["free"], 0);
  EXPECT_EQ(s["middle"]["K1"]["free"], 2);
  EXPECT_EQ(s["delta0"]["entries"], nlohmann::json({{1}, {1}}));
  EXPECT_FALSE(r.report.contains("ambiguity"));

  c.scenario = "both";
  const auto both = run(Command::KTheory, c);
  EXPECT_TRUE(both.report["ambiguity"]["flagged"].get<bool>());
  EXPECT_EQ(both.report["scenarios"][1]["middle"]["K1"]["free"], 1);
  c.format = Format::Text;
  const auto text = run(Command::KTheory, c).text;
  EXPECT_NE(text.find("delta0"), std::string::npos);
  EXPECT_NE(text.find("ambiguity"), std::string::npos);
}

TEST(Run, Orbit) {
  RunConfig c;
  c.family = "F8";
  c.lambda = 1.0;
  c.phi = std::numbers::pi / 2;
  c.point = "1,2,0.5,0.3,-1";
  c.a = 0.7;
  c.word = "2:0.5,1:1,3:-2";
  const auto r = run(Command::Orbit, c);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["kirillov_dim"], 2);
  EXPECT_TRUE(r.report["flow"]["same_leaf"].get<bool>());
  EXPECT_EQ(r.report["chart"]["y"], 2.0);
  EXPECT_EQ(r.report["leaf_invariant"]["type"], "F2-U");

  c.point = "1,2,0,0,0";
  const auto zero = run(Command::Orbit, c);
  EXPECT_EQ(zero.report["kirillov_dim"], 0);
  EXPECT_FALSE(zero.report.contains("leaf_invariant"));

  c.family = "F1";
  EXPECT_THROW(run(Command::Orbit, c), std::invalid_argument);
  c = {};
  c.family = "F4";
  EXPECT_THROW(run(Command::Orbit, c), std::invalid_argument);
}

TEST(Run, ClassifyTwoTypes) {
  RunConfig c;
  c.samples = 40;
  const auto r = run(Command::Classify, c);
  EXPECT_EQ(r.exit_code, 0) << count_failures(r.report);
  ASSERT_EQ(r.report["types"].size(), 2u);
  for (const auto& t : r.report["types"]) {
    for (const auto& f : t["families"]) {
      const bool eighth = f.get<std::string>().rfind("F8", 0) == 0;
      EXPECT_EQ(t["type"] == "F2", eighth) << f;
    }
  }
}

TEST(Run, ClaimsSmall) {
  RunConfig c;
  c.samples = 30;
  const auto r = run(Command::VerifyClaims, c);
  EXPECT_EQ(r.exit_code, 0) << count_failures(r.report);
  int discrepancies = 0;
  for (const auto& claim : r.report["claims"]) {
    const std::string status = claim["status"];
    EXPECT_TRUE(status == "verified" || status == "discrepancy" || status == "out_of_scope");
    EXPECT_EQ(claim["paper_location"].get<std::string>().find("Section"), std::string::npos);
    if (status == "discrepancy") ++discrepancies;
  }
  EXPECT_EQ(r.report["discrepancy_count"], discrepancies);
}

TEST(Run, Deterministic) {
  RunConfig c;
  c.samples = 25;
  for (auto cmd : {Command::Catalog, Command::VerifyMd, Command::Classify, Command::KTheory}) {
    EXPECT_EQ(run(cmd, c).text, run(cmd, c).text);
    c.format = Format::Text;
    EXPECT_EQ(run(cmd, c).text, run(cmd, c).text);
    c.format = Format::Json;
  }
  RunConfig other = c;
  other.seed = 7;
  EXPECT_NE(run(Command::VerifyMd, c).text, run(Command::VerifyMd, other).text);
}
