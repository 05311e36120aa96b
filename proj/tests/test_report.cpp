#include <gtest/gtest.h>

#include "finmet/report.hpp"

using namespace finmet;
using nlohmann::json;

namespace {

json minimal() { return {{"dim", 2}, {"spray", {"y2^2 - y1^2", "-2*y1*y2"}}}; }

}  // namespace

TEST(Spec, DefaultsAreFilledIn) {
  const auto spec = parse_spec(minimal());
  EXPECT_EQ(spec.dim, 2);
  EXPECT_EQ(spec.sampling.count, 20);
  EXPECT_EQ(spec.sampling.seed, 42u);
  EXPECT_DOUBLE_EQ(spec.tolerances.rank_rel, 1e-8);
  EXPECT_FALSE(spec.energy.has_value());
}

TEST(Spec, RoundTrip) {
  json doc = minimal();
  doc["params"] = {{"a", 0.25}};
  doc["spray"][0] = "a*y1^2";
  doc["energy"] = "y1^2 + y2^2";
  doc["samples"] = {{"count", 7}, {"seed", 99}, {"box", {{"x", {-2, 3}}, {"y", {0.1, 4}}}}};
  doc["tolerances"] = {{"jet_ridge", 1e-5}};
  const auto spec = parse_spec(doc);
  const auto again = parse_spec(spec_to_json(spec));
  EXPECT_EQ(spec, again);
  EXPECT_EQ(spec_to_json(spec), spec_to_json(again));
  EXPECT_EQ(config_hash(spec), config_hash(again));
}

TEST(Spec, HashTracksContent) {
  auto a = parse_spec(minimal());
  auto b = a;
  b.sampling.seed = 43;
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Spec, Rejections) {
  auto bad = [](json doc) { EXPECT_THROW(parse_spec(doc), SpecError) << doc.dump(); };
  bad(json::array());
  bad({{"spray", {"0", "0"}}});
  bad({{"dim", 1}, {"spray", {"0"}}});
  bad({{"dim", 2}, {"spray", {"0"}}});
  bad({{"dim", 2}, {"spray", {"y3^2", "0"}}});
  bad({{"dim", 2}, {"spray", {"k*y1^2", "0"}}});
  bad({{"dim", 2}, {"spray", {"0", "0"}}, {"colour", "red"}});
  bad({{"dim", 2}, {"spray", {"0", "0"}}, {"samples", {{"count", 0}}}});
  bad(json::parse(R"({"dim": 2, "spray": ["0", "0"], "samples": {"box": {"x": [1, -1]}}})"));
  bad({{"dim", 2}, {"spray", {"0", "0"}}, {"tolerances", {{"residual", -1}}}});
  bad({{"dim", 2}, {"spray", {"0", "0"}}, {"energy", "y1^2 +"}});
}

TEST(Spec, ParseErrorNamesTheEntry) {
  try {
    parse_spec({{"dim", 2}, {"spray", {"0", "y1*y3"}}});
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("spray[1]"), std::string::npos) << e.what();
  }
}

TEST(Point, Parsing) {
  const auto p = parse_point("0.1, -2;1,0.5e1", 2);
  EXPECT_EQ(p.x, (std::vector<double>{0.1, -2.0}));
  EXPECT_EQ(p.y, (std::vector<double>{1.0, 5.0}));
  EXPECT_THROW(parse_point("0.1,0.2", 2), SpecError);
  EXPECT_THROW(parse_point("0.1;1,2", 2), SpecError);
  EXPECT_THROW(parse_point("0.1,z;1,2", 2), SpecError);
}

TEST(Report, AnalyzeIsStable) {
  const auto spec = parse_spec(minimal());
  const auto a = dump(analyze_report(spec));
  EXPECT_EQ(a, dump(analyze_report(spec)));
  const auto doc = json::parse(a);
  EXPECT_EQ(doc["schema_version"], kSchemaVersion);
  EXPECT_EQ(doc["config_hash"], config_hash(spec));
  EXPECT_EQ(parse_spec(doc["spec"]), spec);
  EXPECT_EQ(doc["verdicts"]["finsler"]["outcome"], "necessary-conditions-pass");
  EXPECT_EQ(doc["samples"]["points"].size(), 20u);
}

TEST(Report, EnergyNeedsEnergy) {
  EXPECT_THROW(energy_report(parse_spec(minimal())), SpecError);
  auto doc = minimal();
  doc["energy"] = "0.5*exp(2*x1)*(y1^2 + y2^2)";
  const auto r = energy_report(parse_spec(doc));
  EXPECT_TRUE(r["residuals"]["P_e"]["within_tolerance"].get<bool>());
  EXPECT_TRUE(r["residuals"]["fundamental_tensor"]["positive_definite_everywhere"].get<bool>());
}

TEST(Report, ObstructedSpecListsFiredTests) {
  const auto spec = parse_spec({{"dim", 2}, {"spray", {"y1*sqrt(y1^2 + y2^2)", "x1*y1*sqrt(y1^2 + y2^2)"}}});
  const auto r = analyze_report(spec);
  EXPECT_EQ(r["verdicts"]["landsberg"]["outcome"], "obstructed");
  EXPECT_FALSE(r["verdicts"]["landsberg"]["fired_tests"].empty());
}
