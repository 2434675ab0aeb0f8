#include <gtest/gtest.h>

#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "scorescope/random.hpp"

using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = scorescope::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string tabular_csv(const scorescope::TabularDataset& ds, const std::string& target) {
  std::ostringstream s;
  s.precision(17);
  for (const auto& n : ds.feature_names) s << n << ',';
  s << target << '\n';
  for (std::size_t r = 0; r < ds.features.rows(); ++r) {
    for (std::size_t c = 0; c < ds.features.cols(); ++c) s << ds.features(r, c) << ',';
    s << ds.target[r] << '\n';
  }
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  fixtures::TempDir dir{"cli"};

  std::string log(const std::string& name, const std::vector<double>& scores) {
    return dir.write(name, fixtures::score_log_text(fixtures::to_records(scores, "m")))
        .string();
  }
};

}  // namespace

TEST_F(Cli, HealthyChartExitsZero) {
  const auto o = run({"rdc", "--input", log("b.jsonl", fixtures::bimodal_scores(1))});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report();
  EXPECT_EQ(r["command"], "rdc");
  EXPECT_EQ(r["results"]["records"], 10000);
  const auto& d = r["results"]["charts"][0]["diagnosis"];
  EXPECT_EQ(d["pattern"], "HEALTHY_BIMODAL");
  const double rec = d["threshold_band"]["recommended"];
  EXPECT_GE(rec, 0.45);
  EXPECT_LE(rec, 0.55);
  EXPECT_EQ(r["inputs"][0]["sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(r["decisions"]["rdc"]["roughness_max"], 0.35);
}

TEST_F(Cli, EnvelopeKeyOrderIsFixed) {
  const auto o = run({"power", "--p-control", "0.1", "--mde", "0.02"});
  std::size_t last = 0;
  for (const char* key : {"\"tool_version\"", "\"command\"", "\"inputs\"", "\"results\"",
                          "\"decisions\""}) {
    const auto at = o.out.find(key);
    ASSERT_NE(at, std::string::npos) << key;
    EXPECT_GE(at, last) << key;
    last = at;
  }
  EXPECT_FALSE(o.report()["tool_version"].get<std::string>().empty());
}

TEST_F(Cli, StrictFailsOnPathology) {
  const auto path = log("c.jsonl", fixtures::central_scores(2));
  EXPECT_EQ(run({"rdc", "--input", path}).code, 0);
  const auto o = run({"rdc", "--input", path, "--strict"});
  EXPECT_EQ(o.code, 3);
  EXPECT_EQ(o.report()["results"]["charts"][0]["diagnosis"]["pattern"], "CENTRAL_UNIMODAL");
}

TEST_F(Cli, MissingInputIsAnInputError) {
  const auto o = run({"rdc", "--input", dir.file("nope.jsonl").string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("nope.jsonl"), std::string::npos);
  EXPECT_TRUE(o.out.empty());
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"rdc"}).code, 2);
  EXPECT_EQ(run({"power", "--p-control", "0.1", "--mde", "0.02", "--bogus"}).code, 2);
  EXPECT_EQ(run({"power", "--p-control", "0.1", "--mde", "0.02", "--alpha", "2"}).code, 2);
  EXPECT_EQ(run({"curve", "--baseline", "0.8", "--grid", "0.8:1"}).code, 2);
}

TEST_F(Cli, TooFewScoresIsAPrecondition) {
  const auto o = run({"rdc", "--input", log("few.jsonl", {0.1, 0.9})});
  EXPECT_EQ(o.code, 2);
}

TEST_F(Cli, HelpListsFlagsWithDefaults) {
  const auto o = run({"rdc", "--help"});
  EXPECT_EQ(o.code, 0);
  const std::string text = o.out + o.err;
  for (const char* needle : {"--input", "--bins", "--roughness-max", "0.35", "--strict",
                             "--config", "--seed", "--output"}) {
    EXPECT_NE(text.find(needle), std::string::npos) << needle;
  }
}

TEST_F(Cli, PowerTrafficDoublesWhenDisagreementHalves) {
  const auto full = run({"power", "--p-control", "0.1", "--mde", "0.02"}).report();
  const auto half =
      run({"power", "--p-control", "0.1", "--mde", "0.02", "--disagreement", "0.5"}).report();
  EXPECT_EQ(full["results"]["power"]["n_per_arm"], 3841);
  EXPECT_EQ(full["results"]["power"]["total_traffic_required"], 7682);
  EXPECT_EQ(half["results"]["power"]["total_traffic_required"], 15364);
  EXPECT_NEAR(full["results"]["approximate_power_at_n"].get<double>(), 0.8, 0.001);
}

TEST_F(Cli, DisagreeWithIdenticalModels) {
  std::string csv = "entity_id,pred_a,pred_b,label\n";
  for (int i = 0; i < 50; ++i) {
    const double s = i % 2 ? 0.9 : 0.1;
    csv += "e" + std::to_string(i) + "," + std::to_string(s) + "," + std::to_string(s) + "," +
           std::to_string(i % 2) + "\n";
  }
  const auto path = dir.write("same.csv", csv).string();
  const auto o = run({"disagree", "--input", path, "--p-control", "0.1", "--mde", "0.02"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report();
  EXPECT_EQ(r["results"]["disagreement"]["rate"], 0.0);
  EXPECT_EQ(r["results"]["note"].get<std::string>().rfind("no testable difference", 0), 0u);
  EXPECT_FALSE(r["results"].contains("power"));
  EXPECT_EQ(r["results"]["max_disagreement_bound"], 0.0);
  EXPECT_EQ(run({"disagree", "--input", path, "--strict"}).code, 3);
  EXPECT_EQ(run({"disagree", "--input", path, "--mde", "0.02"}).code, 2);
}

TEST_F(Cli, DisagreeCountsFlips) {
  std::string csv = "entity_id,pred_a,pred_b\n";
  for (int i = 0; i < 10; ++i) {
    csv += "e" + std::to_string(i) + ",0.7," + (i < 3 ? "0.2" : "0.8") + "\n";
  }
  const auto r =
      run({"disagree", "--input", dir.write("d.csv", csv).string()}).report()["results"];
  EXPECT_EQ(r["disagreement"]["n_disagree"], 3);
  EXPECT_DOUBLE_EQ(r["disagreement"]["rate"].get<double>(), 0.3);
  EXPECT_FALSE(r.contains("max_disagreement_bound"));
}

TEST_F(Cli, CurveSeries) {
  const auto o = run({"curve", "--baseline", "0.8", "--grid", "0.8:1.0:0.1"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto series = o.report()["results"]["series"];
  ASSERT_EQ(series.size(), 3u);
  const double expected[] = {0.4, 0.3, 0.2};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(series[i]["upper_bound"].get<double>(), expected[i], 1e-12);
  }
  const auto dflt = run({"curve", "--baseline", "0.5"}).report()["results"]["series"];
  EXPECT_EQ(dflt.size(), 51u);
  EXPECT_EQ(dflt.back()["upper_bound"], 0.5);
}

TEST_F(Cli, SvgChartsAreWritten) {
  const auto svg = dir.file("chart.svg").string();
  ASSERT_EQ(run({"rdc", "--input", log("b.jsonl", fixtures::bimodal_scores(1)), "--svg", svg})
                .code,
            0);
  const auto text = fixtures::read_file(svg);
  EXPECT_NE(text.find("<svg"), std::string::npos);
  EXPECT_NE(text.find("class=\"band\""), std::string::npos);
  EXPECT_NE(text.find("</svg>"), std::string::npos);

  const auto curve = dir.file("curve.svg").string();
  ASSERT_EQ(run({"curve", "--baseline", "0.7", "--svg", curve}).code, 0);
  EXPECT_NE(fixtures::read_file(curve).find("<polyline"), std::string::npos);
}

TEST_F(Cli, ConfigFilePrecedence) {
  const auto input = log("b.jsonl", fixtures::bimodal_scores(1));
  const auto cfg = dir.write("c.json", R"({"rdc": {"bins": 50, "roughness_max": 0.5}})").string();
  const auto from_file = run({"rdc", "--input", input, "--config", cfg}).report();
  EXPECT_EQ(from_file["decisions"]["rdc"]["bins"], 50);
  EXPECT_EQ(from_file["decisions"]["rdc"]["roughness_max"], 0.5);
  const auto flag_wins = run({"rdc", "--input", input, "--config", cfg, "--bins", "20"}).report();
  EXPECT_EQ(flag_wins["decisions"]["rdc"]["bins"], 20);
  EXPECT_EQ(flag_wins["decisions"]["rdc"]["roughness_max"], 0.5);
  EXPECT_EQ(flag_wins["results"]["charts"][0]["rdc"]["counts"].size(), 20u);
}

TEST_F(Cli, ConfigFileErrors) {
  const auto input = log("b.jsonl", fixtures::bimodal_scores(1));
  const auto unknown = dir.write("u.json", R"({"rdc": {"binz": 50}})").string();
  const auto o = run({"rdc", "--input", input, "--config", unknown});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("rdc.binz"), std::string::npos);
  const auto typed = dir.write("t.json", R"({"rdc": {"bins": "many"}})").string();
  EXPECT_EQ(run({"rdc", "--input", input, "--config", typed}).code, 1);
  const auto broken = dir.write("x.json", "{").string();
  EXPECT_EQ(run({"rdc", "--input", input, "--config", broken}).code, 1);
}

TEST_F(Cli, OverridesForceScores) {
  const auto input = log("b.jsonl", fixtures::bimodal_scores(1, 500));
  const auto rules = dir.write("o.json", R"([{"model_id": "m", "forced_score": 0.0}])").string();
  const auto o = run({"rdc", "--input", input, "--overrides", rules});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report()["results"];
  EXPECT_EQ(r["overridden"], 500);
  EXPECT_EQ(r["charts"][0]["rdc"]["counts"][0], 500);
  EXPECT_EQ(r["charts"][0]["diagnosis"]["pattern"], "EXTREME_SPIKE");
}

TEST_F(Cli, BiasProbeFlagsMedianSplit) {
  const auto ds = fixtures::median_split_availability(7, 400);
  const auto path = dir.write("b.csv", tabular_csv(ds, "has_label")).string();
  const auto o = run({"bias", "--input", path, "--permutations", "50", "--strict"});
  EXPECT_EQ(o.code, 3) << o.err;
  EXPECT_EQ(o.report()["results"]["bias"]["severity"], "SEVERE");
}

TEST_F(Cli, SetupScoresConstruction) {
  auto ds = fixtures::separable(3, 200);
  std::string csv = tabular_csv(ds, "target");
  // Blank out the target on the last 40 rows to mark them unlabelled.
  std::istringstream in(csv);
  std::string line, rewritten;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (row > 160) line = line.substr(0, line.rfind(',') + 1);
    rewritten += line + "\n";
    ++row;
  }
  const auto path = dir.write("s.csv", rewritten).string();
  const auto o = run({"setup", "--input", path, "--permutations", "20"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report()["results"];
  EXPECT_EQ(r["rows"], 200);
  EXPECT_EQ(r["n_unlabeled"], 40);
  EXPECT_EQ(r["balance"]["n"], 160);
  EXPECT_GT(r["learnability"]["logistic_auc"].get<double>(), 0.95);
  EXPECT_EQ(r["bias"]["n_unlabeled"], 40);
}

TEST_F(Cli, BlockedSimulateThenAnalyze) {
  const auto csv = dir.file("outcomes.csv").string();
  const auto sim = run({"blocked", "simulate", "--users", "30000", "--latency-penalty", "0.01",
                        "--feature-effect", "0.03", "--outcomes", csv, "--seed", "5"});
  ASSERT_EQ(sim.code, 0) << sim.err;
  const auto simr = sim.report();
  EXPECT_EQ(simr["command"], "blocked simulate");
  const auto ana = run({"blocked", "analyze", "--input", csv});
  ASSERT_EQ(ana.code, 0) << ana.err;
  EXPECT_EQ(ana.report()["results"]["analysis"], simr["results"]["analysis"]);
  const auto& a = simr["results"]["analysis"];
  EXPECT_NEAR(a["perf_effect"]["estimate"].get<double>() +
                  a["feature_effect"]["estimate"].get<double>(),
              a["total_effect"]["estimate"].get<double>(), 1e-15);
  EXPECT_EQ(run({"blocked", "simulate", "--allocation", "0.5,0.5"}).code, 2);
}

TEST_F(Cli, WatchWritesAlertLines) {
  auto scores = fixtures::bimodal_scores(3, 2000);
  scores.insert(scores.end(), 1000, 0.5);
  const auto input = log("w.jsonl", scores);
  const auto alerts = dir.file("alerts.jsonl").string();
  const auto o = run({"watch", "--input", input, "--alerts", alerts, "--tv-threshold", "0.5"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = o.report()["results"];
  ASSERT_EQ(r["windows"].size(), 3u);
  EXPECT_EQ(r["alert_count"], 3);
  std::istringstream lines(fixtures::read_file(alerts));
  std::string line;
  std::vector<std::string> kinds;
  while (std::getline(lines, line)) {
    const auto a = json::parse(line);
    EXPECT_EQ(a["window_index"], 2);
    kinds.push_back(a["kind"]);
  }
  EXPECT_EQ(kinds, (std::vector<std::string>{"PATTERN_CHANGE", "DRIFT", "PATHOLOGY"}));
  EXPECT_EQ(run({"watch", "--input", input, "--tv-threshold", "0.5", "--strict"}).code, 3);
}

TEST_F(Cli, WatchAgainstReferenceLog) {
  const auto input = log("w.jsonl", fixtures::bimodal_scores(3, 3000));
  const auto ref = log("ref.jsonl", fixtures::central_scores(4));
  const auto r = run({"watch", "--input", input, "--reference", ref}).report()["results"];
  ASSERT_EQ(r["windows"].size(), 3u);
  std::size_t changes = 0;
  for (const auto& a : r["alerts"]) changes += a["kind"] == "PATTERN_CHANGE";
  EXPECT_EQ(changes, 3u);
}

TEST_F(Cli, ReportsAreByteIdentical) {
  const auto input = log("b.jsonl", fixtures::bimodal_scores(1));
  const auto ds = fixtures::median_split_availability(7, 200);
  const auto tab = dir.write("t.csv", tabular_csv(ds, "has_label")).string();
  const auto paired = dir.write("p.csv", "entity_id,pred_a,pred_b\na,0.1,0.9\nb,0.6,0.7\n").string();
  const std::vector<std::vector<std::string>> commands{
      {"rdc", "--input", input},
      {"bias", "--input", tab, "--permutations", "20", "--seed", "9"},
      {"setup", "--input", tab, "--target", "has_label", "--permutations", "10"},
      {"disagree", "--input", paired},
      {"power", "--p-control", "0.1", "--mde", "0.02"},
      {"curve", "--baseline", "0.8"},
      {"blocked", "simulate", "--users", "5000", "--seed", "3"},
      {"watch", "--input", input},
  };
  for (const auto& args : commands) {
    const auto first = run(args);
    const auto second = run(args);
    EXPECT_EQ(first.code, second.code) << args[0];
    EXPECT_FALSE(first.out.empty()) << args[0] << ": " << first.err;
    EXPECT_EQ(first.out, second.out) << args[0];
  }
}

TEST_F(Cli, OutputFlagWritesFile) {
  const auto path = dir.file("r.json").string();
  const auto o = run({"power", "--p-control", "0.1", "--mde", "0.02", "-o", path});
  EXPECT_EQ(o.code, 0);
  EXPECT_TRUE(o.out.empty());
  EXPECT_EQ(json::parse(fixtures::read_file(path))["results"]["power"]["n_per_arm"], 3841);
}

TEST_F(Cli, FollowReturnsAfterIdleTimeout) {
  const auto input = log("f.jsonl", fixtures::bimodal_scores(3, 2500));
  const auto followed = run({"watch", "--input", input, "--follow", "--poll-interval", "20",
                             "--idle-timeout", "1"});
  ASSERT_EQ(followed.code, 0) << followed.err;
  const auto plain = run({"watch", "--input", input});
  EXPECT_EQ(followed.report()["results"], plain.report()["results"]);
}
