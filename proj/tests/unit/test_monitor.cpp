#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "scorescope/error.hpp"
#include "scorescope/monitor.hpp"

using namespace scorescope;

namespace {

Rdc counts_rdc(std::vector<std::uint64_t> counts) {
  Rdc r = build_rdc(std::vector<double>{0.0}, counts.size());
  r.counts = std::move(counts);
  r.n = std::accumulate(r.counts.begin(), r.counts.end(), std::uint64_t{0});
  return r;
}

std::vector<ScoreRecord> interleave(const std::vector<ScoreRecord>& a,
                                    const std::vector<ScoreRecord>& b) {
  std::vector<ScoreRecord> out;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    if (i < a.size()) out.push_back(a[i]);
    if (i < b.size()) out.push_back(b[i]);
  }
  return out;
}

}  // namespace

TEST(Windows, TrailingPartialWindowIsFlagged) {
  const auto recs = fixtures::to_records(fixtures::bimodal_scores(1, 2500), "m");
  const auto s = windowed_rdcs(recs, MonitorConfig{});
  ASSERT_EQ(s.windows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.windows[i].window_index, i);
  EXPECT_EQ(s.windows[0].size, 1000u);
  EXPECT_FALSE(s.windows[1].partial);
  EXPECT_EQ(s.windows[2].size, 500u);
  EXPECT_TRUE(s.windows[2].partial);
  EXPECT_TRUE(s.dropped.empty());
}

TEST(Windows, SmallRemainderIsDroppedAndCounted) {
  const auto recs = fixtures::to_records(fixtures::bimodal_scores(1, 2050), "m");
  const auto s = windowed_rdcs(recs, MonitorConfig{});
  EXPECT_EQ(s.windows.size(), 2u);
  EXPECT_EQ(s.dropped.at("m"), 50u);
}

TEST(Windows, ModelsHaveIndependentSequences) {
  const auto a = fixtures::to_records(fixtures::bimodal_scores(1, 20000), "a");
  const auto b = fixtures::to_records(fixtures::central_scores(2, 30000), "b");
  MonitorConfig cfg;
  cfg.window_size = 10000;  // small central windows are too ragged to call reliably
  const auto s = windowed_rdcs(interleave(a, b), cfg);
  std::map<std::string, std::vector<std::size_t>> seen;
  for (const auto& w : s.windows) seen[w.model_id].push_back(w.window_index);
  EXPECT_EQ(seen["a"], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(seen["b"], (std::vector<std::size_t>{0, 1, 2}));
  for (const auto& w : s.windows) {
    EXPECT_EQ(w.diagnosis.pattern,
              w.model_id == "a" ? Pattern::kHealthyBimodal : Pattern::kCentralUnimodal);
  }
}

TEST(Windows, StationaryBimodalStreamStaysHealthy) {
  const auto recs = fixtures::to_records(fixtures::bimodal_scores(3, 20000), "m");
  const auto s = windowed_rdcs(recs, MonitorConfig{});
  ASSERT_EQ(s.windows.size(), 20u);
  for (const auto& w : s.windows) {
    EXPECT_EQ(w.diagnosis.pattern, Pattern::kHealthyBimodal) << "window " << w.window_index;
  }
}

TEST(Windows, PartitionCoversEveryRecord) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScoreRecord> recs;
    std::map<std::string, std::size_t> per_model;
    const std::size_t n = 500 + rng.below(5000);
    for (std::size_t i = 0; i < n; ++i) {
      ScoreRecord r;
      r.model_id = "m" + std::to_string(rng.below(3));
      r.score = rng.uniform();
      ++per_model[r.model_id];
      recs.push_back(r);
    }
    MonitorConfig cfg;
    cfg.window_size = 100 + rng.below(900);
    const auto s = windowed_rdcs(recs, cfg);
    std::map<std::string, std::size_t> covered;
    for (const auto& w : s.windows) {
      covered[w.model_id] += w.size;
      EXPECT_EQ(w.rdc.n, w.size);
      EXPECT_EQ(w.partial, w.size < cfg.window_size);
    }
    for (const auto& [m, d] : s.dropped) covered[m] += d;
    EXPECT_EQ(covered, per_model);
  }
}

TEST(Windows, StreamingMatchesBatchPerWindow) {
  const auto recs = fixtures::to_records(fixtures::bimodal_scores(5, 5500), "m");
  MonitorConfig cfg;
  const auto s = windowed_rdcs(recs, cfg);
  ASSERT_EQ(s.windows.size(), 6u);
  for (const auto& w : s.windows) {
    std::vector<double> scores;
    for (std::size_t i = 0; i < w.size; ++i) {
      scores.push_back(recs[w.window_index * cfg.window_size + i].score);
    }
    const auto batch = build_rdc(scores);
    EXPECT_EQ(w.rdc, batch);
    EXPECT_EQ(w.diagnosis.pattern, diagnose(batch).pattern);
  }
}

TEST(MonitorConfig, Validation) {
  MonitorConfig c;
  c.window_size = 99;
  EXPECT_THROW(c.validate(), PreconditionError);
  MonitorConfig t;
  t.tv_threshold = 1.5;
  EXPECT_THROW(t.validate(), PreconditionError);
  MonitorConfig r;
  r.reference = build_rdc(std::vector<double>{0.5}, 10);
  EXPECT_THROW(r.validate(), PreconditionError);
}

TEST(Drift, IdenticalChartsRaiseNothing) {
  const auto rdc = build_rdc(fixtures::bimodal_scores(1));
  EXPECT_TRUE(check_drift(rdc, rdc, MonitorConfig{}).empty());
}

TEST(Drift, CollapseToCentreRaisesEveryKind) {
  const auto ref = build_rdc(fixtures::bimodal_scores(1));
  const auto cur = build_rdc(std::vector<double>(1000, 0.5));
  const auto alerts = check_drift(cur, ref, MonitorConfig{});
  ASSERT_EQ(alerts.size(), 3u);
  EXPECT_EQ(alerts[0].kind, AlertKind::kPatternChange);
  EXPECT_EQ(alerts[0].prior, Pattern::kHealthyBimodal);
  EXPECT_NE(alerts[0].current, alerts[0].prior);
  EXPECT_EQ(alerts[1].kind, AlertKind::kDrift);
  // All current mass is in bin 50, so TV = 1 - reference share of bin 50.
  const double expected = 1.0 - static_cast<double>(ref.counts[50]) / ref.n;
  EXPECT_NEAR(*alerts[1].distance, expected, 1e-15);
  EXPECT_GT(*alerts[1].distance, 0.15);
  EXPECT_EQ(alerts[2].kind, AlertKind::kPathology);
}

TEST(Drift, ThresholdIsStrict) {
  std::vector<std::uint64_t> a(100, 0), b(100, 0);
  a[10] = 50;
  a[90] = 50;
  b[10] = 50;
  b[90] = 35;
  b[20] = 15;
  const auto ra = counts_rdc(a), rb = counts_rdc(b);
  ASSERT_EQ(rdc_distance(ra, rb), 0.15);
  for (const auto& alert : check_drift(rb, ra, MonitorConfig{})) {
    EXPECT_NE(alert.kind, AlertKind::kDrift);
  }
  MonitorConfig lower;
  lower.tv_threshold = 0.149;
  bool drift = false;
  for (const auto& alert : check_drift(rb, ra, lower)) drift |= alert.kind == AlertKind::kDrift;
  EXPECT_TRUE(drift);
}

TEST(Drift, IncompatibleBinning) {
  EXPECT_THROW(check_drift(build_rdc(std::vector<double>(200, 0.1), 10),
                           build_rdc(std::vector<double>(200, 0.1), 20), MonitorConfig{}),
               PreconditionError);
}

TEST(Watcher, ComparesWithPreviousWindowOrReference) {
  auto recs = fixtures::to_records(fixtures::bimodal_scores(2, 2000), "m");
  const auto centre = fixtures::to_records(std::vector<double>(1000, 0.5), "m");
  recs.insert(recs.end(), centre.begin(), centre.end());
  const auto s = windowed_rdcs(recs, MonitorConfig{});
  ASSERT_EQ(s.windows.size(), 3u);

  DriftWatcher watcher{MonitorConfig{}};
  std::vector<std::vector<AlertEvent>> per_window;
  for (const auto& w : s.windows) per_window.push_back(watcher.observe(w));
  EXPECT_TRUE(per_window[0].empty());
  ASSERT_EQ(per_window[2].size(), 3u);
  for (const auto& a : per_window[2]) {
    EXPECT_EQ(a.window_index, 2u);
    EXPECT_EQ(a.model_id, "m");
  }

  MonitorConfig with_ref;
  with_ref.reference = build_rdc(std::vector<double>(1000, 0.5));
  DriftWatcher fixed(with_ref);
  const auto first = fixed.observe(s.windows[0]);
  ASSERT_FALSE(first.empty());
  EXPECT_EQ(first[0].kind, AlertKind::kPatternChange);
  EXPECT_EQ(first[0].prior, Pattern::kExtremeSpike);
}

TEST(Overrides, EmptyRuleListIsIdentity) {
  const auto recs = fixtures::to_records({0.1, 0.2, 0.3}, "m");
  const auto out = apply_overrides(recs, {});
  EXPECT_EQ(out.records, recs);
  EXPECT_EQ(out.overridden, 0u);
}

TEST(Overrides, ModelRuleForcesEveryMatchingScore) {
  auto recs = interleave(fixtures::to_records({0.1, 0.2, 0.3}, "m1"),
                         fixtures::to_records({0.4, 0.5}, "m2"));
  const std::vector<OverrideRule> rules{{"m1", std::nullopt, 0.99}};
  const auto out = apply_overrides(recs, rules);
  ASSERT_EQ(out.records.size(), recs.size());
  EXPECT_EQ(out.overridden, 3u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(out.records[i].model_id, recs[i].model_id);
    EXPECT_EQ(out.records[i].ts, recs[i].ts);
    EXPECT_EQ(out.records[i].score, recs[i].model_id == "m1" ? 0.99 : recs[i].score);
  }
}

TEST(Overrides, FirstMatchingRuleWins) {
  auto recs = fixtures::to_records({0.1, 0.2}, "m");
  recs[0].entity_id = "u1";
  const std::vector<OverrideRule> rules{{std::nullopt, "u1", 0.0}, {"m", std::nullopt, 1.0}};
  const auto out = apply_overrides(recs, rules);
  EXPECT_EQ(out.records[0].score, 0.0);
  EXPECT_EQ(out.records[1].score, 1.0);
  EXPECT_EQ(out.overridden, 2u);
}

TEST(Overrides, BothPredicatesMustMatch) {
  auto recs = fixtures::to_records({0.1, 0.2}, "m");
  recs[0].entity_id = "u1";
  recs[1].entity_id = "u2";
  const std::vector<OverrideRule> rules{{"m", "u2", 0.7}};
  const auto out = apply_overrides(recs, rules);
  EXPECT_EQ(out.records[0].score, 0.1);
  EXPECT_EQ(out.records[1].score, 0.7);
}

TEST(Overrides, InvalidRulesAreRejected) {
  const auto recs = fixtures::to_records({0.1}, "m");
  EXPECT_THROW(apply_overrides(recs, std::vector<OverrideRule>{{"m", std::nullopt, 1.5}}),
               PreconditionError);
  EXPECT_THROW(apply_overrides(recs, std::vector<OverrideRule>{{}}), PreconditionError);
}
