#include <cmath>

#include <gtest/gtest.h>

#include "dsl/error.hpp"
#include "dsl/robustness.hpp"
#include "dsl/selection.hpp"
#include "property.hpp"

namespace dsl {
namespace {

TEST(Attack, NoneIsIdentity) {
  RngStream rng(1, "attack");
  const ParamVector w{2.0, -1.0};
  const Transmission t = apply_attack(AttackSpec{}, w, 0.7, rng);
  EXPECT_EQ(t.w, w);
  EXPECT_EQ(t.reported_f, 0.7);
}

TEST(Attack, SignFlip) {
  RngStream rng(1, "attack");
  AttackSpec s{AttackKind::sign_flip, 1, 1.0, false};
  const Transmission t = apply_attack(s, {2.0, -1.0}, 0.7, rng);
  EXPECT_EQ(t.w, (ParamVector{-2.0, 1.0}));
  EXPECT_EQ(t.reported_f, 0.7);
  s.magnitude = 10.0;
  EXPECT_EQ(apply_attack(s, {2.0, -1.0}, 0.7, rng).w, (ParamVector{-20.0, 10.0}));
}

TEST(Attack, GaussianNoiseStatistics) {
  const AttackSpec s{AttackKind::gaussian_noise, 1, 0.5, false};
  RngStream rng(2, "attack");
  const ParamVector w(20000, 1.0);
  const Transmission t = apply_attack(s, w, 0.3, rng);
  double sum = 0, sq = 0;
  for (double x : t.w) {
    sum += x - 1.0;
    sq += (x - 1.0) * (x - 1.0);
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.02);
  EXPECT_NEAR(sq / 20000, 0.25, 0.01);
  EXPECT_EQ(t.reported_f, 0.3);
}

TEST(Attack, ScoreLyingAlwaysSelected) {
  testing::for_all("liar", 50, [](RngStream& rng) {
    const std::size_t n = testing::gen_size(rng, 2, 30);
    const int liar = static_cast<int>(rng.index(n));
    const AttackSpec s{AttackKind::score_lying, 1, 0.1, false};
    std::vector<ScoreReport> reports;
    for (std::size_t i = 0; i < n; ++i) {
      double f = rng.uniform(0.0, 3.0);  // cross-entropy is >= 0
      if (static_cast<int>(i) == liar) f = apply_attack(s, ParamVector(3, 0.0), f, rng).reported_f;
      reports.push_back({static_cast<int>(i), f, true});
    }
    const auto sel = select_workers(reports, 1 + static_cast<int>(rng.index(n)));
    EXPECT_NE(std::find(sel.begin(), sel.end(), liar), sel.end());
  });
}

TEST(Attack, AttackerIds) {
  AttackSpec s{AttackKind::sign_flip, 3, 1.0, false};
  EXPECT_EQ(s.attacker_ids(10, 1), (std::vector<int>{0, 1, 2}));
  s.randomize_ids = true;
  const auto ids = s.attacker_ids(10, 1);
  EXPECT_EQ(ids.size(), 3u);
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  EXPECT_EQ(ids, s.attacker_ids(10, 1));
  EXPECT_TRUE((AttackSpec{AttackKind::none, 3, 1.0, false}.attacker_ids(10, 1).empty()));
  EXPECT_THROW((AttackSpec{AttackKind::sign_flip, 11, 1.0, false}.validate(10)), ConfigError);
}

const ScoreFn kSquare = [](const ParamVector& w) { return w.squared_norm(); };

TEST(Screen, LargeToleranceAccepts) {
  const std::vector<double> reports{0.1, 0.2};
  const ScreeningPolicy p{true, 1e3, false, 3};
  EXPECT_EQ(screen_aggregate({1.0, 1.0}, reports, kSquare, p).verdict, ScreenVerdict::accept);
}

TEST(Screen, FlippedAggregateRejected) {
  // Two honest workers near the optimum of ||w||^2 + offset, one flipped
  // attacker at magnitude 10: the aggregate's score departs from the reports.
  const ScoreFn score = [](const ParamVector& w) {
    return (w - ParamVector{1.0, 1.0}).squared_norm();
  };
  const ParamVector honest{1.1, 0.9};
  RngStream rng(3, "attack");
  const ParamVector flipped =
      apply_attack({AttackKind::sign_flip, 1, 10.0, false}, honest, score(honest), rng).w;
  ParamVector agg = honest + honest + flipped;
  agg *= 1.0 / 3.0;
  const std::vector<double> reports(3, score(honest));
  const ScreenResult r = screen_aggregate(agg, reports, score, {true, 1.0, false, 3});
  EXPECT_EQ(r.verdict, ScreenVerdict::reject);
  EXPECT_GT(r.deviation, 1.0);
}

TEST(Screen, ZeroToleranceRejectsJensenGap) {
  const ParamVector a{1.0, 0.0}, b{-1.0, 0.0};
  const std::vector<double> reports{kSquare(a), kSquare(b)};
  const ScreenResult r = screen_aggregate(0.5 * (a + b), reports, kSquare, {true, 0.0, false, 3});
  EXPECT_EQ(r.verdict, ScreenVerdict::reject);
  EXPECT_DOUBLE_EQ(r.deviation, 1.0);
}

TEST(Screen, DisabledAlwaysAcceptsButReportsDeviation) {
  const std::vector<double> reports{0.0};
  const ScreenResult r = screen_aggregate({3.0, 4.0}, reports, kSquare, ScreeningPolicy{});
  EXPECT_EQ(r.verdict, ScreenVerdict::accept);
  EXPECT_EQ(r.deviation, 25.0);
}

TEST(Screen, NonFiniteScoreRejected) {
  const ScoreFn inf = [](const ParamVector&) { return std::nan(""); };
  const std::vector<double> reports{0.0};
  EXPECT_EQ(screen_aggregate({1.0}, reports, inf, {true, 1e9, false, 3}).verdict,
            ScreenVerdict::reject);
}

TEST(Failures, NoneKeepsSelection) {
  const std::vector<int> sel{4, 1, 7};
  const std::vector<char> failed(10, 0);
  EXPECT_EQ(inject_failures(sel, FailureSpec{}, failed, 1, 0), sel);
}

TEST(Failures, TotalLinkOutage) {
  const std::vector<int> sel{0, 1, 2};
  const std::vector<char> failed(3, 0);
  EXPECT_TRUE(inject_failures(sel, {1.0, 0.0}, failed, 1, 0).empty());
}

TEST(Failures, LinkDropBinomialMean) {
  std::vector<int> sel(10);
  for (int i = 0; i < 10; ++i) sel[static_cast<std::size_t>(i)] = i;
  const std::vector<char> failed(10, 0);
  const int trials = 10000;
  double total = 0;
  for (int t = 0; t < trials; ++t) total += static_cast<double>(inject_failures(sel, {0.2, 0.0}, failed, 3, t).size());
  EXPECT_NEAR(total / trials, 8.0, 0.1);
}

TEST(Failures, PermanentNodesReproduceAndAreRemoved) {
  const FailureSpec spec{0.0, 0.3};
  const auto a = draw_failed_nodes(spec, 200, 5);
  EXPECT_EQ(a, draw_failed_nodes(spec, 200, 5));
  const auto n_failed = std::count(a.begin(), a.end(), char{1});
  EXPECT_GT(n_failed, 30);
  EXPECT_LT(n_failed, 90);
  std::vector<int> all(200);
  for (int i = 0; i < 200; ++i) all[static_cast<std::size_t>(i)] = i;
  for (int id : inject_failures(all, spec, a, 5, 0)) EXPECT_FALSE(a[static_cast<std::size_t>(id)]);
}

TEST(Failures, Validation) {
  EXPECT_THROW((FailureSpec{1.5, 0.0}.validate()), ConfigError);
  EXPECT_THROW((FailureSpec{0.0, -0.1}.validate()), ConfigError);
  EXPECT_THROW((ScreeningPolicy{true, 1.0, false, -1}.validate()), ConfigError);
}

}  // namespace
}  // namespace dsl
