#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pfloc/metrics.hpp"

using namespace pfloc;

namespace {

ParticleSet from(std::vector<WorldPoint> pts) {
  ParticleSet ps;
  ps.positions = std::move(pts);
  ps.weights.assign(ps.size(), 1.0 / double(ps.size()));
  return ps;
}

ParticleSet random_cloud(RandomStream& rng, std::size_t n) {
  const WorldPoint centre(rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4));
  const Eigen::Vector3d scale(std::exp(rng.uniform(-3, 7)), std::exp(rng.uniform(-3, 7)), std::exp(rng.uniform(-3, 7)));
  std::vector<WorldPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(centre + scale.cwiseProduct(Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal())));
  }
  return from(std::move(pts));
}

TrackState active_track(int id, std::vector<WorldPoint> pts) {
  TrackState t;
  t.id = id;
  t.phase = TrackPhase::kActive;
  t.filter = from(std::move(pts));
  return t;
}

StepMetric step_with(double translation, std::vector<double> rmse) {
  StepMetric s;
  s.translation_m = translation;
  int id = 0;
  for (double r : rmse) {
    TrackMetric m;
    m.track_id = id++;
    m.rmse_mean_dist_m = r;
    m.rmse_particle_m = 2 * r;
    m.nlpd = r + 1;
    s.tracks.push_back(m);
  }
  return s;
}

}  // namespace

TEST(Rmse, Examples) {
  const ParticleSet pair = from({{0, 0, 0}, {2, 0, 0}});
  EXPECT_DOUBLE_EQ(rmse_particle(pair, {1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(rmse_mean_dist(pair, {1, 0, 0}), 0.0);
  const ParticleSet at_target = from({{5, 5, 5}, {5, 5, 5}});
  EXPECT_DOUBLE_EQ(rmse_particle(at_target, {5, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(rmse_mean_dist(at_target, {5, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(rmse_particle(from({{3, 4, 12}}), {0, 0, 0}), 13.0);
  EXPECT_DOUBLE_EQ(rmse_mean_dist(from({{2, 4, 1}, {4, 4, -1}}), {0, 0, 0}), 5.0);
}

TEST(Rmse, BiasVarianceIdentity) {
  RandomStream rng(31);
  for (int i = 0; i < 1000; ++i) {
    const ParticleSet ps = random_cloud(rng, std::size_t(rng.uniform_int(2, 500)));
    const WorldPoint target(rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4));
    const double lhs = std::pow(rmse_particle(ps, target), 2) - std::pow(rmse_mean_dist(ps, target), 2);
    const double trace = particle_covariance(ps, particle_mean(ps)).trace();
    ASSERT_NEAR(lhs, trace, 1e-9 * std::max(std::pow(rmse_particle(ps, target), 2), 1e-300));
  }
}

TEST(Nlpd, StandardNormalAtMode) {
  PosteriorSummary s;
  s.covariance = Eigen::Matrix3d::Identity();
  EXPECT_NEAR(nlpd(s, WorldPoint::Zero()), 1.5 * std::log(2 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(nlpd(s, WorldPoint::Zero()), 2.75682, 1e-5);
}

TEST(Nlpd, OneMahalanobisUnitAddsHalf) {
  PosteriorSummary s;
  s.mean = {1, 2, 3};
  s.covariance << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::LLT<Eigen::Matrix3d> llt(s.covariance);
  const Eigen::Vector3d dir = Eigen::Vector3d(0.3, -0.2, 0.9).normalized();
  const Eigen::Vector3d offset = llt.matrixL() * dir;
  EXPECT_NEAR(nlpd(s, s.mean + offset) - nlpd(s, s.mean), 0.5, 1e-12);
}

TEST(Nlpd, TighterCovarianceAtFixedOffsetIsWorse) {
  PosteriorSummary wide, tight;
  wide.covariance = Eigen::Matrix3d::Identity() * 100.0;
  tight.covariance = Eigen::Matrix3d::Identity() * 1.0;
  EXPECT_GT(nlpd(tight, {30, 0, 0}), nlpd(wide, {30, 0, 0}));
}

TEST(Nlpd, InvariantUnderJointRotation) {
  RandomStream rng(32);
  const ParticleSet ps = from({{1, 2, 3}, {4, 0, -1}, {2, 2, 2}, {0, 5, 1}, {-3, 1, 0}});
  const WorldPoint target(0.5, 1.5, 2.5);
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  ParticleSet rotated = ps;
  for (auto& p : rotated.positions) p = R * p;
  EXPECT_NEAR(nlpd(ps, target), nlpd(rotated, R * target), 1e-6);
}

TEST(AssignTracks, NearestWithLowerIdOnTies) {
  const std::vector<TargetTruth> truths{{1, {0, 0, 0}}, {2, {10, 0, 0}}, {3, {0, 0, 50}}};
  const TrackState a = active_track(0, {{1, 0, 0}});
  const TrackState b = active_track(1, {{5, 0, 0}});
  const TrackState c = active_track(2, {{0, 0, 40}});
  const auto m = assign_tracks({&a, &b, &c}, truths);
  EXPECT_EQ(m.at(0), 1);
  EXPECT_EQ(m.at(1), 1);
  EXPECT_EQ(m.at(2), 3);
}

TEST(AssignTracks, ScaleInvariant) {
  RandomStream rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TargetTruth> truths;
    std::vector<std::pair<int, WorldPoint>> means;
    for (int i = 0; i < 4; ++i) truths.push_back({i + 1, {rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)}});
    for (int i = 0; i < 5; ++i) means.emplace_back(i, WorldPoint(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)));
    const double s = std::exp(rng.uniform(-3, 3));
    auto scaled_truths = truths;
    auto scaled_means = means;
    for (auto& t : scaled_truths) t.centre *= s;
    for (auto& m : scaled_means) m.second *= s;
    EXPECT_EQ(assign_means(means, truths), assign_means(scaled_means, scaled_truths));
  }
}

TEST(EvaluateStep, ScoresEveryActiveTrack) {
  const std::vector<TargetTruth> truths{{1, {0, 0, 0}}, {2, {100, 0, 0}}};
  const TrackState a = active_track(4, {{3, 4, 0}, {3, 4, 0}});
  const TrackState b = active_track(7, {{100, 0, 1}, {100, 0, -1}});
  TrackState gone = active_track(9, {{0, 0, 0}});
  gone.phase = TrackPhase::kDismissed;
  const StepMetric s = evaluate_step(3, 30.0, {&a, &b, &gone}, truths);
  ASSERT_EQ(s.tracks.size(), 2u);
  EXPECT_EQ(s.tracks[0].target_id, 1);
  EXPECT_DOUBLE_EQ(s.tracks[0].rmse_mean_dist_m, 5.0);
  EXPECT_EQ(s.tracks[1].target_id, 2);
  EXPECT_DOUBLE_EQ(s.tracks[1].rmse_particle_m, 1.0);
  EXPECT_DOUBLE_EQ(*s.mean_rmse_mean_dist(), 2.5);
  EXPECT_FALSE(evaluate_step(0, 0.0, {}, truths).mean_rmse_mean_dist());
}

TEST(Aggregate, ConstantRun) {
  std::vector<StepMetric> run;
  for (int k = 0; k <= 100; ++k) run.push_back(step_with(10.0 * k, {5.0}));
  const RunAggregate a = aggregate(run);
  EXPECT_DOUBLE_EQ(*a.rmse_min, 5.0);
  EXPECT_DOUBLE_EQ(*a.rmse_window_mean, 5.0);
  EXPECT_DOUBLE_EQ(*a.nlpd_min, 6.0);
  EXPECT_DOUBLE_EQ(*a.rmse_particle_min, 10.0);
}

TEST(Aggregate, LinearDecay) {
  std::vector<StepMetric> run;
  for (int k = 0; k <= 100; ++k) run.push_back(step_with(10.0 * k, {100.0 - k}));
  const RunAggregate a = aggregate(run);
  EXPECT_NEAR(*a.rmse_window_mean, 40.0, 1e-12);
  EXPECT_DOUBLE_EQ(*a.rmse_min, 0.0);
}

TEST(Aggregate, EmptyWindowAndTracklessSteps) {
  std::vector<StepMetric> run;
  run.push_back(step_with(0.0, {}));
  run.push_back(step_with(10.0, {7.0, 9.0}));
  run.push_back(step_with(20.0, {}));
  const RunAggregate a = aggregate(run);
  EXPECT_DOUBLE_EQ(*a.rmse_min, 8.0);
  EXPECT_FALSE(a.rmse_window_mean);
  EXPECT_FALSE(aggregate({}).rmse_min);
}

TEST(Aggregate, MinIsBelowEveryStep) {
  RandomStream rng(34);
  std::vector<StepMetric> run;
  for (int k = 0; k < 200; ++k) run.push_back(step_with(5.0 * k, {rng.uniform(0, 100), rng.uniform(0, 100)}));
  const RunAggregate a = aggregate(run);
  for (const auto& s : run) EXPECT_LE(*a.rmse_min, *s.mean_rmse_mean_dist());
}

TEST(AverageRuns, ArithmeticAndOrderIndependent) {
  RandomStream rng(35);
  std::vector<RunAggregate> runs;
  for (int i = 0; i < 10; ++i) {
    RunAggregate r;
    r.rmse_min = rng.uniform(0, 1e3);
    r.rmse_window_mean = rng.uniform(0, 1e3);
    r.nlpd_min = rng.uniform(0, 30);
    r.rmse_particle_min = rng.uniform(0, 1e3);
    runs.push_back(r);
  }
  const RunAggregate avg = average_runs(runs);
  double sum = 0;
  for (const auto& r : runs) sum += *r.rmse_min;
  EXPECT_NEAR(*avg.rmse_min, sum / 10.0, 1e-9);
  for (int perm = 0; perm < 20; ++perm) {
    std::shuffle(runs.begin(), runs.end(), rng.engine());
    const RunAggregate again = average_runs(runs);
    EXPECT_EQ(*again.rmse_min, *avg.rmse_min);
    EXPECT_EQ(*again.rmse_window_mean, *avg.rmse_window_mean);
    EXPECT_EQ(*again.nlpd_min, *avg.nlpd_min);
  }
  RunAggregate missing;
  runs.push_back(missing);
  EXPECT_EQ(*average_runs(runs).rmse_min, *avg.rmse_min);
}
