#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "adaffect/adaffect.hpp"

using namespace adaffect;
using namespace adaffect::sched;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io;
}

ScheduleProblem random_problem(int scenes, int ads, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  ScheduleProblem p;
  for (int i = 0; i < scenes; ++i) p.scenes.push_back({"s" + std::to_string(i), u(rng), u(rng)});
  for (int i = 0; i < ads; ++i) p.ads.push_back({"a" + std::to_string(i), u(rng), u(rng)});
  p.k = k;
  return p;
}

// Independent oracle: enumerate every length-N assignment vector over
// {empty, ads} and keep the feasible maximum.
double enumerate_best(const ScheduleProblem& p) {
  const int N = p.slots(), M = p.ad_count();
  std::vector<int> g(static_cast<std::size_t>(N), kEmpty);
  double best = -1;
  auto rec = [&](auto&& self, int s) -> void {
    if (s == N) {
      if (!feasible(p, g)) return;
      double f = 0;
      for (int i = 0; i < N; ++i) {
        const int a = g[static_cast<std::size_t>(i)];
        if (a == kEmpty) continue;
        const auto& sc = p.scenes[static_cast<std::size_t>(i)];
        const auto& ad = p.ads[static_cast<std::size_t>(a)];
        f += p.lambda_v * (1 - std::abs(ad.val - sc.val)) + p.lambda_a * (1 - std::abs(ad.asl - sc.asl));
      }
      best = std::max(best, f);
      return;
    }
    for (int a = kEmpty; a < M; ++a) {
      g[static_cast<std::size_t>(s)] = a;
      self(self, s + 1);
    }
  };
  rec(rec, 0);
  return best;
}

}  // namespace

TEST(Fitness, Examples) {
  ScheduleProblem p;
  p.scenes = {{"s0", 0.2, 0.3}, {"s1", 0.6, 0.9}, {"s2", 0.1, 0.5}, {"s3", 0.4, 0.4}};
  p.ads = {{"a0", 0.2, 0.3}, {"a1", 0.6, 0.9}, {"a2", 0.1, 0.5}};
  p.k = 3;
  EXPECT_DOUBLE_EQ(schedule_fitness(p, {0, 1, 2}), 6.0);

  ScheduleProblem one;
  one.scenes = {{"s0", 0.5, 0.5}, {"s1", 0, 0}};
  one.ads = {{"a", 0.75, 0.0}};
  one.k = 1;
  EXPECT_DOUBLE_EQ(schedule_fitness(one, {0}), 1.25);

  p.lambda_v = p.lambda_a = 0;
  EXPECT_EQ(schedule_fitness(p, {2, 0, 1}), 0.0);

  EXPECT_EQ(code_of([&] { schedule_fitness(p, {0, 0, 1}); }), Errc::infeasible);
  EXPECT_EQ(code_of([&] { schedule_fitness(p, {0, 1, kEmpty}); }), Errc::infeasible);
  EXPECT_EQ(code_of([&] { schedule_fitness(p, {0, 1}); }), Errc::infeasible);
}

TEST(Fitness, InvariantToAdRelabeling) {
  std::mt19937_64 rng(2);
  auto p = random_problem(8, 6, 4, rng);
  const AdSchedule s{kEmpty, 3, 0, kEmpty, 5, kEmpty, 1};
  auto q = p;
  std::reverse(q.ads.begin(), q.ads.end());
  AdSchedule t = s;
  for (auto& g : t)
    if (g != kEmpty) g = 5 - g;
  EXPECT_DOUBLE_EQ(schedule_fitness(p, s), schedule_fitness(q, t));
}

TEST(BruteForce, MatchesEnumerationOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int scenes = 3 + trial % 4, ads = 1 + trial % 4;
    const int k = 1 + trial % std::min(scenes - 1, ads);
    auto p = random_problem(scenes, ads, k, rng);
    p.lambda_v = 0.5 + trial % 3;
    const auto r = brute_force_schedule(p);
    EXPECT_TRUE(feasible(p, r.schedule));
    EXPECT_NEAR(r.fitness, enumerate_best(p), 1e-12);
    EXPECT_LE(r.fitness, k * (p.lambda_v + p.lambda_a) + 1e-12);
  }
}

TEST(BruteForce, PaperSizedInstanceAndUniqueOptimum) {
  std::mt19937_64 rng(4);
  const auto p = random_problem(8, 6, 5, rng);
  EXPECT_EQ(candidate_count(7, 5, 6), 15120.0);
  const auto r = brute_force_schedule(p);
  EXPECT_NEAR(r.fitness, enumerate_best(p), 1e-12);

  // k = N, ads copy the scenes in shuffled order: the matching is perfect.
  auto q = random_problem(6, 0, 5, rng);
  std::vector<int> perm{3, 0, 4, 1, 2};
  for (int a : perm) q.ads.push_back({"ad" + std::to_string(a), q.scenes[static_cast<std::size_t>(a)].asl,
                                      q.scenes[static_cast<std::size_t>(a)].val});
  const auto m = brute_force_schedule(q);
  EXPECT_DOUBLE_EQ(m.fitness, 10.0);
  for (int s = 0; s < 5; ++s) EXPECT_EQ(q.ads[static_cast<std::size_t>(m.schedule[static_cast<std::size_t>(s)])].id, "ad" + std::to_string(s));

  ScheduleProblem single;
  single.scenes = {{"s0", 0.1, 0.1}, {"s1", 0.8, 0.7}, {"s2", 0.5, 0.5}};
  single.ads = {{"a", 0.75, 0.75}};
  single.k = 1;
  EXPECT_EQ(brute_force_schedule(single).schedule, (AdSchedule{kEmpty, 0}));
}

TEST(BruteForce, Guards) {
  std::mt19937_64 rng(5);
  EXPECT_EQ(code_of([&] { brute_force_schedule(random_problem(8, 5, 8, rng)); }), Errc::infeasible);
  EXPECT_EQ(code_of([&] { brute_force_schedule(random_problem(8, 3, 4, rng)); }), Errc::infeasible);
  EXPECT_EQ(code_of([&] { brute_force_schedule(random_problem(30, 30, 10, rng)); }), Errc::instance_too_large);
  auto bad = random_problem(4, 3, 2, rng);
  bad.ads[1].val = 1.5;
  EXPECT_EQ(code_of([&] { brute_force_schedule(bad); }), Errc::scale_violation);
}

TEST(Ga, NearOptimalAcrossSeeds) {
  std::mt19937_64 rng(6);
  int exact = 0;
  double worst = 1;
  for (int run = 0; run < 30; ++run) {
    const auto p = random_problem(8, 6, 5, rng);
    const auto opt = brute_force_schedule(p);
    GaConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(run);
    const auto ga = ga_optimize(p, cfg);
    EXPECT_TRUE(feasible(p, ga.schedule));
    EXPECT_LE(ga.fitness, opt.fitness + 1e-12);
    exact += ga.fitness >= opt.fitness - 1e-9;
    worst = std::min(worst, ga.fitness / opt.fitness);
    ASSERT_EQ(ga.history.size(), 201u);
    for (std::size_t g = 1; g < ga.history.size(); ++g) EXPECT_GE(ga.history[g], ga.history[g - 1]);
    EXPECT_EQ(ga.history.back(), ga.fitness);
  }
  EXPECT_GE(exact, 28);
  EXPECT_GE(worst, 0.98);
}

TEST(Ga, ElitismKeepsInjectedOptimumAndIsDeterministic) {
  std::mt19937_64 rng(7);
  const auto p = random_problem(8, 6, 5, rng);
  const auto opt = brute_force_schedule(p);
  GaConfig cfg;
  cfg.generations = 20;
  cfg.population = 10;
  cfg.initial = {opt.schedule};
  const auto r = ga_optimize(p, cfg);
  EXPECT_EQ(r.fitness, opt.fitness);
  for (double h : r.history) EXPECT_EQ(h, opt.fitness);

  GaConfig plain;
  plain.seed = 17;
  const auto a = ga_optimize(p, plain), b = ga_optimize(p, plain);
  EXPECT_EQ(a.schedule, b.schedule);
  EXPECT_EQ(a.history, b.history);
  auto infeasible = cfg;
  infeasible.initial = {AdSchedule(7, kEmpty)};
  EXPECT_EQ(code_of([&] { ga_optimize(p, infeasible); }), Errc::infeasible);
}

TEST(Schedule, FollowingAnchorAndCsv) {
  ScheduleProblem p;
  p.scenes = {{"s0", 0.0, 0.0}, {"s1", 1.0, 1.0}};
  p.ads = {{"a", 1.0, 1.0}};
  p.k = 1;
  EXPECT_EQ(schedule_fitness(p, {0}), 0.0);
  p.anchor = SceneAnchor::following;
  EXPECT_EQ(schedule_fitness(p, {0}), 2.0);
  const auto r = brute_force_schedule(p);
  EXPECT_EQ(schedule_csv(p, r), "slot_index,ad_id,fitness_contribution\n0,a,2\ntotal,,2\n");

  const auto items = parse_scored_items(scored_items_json(p.scenes), "scenes");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[1].id, "s1");
  EXPECT_EQ(items[1].asl, 1.0);
}
