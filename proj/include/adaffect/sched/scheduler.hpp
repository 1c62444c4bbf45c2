#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaffect/core/csv.hpp"
#include "adaffect/core/error.hpp"
#include "adaffect/core/types.hpp"

namespace adaffect::sched {

/// A scene or an ad reduced to its arousal and valence scores in [0,1].
struct ScoredItem {
  std::string id;
  double asl{0.0};
  double val{0.0};
};

enum class SceneAnchor { preceding, following };

struct ScheduleProblem {
  std::vector<ScoredItem> scenes;
  std::vector<ScoredItem> ads;
  int k{0};
  double lambda_v{1.0};
  double lambda_a{1.0};
  /// Slot i sits between scene i and scene i+1.
  SceneAnchor anchor{SceneAnchor::preceding};

  int slots() const { return static_cast<int>(scenes.size()) - 1; }
  int ad_count() const { return static_cast<int>(ads.size()); }

  void validate() const {
    if (scenes.size() < 2) throw Error(Errc::infeasible, "need at least two scenes to form a transition slot");
    if (lambda_v < 0.0 || lambda_a < 0.0) throw Error(Errc::invalid_argument, "relevance weights must be non-negative");
    for (const auto* list : {&scenes, &ads})
      for (const auto& s : *list)
        for (double v : {s.asl, s.val})
          if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::scale_violation, "'" + s.id + "' score outside [0,1]");
    if (k < 1 || k > std::min(slots(), ad_count()))
      throw Error(Errc::infeasible, "k=" + std::to_string(k) + " insertions impossible with " + std::to_string(slots()) +
                                        " slots and " + std::to_string(ad_count()) + " ads");
  }

  const ScoredItem& anchor_scene(int slot) const {
    return scenes[static_cast<std::size_t>(anchor == SceneAnchor::preceding ? slot : slot + 1)];
  }

  /// Relevance of placing ad `a` at slot `s`.
  double contribution(int s, int a) const {
    const auto& sc = anchor_scene(s);
    const auto& ad = ads[static_cast<std::size_t>(a)];
    return lambda_v * (1.0 - std::abs(ad.val - sc.val)) + lambda_a * (1.0 - std::abs(ad.asl - sc.asl));
  }
};

inline ScoredItem scored_ad(const AdRecord& r) {
  if (!r.asl_score || !r.val_score) throw Error(Errc::invalid_argument, "ad '" + r.id + "' lacks asl/val scores");
  return {r.id, *r.asl_score, *r.val_score};
}

/// Length-N chromosome: gene s is the ad index placed at slot s, or -1.
using AdSchedule = std::vector<int>;

inline constexpr int kEmpty = -1;

inline bool feasible(const ScheduleProblem& p, const AdSchedule& s) {
  if (static_cast<int>(s.size()) != p.slots()) return false;
  std::vector<char> used(static_cast<std::size_t>(p.ad_count()), 0);
  int filled = 0;
  for (int g : s) {
    if (g == kEmpty) continue;
    if (g < 0 || g >= p.ad_count() || used[static_cast<std::size_t>(g)]) return false;
    used[static_cast<std::size_t>(g)] = 1;
    ++filled;
  }
  return filled == p.k;
}

inline double schedule_fitness(const ScheduleProblem& p, const AdSchedule& s) {
  if (!feasible(p, s)) throw Error(Errc::infeasible, "schedule does not place exactly k distinct ads on valid slots");
  double f = 0.0;
  for (int slot = 0; slot < p.slots(); ++slot)
    if (s[static_cast<std::size_t>(slot)] != kEmpty) f += p.contribution(slot, s[static_cast<std::size_t>(slot)]);
  return f;
}

struct ScheduleResult {
  AdSchedule schedule;
  double fitness{0.0};
  /// GA only: best-ever fitness after each generation (index 0 = initial population).
  std::vector<double> history;
};

inline constexpr double kBruteForceLimit = 1e7;

inline double candidate_count(int n, int k, int m) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  for (int i = 0; i < k; ++i) c *= (m - i);
  return c;
}

/// Exhaustive search: slot subsets in increasing lexicographic order, then
/// ordered ad choices in lexicographic order; the first maximum is kept.
inline ScheduleResult brute_force_schedule(const ScheduleProblem& p) {
  p.validate();
  const int N = p.slots(), M = p.ad_count(), k = p.k;
  if (candidate_count(N, k, M) > kBruteForceLimit)
    throw Error(Errc::instance_too_large, "C(N,k)*P(M,k) exceeds " + std::to_string(static_cast<long long>(kBruteForceLimit)));
  std::vector<std::vector<double>> c(static_cast<std::size_t>(N), std::vector<double>(static_cast<std::size_t>(M)));
  for (int s = 0; s < N; ++s)
    for (int a = 0; a < M; ++a) c[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = p.contribution(s, a);

  ScheduleResult best;
  best.fitness = -1.0;
  std::vector<int> slots(static_cast<std::size_t>(k)), ads(static_cast<std::size_t>(k));
  std::vector<char> used(static_cast<std::size_t>(M), 0);

  auto assign = [&](auto&& self, int depth, double acc) -> void {
    if (depth == k) {
      if (acc > best.fitness) {
        best.fitness = acc;
        best.schedule.assign(static_cast<std::size_t>(N), kEmpty);
        for (int i = 0; i < k; ++i) best.schedule[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] = ads[static_cast<std::size_t>(i)];
      }
      return;
    }
    for (int a = 0; a < M; ++a) {
      if (used[static_cast<std::size_t>(a)]) continue;
      used[static_cast<std::size_t>(a)] = 1;
      ads[static_cast<std::size_t>(depth)] = a;
      self(self, depth + 1, acc + c[static_cast<std::size_t>(slots[static_cast<std::size_t>(depth)])][static_cast<std::size_t>(a)]);
      used[static_cast<std::size_t>(a)] = 0;
    }
  };
  auto choose = [&](auto&& self, int depth, int start) -> void {
    if (depth == k) {
      assign(assign, 0, 0.0);
      return;
    }
    for (int s = start; s <= N - (k - depth); ++s) {
      slots[static_cast<std::size_t>(depth)] = s;
      self(self, depth + 1, s + 1);
    }
  };
  choose(choose, 0, 0);
  // Recompute in slot order so the reported value matches schedule_fitness bit for bit.
  best.fitness = schedule_fitness(p, best.schedule);
  return best;
}

struct GaConfig {
  int population{100};
  int generations{200};
  double crossover{0.8};
  double mutation{0.1};
  int tournament{3};
  int elitism{1};
  std::uint64_t seed{42};
  /// Individuals placed at the front of the initial population.
  std::vector<AdSchedule> initial;
};

namespace detail {

inline AdSchedule random_individual(const ScheduleProblem& p, std::mt19937_64& rng) {
  std::vector<int> slots(static_cast<std::size_t>(p.slots())), ads(static_cast<std::size_t>(p.ad_count()));
  std::iota(slots.begin(), slots.end(), 0);
  std::iota(ads.begin(), ads.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  std::shuffle(ads.begin(), ads.end(), rng);
  AdSchedule s(static_cast<std::size_t>(p.slots()), kEmpty);
  for (int i = 0; i < p.k; ++i) s[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] = ads[static_cast<std::size_t>(i)];
  return s;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Drops duplicate ads (later slots lose), then trims or pads with unused
/// ads on random slots until exactly k are placed.
inline void repair(const ScheduleProblem& p, AdSchedule& s, std::mt19937_64& rng) {
  std::vector<char> used(static_cast<std::size_t>(p.ad_count()), 0);
  std::vector<int> filled, empty;
  for (int slot = 0; slot < p.slots(); ++slot) {
    int& g = s[static_cast<std::size_t>(slot)];
    if (g != kEmpty && used[static_cast<std::size_t>(g)]) g = kEmpty;
    if (g != kEmpty) {
      used[static_cast<std::size_t>(g)] = 1;
      filled.push_back(slot);
    } else {
      empty.push_back(slot);
    }
  }
  while (static_cast<int>(filled.size()) > p.k) {
    const int i = uniform_int(rng, 0, static_cast<int>(filled.size()) - 1);
    const int slot = filled[static_cast<std::size_t>(i)];
    used[static_cast<std::size_t>(s[static_cast<std::size_t>(slot)])] = 0;
    s[static_cast<std::size_t>(slot)] = kEmpty;
    filled.erase(filled.begin() + i);
  }
  std::vector<int> spare;
  for (int a = 0; a < p.ad_count(); ++a)
    if (!used[static_cast<std::size_t>(a)]) spare.push_back(a);
  std::shuffle(empty.begin(), empty.end(), rng);
  std::shuffle(spare.begin(), spare.end(), rng);
  for (int i = 0; static_cast<int>(filled.size()) < p.k; ++i) {
    s[static_cast<std::size_t>(empty[static_cast<std::size_t>(i)])] = spare[static_cast<std::size_t>(i)];
    filled.push_back(empty[static_cast<std::size_t>(i)]);
  }
}

/// Swap two slots' genes, or replace a placed ad with an unused one.
inline void mutate(const ScheduleProblem& p, AdSchedule& s, std::mt19937_64& rng) {
  std::vector<int> spare;
  {
    std::vector<char> used(static_cast<std::size_t>(p.ad_count()), 0);
    for (int g : s)
      if (g != kEmpty) used[static_cast<std::size_t>(g)] = 1;
    for (int a = 0; a < p.ad_count(); ++a)
      if (!used[static_cast<std::size_t>(a)]) spare.push_back(a);
  }
  const bool replace = !spare.empty() && std::bernoulli_distribution(0.5)(rng);
  if (replace) {
    std::vector<int> filled;
    for (int slot = 0; slot < p.slots(); ++slot)
      if (s[static_cast<std::size_t>(slot)] != kEmpty) filled.push_back(slot);
    const int slot = filled[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(filled.size()) - 1))];
    s[static_cast<std::size_t>(slot)] = spare[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(spare.size()) - 1))];
  } else if (p.slots() >= 2) {
    const int a = uniform_int(rng, 0, p.slots() - 1);
    int b = uniform_int(rng, 0, p.slots() - 2);
    if (b >= a) ++b;
    std::swap(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
  }
}

}  // namespace detail

/// Generational GA with tournament selection, uniform crossover plus repair,
/// swap/replace mutation and elitism. Returns the best individual ever seen.
inline ScheduleResult ga_optimize(const ScheduleProblem& p, const GaConfig& cfg = {}) {
  p.validate();
  if (cfg.population < 2 || cfg.generations < 0 || cfg.tournament < 1)
    throw Error(Errc::invalid_argument, "GA needs population >= 2, generations >= 0, tournament >= 1");
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution do_cross(std::clamp(cfg.crossover, 0.0, 1.0)), do_mut(std::clamp(cfg.mutation, 0.0, 1.0));

  std::vector<AdSchedule> pop;
  for (const auto& s : cfg.initial) {
    if (!feasible(p, s)) throw Error(Errc::infeasible, "injected initial individual is infeasible");
    if (static_cast<int>(pop.size()) < cfg.population) pop.push_back(s);
  }
  while (static_cast<int>(pop.size()) < cfg.population) pop.push_back(detail::random_individual(p, rng));
  std::vector<double> fit(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = schedule_fitness(p, pop[i]);

  ScheduleResult best;
  best.fitness = -1.0;
  auto track = [&] {
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (fit[i] > best.fitness) best.fitness = fit[i], best.schedule = pop[i];
    best.history.push_back(best.fitness);
  };
  track();

  auto select = [&]() -> const AdSchedule& {
    int win = detail::uniform_int(rng, 0, cfg.population - 1);
    for (int t = 1; t < cfg.tournament; ++t) {
      const int c = detail::uniform_int(rng, 0, cfg.population - 1);
      if (fit[static_cast<std::size_t>(c)] > fit[static_cast<std::size_t>(win)]) win = c;
    }
    return pop[static_cast<std::size_t>(win)];
  };

  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fit[a] > fit[b]; });
    std::vector<AdSchedule> next;
    next.reserve(pop.size());
    for (int e = 0; e < std::min(cfg.elitism, cfg.population); ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
    while (static_cast<int>(next.size()) < cfg.population) {
      const AdSchedule& a = select();
      const AdSchedule& b = select();
      AdSchedule child = a;
      if (do_cross(rng)) {
        std::bernoulli_distribution coin(0.5);
        for (std::size_t s = 0; s < child.size(); ++s)
          if (coin(rng)) child[s] = b[s];
        detail::repair(p, child, rng);
      }
      if (do_mut(rng)) detail::mutate(p, child, rng);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = schedule_fitness(p, pop[i]);
    track();
  }
  return best;
}

// Text formats.

inline std::vector<ScoredItem> parse_scored_items(const std::string& text, std::string_view what) {
  std::vector<ScoredItem> out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw Error(Errc::parse, std::string(what) + ": expected a JSON array");
    for (const auto& e : j) {
      ScoredItem s;
      s.id = e.at("id").is_string() ? e.at("id").get<std::string>() : e.at("id").dump();
      s.asl = e.at("asl").get<double>();
      s.val = e.at("val").get<double>();
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string(what) + ": " + e.what());
  }
  return out;
}

inline std::string scored_items_json(const std::vector<ScoredItem>& items) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : items) j.push_back({{"id", s.id}, {"asl", s.asl}, {"val", s.val}});
  return j.dump(2) + "\n";
}

inline std::string schedule_csv(const ScheduleProblem& p, const ScheduleResult& r) {
  std::string out = "slot_index,ad_id,fitness_contribution\n";
  for (int s = 0; s < p.slots(); ++s) {
    const int a = r.schedule[static_cast<std::size_t>(s)];
    if (a == kEmpty) continue;
    out += std::to_string(s) + ',' + p.ads[static_cast<std::size_t>(a)].id + ',' + io::fmt(p.contribution(s, a)) + '\n';
  }
  out += "total,," + io::fmt(r.fitness) + '\n';
  return out;
}

}  // namespace adaffect::sched
