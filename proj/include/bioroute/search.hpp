#pragma once

// Iterative remove-and-reinsert search with an epsilon restart heuristic,
// n independent workers per iteration, argmin reduction, and host-side
// reconstruction of the winner by replaying its seed.

#include <array>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bioroute/assign.hpp"
#include "bioroute/cost.hpp"
#include "bioroute/init.hpp"
#include "bioroute/model.hpp"
#include "bioroute/plan.hpp"

namespace bioroute {

enum class CaseId { kCase1 = 1, kCase2 = 2, kCase3 = 3, kCase4 = 4 };

struct CaseMode {
  CaseId id = CaseId::kCase4;
  bool field_assignment_locked = false;
  bool machinery_locked = false;
  bool completion_filter_active = true;

  // Case 1: construction only. Case 2: fields and fleet locked, no filter.
  // Case 3: fields locked, fleet optimised, filter on. Case 4: all free.
  static CaseMode from_id(CaseId id) {
    switch (id) {
      case CaseId::kCase1: return {id, true, true, false};
      case CaseId::kCase2: return {id, true, true, false};
      case CaseId::kCase3: return {id, true, false, true};
      case CaseId::kCase4: return {id, false, false, true};
    }
    throw InputError("unknown case");
  }
  static CaseMode from_int(int id) {
    if (id < 1 || id > 4) throw InputError("case must be 1, 2, 3 or 4");
    return from_id(static_cast<CaseId>(id));
  }
  bool construction_only() const { return id == CaseId::kCase1; }
};

inline constexpr int kDefaultWorkers = 1024;

struct SearchConfig {
  double epsilon = 0.5;
  int n_iters = 5000;
  int n_workers = kDefaultWorkers;
  std::uint64_t master_seed = 0;
  CaseMode mode = CaseMode::from_id(CaseId::kCase4);
  bool double_perturb = false;
  CostModel cost_model = CostModel::kSkeleton;
  unsigned n_threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
    if (n_iters < 0) throw InputError("iteration count must be nonnegative");
    if (n_workers < 1) throw InputError("need at least one worker");
  }
};

enum class MoveKind : std::uint8_t { kNone = 0, kField = 1, kPlant = 2 };

struct SearchResult {
  Plan best_plan;
  Evaluation best_eval;
  Evaluation baseline_eval;
  std::vector<double> cost_trace;           // best cost after each iteration
  std::vector<std::uint8_t> accept_trace;   // MoveKind of the improving move, 0 if none
  double solve_time_s = 0.0;
  std::size_t evaluations = 0;
};

// Portable generator: fixed engine, hand-rolled draws (no std distributions,
// whose output differs between standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % n;
  }

 private:
  std::mt19937_64 engine_;
};

// Version of the seed-derivation scheme below. Bump when it changes so
// recorded runs are not replayed against the wrong scheme.
inline constexpr std::uint32_t kSeedSchemeVersion = 1;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Seed of worker `worker` in iteration `iteration`: a pure function of its
// three arguments.
inline std::uint64_t derive_worker_seed(std::uint64_t master, std::uint64_t iteration,
                                        std::uint64_t worker) {
  std::uint64_t h = detail::splitmix64(master ^ 0x6A09E667F3BCC908ULL);
  h = detail::splitmix64(h ^ iteration);
  h = detail::splitmix64(h ^ (worker + 0xBB67AE8584CAA73BULL));
  return h;
}

// Seed of the host stream driving the explore/exploit draws.
inline std::uint64_t derive_host_seed(std::uint64_t master) {
  return detail::splitmix64(detail::splitmix64(master ^ 0x3C6EF372FE94F82BULL));
}

// x* with probability epsilon, x_old otherwise.
inline const Plan& explore_update(const Plan& x_old, const Plan& x_star, double epsilon,
                                  Rng& rng) {
  return rng.uniform01() < epsilon ? x_star : x_old;
}

namespace detail {

struct Slot {
  std::size_t tour;
  std::size_t stop;
};

inline Slot find_plant(const Plan& x, PlantIndex b) {
  for (std::size_t g = 0; g < x.tours.size(); ++g) {
    const auto& stops = x.tours[g].stops;
    for (std::size_t k = 0; k < stops.size(); ++k) {
      if (stops[k].plant == b) return {g, k};
    }
  }
  throw std::logic_error("plant missing from plan");
}

inline std::pair<Slot, std::size_t> find_field(const Plan& x, FieldIndex f) {
  for (std::size_t g = 0; g < x.tours.size(); ++g) {
    const auto& stops = x.tours[g].stops;
    for (std::size_t k = 0; k < stops.size(); ++k) {
      const auto& fs = stops[k].fields;
      for (std::size_t p = 0; p < fs.size(); ++p) {
        if (fs[p] == f) return {{g, k}, p};
      }
    }
  }
  throw std::logic_error("field missing from plan");
}

}  // namespace detail

// Tours and plants touched by a move; everything else is unchanged.
struct MoveRecord {
  MoveKind kind = MoveKind::kNone;
  std::array<std::size_t, 4> tours{};
  std::array<PlantIndex, 4> plants{};
  std::size_t n_tours = 0;
  std::size_t n_plants = 0;

  void touch_tour(std::size_t g) {
    for (std::size_t i = 0; i < n_tours; ++i) {
      if (tours[i] == g) return;
    }
    tours[n_tours++] = g;
  }
  void touch_plant(PlantIndex b) {
    for (std::size_t i = 0; i < n_plants; ++i) {
      if (plants[i] == b) return;
    }
    plants[n_plants++] = b;
  }
};

// One remove-and-reinsert move, in place. A vertex is drawn uniformly from
// fields and plants. A field goes to a uniform position of the same plant
// (locked assignment) or of a uniformly drawn plant; a plant moves with all
// its fields to a uniform position of a uniformly drawn tour.
inline void perturb_once(Plan& x, Rng& rng, const CaseMode& mode, std::size_t n_fields,
                         std::size_t n_plants, MoveRecord& move) {
  const std::uint64_t k = rng.below(n_fields + n_plants);
  if (k < n_fields) {
    const auto f = static_cast<FieldIndex>(k);
    auto [slot, pos] = detail::find_field(x, f);
    auto& src = x.tours[slot.tour].stops[slot.stop].fields;
    src.erase(src.begin() + static_cast<std::ptrdiff_t>(pos));
    detail::Slot dst = slot;
    if (!mode.field_assignment_locked) {
      dst = detail::find_plant(x, static_cast<PlantIndex>(rng.below(n_plants)));
    }
    auto& target = x.tours[dst.tour].stops[dst.stop].fields;
    const auto at = rng.below(target.size() + 1);
    target.insert(target.begin() + static_cast<std::ptrdiff_t>(at), f);
    move.touch_tour(slot.tour);
    move.touch_tour(dst.tour);
    move.touch_plant(x.tours[slot.tour].stops[slot.stop].plant);
    move.touch_plant(x.tours[dst.tour].stops[dst.stop].plant);
    if (move.kind == MoveKind::kNone) move.kind = MoveKind::kField;
    return;
  }
  const auto b = static_cast<PlantIndex>(k - n_fields);
  const auto slot = detail::find_plant(x, b);
  auto& src = x.tours[slot.tour].stops;
  PlantVisit visit = std::move(src[slot.stop]);
  src.erase(src.begin() + static_cast<std::ptrdiff_t>(slot.stop));
  const auto dst_tour = static_cast<std::size_t>(rng.below(x.tours.size()));
  auto& target = x.tours[dst_tour].stops;
  const auto at = rng.below(target.size() + 1);
  target.insert(target.begin() + static_cast<std::ptrdiff_t>(at), std::move(visit));
  move.touch_tour(slot.tour);
  move.touch_tour(dst_tour);
  move.kind = MoveKind::kPlant;
}

// With `double_perturb` a second move follows the first; the record reports a
// plant move if either move relocated a plant.
inline MoveRecord perturb_in_place(Plan& x, Rng& rng, const CaseMode& mode, const Scenario& s,
                                   bool double_perturb = false) {
  MoveRecord move;
  perturb_once(x, rng, mode, s.field_count(), s.plant_count(), move);
  if (double_perturb) perturb_once(x, rng, mode, s.field_count(), s.plant_count(), move);
  return move;
}

inline Plan perturb(const Plan& x, Rng& rng, const CaseMode& mode, const Scenario& s,
                    bool double_perturb = false) {
  Plan out = x;
  perturb_in_place(out, rng, mode, s, double_perturb);
  return out;
}

struct CandidateOutcome {
  double cost = kInfiniteCost;
  Evaluation eval;
};

namespace detail {

// With a locked fleet every tour keeps its crew, so a crewed tour must not
// be emptied.
inline bool idles_locked_fleet(const Plan& candidate, const CaseMode& mode) {
  if (!mode.machinery_locked) return false;
  for (const auto& t : candidate.tours) {
    if (!t.active() && t.hu_total() + t.su_total() > 0) return true;
  }
  return false;
}

inline CandidateOutcome rejected() {
  CandidateOutcome out;
  out.eval.feasible = false;
  out.eval.total_cost = kInfiniteCost;
  return out;
}

// Steps shared by the full and the incremental evaluation once routing and
// demand are known; writes the evaluation into `eval` and returns the cost.
// `shuttle_of(g)` yields the shuttle distance of tour g.
template <typename ShuttleOf>
double finish_candidate(Evaluation& eval, FleetWorkspace& ws, const Scenario& s, Plan& candidate,
                        const MachineryPark& park, const CaseMode& mode,
                        double best_max_completion, CostModel model,
                        std::span<const TourRouting> routing, ShuttleOf&& shuttle_of) {
  if (!mode.machinery_locked) {
    try {
      balance_hus_with(routing, candidate, park, s.params(), ws);
      deal_sus(candidate, park, ws.active);
      assign_sus_with(routing, candidate, park, ws);
    } catch (const InfeasibleError&) {
      eval = rejected().eval;
      return kInfiniteCost;
    }
  }
  evaluate_into(eval, candidate, park, s.params(), routing, true, model, shuttle_of);
  if (mode.completion_filter_active && !(eval.max_completion < best_max_completion)) {
    return kInfiniteCost;
  }
  return eval.total_cost;
}

}  // namespace detail

// Demand check, embedded fleet assignment (unless locked), evaluation and the
// completion-time filter. The candidate's fleet counts are updated in place.
// Rejections are encoded as infinite cost.
inline CandidateOutcome evaluate_candidate(const Scenario& s, Plan& candidate,
                                           const MachineryPark& park, const CaseMode& mode,
                                           double best_max_completion,
                                           CostModel model = CostModel::kSkeleton) {
  if (!check_demand(s, candidate) || detail::idles_locked_fleet(candidate, mode)) {
    return detail::rejected();
  }
  const auto routing = route_summaries(s, candidate);
  CandidateOutcome out;
  FleetWorkspace ws;
  out.cost = detail::finish_candidate(
      out.eval, ws, s, candidate, park, mode, best_max_completion, model, routing,
      [&](std::size_t g) { return shuttle_km(s, candidate.tours[g], park); });
  return out;
}

namespace detail {

// Evaluates candidates derived from one broadcast plan by a single move.
// Geometry is kept per plant visit; only plants whose field list changed and
// tours whose stop list changed are recomputed. Shuttle drive counts are
// tabulated per SU mix. Each number comes from the same per-stop functions
// and is combined in the same order as in the full evaluation, so results
// are bit-identical to evaluate_candidate.
class IncrementalEvaluator {
 public:
  IncrementalEvaluator(const Scenario& s, const MachineryPark& park, const CaseMode& mode,
                       CostModel model)
      : s_(s), park_(park), mode_(mode), model_(model) {}

  void rebind(const Plan& broadcast) {
    const auto n_plants = s_.plant_count();
    stops_.resize(n_plants);
    memo_.resize(n_plants);
    delivered_.assign(n_plants, 0.0);
    fresh_.assign(n_plants, 0);
    for (const auto& t : broadcast.tours) {
      for (const auto& stop : t.stops) {
        stops_[stop.plant] = stop_routing(s_, stop);
        delivered_[stop.plant] = plant_supply(stop);
        memo_[stop.plant].clear();
      }
    }
    routing_.resize(broadcast.tours.size());
    for (std::size_t g = 0; g < broadcast.tours.size(); ++g) {
      routing_[g] = compose(broadcast.tours[g]);
    }
    short_plants_ = 0;
    for (std::size_t b = 0; b < n_plants; ++b) {
      if (delivered_[b] < s_.demand(static_cast<PlantIndex>(b))) ++short_plants_;
    }
  }

  double cost(Plan& candidate, const MoveRecord& move, double best_max_completion) {
    std::size_t short_plants = short_plants_;
    for (std::size_t i = 0; i < move.n_plants; ++i) {
      const PlantIndex b = move.plants[i];
      const auto slot = find_plant(candidate, b);
      const auto& stop = candidate.tours[slot.tour].stops[slot.stop];
      const bool was_short = delivered_[b] < s_.demand(b);
      const bool is_short = plant_supply(stop) < s_.demand(b);
      if (was_short != is_short) {
        if (is_short) {
          ++short_plants;
        } else {
          --short_plants;
        }
      }
    }
    if (short_plants > 0 || idles_locked_fleet(candidate, mode_)) return kInfiniteCost;

    // Plants with changed field lists shadow their cached entries.
    for (std::size_t i = 0; i < move.n_plants; ++i) {
      const PlantIndex b = move.plants[i];
      const auto slot = find_plant(candidate, b);
      fresh_stops_[i] = stop_routing(s_, candidate.tours[slot.tour].stops[slot.stop]);
      fresh_[b] = static_cast<char>(i + 1);
    }
    scratch_ = routing_;
    for (std::size_t i = 0; i < move.n_tours; ++i) {
      scratch_[move.tours[i]] = compose(candidate.tours[move.tours[i]]);
    }
    auto shuttle_of = [&](std::size_t g) { return tour_shuttle(candidate.tours[g]); };
    const double c = finish_candidate(eval_, ws_, s_, candidate, park_, mode_,
                                      best_max_completion, model_, scratch_, shuttle_of);
    for (std::size_t i = 0; i < move.n_plants; ++i) fresh_[move.plants[i]] = 0;
    return c;
  }

 private:
  double plant_supply(const PlantVisit& stop) const {
    double d = 0.0;
    for (FieldIndex f : stop.fields) d += s_.supply(f);
    return d;
  }

  TourRouting compose(const Tour& tour) const {
    return compose_routing(s_, tour, [&](std::size_t k) -> const StopRouting& {
      const PlantIndex b = tour.stops[k].plant;
      return fresh_[b] ? fresh_stops_[fresh_[b] - 1] : stops_[b];
    });
  }

  static constexpr std::size_t kMemoPerPlant = 16;

  // Drive counts of every field under one SU mix, built on first use.
  const std::vector<std::int32_t>& drive_table(const std::vector<int>& su_counts) {
    auto it = drives_.find(su_counts);
    if (it == drives_.end()) {
      std::vector<std::int32_t> table(s_.field_count());
      for (FieldIndex f = 0; f < table.size(); ++f) {
        table[f] = static_cast<std::int32_t>(field_drives(s_, f, su_counts, park_));
      }
      it = drives_.emplace(su_counts, std::move(table)).first;
    }
    return it->second;
  }

  // Untouched plants memoise their shuttle distance per SU mix until the
  // next rebind.
  double tour_shuttle(const Tour& tour) {
    const std::vector<std::int32_t>* table = nullptr;
    double km = 0.0;
    for (const auto& stop : tour.stops) {
      auto& memo = memo_[stop.plant];
      const double* hit = nullptr;
      if (!fresh_[stop.plant]) {
        for (const auto& [counts, value] : memo) {
          if (counts == tour.su_counts) {
            hit = &value;
            break;
          }
        }
      }
      if (hit) {
        km += *hit;
        continue;
      }
      if (!table) table = &drive_table(tour.su_counts);
      const double value =
          stop_shuttle_km_with(s_, stop, [&](FieldIndex f) { return (*table)[f]; });
      if (!fresh_[stop.plant] && memo.size() < kMemoPerPlant) {
        memo.emplace_back(tour.su_counts, value);
      }
      km += value;
    }
    return km;
  }

  const Scenario& s_;
  const MachineryPark& park_;
  CaseMode mode_;
  CostModel model_;
  std::vector<StopRouting> stops_;  // per plant, as in the broadcast plan
  std::array<StopRouting, 4> fresh_stops_{};
  std::vector<char> fresh_;  // 1-based index into fresh_stops_, 0 if cached
  std::vector<TourRouting> routing_;
  std::vector<TourRouting> scratch_;
  Evaluation eval_;
  FleetWorkspace ws_;
  std::vector<double> delivered_;
  std::size_t short_plants_ = 0;
  std::map<std::vector<int>, std::vector<std::int32_t>> drives_;
  std::vector<std::vector<std::pair<std::vector<int>, double>>> memo_;
};

}  // namespace detail

// Reconstructs worker's candidate from the broadcast plan and its seed.
inline Plan replay_worker(const Plan& broadcast, std::uint64_t worker_seed, const CaseMode& mode,
                          const Scenario& s, bool double_perturb = false) {
  Rng rng(worker_seed);
  return perturb(broadcast, rng, mode, s, double_perturb);
}

// Per-iteration view handed to an observer after the reduction.
struct IterationRecord {
  std::size_t iteration = 0;
  const Plan* broadcast = nullptr;
  std::size_t winner = 0;
  std::uint64_t winner_seed = 0;
  double winner_cost = kInfiniteCost;
  const std::vector<double>* worker_costs = nullptr;
};

using SearchObserver = std::function<void(const IterationRecord&)>;

namespace detail {

// Fixed set of threads executing index ranges; the caller's thread takes
// part, and run() returns once every index has been processed.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned n_threads) {
    for (unsigned t = 1; t < n_threads; ++t) {
      threads_.emplace_back([this, t] { loop(t); });
    }
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    wake_.notify_all();
    for (auto& th : threads_) th.join();
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const { return static_cast<unsigned>(threads_.size()) + 1; }

  void run(std::size_t n_tasks, const std::function<void(std::size_t, unsigned)>& fn) {
    if (threads_.empty()) {
      for (std::size_t i = 0; i < n_tasks; ++i) fn(i, 0);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &fn;
      n_tasks_ = n_tasks;
      pending_ = threads_.size();
      ++generation_;
    }
    wake_.notify_all();
    work(0);
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void work(unsigned t) {
    const std::size_t stride = size();
    for (std::size_t i = t; i < n_tasks_; i += stride) (*job_)(i, t);
  }

  void loop(unsigned t) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      work(t);
      {
        std::lock_guard lock(mutex_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t, unsigned)>* job_ = nullptr;
  std::size_t n_tasks_ = 0;
  std::size_t pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace detail

inline SearchResult run_search(const Scenario& s, const MachineryPark& park,
                               const SearchConfig& config, const SearchObserver& observer = {}) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto initial = build_initial(s, park, config.cost_model);
  if (!initial.eval.feasible) throw InfeasibleError("initial plan violates plant demand");

  SearchResult result;
  result.baseline_eval = initial.eval;
  result.best_eval = initial.eval;
  result.best_plan = initial.plan;

  const CaseMode& mode = config.mode;
  const std::size_t n_iters =
      mode.construction_only() ? 0 : static_cast<std::size_t>(config.n_iters);
  const auto n_workers = static_cast<std::size_t>(config.n_workers);
  result.cost_trace.reserve(n_iters);
  result.accept_trace.reserve(n_iters);

  Plan x_star = std::move(initial.plan);
  Plan x_old = x_star;
  double best_cost = initial.eval.total_cost;
  double best_max_completion = initial.eval.max_completion;
  Rng host(derive_host_seed(config.master_seed));

  unsigned n_threads = config.n_threads ? config.n_threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n_workers)));
  detail::WorkerPool pool(n_threads);
  std::vector<Plan> scratch(pool.size());
  std::vector<detail::IncrementalEvaluator> evaluators(
      pool.size(), detail::IncrementalEvaluator(s, park, mode, config.cost_model));
  std::vector<std::size_t> bound_to(pool.size(), static_cast<std::size_t>(-1));
  std::vector<double> costs(n_workers);

  for (std::size_t it = 0; it < n_iters; ++it) {
    const Plan& x = explore_update(x_old, x_star, config.epsilon, host);

    pool.run(n_workers, [&](std::size_t i, unsigned t) {
      if (bound_to[t] != it) {
        evaluators[t].rebind(x);
        bound_to[t] = it;
      }
      Plan& cand = scratch[t];
      cand = x;
      Rng rng(derive_worker_seed(config.master_seed, it, i));
      const auto move = perturb_in_place(cand, rng, mode, s, config.double_perturb);
      costs[i] = evaluators[t].cost(cand, move, best_max_completion);
    });
    result.evaluations += n_workers;

    std::size_t winner = 0;
    for (std::size_t i = 1; i < n_workers; ++i) {
      if (costs[i] < costs[winner]) winner = i;
    }
    const std::uint64_t winner_seed = derive_worker_seed(config.master_seed, it, winner);
    if (observer) {
      observer({it, &x, winner, winner_seed, costs[winner], &costs});
    }

    auto indicator = MoveKind::kNone;
    if (std::isfinite(costs[winner])) {
      Plan rebuilt = x;
      Rng rng(winner_seed);
      const MoveKind kind = perturb_in_place(rebuilt, rng, mode, s, config.double_perturb).kind;
      auto outcome =
          evaluate_candidate(s, rebuilt, park, mode, best_max_completion, config.cost_model);
      if (outcome.cost != costs[winner]) {
        throw std::logic_error("replayed candidate does not reproduce the worker's cost");
      }
      if (outcome.cost < best_cost) {
        best_cost = outcome.cost;
        best_max_completion = outcome.eval.max_completion;
        x_star = rebuilt;
        result.best_eval = std::move(outcome.eval);
        indicator = kind;
      }
      x_old = std::move(rebuilt);
    }
    result.cost_trace.push_back(best_cost);
    result.accept_trace.push_back(static_cast<std::uint8_t>(indicator));
  }

  result.best_plan = std::move(x_star);
  result.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace bioroute
