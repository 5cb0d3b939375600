#pragma once

// Embedded fleet assignment: HU balancing against the worst completion time
// and greedy SU redistribution against the worst average waiting time.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "bioroute/cost.hpp"
#include "bioroute/model.hpp"
#include "bioroute/plan.hpp"

namespace bioroute {

// Accepted moves must improve the worst-tour metric by more than this (h).
inline constexpr double kFleetTolerance = 1e-9;

namespace detail {

inline void active_indices(const Plan& plan, std::vector<std::size_t>& out) {
  out.clear();
  for (std::size_t g = 0; g < plan.tours.size(); ++g) {
    if (plan.tours[g].active()) out.push_back(g);
  }
}

inline std::vector<std::size_t> active_indices(const Plan& plan) {
  std::vector<std::size_t> out;
  active_indices(plan, out);
  return out;
}

// Deals every unit of every class round-robin over `targets`, continuing the
// pointer across classes, so per-tour totals differ by at most one and the
// remainder lands on the lowest-index tours.
template <typename Classes, typename CountOf>
void deal_even(Plan& plan, std::span<const std::size_t> targets, const Classes& classes,
               CountOf counts_of) {
  const std::size_t n_classes = classes.size();
  for (auto& t : plan.tours) counts_of(t).assign(n_classes, 0);
  if (targets.empty()) return;
  std::size_t next = 0;
  for (std::size_t l = 0; l < n_classes; ++l) {
    for (int k = 0; k < classes[l].count_total; ++k) {
      ++counts_of(plan.tours[targets[next]])[l];
      next = (next + 1) % targets.size();
    }
  }
}

inline std::size_t argmax_over(std::span<const std::size_t> ids, std::span<const double> value,
                               std::size_t skip_a = static_cast<std::size_t>(-1),
                               std::size_t skip_b = static_cast<std::size_t>(-1)) {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t g : ids) {
    if (g == skip_a || g == skip_b) continue;
    if (best == static_cast<std::size_t>(-1) || value[g] > value[best]) best = g;
  }
  return best;
}

inline std::size_t argmin_over(std::span<const std::size_t> ids, std::span<const double> value,
                               std::size_t skip_a = static_cast<std::size_t>(-1),
                               std::size_t skip_b = static_cast<std::size_t>(-1)) {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t g : ids) {
    if (g == skip_a || g == skip_b) continue;
    if (best == static_cast<std::size_t>(-1) || value[g] < value[best]) best = g;
  }
  return best;
}

inline double max_over(std::span<const std::size_t> ids, std::span<const double> value) {
  double m = -kInfiniteCost;
  for (std::size_t g : ids) m = std::max(m, value[g]);
  return m;
}

}  // namespace detail

// Scratch buffers for the fleet heuristics, reusable across calls.
struct FleetWorkspace {
  std::vector<std::size_t> active;
  std::vector<std::size_t> order;
  std::vector<std::size_t> donors;
  std::vector<double> value;
};

namespace detail {

inline void deal_hus(Plan& plan, const MachineryPark& park, std::span<const std::size_t> targets) {
  deal_even(plan, targets, park.hu_classes,
            [](Tour& t) -> std::vector<int>& { return t.hu_counts; });
}

inline void deal_sus(Plan& plan, const MachineryPark& park, std::span<const std::size_t> targets) {
  deal_even(plan, targets, park.su_classes,
            [](Tour& t) -> std::vector<int>& { return t.su_counts; });
}

}  // namespace detail

// Even split of HUs over active tours; inactive tours get none.
inline void split_hus_evenly(Plan& plan, const MachineryPark& park) {
  detail::deal_hus(plan, park, detail::active_indices(plan));
}

// Even split of SUs over active tours; inactive tours get none.
inline void split_sus_evenly(Plan& plan, const MachineryPark& park) {
  detail::deal_sus(plan, park, detail::active_indices(plan));
}

// HU balancing on precomputed routing. Starts from the even split, then moves
// one HU at a time to the tour with the maximum completion time while that
// strictly lowers the maximum. Donors are tried by rising completion time,
// classes by rising work rate.
inline void balance_hus_with(std::span<const TourRouting> routing, Plan& plan,
                             const MachineryPark& park, const PhysicalParams& params,
                             FleetWorkspace& ws) {
  auto& active = ws.active;
  detail::active_indices(plan, active);
  if (static_cast<int>(active.size()) > park.hu_total()) {
    throw InfeasibleError("more active tours than HUs");
  }
  detail::deal_hus(plan, park, active);
  if (active.size() <= 1) return;

  auto& hu_order = ws.order;
  hu_order.resize(park.hu_classes.size());
  std::iota(hu_order.begin(), hu_order.end(), std::size_t{0});
  std::stable_sort(hu_order.begin(), hu_order.end(), [&](std::size_t a, std::size_t b) {
    return park.hu_classes[a].work_rate_area < park.hu_classes[b].work_rate_area;
  });

  auto& compl_h = ws.value;
  compl_h.assign(plan.tours.size(), 0.0);
  auto refresh = [&](std::size_t g) {
    compl_h[g] = completion_time_from(routing[g], plan.tours[g].hu_counts, park, params);
  };
  for (std::size_t g : active) refresh(g);

  auto& donors = ws.donors;
  const std::size_t max_moves =
      static_cast<std::size_t>(park.hu_total()) * plan.tours.size() * 4 + 16;
  for (std::size_t step = 0; step < max_moves; ++step) {
    const std::size_t g_max = detail::argmax_over(active, compl_h);
    const double current = compl_h[g_max];
    donors.clear();
    for (std::size_t g : active) {
      if (g != g_max) donors.push_back(g);
    }
    std::stable_sort(donors.begin(), donors.end(),
                     [&](std::size_t a, std::size_t b) { return compl_h[a] < compl_h[b]; });
    bool moved = false;
    for (std::size_t d : donors) {
      auto& from = plan.tours[d].hu_counts;
      if (plan.tours[d].hu_total() <= 1) continue;
      for (std::size_t l : hu_order) {
        if (from[l] == 0) continue;
        --from[l];
        ++plan.tours[g_max].hu_counts[l];
        const double saved_d = compl_h[d];
        const double saved_max = compl_h[g_max];
        refresh(d);
        refresh(g_max);
        if (detail::max_over(active, compl_h) < current - kFleetTolerance) {
          moved = true;
          break;
        }
        ++from[l];
        --plan.tours[g_max].hu_counts[l];
        compl_h[d] = saved_d;
        compl_h[g_max] = saved_max;
      }
      if (moved) break;
    }
    if (!moved) return;
  }
}

inline void balance_hus_with(std::span<const TourRouting> routing, Plan& plan,
                             const MachineryPark& park, const PhysicalParams& params) {
  FleetWorkspace ws;
  balance_hus_with(routing, plan, park, params, ws);
}

inline Plan balance_hus(const Scenario& s, Plan plan, const MachineryPark& park) {
  const auto routing = route_summaries(s, plan);
  balance_hus_with(routing, plan, park, s.params());
  return plan;
}

namespace detail {

// Moves SUs off inactive tours and guarantees every active tour at least one.
inline void normalise_sus(Plan& plan, const MachineryPark& park,
                          std::span<const std::size_t> active) {
  const auto n_classes = park.su_classes.size();
  std::size_t next = 0;
  for (std::size_t g = 0; g < plan.tours.size(); ++g) {
    auto& t = plan.tours[g];
    t.su_counts.resize(n_classes, 0);
    if (t.active()) continue;
    for (std::size_t l = 0; l < n_classes; ++l) {
      while (t.su_counts[l] > 0) {
        --t.su_counts[l];
        ++plan.tours[active[next]].su_counts[l];
        next = (next + 1) % active.size();
      }
    }
  }
  for (std::size_t g : active) {
    while (plan.tours[g].su_total() == 0) {
      std::size_t rich = active.front();
      for (std::size_t h : active) {
        if (plan.tours[h].su_total() > plan.tours[rich].su_total()) rich = h;
      }
      auto& counts = plan.tours[rich].su_counts;
      const auto l = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      --counts[l];
      ++plan.tours[g].su_counts[l];
    }
  }
}

}  // namespace detail

// Greedy SU redistribution on precomputed routing (requires HU counts).
// Each round moves one SU from the least-waiting tour to the worst one,
// preferring the shortest-fill class that brings the worst tour below the
// runner-up, else the longest-fill class. Stops once the worst average
// waiting time no longer drops.
inline void assign_sus_with(std::span<const TourRouting> routing, Plan& plan,
                            const MachineryPark& park, FleetWorkspace& ws) {
  auto& active = ws.active;
  detail::active_indices(plan, active);
  if (active.empty()) return;
  if (static_cast<int>(active.size()) > park.su_total()) {
    throw InfeasibleError("more active tours than SUs");
  }
  detail::normalise_sus(plan, park, active);
  if (active.size() == 1) return;

  auto& wait_h = ws.value;
  wait_h.assign(plan.tours.size(), 0.0);
  auto refresh = [&](std::size_t g) {
    const auto& t = plan.tours[g];
    wait_h[g] = avg_waiting_time_from(routing[g], t.hu_counts, t.su_counts, park);
  };
  for (std::size_t g : active) refresh(g);

  auto& classes = ws.order;
  const std::size_t max_moves =
      static_cast<std::size_t>(park.su_total()) * plan.tours.size() * 4 + 16;
  for (std::size_t step = 0; step < max_moves; ++step) {
    const std::size_t g_max = detail::argmax_over(active, wait_h);
    const std::size_t g_2nd = detail::argmax_over(active, wait_h, g_max);
    std::size_t g_min = detail::argmin_over(active, wait_h, g_max, g_2nd);
    if (g_min == static_cast<std::size_t>(-1)) g_min = g_2nd;  // two active tours
    const double current = wait_h[g_max];
    const double runner_up = wait_h[g_2nd];

    auto& donor = plan.tours[g_min].su_counts;
    auto& taker = plan.tours[g_max].su_counts;
    if (plan.tours[g_min].su_total() <= 1) return;

    classes.clear();
    for (std::size_t l = 0; l < donor.size(); ++l) {
      if (donor[l] > 0) classes.push_back(l);
    }
    std::stable_sort(classes.begin(), classes.end(), [&](std::size_t a, std::size_t b) {
      return park.su_classes[a].fill_time < park.su_classes[b].fill_time;
    });

    const double saved_min = wait_h[g_min];
    std::size_t chosen = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const std::size_t l = classes[k];
      --donor[l];
      ++taker[l];
      refresh(g_max);
      if (wait_h[g_max] < runner_up || k + 1 == classes.size()) {
        chosen = l;
        break;
      }
      ++donor[l];
      --taker[l];
    }
    refresh(g_min);
    refresh(g_max);
    if (detail::max_over(active, wait_h) < current - kFleetTolerance) continue;
    ++donor[chosen];
    --taker[chosen];
    wait_h[g_min] = saved_min;
    wait_h[g_max] = current;
    return;
  }
}

inline void assign_sus_with(std::span<const TourRouting> routing, Plan& plan,
                            const MachineryPark& park) {
  FleetWorkspace ws;
  assign_sus_with(routing, plan, park, ws);
}

inline Plan assign_sus(const Scenario& s, Plan plan, const MachineryPark& park) {
  const auto routing = route_summaries(s, plan);
  assign_sus_with(routing, plan, park);
  return plan;
}

}  // namespace bioroute
