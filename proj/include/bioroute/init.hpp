#pragma once

// Deterministic construction heuristic mimicking a human scheduler: plants
// to tours by nearest-neighbour chaining, fields to the closest plant still
// short of its demand, fields ordered by nearest-neighbour chains.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "bioroute/assign.hpp"
#include "bioroute/cost.hpp"
#include "bioroute/model.hpp"
#include "bioroute/plan.hpp"

namespace bioroute {

using PlantTours = std::vector<std::vector<PlantIndex>>;

// Tours are filled one after another up to their quota (floor or ceil of
// N_B / n_tours, larger quotas first), each chaining from HQ to the nearest
// unassigned plant.
inline PlantTours order_plants(const Scenario& s, std::size_t n_tours) {
  const std::size_t n_plants = s.plant_count();
  if (n_tours < 1 || n_tours > n_plants) {
    throw InputError("number of tours must lie in [1, number of plants]");
  }
  std::vector<char> taken(n_plants, 0);
  PlantTours tours(n_tours);
  for (std::size_t g = 0; g < n_tours; ++g) {
    const std::size_t quota = n_plants / n_tours + (g < n_plants % n_tours ? 1 : 0);
    std::size_t from = Scenario::hq_vertex().id;
    for (std::size_t k = 0; k < quota; ++k) {
      PlantIndex best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (PlantIndex b = 0; b < n_plants; ++b) {
        if (taken[b]) continue;
        const double d = s.raw_distance(from, s.plant_vertex(b).id);
        if (d < best_d) {
          best_d = d;
          best = b;
        }
      }
      taken[best] = 1;
      tours[g].push_back(best);
      from = s.plant_vertex(best).id;
    }
  }
  return tours;
}

// Returns the owning plant of every field. Fields are taken in ascending id
// order; while some plant is short of its demand each field goes to the
// nearest such plant, afterwards to its nearest plant overall.
inline std::vector<PlantIndex> assign_fields(const Scenario& s, const PlantTours& /*plant_tours*/) {
  s.require_satisfiable();
  const std::size_t n_plants = s.plant_count();
  std::vector<FieldIndex> order(s.field_count());
  std::iota(order.begin(), order.end(), FieldIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](FieldIndex a, FieldIndex b) {
    return s.fields()[a].id < s.fields()[b].id;
  });

  std::vector<double> delivered(n_plants, 0.0);
  std::size_t short_plants = 0;
  for (PlantIndex b = 0; b < n_plants; ++b) {
    if (s.demand(b) > 0.0) ++short_plants;
  }
  std::vector<PlantIndex> owner(s.field_count(), 0);
  for (FieldIndex f : order) {
    const bool filling = short_plants > 0;
    PlantIndex best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (PlantIndex b = 0; b < n_plants; ++b) {
      if (filling && delivered[b] >= s.demand(b)) continue;
      const double d = s.field_plant(f, b);
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    owner[f] = best;
    const bool was_short = delivered[best] < s.demand(best);
    delivered[best] += s.supply(f);
    if (was_short && delivered[best] >= s.demand(best)) --short_plants;
  }
  if (short_plants > 0) {
    throw InfeasibleError("greedy field assignment left a plant below its minimum demand");
  }
  return owner;
}

// Routing-only plan: per tour and per plant, a nearest-neighbour chain over
// the plant's fields, anchored at HQ for the first plant and at the last
// harvested field afterwards.
inline Plan order_fields(const Scenario& s, const std::vector<PlantIndex>& owner,
                         const PlantTours& plant_tours) {
  std::vector<std::vector<FieldIndex>> by_plant(s.plant_count());
  for (FieldIndex f = 0; f < owner.size(); ++f) by_plant[owner[f]].push_back(f);

  Plan plan;
  plan.tours.resize(plant_tours.size());
  for (std::size_t g = 0; g < plant_tours.size(); ++g) {
    std::size_t anchor = Scenario::hq_vertex().id;
    for (PlantIndex b : plant_tours[g]) {
      PlantVisit visit{b, {}};
      auto pool = by_plant[b];
      std::vector<char> used(pool.size(), 0);
      for (std::size_t k = 0; k < pool.size(); ++k) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size(); ++i) {
          if (used[i]) continue;
          const double d = s.raw_distance(anchor, s.field_vertex(pool[i]).id);
          if (d < best_d) {
            best_d = d;
            best = i;
          }
        }
        used[best] = 1;
        visit.fields.push_back(pool[best]);
        anchor = s.field_vertex(pool[best]).id;
      }
      plan.tours[g].stops.push_back(std::move(visit));
    }
  }
  return plan;
}

struct InitialSolution {
  Plan plan;
  Evaluation eval;
};

// Baseline plan: one tour per HU (N_T = N_HU_total), fleet split evenly.
inline InitialSolution build_initial(const Scenario& s, const MachineryPark& park,
                                     CostModel model = CostModel::kSkeleton) {
  park.validate();
  s.require_satisfiable();
  const auto n_tours = static_cast<std::size_t>(park.hu_total());
  const auto routed_tours = std::min(n_tours, s.plant_count());
  const auto plant_tours = order_plants(s, routed_tours);
  const auto owner = assign_fields(s, plant_tours);
  Plan plan = order_fields(s, owner, plant_tours);
  plan.tours.resize(n_tours);
  split_hus_evenly(plan, park);
  split_sus_evenly(plan, park);
  if (static_cast<int>(plan.active_tours()) > park.su_total()) {
    throw InfeasibleError("fewer SUs than tours");
  }
  Evaluation eval = evaluate(s, plan, park, model);
  return {std::move(plan), std::move(eval)};
}

}  // namespace bioroute
