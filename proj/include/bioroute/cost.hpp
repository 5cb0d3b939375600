#pragma once

// Plan evaluation: demand feasibility, accumulated path length, completion
// times and harvester waiting times.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bioroute/model.hpp"
#include "bioroute/plan.hpp"

namespace bioroute {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

// kSkeleton: SUs drive HQ -> first field and last plant -> HQ once, everything
// else is covered by shuttle round trips.
// kAccompany: additionally every SU follows the HU on each inter-field leg.
enum class CostModel { kSkeleton, kAccompany };

// Fleet-independent geometry of one tour.
struct TourRouting {
  bool active = false;
  std::size_t n_fields = 0;
  double hu_path_km = 0.0;      // HQ -> fields in harvest order -> HQ
  double inter_field_km = 0.0;  // field-to-field legs only
  double su_skeleton_km = 0.0;  // HQ -> first field, last plant -> HQ
  double hectares = 0.0;
  // Mean over plants (with fields) of the mean field<->plant round-trip time.
  double mean_edge_time_h = 0.0;
};

// Geometry of one plant visit: its fields in harvest order.
struct StopRouting {
  std::size_t n_fields = 0;
  FieldIndex first = 0;
  FieldIndex last = 0;
  double inter_field_km = 0.0;  // legs between consecutive fields of this stop
  double hectares = 0.0;
  double edge_time_sum_h = 0.0;  // sum of field<->plant round-trip times
};

inline StopRouting stop_routing(const Scenario& s, const PlantVisit& stop) {
  StopRouting r;
  r.n_fields = stop.fields.size();
  if (r.n_fields == 0) return r;
  const double v_su = s.params().v_su_edge;
  r.first = stop.fields.front();
  r.last = stop.fields.back();
  for (std::size_t i = 0; i < r.n_fields; ++i) {
    const FieldIndex f = stop.fields[i];
    if (i > 0) r.inter_field_km += s.field_field(stop.fields[i - 1], f);
    r.hectares += s.fields()[f].size_ha;
    r.edge_time_sum_h += 2.0 * s.field_plant(f, stop.plant) / v_su;
  }
  return r;
}

// Chains per-stop geometry into the tour summary. `stop_of(k)` yields the
// StopRouting of the k-th stop; plants without fields are skipped.
template <typename StopOf>
TourRouting compose_routing(const Scenario& s, const Tour& tour, StopOf&& stop_of) {
  TourRouting r;
  r.active = tour.active();
  bool first = true;
  FieldIndex prev = 0;
  PlantIndex last_plant = 0;
  std::size_t plants_with_fields = 0;
  double edge_acc = 0.0;
  for (std::size_t k = 0; k < tour.stops.size(); ++k) {
    const StopRouting& sr = stop_of(k);
    if (sr.n_fields == 0) continue;
    if (first) {
      r.hu_path_km = s.hq_field(sr.first);
      r.su_skeleton_km = r.hu_path_km;
      first = false;
    } else {
      r.inter_field_km += s.field_field(prev, sr.first);
    }
    r.inter_field_km += sr.inter_field_km;
    r.hectares += sr.hectares;
    r.n_fields += sr.n_fields;
    edge_acc += sr.edge_time_sum_h / static_cast<double>(sr.n_fields);
    ++plants_with_fields;
    prev = sr.last;
    last_plant = tour.stops[k].plant;
  }
  if (r.n_fields > 0) {
    r.hu_path_km += r.inter_field_km + s.hq_field(prev);
    r.su_skeleton_km += s.hq_plant(last_plant);
    r.mean_edge_time_h = edge_acc / static_cast<double>(plants_with_fields);
  }
  return r;
}

inline TourRouting route_summary(const Scenario& s, const Tour& tour) {
  StopRouting sr;
  return compose_routing(s, tour, [&](std::size_t k) -> const StopRouting& {
    sr = stop_routing(s, tour.stops[k]);
    return sr;
  });
}

inline bool check_demand(const Scenario& s, const Plan& plan) {
  std::vector<double> delivered(s.plant_count(), 0.0);
  for (const auto& t : plan.tours) {
    for (const auto& stop : t.stops) {
      for (FieldIndex f : stop.fields) delivered[stop.plant] += s.supply(f);
    }
  }
  for (std::size_t b = 0; b < delivered.size(); ++b) {
    if (delivered[b] < s.demand(static_cast<PlantIndex>(b))) return false;
  }
  return true;
}

// Shuttle drives needed for field f under the SU mix `su_counts`. The
// field's tonnage is split over the SU classes in proportion to their
// aggregate capacity.
inline long field_drives(const Scenario& s, FieldIndex f, std::span<const int> su_counts,
                         const MachineryPark& park) {
  const auto& classes = park.su_classes;
  double capacity = 0.0;
  for (std::size_t l = 0; l < classes.size(); ++l) {
    capacity += su_counts[l] * classes[l].load_capacity;
  }
  if (!(capacity > 0.0)) return 0;
  const double tonnes = s.supply_tonnes(f);
  long drives = 0;
  for (std::size_t l = 0; l < classes.size(); ++l) {
    if (su_counts[l] == 0) continue;
    const double share = su_counts[l] * classes[l].load_capacity / capacity;
    drives += shuttle_count(share * tonnes, classes[l].load_capacity);
  }
  return drives;
}

// Loaded-plus-empty shuttle distance of one plant visit; `drives_of(f)`
// returns the drive count of field f.
template <typename DrivesOf>
double stop_shuttle_km_with(const Scenario& s, const PlantVisit& stop, DrivesOf&& drives_of) {
  double km = 0.0;
  for (FieldIndex f : stop.fields) {
    km += 2.0 * static_cast<double>(drives_of(f)) * s.field_plant(f, stop.plant);
  }
  return km;
}

inline double stop_shuttle_km(const Scenario& s, const PlantVisit& stop,
                              std::span<const int> su_counts, const MachineryPark& park) {
  return stop_shuttle_km_with(
      s, stop, [&](FieldIndex f) { return field_drives(s, f, su_counts, park); });
}

inline double shuttle_km(const Scenario& s, const Tour& tour, const MachineryPark& park) {
  double km = 0.0;
  for (const auto& stop : tour.stops) km += stop_shuttle_km(s, stop, tour.su_counts, park);
  return km;
}

inline double tour_cost_with_shuttle(const Tour& tour, const TourRouting& r, double shuttle,
                                    CostModel model) {
  if (!r.active) return 0.0;
  const double n_hu = tour.hu_total();
  const double n_su = tour.su_total();
  double km = n_hu * r.hu_path_km + n_su * r.su_skeleton_km + shuttle;
  if (model == CostModel::kAccompany) km += n_su * r.inter_field_km;
  return km;
}

inline double tour_cost_from(const Scenario& s, const Tour& tour, const MachineryPark& park,
                             const TourRouting& r, CostModel model = CostModel::kSkeleton) {
  if (!r.active) return 0.0;
  return tour_cost_with_shuttle(tour, r, shuttle_km(s, tour, park), model);
}

struct TourCost {
  double km = 0.0;
  bool active = false;
};

// Inactive tours report zero with active=false rather than throwing.
inline TourCost tour_cost(const Scenario& s, const Tour& tour, const MachineryPark& park,
                          CostModel model = CostModel::kSkeleton) {
  if (!tour.active()) return {};
  return {tour_cost_from(s, tour, park, route_summary(s, tour), model), true};
}

inline double completion_time_from(const TourRouting& r, std::span<const int> hu_counts,
                                   const MachineryPark& park, const PhysicalParams& params) {
  if (!r.active || r.n_fields == 0) return 0.0;
  double rate = 0.0;
  for (std::size_t l = 0; l < hu_counts.size(); ++l) {
    rate += hu_counts[l] * park.hu_classes[l].work_rate_area;
  }
  if (!(rate > 0.0)) return kInfiniteCost;
  return r.hu_path_km / params.v_hu_edge + r.hectares / rate;
}

inline double completion_time(const Scenario& s, const Tour& tour, const MachineryPark& park) {
  if (!tour.active()) return 0.0;
  if (tour.hu_total() < 1) throw InputError("active tour has no HU");
  return completion_time_from(route_summary(s, tour), tour.hu_counts, park, s.params());
}

// SU class with the largest (or smallest) fill time among those present on a
// tour; lowest index on ties. Returns -1 when the tour has no SU.
inline int largest_fill_class(std::span<const int> su_counts, const MachineryPark& park) {
  int best = -1;
  for (std::size_t l = 0; l < su_counts.size(); ++l) {
    if (su_counts[l] <= 0) continue;
    if (best < 0 || park.su_classes[l].fill_time > park.su_classes[best].fill_time) {
      best = static_cast<int>(l);
    }
  }
  return best;
}

inline int smallest_fill_class(std::span<const int> su_counts, const MachineryPark& park) {
  int best = -1;
  for (std::size_t l = 0; l < su_counts.size(); ++l) {
    if (su_counts[l] <= 0) continue;
    if (best < 0 || park.su_classes[l].fill_time < park.su_classes[best].fill_time) {
      best = static_cast<int>(l);
    }
  }
  return best;
}

// Fill-time cover provided by the tour's SUs while one SU of `case_class` is
// on the road, per harvester. Subtracted from the round-trip time.
inline double fill_cover_h(std::span<const int> hu_counts, std::span<const int> su_counts,
                           const MachineryPark& park, std::size_t case_class) {
  int n_hu = 0;
  for (int c : hu_counts) n_hu += c;
  double cover = (su_counts[case_class] - 1) * park.su_classes[case_class].fill_time;
  for (std::size_t l = 0; l < su_counts.size(); ++l) {
    if (l == case_class) continue;
    cover += su_counts[l] * park.su_classes[l].fill_time;
  }
  return cover / n_hu;
}

// Harvester waiting time at field `f` delivering to plant `b`; positive
// values mean the HU idles waiting for an SU.
inline double waiting_time(const Scenario& s, const Tour& tour, const MachineryPark& park,
                           FieldIndex f, PlantIndex b, std::size_t case_class) {
  if (case_class >= tour.su_counts.size() || tour.su_counts[case_class] <= 0) {
    throw InputError("waiting-time case class is not present on the tour");
  }
  if (tour.hu_total() < 1) throw InputError("tour has no HU");
  const double edge = 2.0 * s.field_plant(f, b) / s.params().v_su_edge;
  return edge - fill_cover_h(tour.hu_counts, tour.su_counts, park, case_class);
}

inline double avg_waiting_time_from(const TourRouting& r, std::span<const int> hu_counts,
                                    std::span<const int> su_counts, const MachineryPark& park) {
  if (!r.active || r.n_fields == 0) return 0.0;
  const int case_class = largest_fill_class(su_counts, park);
  if (case_class < 0) return kInfiniteCost;
  return r.mean_edge_time_h -
         fill_cover_h(hu_counts, su_counts, park, static_cast<std::size_t>(case_class));
}

// Average over the tour's plants of the average over their fields of the
// waiting time, evaluated for the largest-fill-time SU class on the tour.
inline double avg_waiting_time(const Scenario& s, const Tour& tour, const MachineryPark& park) {
  if (!tour.active()) return 0.0;
  if (tour.hu_total() < 1) throw InputError("tour has no HU");
  if (tour.su_total() < 1) throw InputError("tour has no SU");
  return avg_waiting_time_from(route_summary(s, tour), tour.hu_counts, tour.su_counts, park);
}

struct Evaluation {
  std::vector<double> per_tour_cost;      // km
  std::vector<double> completion_times;   // h
  std::vector<double> avg_waiting_times;  // h
  std::vector<char> active;
  double total_cost = 0.0;
  double max_completion = 0.0;
  std::size_t active_tours = 0;
  bool feasible = true;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

// Evaluation from precomputed routing summaries (one per tour) into `e`,
// reusing its storage. `shuttle_of` returns the shuttle distance of tour g.
template <typename ShuttleOf>
void evaluate_into(Evaluation& e, const Plan& plan, const MachineryPark& park,
                   const PhysicalParams& params, std::span<const TourRouting> routing,
                   bool demand_ok, CostModel model, ShuttleOf&& shuttle_of) {
  const auto n = plan.tours.size();
  e.per_tour_cost.assign(n, 0.0);
  e.completion_times.assign(n, 0.0);
  e.avg_waiting_times.assign(n, 0.0);
  e.active.assign(n, 0);
  e.total_cost = 0.0;
  e.max_completion = 0.0;
  e.active_tours = 0;
  e.feasible = demand_ok;
  double total = 0.0;
  for (std::size_t g = 0; g < n; ++g) {
    const auto& t = plan.tours[g];
    const auto& r = routing[g];
    if (!r.active) continue;
    e.active[g] = 1;
    ++e.active_tours;
    if (t.hu_total() < 1 || t.su_total() < 1) {
      e.feasible = false;
      continue;
    }
    e.per_tour_cost[g] = tour_cost_with_shuttle(t, r, shuttle_of(g), model);
    e.completion_times[g] = completion_time_from(r, t.hu_counts, park, params);
    e.avg_waiting_times[g] = avg_waiting_time_from(r, t.hu_counts, t.su_counts, park);
    e.max_completion = std::max(e.max_completion, e.completion_times[g]);
    total += e.per_tour_cost[g];
  }
  e.total_cost = e.feasible ? total : kInfiniteCost;
}

template <typename ShuttleOf>
Evaluation evaluate_with(const Plan& plan, const MachineryPark& park, const PhysicalParams& params,
                         std::span<const TourRouting> routing, bool demand_ok, CostModel model,
                         ShuttleOf&& shuttle_of) {
  Evaluation e;
  evaluate_into(e, plan, park, params, routing, demand_ok, model, shuttle_of);
  return e;
}

inline Evaluation evaluate_with(const Scenario& s, const Plan& plan, const MachineryPark& park,
                                std::span<const TourRouting> routing, bool demand_ok,
                                CostModel model = CostModel::kSkeleton) {
  return evaluate_with(plan, park, s.params(), routing, demand_ok, model,
                       [&](std::size_t g) { return shuttle_km(s, plan.tours[g], park); });
}

inline std::vector<TourRouting> route_summaries(const Scenario& s, const Plan& plan) {
  std::vector<TourRouting> out;
  out.reserve(plan.tours.size());
  for (const auto& t : plan.tours) out.push_back(route_summary(s, t));
  return out;
}

// Full evaluation. Infeasible plans (unmet demand, or an active tour without
// HU or SU) carry total_cost = +inf.
inline Evaluation evaluate(const Scenario& s, const Plan& plan, const MachineryPark& park,
                           CostModel model = CostModel::kSkeleton) {
  const auto routing = route_summaries(s, plan);
  return evaluate_with(s, plan, park, routing, check_demand(s, plan), model);
}

inline Evaluation total_cost(const Scenario& s, const Plan& plan, const MachineryPark& park,
                             CostModel model = CostModel::kSkeleton) {
  return evaluate(s, plan, park, model);
}

}  // namespace bioroute
