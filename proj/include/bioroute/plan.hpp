#pragma once

// Candidate solution: tours of plants, each plant with its ordered fields,
// plus the per-class fleet on every tour.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "bioroute/model.hpp"

namespace bioroute {

struct PlantVisit {
  PlantIndex plant = 0;
  std::vector<FieldIndex> fields;  // harvest order

  friend bool operator==(const PlantVisit&, const PlantVisit&) = default;
};

struct Tour {
  std::vector<PlantVisit> stops;  // plant visiting order
  std::vector<int> hu_counts;     // per HU class
  std::vector<int> su_counts;     // per SU class

  bool active() const { return !stops.empty(); }
  int hu_total() const {
    int n = 0;
    for (int c : hu_counts) n += c;
    return n;
  }
  int su_total() const {
    int n = 0;
    for (int c : su_counts) n += c;
    return n;
  }
  std::size_t field_total() const {
    std::size_t n = 0;
    for (const auto& s : stops) n += s.fields.size();
    return n;
  }

  friend bool operator==(const Tour&, const Tour&) = default;
};

struct Plan {
  std::vector<Tour> tours;

  std::size_t active_tours() const {
    return static_cast<std::size_t>(
        std::count_if(tours.begin(), tours.end(), [](const Tour& t) { return t.active(); }));
  }

  friend bool operator==(const Plan&, const Plan&) = default;
};

// Field -> plant pairing implied by a plan (indexed by field).
inline std::vector<PlantIndex> field_assignment(const Plan& plan, std::size_t n_fields) {
  std::vector<PlantIndex> owner(n_fields, static_cast<PlantIndex>(-1));
  for (const auto& t : plan.tours) {
    for (const auto& s : t.stops) {
      for (FieldIndex f : s.fields) owner[f] = s.plant;
    }
  }
  return owner;
}

// Throws InputError on any partition or fleet-conservation violation.
inline void validate_plan(const Scenario& scenario, const MachineryPark& park, const Plan& plan) {
  const auto n_hu_classes = park.hu_classes.size();
  const auto n_su_classes = park.su_classes.size();
  if (plan.tours.size() > static_cast<std::size_t>(park.hu_total())) {
    throw InputError("plan has more tours than HUs");
  }
  std::vector<int> seen_field(scenario.field_count(), 0);
  std::vector<int> seen_plant(scenario.plant_count(), 0);
  std::vector<int> hu_sum(n_hu_classes, 0);
  std::vector<int> su_sum(n_su_classes, 0);
  for (std::size_t g = 0; g < plan.tours.size(); ++g) {
    const auto& t = plan.tours[g];
    if (t.hu_counts.size() != n_hu_classes || t.su_counts.size() != n_su_classes) {
      throw InputError("tour " + std::to_string(g) + " has wrong fleet class arity");
    }
    for (std::size_t l = 0; l < n_hu_classes; ++l) {
      if (t.hu_counts[l] < 0) throw InputError("negative HU count");
      hu_sum[l] += t.hu_counts[l];
    }
    for (std::size_t l = 0; l < n_su_classes; ++l) {
      if (t.su_counts[l] < 0) throw InputError("negative SU count");
      su_sum[l] += t.su_counts[l];
    }
    if (t.active() && (t.hu_total() < 1 || t.su_total() < 1)) {
      throw InputError("active tour " + std::to_string(g) + " needs at least one HU and one SU");
    }
    for (const auto& s : t.stops) {
      if (s.plant >= scenario.plant_count()) throw InputError("unknown plant index");
      ++seen_plant[s.plant];
      for (FieldIndex f : s.fields) {
        if (f >= scenario.field_count()) throw InputError("unknown field index");
        ++seen_field[f];
      }
    }
  }
  for (std::size_t l = 0; l < n_hu_classes; ++l) {
    if (hu_sum[l] != park.hu_classes[l].count_total) throw InputError("HU totals not conserved");
  }
  for (std::size_t l = 0; l < n_su_classes; ++l) {
    if (su_sum[l] != park.su_classes[l].count_total) throw InputError("SU totals not conserved");
  }
  for (int c : seen_plant) {
    if (c != 1) throw InputError("every plant must appear in exactly one tour");
  }
  for (int c : seen_field) {
    if (c != 1) throw InputError("every field must be assigned exactly once");
  }
}

}  // namespace bioroute
