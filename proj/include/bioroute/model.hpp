#pragma once

// Domain model: locations, fields, biogas plants, machinery and the
// immutable Scenario every other module reads from.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bioroute {

// Malformed or out-of-contract input (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Demand cannot be met by the available supply (CLI exit code 3).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using FieldIndex = std::uint32_t;
using PlantIndex = std::uint32_t;

struct Location {
  double x = 0.0;  // km
  double y = 0.0;  // km
};

inline double euclidean(const Location& a, const Location& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct Field {
  std::int64_t id = 0;
  Location location;
  double size_ha = 0.0;
};

struct BiogasPlant {
  std::int64_t id = 0;
  Location location;
  double min_demand = 0.0;  // in the scenario's supply unit
};

enum class SupplyUnit { kTonnes, kHectareEquivalent };

struct PhysicalParams {
  double v_hu_edge = 40.0;    // km/h
  double v_su_edge = 40.0;    // km/h
  double c_biom_conv = 40.0;  // t/ha
  SupplyUnit supply_unit = SupplyUnit::kTonnes;

  void validate() const {
    if (!(v_hu_edge > 0.0) || !(v_su_edge > 0.0)) {
      throw InputError("edge velocities must be positive");
    }
    if (!(c_biom_conv > 0.0)) {
      throw InputError("biomass conversion factor must be positive");
    }
  }
};

struct HuClass {
  double work_rate_area = 0.0;  // ha/h
  int count_total = 0;
};

struct SuClass {
  double load_capacity = 0.0;  // t
  double fill_time = 0.0;      // h
  int count_total = 0;
};

struct MachineryPark {
  std::vector<HuClass> hu_classes;
  std::vector<SuClass> su_classes;

  int hu_total() const {
    int n = 0;
    for (const auto& c : hu_classes) n += c.count_total;
    return n;
  }
  int su_total() const {
    int n = 0;
    for (const auto& c : su_classes) n += c.count_total;
    return n;
  }

  void validate() const {
    for (const auto& c : hu_classes) {
      if (!(c.work_rate_area > 0.0) || c.count_total < 0) {
        throw InputError("HU class needs a positive work rate and a nonnegative count");
      }
    }
    for (const auto& c : su_classes) {
      if (!(c.load_capacity > 0.0) || !(c.fill_time > 0.0) || c.count_total < 0) {
        throw InputError("SU class needs positive capacity and fill time and a nonnegative count");
      }
    }
    if (hu_total() < 1) throw InputError("machinery park needs at least one HU");
    if (su_total() < 1) throw InputError("machinery park needs at least one SU");
  }
};

// Vertex numbering over the flat distance matrix:
// 0 = HQ, 1..N_B = plants, N_B+1..N_B+N_F = fields.
struct Vertex {
  std::size_t id = 0;
  friend bool operator==(Vertex, Vertex) = default;
};

// Dense symmetric matrix over all vertices (km).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  void validate() const {
    for (std::size_t i = 0; i < n_; ++i) {
      if ((*this)(i, i) != 0.0) throw InputError("distance matrix diagonal must be zero");
      for (std::size_t j = 0; j < i; ++j) {
        const double a = (*this)(i, j);
        const double b = (*this)(j, i);
        if (!std::isfinite(a) || a < 0.0) {
          throw InputError("distance matrix entries must be finite and nonnegative");
        }
        if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
          throw InputError("distance matrix must be symmetric");
        }
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline double expected_supply(const Field& field, const PhysicalParams& params) {
  if (!(field.size_ha > 0.0)) throw InputError("field size must be positive");
  return params.supply_unit == SupplyUnit::kTonnes ? params.c_biom_conv * field.size_ha
                                                   : field.size_ha;
}

// Number of shuttle drives needed to carry `supply_t` tonnes with one SU of
// `load_capacity` tonnes. Corrected for rounding in the quotient so that
// n * cap >= supply > (n - 1) * cap always holds.
inline long shuttle_count(double supply_t, double load_capacity) {
  if (!(load_capacity > 0.0)) throw InputError("load capacity must be positive");
  if (!(supply_t > 0.0)) return 0;
  auto n = static_cast<long>(std::ceil(supply_t / load_capacity));
  if (n > 0 && static_cast<double>(n - 1) * load_capacity >= supply_t) --n;
  if (static_cast<double>(n) * load_capacity < supply_t) ++n;
  return n;
}

class Scenario {
 public:
  static constexpr std::size_t kFieldPlantTableLimit = std::size_t{1} << 22;

  Scenario(Location hq, std::vector<Field> fields, std::vector<BiogasPlant> plants,
           PhysicalParams params, std::optional<DistanceMatrix> matrix = std::nullopt)
      : hq_(hq),
        fields_(std::move(fields)),
        plants_(std::move(plants)),
        params_(params),
        matrix_(std::move(matrix)) {
    params_.validate();
    auto finite = [](const Location& l) { return std::isfinite(l.x) && std::isfinite(l.y); };
    if (!finite(hq_)) throw InputError("HQ coordinates must be finite");
    std::set<std::int64_t> ids;
    for (const auto& f : fields_) {
      if (!finite(f.location)) throw InputError("field coordinates must be finite");
      if (!(f.size_ha > 0.0)) throw InputError("field size must be positive");
      if (!ids.insert(f.id).second) throw InputError("duplicate field id");
    }
    ids.clear();
    for (const auto& b : plants_) {
      if (!finite(b.location)) throw InputError("plant coordinates must be finite");
      if (!(b.min_demand >= 0.0)) throw InputError("plant demand must be nonnegative");
      if (!ids.insert(b.id).second) throw InputError("duplicate plant id");
    }
    if (matrix_) {
      if (matrix_->size() != vertex_count()) {
        throw InputError("distance matrix dimension does not match vertex count");
      }
      matrix_->validate();
    }
    if (fields_.size() * plants_.size() <= kFieldPlantTableLimit) {
      field_plant_.resize(fields_.size() * plants_.size());
      for (std::size_t f = 0; f < fields_.size(); ++f) {
        for (std::size_t b = 0; b < plants_.size(); ++b) {
          field_plant_[f * plants_.size() + b] =
              raw_distance(1 + plants_.size() + f, 1 + b);
        }
      }
    }
    supply_.reserve(fields_.size());
    tonnes_.reserve(fields_.size());
    for (const auto& f : fields_) {
      supply_.push_back(expected_supply(f, params_));
      tonnes_.push_back(params_.c_biom_conv * f.size_ha);
    }
  }

  const Location& hq() const { return hq_; }
  const std::vector<Field>& fields() const { return fields_; }
  const std::vector<BiogasPlant>& plants() const { return plants_; }
  const PhysicalParams& params() const { return params_; }
  const std::optional<DistanceMatrix>& distance_matrix() const { return matrix_; }

  std::size_t field_count() const { return fields_.size(); }
  std::size_t plant_count() const { return plants_.size(); }
  std::size_t vertex_count() const { return 1 + plants_.size() + fields_.size(); }

  static constexpr Vertex hq_vertex() { return Vertex{0}; }
  Vertex plant_vertex(PlantIndex b) const { return Vertex{1 + static_cast<std::size_t>(b)}; }
  Vertex field_vertex(FieldIndex f) const {
    return Vertex{1 + plants_.size() + static_cast<std::size_t>(f)};
  }

  const Location& location(Vertex v) const {
    if (v.id == 0) return hq_;
    if (v.id <= plants_.size()) return plants_[v.id - 1].location;
    if (v.id < vertex_count()) return fields_[v.id - 1 - plants_.size()].location;
    throw InputError("unknown vertex id " + std::to_string(v.id));
  }

  double distance(Vertex a, Vertex b) const {
    if (a.id >= vertex_count() || b.id >= vertex_count()) {
      throw InputError("unknown vertex id");
    }
    return raw_distance(a.id, b.id);
  }

  // Unchecked accessors used on hot paths.
  double raw_distance(std::size_t a, std::size_t b) const {
    if (matrix_) return (*matrix_)(a, b);
    if (a == b) return 0.0;
    return euclidean(raw_location(a), raw_location(b));
  }
  double field_plant(FieldIndex f, PlantIndex b) const {
    if (!field_plant_.empty()) return field_plant_[f * plants_.size() + b];
    return raw_distance(field_vertex(f).id, plant_vertex(b).id);
  }
  double field_field(FieldIndex a, FieldIndex b) const {
    return raw_distance(field_vertex(a).id, field_vertex(b).id);
  }
  double hq_field(FieldIndex f) const { return raw_distance(0, field_vertex(f).id); }
  double hq_plant(PlantIndex b) const { return raw_distance(0, plant_vertex(b).id); }
  double plant_plant(PlantIndex a, PlantIndex b) const {
    return raw_distance(plant_vertex(a).id, plant_vertex(b).id);
  }

  // Expected supply in the configured supply unit, and always in tonnes.
  double supply(FieldIndex f) const { return supply_[f]; }
  double supply_tonnes(FieldIndex f) const { return tonnes_[f]; }
  double demand(PlantIndex b) const { return plants_[b].min_demand; }

  double total_supply() const { return std::accumulate(supply_.begin(), supply_.end(), 0.0); }
  double total_demand() const {
    double d = 0.0;
    for (const auto& b : plants_) d += b.min_demand;
    return d;
  }

  // A plan satisfying every minimum demand can only exist if total supply
  // covers total demand.
  void require_satisfiable() const {
    if (plants_.empty()) throw InputError("scenario has no biogas plants");
    if (total_supply() < total_demand()) {
      throw InfeasibleError("total field supply is below total plant demand");
    }
  }

 private:
  const Location& raw_location(std::size_t v) const {
    if (v == 0) return hq_;
    if (v <= plants_.size()) return plants_[v - 1].location;
    return fields_[v - 1 - plants_.size()].location;
  }

  Location hq_;
  std::vector<Field> fields_;
  std::vector<BiogasPlant> plants_;
  PhysicalParams params_;
  std::optional<DistanceMatrix> matrix_;
  std::vector<double> field_plant_;  // cached field -> plant distances
  std::vector<double> supply_;
  std::vector<double> tonnes_;
};

struct GeneratorOptions {
  int n_fields = 1200;
  int n_plants = 20;
  double area_km = 80.0;
  double field_size_min = 3.0;
  double field_size_span = 4.0;
  double min_demand = 250.0;
  PhysicalParams params{40.0, 40.0, 40.0, SupplyUnit::kHectareEquivalent};
};

inline constexpr int kMaxScenarioRedraws = 100;

namespace detail {

// 53-bit uniform in [0, 1), independent of the standard library's
// distribution implementations so generated files are portable.
inline double unit_draw(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Random scenario: HQ at the origin, fields and plants uniform in the square
// [-area/2, area/2]^2, field sizes uniform in [size_min, size_min + span].
inline Scenario generate_scenario(std::uint64_t seed, const GeneratorOptions& opt) {
  if (opt.n_plants < 1 || opt.n_fields < opt.n_plants) {
    throw InputError("generator needs n_fields >= n_plants >= 1");
  }
  if (!(opt.area_km > 0.0) || !(opt.field_size_min > 0.0) || opt.field_size_span < 0.0 ||
      opt.min_demand < 0.0) {
    throw InputError("invalid generator geometry or demand");
  }
  std::mt19937_64 engine(seed);
  auto coord = [&] { return opt.area_km * (detail::unit_draw(engine) - 0.5); };
  for (int attempt = 0; attempt < kMaxScenarioRedraws; ++attempt) {
    std::vector<Field> fields;
    fields.reserve(static_cast<std::size_t>(opt.n_fields));
    for (int i = 0; i < opt.n_fields; ++i) {
      Field f;
      f.id = i;
      f.location.x = coord();
      f.location.y = coord();
      f.size_ha = opt.field_size_min + opt.field_size_span * detail::unit_draw(engine);
      fields.push_back(f);
    }
    std::vector<BiogasPlant> plants;
    plants.reserve(static_cast<std::size_t>(opt.n_plants));
    for (int j = 0; j < opt.n_plants; ++j) {
      BiogasPlant b;
      b.id = j;
      b.location.x = coord();
      b.location.y = coord();
      b.min_demand = opt.min_demand;
      plants.push_back(b);
    }
    Scenario s(Location{0.0, 0.0}, std::move(fields), std::move(plants), opt.params);
    if (s.total_supply() >= s.total_demand()) return s;
  }
  throw InfeasibleError("could not draw a scenario whose supply covers demand");
}

// Machinery of the reference experiments: 7 HUs at 2.5 ha/h, 14 small SUs
// (12.5 t, 6 min fill) and 28 large SUs (16.5 t, 8 min fill).
inline MachineryPark paper_machinery() {
  MachineryPark park;
  park.hu_classes = {HuClass{2.5, 7}};
  park.su_classes = {SuClass{12.5, 6.0 / 60.0, 14}, SuClass{16.5, 8.0 / 60.0, 28}};
  return park;
}

}  // namespace bioroute
