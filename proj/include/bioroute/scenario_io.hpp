#pragma once

// JSON scenario files (schema_version 1) and plan files.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bioroute/model.hpp"
#include "bioroute/plan.hpp"

namespace bioroute {

inline constexpr int kScenarioSchemaVersion = 1;

using json = nlohmann::json;

struct ScenarioFile {
  Scenario scenario;
  MachineryPark machinery;
};

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(std::string("scenario file: missing key '") + key + "'");
  }
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw InputError(std::string("scenario file: '") + key + "' must be a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) {
    throw InputError(std::string("scenario file: '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

inline const char* unit_name(SupplyUnit u) {
  return u == SupplyUnit::kTonnes ? "tonnes" : "hectare_equivalent";
}

inline SupplyUnit parse_unit(const json& j) {
  if (!j.is_string()) throw InputError("scenario file: supply_unit must be a string");
  const auto name = j.get<std::string>();
  if (name == "tonnes") return SupplyUnit::kTonnes;
  if (name == "hectare_equivalent") return SupplyUnit::kHectareEquivalent;
  throw InputError("scenario file: unknown supply_unit '" + name + "'");
}

// Accepts a full n x n matrix or its lower triangle (row i holds i+1
// entries); the upper half is mirrored from the lower one.
inline DistanceMatrix parse_matrix(const json& rows, std::size_t n) {
  if (!rows.is_array() || rows.size() != n) {
    throw InputError("scenario file: distance_matrix needs one row per vertex");
  }
  DistanceMatrix m(n);
  bool triangle = true;
  bool full = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array()) throw InputError("scenario file: distance_matrix rows must be arrays");
    triangle = triangle && rows[i].size() == i + 1;
    full = full && rows[i].size() == n;
  }
  if (!triangle && !full) throw InputError("scenario file: distance_matrix has ragged rows");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t width = full ? n : i + 1;
    for (std::size_t j = 0; j < width; ++j) {
      const auto& v = rows[i][j];
      if (!v.is_number()) throw InputError("scenario file: distance_matrix entries must be numbers");
      m(i, j) = v.get<double>();
      if (!full) m(j, i) = m(i, j);
    }
  }
  return m;
}

}  // namespace detail

inline json machinery_to_json(const MachineryPark& park) {
  json hu = json::array();
  for (const auto& c : park.hu_classes) {
    hu.push_back({{"work_rate_area", c.work_rate_area}, {"count", c.count_total}});
  }
  json su = json::array();
  for (const auto& c : park.su_classes) {
    su.push_back({{"load_capacity", c.load_capacity},
                  {"fill_time_h", c.fill_time},
                  {"count", c.count_total}});
  }
  return {{"hu_classes", hu}, {"su_classes", su}};
}

inline MachineryPark machinery_from_json(const json& j) {
  MachineryPark park;
  const auto& hu = detail::require(j, "hu_classes");
  const auto& su = detail::require(j, "su_classes");
  if (!hu.is_array() || !su.is_array()) throw InputError("machinery classes must be arrays");
  for (const auto& c : hu) {
    park.hu_classes.push_back(
        {detail::number(c, "work_rate_area"), static_cast<int>(detail::integer(c, "count"))});
  }
  for (const auto& c : su) {
    park.su_classes.push_back({detail::number(c, "load_capacity"), detail::number(c, "fill_time_h"),
                               static_cast<int>(detail::integer(c, "count"))});
  }
  park.validate();
  return park;
}

inline json scenario_to_json(const Scenario& s, const MachineryPark& park) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["hq"] = {{"x", s.hq().x}, {"y", s.hq().y}};
  json fields = json::array();
  for (const auto& f : s.fields()) {
    fields.push_back({{"id", f.id}, {"x", f.location.x}, {"y", f.location.y}, {"size_ha", f.size_ha}});
  }
  j["fields"] = std::move(fields);
  json plants = json::array();
  for (const auto& b : s.plants()) {
    plants.push_back(
        {{"id", b.id}, {"x", b.location.x}, {"y", b.location.y}, {"min_demand", b.min_demand}});
  }
  j["plants"] = std::move(plants);
  const auto& p = s.params();
  j["params"] = {{"v_hu_edge", p.v_hu_edge},
                 {"v_su_edge", p.v_su_edge},
                 {"c_biom_conv", p.c_biom_conv},
                 {"supply_unit", detail::unit_name(p.supply_unit)}};
  if (const auto& m = s.distance_matrix()) {
    json rows = json::array();
    for (std::size_t i = 0; i < m->size(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k <= i; ++k) row.push_back((*m)(i, k));
      rows.push_back(std::move(row));
    }
    j["distance_matrix"] = std::move(rows);
  }
  j["machinery"] = machinery_to_json(park);
  return j;
}

// Missing `machinery` falls back to the reference fleet.
inline ScenarioFile scenario_from_json(const json& j) {
  if (!j.is_object()) throw InputError("scenario file: top level must be an object");
  if (detail::integer(j, "schema_version") != kScenarioSchemaVersion) {
    throw InputError("scenario file: unsupported schema_version");
  }
  const auto& hq = detail::require(j, "hq");
  const Location hq_loc{detail::number(hq, "x"), detail::number(hq, "y")};

  std::vector<Field> fields;
  for (const auto& f : detail::require(j, "fields")) {
    fields.push_back({detail::integer(f, "id"), {detail::number(f, "x"), detail::number(f, "y")},
                      detail::number(f, "size_ha")});
  }
  std::vector<BiogasPlant> plants;
  for (const auto& b : detail::require(j, "plants")) {
    plants.push_back({detail::integer(b, "id"), {detail::number(b, "x"), detail::number(b, "y")},
                      detail::number(b, "min_demand")});
  }
  const auto& pj = detail::require(j, "params");
  PhysicalParams params;
  params.v_hu_edge = detail::number(pj, "v_hu_edge");
  params.v_su_edge = detail::number(pj, "v_su_edge");
  params.c_biom_conv = detail::number(pj, "c_biom_conv");
  params.supply_unit = detail::parse_unit(detail::require(pj, "supply_unit"));

  std::optional<DistanceMatrix> matrix;
  if (j.contains("distance_matrix") && !j.at("distance_matrix").is_null()) {
    matrix = detail::parse_matrix(j.at("distance_matrix"), 1 + plants.size() + fields.size());
  }
  MachineryPark park =
      j.contains("machinery") ? machinery_from_json(j.at("machinery")) : paper_machinery();
  return {Scenario(hq_loc, std::move(fields), std::move(plants), params, std::move(matrix)),
          std::move(park)};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

inline ScenarioFile load_scenario(const std::string& path) {
  return scenario_from_json(read_json_file(path));
}

inline void save_scenario(const std::string& path, const Scenario& s, const MachineryPark& park) {
  write_text_file(path, scenario_to_json(s, park).dump(1) + "\n");
}

// Plans reference fields and plants by their file ids. Each tour also
// carries its vertex coordinates in driving order (HQ, fields, plants).
inline json plan_to_json(const Scenario& s, const Plan& plan) {
  json tours = json::array();
  for (const auto& t : plan.tours) {
    json stops = json::array();
    json path = json::array();
    path.push_back({s.hq().x, s.hq().y});
    for (const auto& stop : t.stops) {
      json ids = json::array();
      for (FieldIndex f : stop.fields) {
        ids.push_back(s.fields()[f].id);
        const auto& l = s.fields()[f].location;
        path.push_back({l.x, l.y});
      }
      const auto& pl = s.plants()[stop.plant];
      path.push_back({pl.location.x, pl.location.y});
      stops.push_back({{"plant", pl.id}, {"fields", std::move(ids)}});
    }
    path.push_back({s.hq().x, s.hq().y});
    tours.push_back({{"hu_counts", t.hu_counts},
                     {"su_counts", t.su_counts},
                     {"stops", std::move(stops)},
                     {"path", std::move(path)}});
  }
  return {{"tours", std::move(tours)}};
}

inline Plan plan_from_json(const Scenario& s, const json& j) {
  std::map<std::int64_t, FieldIndex> field_of;
  std::map<std::int64_t, PlantIndex> plant_of;
  for (std::size_t f = 0; f < s.field_count(); ++f) {
    field_of[s.fields()[f].id] = static_cast<FieldIndex>(f);
  }
  for (std::size_t b = 0; b < s.plant_count(); ++b) {
    plant_of[s.plants()[b].id] = static_cast<PlantIndex>(b);
  }
  auto lookup = [](const auto& table, std::int64_t id, const char* what) {
    const auto it = table.find(id);
    if (it == table.end()) throw InputError(std::string("plan references unknown ") + what);
    return it->second;
  };
  Plan plan;
  for (const auto& tj : detail::require(j, "tours")) {
    Tour t;
    t.hu_counts = detail::require(tj, "hu_counts").get<std::vector<int>>();
    t.su_counts = detail::require(tj, "su_counts").get<std::vector<int>>();
    for (const auto& sj : detail::require(tj, "stops")) {
      PlantVisit visit;
      visit.plant = lookup(plant_of, detail::integer(sj, "plant"), "plant");
      for (const auto& fid : detail::require(sj, "fields")) {
        visit.fields.push_back(lookup(field_of, fid.get<std::int64_t>(), "field"));
      }
      t.stops.push_back(std::move(visit));
    }
    plan.tours.push_back(std::move(t));
  }
  return plan;
}

}  // namespace bioroute
