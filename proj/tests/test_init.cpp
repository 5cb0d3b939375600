#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "bioroute/init.hpp"

using namespace bioroute;

namespace {

Scenario make(std::vector<Field> fields, std::vector<BiogasPlant> plants) {
  PhysicalParams p;
  p.supply_unit = SupplyUnit::kHectareEquivalent;
  return Scenario(Location{0, 0}, std::move(fields), std::move(plants), p);
}

double dist(Location a, Location b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Greedy owner oracle written from coordinates.
std::vector<PlantIndex> owner_oracle(const Scenario& s) {
  std::vector<double> got(s.plant_count(), 0.0);
  std::vector<std::pair<std::int64_t, FieldIndex>> by_id;
  for (FieldIndex f = 0; f < s.field_count(); ++f) by_id.push_back({s.fields()[f].id, f});
  std::sort(by_id.begin(), by_id.end());
  std::vector<PlantIndex> owner(s.field_count());
  for (auto [id, f] : by_id) {
    bool any_short = false;
    for (PlantIndex b = 0; b < s.plant_count(); ++b) any_short |= got[b] < s.plants()[b].min_demand;
    double best = std::numeric_limits<double>::infinity();
    for (PlantIndex b = 0; b < s.plant_count(); ++b) {
      if (any_short && got[b] >= s.plants()[b].min_demand) continue;
      const double d = dist(s.fields()[f].location, s.plants()[b].location);
      if (d < best) {
        best = d;
        owner[f] = b;
      }
    }
    got[owner[f]] += s.fields()[f].size_ha;
  }
  return owner;
}

}  // namespace

TEST(OrderPlants, LineChains) {
  auto s = make({{0, {0, 1}, 1}}, {{0, {3, 0}, 0}, {1, {1, 0}, 0}, {2, {4, 0}, 0}, {3, {2, 0}, 0}});
  auto one = order_plants(s, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (std::vector<PlantIndex>{1, 3, 0, 2}));
  auto two = order_plants(s, 2);
  EXPECT_EQ(two[0], (std::vector<PlantIndex>{1, 3}));
  EXPECT_EQ(two[1], (std::vector<PlantIndex>{0, 2}));
  EXPECT_THROW(order_plants(s, 0), InputError);
  EXPECT_THROW(order_plants(s, 5), InputError);
}

TEST(OrderPlants, QuotasAndPartition) {
  auto s = generate_scenario(5, GeneratorOptions{});
  auto tours = order_plants(s, 7);
  ASSERT_EQ(tours.size(), 7u);
  std::map<std::size_t, int> sizes;
  std::vector<int> seen(20, 0);
  for (const auto& t : tours) {
    ++sizes[t.size()];
    for (PlantIndex b : t) ++seen[b];
  }
  EXPECT_EQ(sizes[3], 6);
  EXPECT_EQ(sizes[2], 1);
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(AssignFields, MatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorOptions o;
    o.n_fields = 150;
    o.n_plants = 6;
    o.area_km = 40;
    o.min_demand = 80;
    auto s = generate_scenario(seed, o);
    EXPECT_EQ(assign_fields(s, order_plants(s, 3)), owner_oracle(s));
  }
}

TEST(AssignFields, ZeroDemandGoesToNearest) {
  GeneratorOptions o;
  o.n_fields = 80;
  o.n_plants = 5;
  o.min_demand = 0;
  auto s = generate_scenario(2, o);
  auto owner = assign_fields(s, order_plants(s, 2));
  for (FieldIndex f = 0; f < s.field_count(); ++f) {
    for (PlantIndex b = 0; b < s.plant_count(); ++b) {
      EXPECT_LE(s.field_plant(f, owner[f]), s.field_plant(f, b));
    }
  }
}

TEST(AssignFields, DemandMet) {
  auto s = generate_scenario(9, GeneratorOptions{});
  auto owner = assign_fields(s, order_plants(s, 7));
  std::vector<double> got(s.plant_count(), 0.0);
  for (FieldIndex f = 0; f < owner.size(); ++f) got[owner[f]] += s.supply(f);
  for (PlantIndex b = 0; b < s.plant_count(); ++b) EXPECT_GE(got[b], s.demand(b));
}

TEST(AssignFields, UnsatisfiableThrows) {
  auto s = make({{0, {1, 0}, 5}}, {{0, {0, 1}, 50}});
  EXPECT_THROW(assign_fields(s, order_plants(s, 1)), InfeasibleError);
}

TEST(OrderFields, NearestNeighbourChain) {
  GeneratorOptions o;
  o.n_fields = 60;
  o.n_plants = 4;
  o.min_demand = 30;
  auto s = generate_scenario(14, o);
  auto pt = order_plants(s, 2);
  auto owner = assign_fields(s, pt);
  Plan p = order_fields(s, owner, pt);
  std::vector<int> seen(s.field_count(), 0);
  for (std::size_t g = 0; g < p.tours.size(); ++g) {
    Location at = s.hq();
    ASSERT_EQ(p.tours[g].stops.size(), pt[g].size());
    for (std::size_t k = 0; k < pt[g].size(); ++k) {
      const auto& stop = p.tours[g].stops[k];
      EXPECT_EQ(stop.plant, pt[g][k]);
      std::vector<FieldIndex> left;
      for (FieldIndex f = 0; f < owner.size(); ++f) {
        if (owner[f] == stop.plant) left.push_back(f);
      }
      ASSERT_EQ(stop.fields.size(), left.size());
      for (FieldIndex f : stop.fields) {
        ++seen[f];
        const double here = dist(at, s.fields()[f].location);
        for (FieldIndex h : left) EXPECT_LE(here, dist(at, s.fields()[h].location) + 1e-12);
        left.erase(std::find(left.begin(), left.end(), f));
        at = s.fields()[f].location;
      }
    }
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(BuildInitial, ReferencePresetFleet) {
  auto s = generate_scenario(1, GeneratorOptions{});
  auto park = paper_machinery();
  auto init = build_initial(s, park);
  ASSERT_EQ(init.plan.tours.size(), 7u);
  for (const auto& t : init.plan.tours) {
    EXPECT_TRUE(t.active());
    EXPECT_EQ(t.hu_counts, std::vector<int>{1});
    EXPECT_EQ(t.su_counts, (std::vector<int>{2, 4}));
  }
  EXPECT_TRUE(init.eval.feasible);
  EXPECT_NO_THROW(validate_plan(s, park, init.plan));
  EXPECT_EQ(init.eval, evaluate(s, init.plan, park));
}

TEST(BuildInitial, Deterministic) {
  auto s = generate_scenario(6, GeneratorOptions{});
  auto park = paper_machinery();
  auto a = build_initial(s, park);
  auto b = build_initial(s, park);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.eval.total_cost, b.eval.total_cost);
}

TEST(BuildInitial, MoreHusThanPlants) {
  GeneratorOptions o;
  o.n_fields = 40;
  o.n_plants = 3;
  o.min_demand = 20;
  auto s = generate_scenario(4, o);
  auto init = build_initial(s, paper_machinery());
  EXPECT_EQ(init.plan.tours.size(), 7u);
  EXPECT_EQ(init.plan.active_tours(), 3u);
  EXPECT_TRUE(init.eval.feasible);
}
