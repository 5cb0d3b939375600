#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bioroute/cost.hpp"
#include "bioroute/init.hpp"

using namespace bioroute;

namespace {

MachineryPark one_class_park(int n_hu, double rate, int n_su, double cap, double fill_h) {
  MachineryPark park;
  park.hu_classes = {HuClass{rate, n_hu}};
  park.su_classes = {SuClass{cap, fill_h, n_su}};
  return park;
}

Scenario make(std::vector<Field> fields, std::vector<BiogasPlant> plants,
              SupplyUnit unit = SupplyUnit::kTonnes) {
  PhysicalParams p;
  p.supply_unit = unit;
  return Scenario(Location{0, 0}, std::move(fields), std::move(plants), p);
}

double d(const Location& a, const Location& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Literal transcription of the waiting-time definition.
double wait_literal(double dist_fb, double v_su, const std::vector<int>& n_su,
                    const std::vector<double>& t_load, const std::vector<int>& n_hu,
                    std::size_t case_l) {
  double n_hu_sum = 0.0;
  for (int n : n_hu) n_hu_sum += n;
  const double t_edge = 2.0 * dist_fb / v_su;
  double others = 0.0;
  for (std::size_t l = 0; l < n_su.size(); ++l) {
    if (l != case_l) others += n_su[l] * t_load[l] / n_hu_sum;
  }
  return t_edge - (n_su[case_l] - 1) * t_load[case_l] / n_hu_sum - others;
}

// Independent path-length oracle straight from coordinates.
double tour_cost_oracle(const Scenario& s, const Tour& t, const MachineryPark& park) {
  if (t.stops.empty()) return 0.0;
  std::vector<Location> walk{s.hq()};
  Location first{};
  bool have_first = false;
  Location last_plant{};
  double shuttle = 0.0;
  double cap_total = 0.0;
  for (std::size_t l = 0; l < park.su_classes.size(); ++l) {
    cap_total += t.su_counts[l] * park.su_classes[l].load_capacity;
  }
  for (const auto& stop : t.stops) {
    if (stop.fields.empty()) continue;
    const Location bp = s.plants()[stop.plant].location;
    last_plant = bp;
    for (FieldIndex f : stop.fields) {
      const Location fl = s.fields()[f].location;
      if (!have_first) {
        first = fl;
        have_first = true;
      }
      walk.push_back(fl);
      const double tonnes = s.params().c_biom_conv * s.fields()[f].size_ha;
      long n = 0;
      for (std::size_t l = 0; l < park.su_classes.size(); ++l) {
        if (t.su_counts[l] == 0) continue;
        const double cap = park.su_classes[l].load_capacity;
        const double part = (t.su_counts[l] * cap / cap_total) * tonnes;
        long k = static_cast<long>(std::floor(part / cap));
        while (k * cap < part) ++k;
        while (k > 0 && (k - 1) * cap >= part) --k;
        n += k;
      }
      shuttle += 2.0 * n * d(fl, bp);
    }
  }
  if (!have_first) return 0.0;
  walk.push_back(s.hq());
  double hu = 0.0;
  for (std::size_t i = 1; i < walk.size(); ++i) hu += d(walk[i - 1], walk[i]);
  const double skeleton = d(s.hq(), first) + d(last_plant, s.hq());
  return t.hu_total() * hu + t.su_total() * skeleton + shuttle;
}

}  // namespace

TEST(CheckDemand, Examples) {
  auto s = make({{0, {1, 0}, 6}, {1, {2, 0}, 5}, {2, {3, 0}, 3}}, {{0, {0, 1}, 10}},
                SupplyUnit::kHectareEquivalent);
  Plan ok{{Tour{{{0, {0, 1}}}, {1}, {1}}}};
  Plan short_plan{{Tour{{{0, {0, 2}}}, {1}, {1}}}};
  EXPECT_TRUE(check_demand(s, ok));
  EXPECT_FALSE(check_demand(s, short_plan));
  auto zero = make({{0, {1, 0}, 6}}, {{0, {0, 1}, 0}});
  EXPECT_TRUE(check_demand(zero, Plan{{Tour{{PlantVisit{0, {}}}, {1}, {1}}}}));
}

TEST(CheckDemand, MonotoneInAddedFields) {
  auto s = make({{0, {1, 0}, 6}, {1, {2, 0}, 5}, {2, {3, 0}, 3}}, {{0, {0, 1}, 10}},
                SupplyUnit::kHectareEquivalent);
  Plan p{{Tour{{{0, {0, 1}}}, {1}, {1}}}};
  ASSERT_TRUE(check_demand(s, p));
  p.tours[0].stops[0].fields.push_back(2);
  EXPECT_TRUE(check_demand(s, p));
}

TEST(TourCost, ColocatedFieldExample) {
  // plant 10 km from HQ, field on the plant, one shuttle drive
  auto s = make({{0, {10, 0}, 0.1}}, {{0, {10, 0}, 0}});
  auto park = one_class_park(1, 2.5, 1, 16.5, 0.1);
  Tour t{{{0, {0}}}, {1}, {1}};
  EXPECT_DOUBLE_EQ(tour_cost(s, t, park).km, 40.0);
  EXPECT_TRUE(tour_cost(s, t, park).active);
  Tour empty{{}, {1}, {1}};
  EXPECT_EQ(tour_cost(s, empty, park).km, 0.0);
  EXPECT_FALSE(tour_cost(s, empty, park).active);
}

TEST(TourCost, DoublingHusDoublesHuTermOnly) {
  auto s = make({{0, {3, 4}, 2}, {1, {6, 8}, 3}}, {{0, {-5, 0}, 0}});
  MachineryPark park = one_class_park(2, 2.5, 1, 16.5, 0.1);
  Tour one{{{0, {0, 1}}}, {1}, {1}};
  Tour two = one;
  two.hu_counts = {2};
  const auto r = route_summary(s, one);
  EXPECT_NEAR(tour_cost(s, two, park).km - tour_cost(s, one, park).km, r.hu_path_km, 1e-9);
}

TEST(TourCost, MatchesCoordinateOracle) {
  std::mt19937_64 eng(5);
  auto park = paper_machinery();
  for (int rep = 0; rep < 200; ++rep) {
    GeneratorOptions o;
    o.n_fields = 12;
    o.n_plants = 3;
    o.area_km = 20;
    o.min_demand = 0;
    o.params.supply_unit = SupplyUnit::kTonnes;
    auto s = generate_scenario(eng(), o);
    auto init = build_initial(s, park);
    for (auto& t : init.plan.tours) {
      // random fleet on each tour
      t.su_counts = {static_cast<int>(eng() % 4), static_cast<int>(eng() % 4) + 1};
      t.hu_counts = {static_cast<int>(eng() % 3) + 1};
      const double expect = tour_cost_oracle(s, t, park);
      EXPECT_NEAR(tour_cost(s, t, park).km, expect, 1e-9 * std::max(1.0, expect));
    }
  }
}

TEST(TotalCost, SumAndPermutationInvariance) {
  GeneratorOptions o;
  o.n_fields = 60;
  o.n_plants = 6;
  o.area_km = 30;
  o.min_demand = 20;
  auto s = generate_scenario(9, o);
  auto park = paper_machinery();
  auto init = build_initial(s, park);
  const auto e = evaluate(s, init.plan, park);
  double sum = 0.0;
  for (double c : e.per_tour_cost) sum += c;
  EXPECT_NEAR(e.total_cost, sum, 1e-9 * sum);
  Plan rev = init.plan;
  std::reverse(rev.tours.begin(), rev.tours.end());
  EXPECT_NEAR(evaluate(s, rev, park).total_cost, e.total_cost, 1e-9 * sum);
  EXPECT_TRUE(e.feasible);
  double mx = 0.0;
  for (std::size_t g = 0; g < e.completion_times.size(); ++g) {
    if (e.active[g]) mx = std::max(mx, e.completion_times[g]);
  }
  EXPECT_EQ(e.max_completion, mx);
}

TEST(TotalCost, NondecreasingInFleet) {
  GeneratorOptions o;
  o.n_fields = 30;
  o.n_plants = 3;
  o.area_km = 20;
  o.min_demand = 0;
  auto s = generate_scenario(4, o);
  MachineryPark park;
  park.hu_classes = {HuClass{2.5, 10}};
  park.su_classes = {SuClass{12.5, 0.1, 30}};
  auto init = build_initial(s, park);
  Plan p = init.plan;
  for (auto& t : p.tours) {
    t.hu_counts = {1};
    t.su_counts = {1};
  }
  double prev = evaluate(s, p, park).total_cost;
  for (int step = 0; step < 6; ++step) {
    auto& t = p.tours[step % 3];
    (step % 2 ? t.hu_counts : t.su_counts)[0] += 1;
    const double now = evaluate(s, p, park).total_cost;
    EXPECT_GE(now, prev - 1e-9);
    prev = now;
  }
}

TEST(TotalCost, InfeasiblePlanIsInfinite) {
  auto s = make({{0, {1, 0}, 1}}, {{0, {0, 1}, 100}}, SupplyUnit::kHectareEquivalent);
  auto park = one_class_park(1, 2.5, 1, 12.5, 0.1);
  Plan p{{Tour{{{0, {0}}}, {1}, {1}}}};
  const auto e = evaluate(s, p, park);
  EXPECT_FALSE(e.feasible);
  EXPECT_TRUE(std::isinf(e.total_cost));
}

TEST(Completion, Example) {
  // HQ -> (40, 0) -> HQ is 80 km at 40 km/h; 100 ha at 2.5 ha/h
  auto s = make({{0, {40, 0}, 100}}, {{0, {40, 1}, 0}});
  auto park = one_class_park(2, 2.5, 1, 12.5, 0.1);
  Tour t{{{0, {0}}}, {1}, {1}};
  EXPECT_DOUBLE_EQ(completion_time(s, t, park), 42.0);
  t.hu_counts = {2};
  EXPECT_DOUBLE_EQ(completion_time(s, t, park), 22.0);
  Tour empty{{}, {0}, {0}};
  EXPECT_EQ(completion_time(s, empty, park), 0.0);
}

TEST(Waiting, Example) {
  auto s = make({{0, {20, 0}, 5}}, {{0, {0, 0}, 0}});
  auto park = one_class_park(1, 2.5, 5, 16.5, 8.0 / 60.0);
  Tour t{{{0, {0}}}, {1}, {5}};
  EXPECT_NEAR(waiting_time(s, t, park, 0, 0, 0), 1.0 - 4.0 * (8.0 / 60.0), 1e-12);
  EXPECT_NEAR(waiting_time(s, t, park, 0, 0, 0), 0.4667, 1e-4);
  t.su_counts = {1};
  EXPECT_DOUBLE_EQ(waiting_time(s, t, park, 0, 0, 0), 1.0);
}

TEST(Waiting, AbsentCaseClassIsInputError) {
  auto s = make({{0, {20, 0}, 5}}, {{0, {0, 0}, 0}});
  auto park = paper_machinery();
  Tour t{{{0, {0}}}, {1}, {0, 3}};
  EXPECT_THROW(waiting_time(s, t, park, 0, 0, 0), InputError);
}

TEST(Waiting, EqualFillTimesCoincide) {
  auto s = make({{0, {20, 0}, 5}}, {{0, {0, 0}, 0}});
  MachineryPark park;
  park.hu_classes = {HuClass{2.5, 2}};
  park.su_classes = {SuClass{12.5, 0.1, 5}, SuClass{16.5, 0.1, 5}};
  Tour t{{{0, {0}}}, {2}, {3, 4}};
  EXPECT_NEAR(waiting_time(s, t, park, 0, 0, 0), waiting_time(s, t, park, 0, 0, 1), 1e-15);
}

TEST(Waiting, LargestCaseIsMoreCriticalForEqualCounts) {
  auto s = make({{0, {20, 0}, 5}}, {{0, {0, 0}, 0}});
  auto park = paper_machinery();
  std::mt19937_64 eng(2);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(eng() % 6);
    Tour t{{{0, {0}}}, {1 + static_cast<int>(eng() % 3)}, {n, n}};
    EXPECT_GE(waiting_time(s, t, park, 0, 0, 1), waiting_time(s, t, park, 0, 0, 0));
  }
}

TEST(Waiting, LiteralTranscriptionAgrees) {
  std::mt19937_64 eng(77);
  auto u = [&] { return detail::unit_draw(eng); };
  for (int i = 0; i < 1000; ++i) {
    const double fx = 60 * (u() - 0.5), fy = 60 * (u() - 0.5);
    const double bx = 60 * (u() - 0.5), by = 60 * (u() - 0.5);
    auto s = make({{0, {fx, fy}, 3 + 4 * u()}}, {{0, {bx, by}, 0}});
    MachineryPark park;
    park.hu_classes = {HuClass{1 + 3 * u(), 4}, HuClass{1 + 3 * u(), 4}};
    park.su_classes = {SuClass{10 + 10 * u(), 0.05 + 0.2 * u(), 10},
                       SuClass{10 + 10 * u(), 0.05 + 0.2 * u(), 10},
                       SuClass{10 + 10 * u(), 0.05 + 0.2 * u(), 10}};
    Tour t{{{0, {0}}},
           {static_cast<int>(eng() % 4), 1 + static_cast<int>(eng() % 3)},
           {1 + static_cast<int>(eng() % 5), static_cast<int>(eng() % 5),
            static_cast<int>(eng() % 5)}};
    std::vector<double> t_load;
    for (const auto& c : park.su_classes) t_load.push_back(c.fill_time);
    const double dist = std::hypot(fx - bx, fy - by);
    for (std::size_t l = 0; l < 3; ++l) {
      if (t.su_counts[l] == 0) continue;
      const double got = waiting_time(s, t, park, 0, 0, l);
      const double want = wait_literal(dist, s.params().v_su_edge, t.su_counts, t_load,
                                       t.hu_counts, l);
      EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Waiting, AverageMatchesResummation) {
  // two plants, three fields
  auto s = make({{0, {5, 0}, 4}, {1, {9, 3}, 5}, {2, {-4, 7}, 6}},
                {{0, {0, 2}, 0}, {1, {-6, 6}, 0}});
  auto park = paper_machinery();
  Tour t{{{0, {0, 1}}, {1, {2}}}, {1}, {2, 4}};
  const std::size_t case_l = 1;  // 8 min class is the largest fill time present
  const double w00 = waiting_time(s, t, park, 0, 0, case_l);
  const double w10 = waiting_time(s, t, park, 1, 0, case_l);
  const double w21 = waiting_time(s, t, park, 2, 1, case_l);
  const double want = ((w00 + w10) / 2.0 + w21) / 2.0;
  EXPECT_NEAR(avg_waiting_time(s, t, park), want, 1e-12);
}

TEST(Waiting, ColocatedFieldsAreNegative) {
  auto s = make({{0, {3, 3}, 4}}, {{0, {3, 3}, 0}});
  auto park = paper_machinery();
  Tour t{{{0, {0}}}, {1}, {1, 1}};
  EXPECT_LT(avg_waiting_time(s, t, park), 0.0);
}

TEST(Routing, MatchesCoordinateWalk) {
  GeneratorOptions o;
  o.n_fields = 50;
  o.n_plants = 5;
  o.area_km = 25;
  o.min_demand = 10;
  auto s = generate_scenario(21, o);
  auto park = paper_machinery();
  auto init = build_initial(s, park);
  for (const auto& t : init.plan.tours) {
    if (!t.active()) continue;
    const auto r = route_summary(s, t);
    std::vector<Location> walk{s.hq()};
    double ha = 0.0;
    for (const auto& stop : t.stops) {
      for (FieldIndex f : stop.fields) {
        walk.push_back(s.fields()[f].location);
        ha += s.fields()[f].size_ha;
      }
    }
    walk.push_back(s.hq());
    double len = 0.0;
    for (std::size_t i = 1; i < walk.size(); ++i) len += d(walk[i - 1], walk[i]);
    EXPECT_NEAR(r.hu_path_km, len, 1e-9 * len);
    EXPECT_NEAR(r.hectares, ha, 1e-9 * ha);
  }
}
