#pragma once

// Solve and compare drivers behind the command line tool, plus their report
// formats (flat JSON records, aligned text tables, trace CSV).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bioroute/cost.hpp"
#include "bioroute/model.hpp"
#include "bioroute/scenario_io.hpp"
#include "bioroute/search.hpp"

namespace bioroute {

inline const std::vector<double>& default_epsilon_grid() {
  static const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  return grid;
}

struct SolveOptions {
  int case_id = 4;
  double epsilon = 0.5;
  int n_iters = 5000;
  int n_workers = kDefaultWorkers;
  std::uint64_t seed = 0;
  bool double_perturb = false;
  CostModel cost_model = CostModel::kSkeleton;
  unsigned n_threads = 0;
};

struct SolveRecord {
  int case_id = 1;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  SearchResult result;

  const Evaluation& eval() const { return result.best_eval; }
  double cost() const { return result.best_eval.total_cost; }
  double baseline_cost() const { return result.baseline_eval.total_cost; }
  double delta_km() const { return cost() - baseline_cost(); }
  double delta_pct() const { return 100.0 * delta_km() / baseline_cost(); }

  // Completion and waiting statistics over active tours.
  double completion_avg() const { return active_mean(eval().completion_times); }
  double completion_worst() const { return active_max(eval().completion_times); }
  double wait_avg() const { return active_mean(eval().avg_waiting_times); }
  double wait_worst() const { return active_max(eval().avg_waiting_times); }

 private:
  double active_mean(const std::vector<double>& v) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t g = 0; g < v.size(); ++g) {
      if (!eval().active[g]) continue;
      sum += v[g];
      ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
  }
  double active_max(const std::vector<double>& v) const {
    double m = -kInfiniteCost;
    for (std::size_t g = 0; g < v.size(); ++g) {
      if (eval().active[g]) m = std::max(m, v[g]);
    }
    return m;
  }
};

inline SearchConfig to_config(const SolveOptions& o) {
  SearchConfig c;
  c.mode = CaseMode::from_int(o.case_id);
  c.epsilon = o.epsilon;
  c.n_iters = o.n_iters;
  c.n_workers = o.n_workers;
  c.master_seed = o.seed;
  c.double_perturb = o.double_perturb;
  c.cost_model = o.cost_model;
  c.n_threads = o.n_threads;
  return c;
}

inline SolveRecord solve(const Scenario& s, const MachineryPark& park, const SolveOptions& o) {
  SolveRecord r;
  r.case_id = o.case_id;
  r.epsilon = o.epsilon;
  r.seed = o.seed;
  r.result = run_search(s, park, to_config(o));
  return r;
}

// Flat record: scalars plus per-tour arrays.
inline json summary_json(const SolveRecord& r) {
  const auto& e = r.eval();
  const auto& plan = r.result.best_plan;
  json hu = json::array();
  json su = json::array();
  for (const auto& t : plan.tours) {
    hu.push_back(t.hu_counts);
    su.push_back(t.su_counts);
  }
  return {{"case", r.case_id},
          {"epsilon", r.epsilon},
          {"seed", r.seed},
          {"n_tours", e.active_tours},
          {"hu_counts", hu},
          {"su_counts", su},
          {"tour_cost_km", e.per_tour_cost},
          {"completion_h", e.completion_times},
          {"wait_h", e.avg_waiting_times},
          {"completion_avg_h", r.completion_avg()},
          {"completion_worst_h", r.completion_worst()},
          {"wait_avg_h", r.wait_avg()},
          {"wait_worst_h", r.wait_worst()},
          {"cost_km", r.cost()},
          {"baseline_cost_km", r.baseline_cost()},
          {"delta_cost_km", r.delta_km()},
          {"delta_cost_pct", r.delta_pct()},
          {"solve_time_s", r.result.solve_time_s},
          {"evaluations", r.result.evaluations}};
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace detail

inline std::string summary_table(const SolveRecord& r) {
  const auto& e = r.eval();
  const auto& plan = r.result.best_plan;
  std::ostringstream out;
  out << "case " << r.case_id << "  epsilon " << detail::fmt("%.2f", r.epsilon) << "  seed "
      << r.seed << "  tours " << e.active_tours << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%4s %8s %12s %12s %12s %10s\n", "tour", "HUs", "SUs",
                "cost km", "compl h", "wait h");
  out << line;
  for (std::size_t g = 0; g < plan.tours.size(); ++g) {
    std::string sus;
    for (std::size_t l = 0; l < plan.tours[g].su_counts.size(); ++l) {
      if (l) sus += "+";
      sus += std::to_string(plan.tours[g].su_counts[l]);
    }
    std::snprintf(line, sizeof line, "%4zu %8d %12s %12.0f %12.1f %10.3f\n", g + 1,
                  plan.tours[g].hu_total(), sus.c_str(), e.per_tour_cost[g],
                  e.completion_times[g], e.avg_waiting_times[g]);
    out << line;
  }
  std::snprintf(line, sizeof line,
                "C* %.0f km  baseline %.0f km  delta %.0f km (%.2f%%)  solve %.3f s\n", r.cost(),
                r.baseline_cost(), r.delta_km(), r.delta_pct(), r.result.solve_time_s);
  out << line;
  return out.str();
}

// iteration, best cost, accepted move kind (0 none, 1 field, 2 plant).
inline std::string trace_csv(const SearchResult& r) {
  std::ostringstream out;
  out << "iteration,cost_km,accepted\n";
  char line[96];
  for (std::size_t i = 0; i < r.cost_trace.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%d\n", i + 1, r.cost_trace[i],
                  static_cast<int>(r.accept_trace[i]));
    out << line;
  }
  return out.str();
}

struct CompareOptions {
  int replicates = 10;
  std::vector<double> epsilon_grid = default_epsilon_grid();
  std::vector<int> cases{1, 2, 3, 4};
  SolveOptions solve;                 // case_id, epsilon and seed are overridden
  std::uint64_t seed = 0;             // scenario seed of replicate 0 and search seed base
  GeneratorOptions generator;         // used when no scenario is given
  std::optional<ScenarioFile> fixed;  // same scenario for every replicate
  MachineryPark machinery = paper_machinery();
};

struct CompareCell {
  int replicate = 0;
  std::size_t epsilon_index = 0;
  SolveRecord record;
};

struct CaseAggregate {
  int case_id = 1;
  double epsilon_star = 0.0;
  double n_tours = 0.0;
  double completion_avg = 0.0;
  double completion_worst = 0.0;
  double wait_avg = 0.0;
  double wait_worst = 0.0;
  double solve_time = 0.0;
  double cost = 0.0;
  double delta_km = 0.0;
  double delta_pct = 0.0;
};

struct CompareReport {
  std::vector<CompareCell> cells;
  // best[c][r]: index into `cells` of the epsilon* cell for case c, replicate r
  std::vector<std::vector<std::size_t>> best;
  std::vector<CaseAggregate> aggregates;
};

inline std::uint64_t cell_seed(std::uint64_t seed, int replicate, int case_id,
                               std::size_t epsilon_index) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(replicate));
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(case_id));
  return detail::splitmix64(h ^ static_cast<std::uint64_t>(epsilon_index));
}

// Case 1 ignores epsilon, so it is solved once per replicate.
inline CompareReport compare(const CompareOptions& o) {
  if (o.replicates < 1) throw InputError("need at least one replicate");
  if (o.epsilon_grid.empty()) throw InputError("epsilon grid is empty");
  CompareReport report;
  report.best.assign(o.cases.size(), std::vector<std::size_t>(o.replicates, 0));
  for (int r = 0; r < o.replicates; ++r) {
    std::optional<Scenario> generated;
    if (!o.fixed) generated.emplace(generate_scenario(o.seed + r, o.generator));
    const Scenario& s = o.fixed ? o.fixed->scenario : *generated;
    const MachineryPark& park = o.fixed ? o.fixed->machinery : o.machinery;
    for (std::size_t c = 0; c < o.cases.size(); ++c) {
      const int case_id = o.cases[c];
      const std::size_t n_eps = case_id == 1 ? 1 : o.epsilon_grid.size();
      std::size_t best = 0;
      for (std::size_t k = 0; k < n_eps; ++k) {
        SolveOptions so = o.solve;
        so.case_id = case_id;
        so.epsilon = case_id == 1 ? 0.0 : o.epsilon_grid[k];
        so.seed = cell_seed(o.seed, r, case_id, k);
        report.cells.push_back({r, k, solve(s, park, so)});
        const std::size_t idx = report.cells.size() - 1;
        if (k == 0 || report.cells[idx].record.cost() < report.cells[best].record.cost()) {
          best = idx;
        }
      }
      report.best[c][r] = best;
    }
  }

  // Deltas are taken against each replicate's own Case-1 baseline.
  for (std::size_t c = 0; c < o.cases.size(); ++c) {
    CaseAggregate a;
    a.case_id = o.cases[c];
    for (int r = 0; r < o.replicates; ++r) {
      const auto& rec = report.cells[report.best[c][r]].record;
      a.epsilon_star += rec.epsilon;
      a.n_tours += static_cast<double>(rec.eval().active_tours);
      a.completion_avg += rec.completion_avg();
      a.completion_worst += rec.completion_worst();
      a.wait_avg += rec.wait_avg();
      a.wait_worst += rec.wait_worst();
      a.solve_time += rec.result.solve_time_s;
      a.cost += rec.cost();
      a.delta_km += rec.delta_km();
      a.delta_pct += rec.delta_pct();
    }
    const double n = o.replicates;
    for (double* v : {&a.epsilon_star, &a.n_tours, &a.completion_avg, &a.completion_worst,
                      &a.wait_avg, &a.wait_worst, &a.solve_time, &a.cost, &a.delta_km,
                      &a.delta_pct}) {
      *v /= n;
    }
    report.aggregates.push_back(a);
  }
  return report;
}

inline json compare_json(const CompareReport& report) {
  json cells = json::array();
  for (const auto& cell : report.cells) {
    json j = summary_json(cell.record);
    j["replicate"] = cell.replicate;
    j["epsilon_index"] = cell.epsilon_index;
    cells.push_back(std::move(j));
  }
  json aggregates = json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"case", a.case_id},
                          {"epsilon_star_mean", a.epsilon_star},
                          {"n_tours_mean", a.n_tours},
                          {"completion_avg_h", a.completion_avg},
                          {"completion_worst_h", a.completion_worst},
                          {"wait_avg_h", a.wait_avg},
                          {"wait_worst_h", a.wait_worst},
                          {"solve_time_s", a.solve_time},
                          {"cost_km", a.cost},
                          {"delta_cost_km", a.delta_km},
                          {"delta_cost_pct", a.delta_pct}});
  }
  return {{"aggregates", aggregates}, {"solves", cells}};
}

inline std::string compare_table(const CompareReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s", "");
  out << line;
  for (const auto& a : report.aggregates) {
    std::snprintf(line, sizeof line, "%12s", ("case " + std::to_string(a.case_id)).c_str());
    out << line;
  }
  out << "\n";
  auto row = [&](const char* label, const char* spec, auto get) {
    std::snprintf(line, sizeof line, "%-22s", label);
    out << line;
    for (const auto& a : report.aggregates) {
      std::snprintf(line, sizeof line, spec, get(a));
      out << line;
    }
    out << "\n";
  };
  row("epsilon*", "%12.2f", [](const CaseAggregate& a) { return a.epsilon_star; });
  row("N_T", "%12.2f", [](const CaseAggregate& a) { return a.n_tours; });
  row("completion avg h", "%12.1f", [](const CaseAggregate& a) { return a.completion_avg; });
  row("completion worst h", "%12.1f", [](const CaseAggregate& a) { return a.completion_worst; });
  row("wait avg h", "%12.3f", [](const CaseAggregate& a) { return a.wait_avg; });
  row("wait worst h", "%12.3f", [](const CaseAggregate& a) { return a.wait_worst; });
  row("solve s", "%12.3f", [](const CaseAggregate& a) { return a.solve_time; });
  row("C* km", "%12.0f", [](const CaseAggregate& a) { return a.cost; });
  row("delta C* km", "%12.0f", [](const CaseAggregate& a) { return a.delta_km; });
  row("delta C* %", "%12.2f", [](const CaseAggregate& a) { return a.delta_pct; });
  return out.str();
}

}  // namespace bioroute
