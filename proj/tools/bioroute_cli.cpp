// bioroute: generate scenarios, solve one case, or compare all cases.
//
//   bioroute gen --preset paper --seed 1 --out s1.json
//   bioroute solve --scenario s1.json --case 4 --epsilon 0.5 --out run1
//   bioroute compare --preset paper --replicates 10 --out cmp

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bioroute/experiment.hpp"
#include "bioroute/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace bioroute;

namespace {

struct Common {
  std::string scenario;
  std::string preset;
  std::uint64_t seed = 0;
  std::string out;
  int iters = 5000;
  int workers = kDefaultWorkers;
  bool double_perturb = false;
  std::string cost_model = "skeleton";
  unsigned threads = 0;
};

CostModel parse_model(const std::string& name) {
  if (name == "skeleton") return CostModel::kSkeleton;
  if (name == "accompany") return CostModel::kAccompany;
  throw InputError("unknown cost model '" + name + "'");
}

ScenarioFile resolve_scenario(const Common& c) {
  if (!c.scenario.empty()) return load_scenario(c.scenario);
  if (c.preset == "paper") return {generate_scenario(c.seed, GeneratorOptions{}), paper_machinery()};
  throw InputError("give --scenario PATH or --preset paper");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void add_search_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--iters", c.iters, "iterations per solve")->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", c.workers, "candidates per iteration")->check(CLI::PositiveNumber);
  cmd->add_flag("--double-perturb", c.double_perturb, "two moves per candidate");
  cmd->add_option("--cost-model", c.cost_model, "skeleton or accompany")
      ->check(CLI::IsMember({"skeleton", "accompany"}));
  cmd->add_option("--threads", c.threads, "worker threads (0: all cores)");
}

SolveOptions solve_options(const Common& c) {
  SolveOptions o;
  o.n_iters = c.iters;
  o.n_workers = c.workers;
  o.seed = c.seed;
  o.double_perturb = c.double_perturb;
  o.cost_model = parse_model(c.cost_model);
  o.n_threads = c.threads;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harvest logistics optimiser"};
  app.require_subcommand(1);
  Common c;

  GeneratorOptions gen_opts;
  auto* gen = app.add_subcommand("gen", "write a random scenario file");
  gen->add_option("--preset", c.preset, "paper")->check(CLI::IsMember({"paper"}));
  gen->add_option("--seed", c.seed, "generator seed");
  gen->add_option("--out", c.out, "output file")->required();
  gen->add_option("--fields", gen_opts.n_fields);
  gen->add_option("--plants", gen_opts.n_plants);
  gen->add_option("--area", gen_opts.area_km, "side of the square area, km");
  gen->add_option("--demand", gen_opts.min_demand, "minimum demand per plant");
  gen->add_option("--size-min", gen_opts.field_size_min, "ha");
  gen->add_option("--size-span", gen_opts.field_size_span, "ha");

  int case_id = 4;
  double epsilon = 0.5;
  auto* solve_cmd = app.add_subcommand("solve", "run one case");
  solve_cmd->add_option("--scenario", c.scenario, "scenario file");
  solve_cmd->add_option("--preset", c.preset)->check(CLI::IsMember({"paper"}));
  solve_cmd->add_option("--case", case_id)->check(CLI::Range(1, 4));
  solve_cmd->add_option("--epsilon", epsilon)->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--seed", c.seed, "search seed (and preset scenario seed)");
  solve_cmd->add_option("--out", c.out, "output directory");
  add_search_flags(solve_cmd, c);

  int replicates = 10;
  std::vector<double> grid = default_epsilon_grid();
  auto* cmp = app.add_subcommand("compare", "all cases over replicates and an epsilon grid");
  cmp->add_option("--scenario", c.scenario, "fixed scenario for every replicate");
  cmp->add_option("--preset", c.preset)->check(CLI::IsMember({"paper"}));
  cmp->add_option("--replicates", replicates)->check(CLI::PositiveNumber);
  cmp->add_option("--epsilon-grid", grid)->delimiter(',')->check(CLI::Range(0.0, 1.0));
  cmp->add_option("--seed", c.seed, "scenario seed of replicate 0, search seed base");
  cmp->add_option("--out", c.out, "output directory");
  add_search_flags(cmp, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      if (c.preset == "paper") gen_opts = GeneratorOptions{};
      const auto s = generate_scenario(c.seed, gen_opts);
      save_scenario(c.out, s, paper_machinery());
      std::cout << "wrote " << c.out << " (" << s.field_count() << " fields, " << s.plant_count()
                << " plants)\n";
    } else if (*solve_cmd) {
      const auto file = resolve_scenario(c);
      SolveOptions o = solve_options(c);
      o.case_id = case_id;
      o.epsilon = epsilon;
      const auto rec = solve(file.scenario, file.machinery, o);
      std::cout << summary_table(rec);
      if (!c.out.empty()) {
        ensure_dir(c.out);
        write_text_file(join(c.out, "summary.json"), summary_json(rec).dump(1) + "\n");
        write_text_file(join(c.out, "summary.txt"), summary_table(rec));
        write_text_file(join(c.out, "trace.csv"), trace_csv(rec.result));
        write_text_file(join(c.out, "plan.json"),
                        plan_to_json(file.scenario, rec.result.best_plan).dump(1) + "\n");
      }
    } else if (*cmp) {
      CompareOptions o;
      o.replicates = replicates;
      o.epsilon_grid = grid;
      o.solve = solve_options(c);
      o.seed = c.seed;
      if (!c.scenario.empty()) {
        o.fixed = load_scenario(c.scenario);
      } else if (c.preset != "paper") {
        throw InputError("give --scenario PATH or --preset paper");
      }
      const auto report = compare(o);
      std::cout << compare_table(report);
      if (!c.out.empty()) {
        ensure_dir(c.out);
        write_text_file(join(c.out, "compare.json"), compare_json(report).dump(1) + "\n");
        write_text_file(join(c.out, "compare.txt"), compare_table(report));
      }
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
