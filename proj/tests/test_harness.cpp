#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "geese/harness.hpp"

using namespace geese;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.problem = "S1";
  cfg.algorithms = {"random"};
  cfg.n_cases = 2;
  cfg.budget = 30;
  cfg.epsilons = {0.2};
  cfg.init_sizes = {4};
  cfg.master_seed = 7;
  cfg.out_dir = out_dir;
  cfg.jobs = 2;
  // tiny nets keep geese arms cheap
  cfg.net_hidden = {8};
  cfg.max_train_iters = 2;
  cfg.ensemble_size = 2;
  cfg.n_exploit = 4;
  return cfg;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing ", path.string());
  std::vector<json> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(json::parse(line));
  return lines;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing ", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal well-formedness scan: every tag closes, properly nested.
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = text.find('<', i)) != std::string::npos) {
    std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag.front() == '?' || tag.front() == '!') continue;
    if (tag.back() == '/') continue;  // self-closing
    if (tag.front() == '/') {
      std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
      stack.push_back(name);
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("generate_cases: deterministic, distinct and infeasible starts") {
  ProblemSpec spec = builtin_problem("S1");
  auto a = generate_cases(spec, 20, 42);
  auto b = generate_cases(spec, 20, 42);
  REQUIRE(a.size() == 20);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].start_state == b[i].start_state);
    seeds.insert(a[i].seed);
    EvalResult r = evaluate_unledgered(spec, a[i].start_state);
    CHECK_FALSE(r.feasible);
  }
  CHECK(seeds.size() == 20);
}

TEST_CASE("generate_cases: a problem with no infeasible states is a config error") {
  ProblemSpec spec = builtin_problem("S1");
  spec.feasibility_threshold = 1e9;
  CHECK_THROWS_AS(generate_cases(spec, 1, 1), std::invalid_argument);
}

TEST_CASE("geese_config_for_arm: named and parameterized arms") {
  ExperimentConfig cfg = small_config("unused");
  auto base = geese_config_for_arm(cfg, "geese", 0.075, 8, 1);
  CHECK_FALSE(base.sum_error_mode);
  CHECK(geese_config_for_arm(cfg, "geese_sum_error", 0.075, 8, 1).sum_error_mode);
  CHECK(geese_config_for_arm(cfg, "geese_trained_explore", 0.075, 8, 1).train_exploration);
  CHECK(geese_config_for_arm(cfg, "geese_no_earlystop", 0.075, 8, 1).early_stop == 0.0);
  CHECK(std::isinf(
      geese_config_for_arm(cfg, "geese_no_focus", 0.075, 8, 1).focus_coefficient));
  CHECK(geese_config_for_arm(cfg, "geese_L8", 0.075, 8, 1).ensemble_size == 8);
  CHECK(geese_config_for_arm(cfg, "geese_NIT32", 0.075, 8, 1).latent.n_exploit == 32);
  CHECK(geese_config_for_arm(cfg, "geese_lr0.1", 0.075, 8, 1).lr_generator ==
        doctest::Approx(0.1));
  CHECK(geese_config_for_arm(cfg, "geese_eps_e0.001", 0.075, 8, 1).early_stop ==
        doctest::Approx(1e-3));
  CHECK_THROWS_AS(geese_config_for_arm(cfg, "geese_bogus", 0.075, 8, 1),
                  std::invalid_argument);
  // identical case seeds of different arms still give different run seeds
  CHECK(geese_config_for_arm(cfg, "geese", 0.075, 8, 1).seed !=
        geese_config_for_arm(cfg, "geese_no_focus", 0.075, 8, 1).seed);
}

TEST_CASE("run_experiment: csv row and jsonl records per cell") {
  fs::path out = fresh_dir("geese_harness_basic");
  ExperimentConfig cfg = small_config(out.string());
  auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].algorithm == "random");
  CHECK(rows[0].n_cases == 2);

  auto lines = read_jsonl(out / "traces_S1_random_eps0.2_init4.jsonl");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["case"] == 0);
  CHECK(lines[1]["case"] == 1);
  CHECK(lines[0].contains("final_state"));
  CHECK(lines[0].contains("start_state"));

  auto csv_rows = read_csv((out / "summary.csv").string());
  REQUIRE(csv_rows.size() == 1);
  CHECK(csv_rows[0].algorithm == rows[0].algorithm);
  CHECK(csv_rows[0].query_mean == doctest::Approx(rows[0].query_mean).epsilon(1e-12));
}

TEST_CASE("run_experiment: aggregation matches an independent recomputation") {
  fs::path out = fresh_dir("geese_harness_agg");
  ExperimentConfig cfg = small_config(out.string());
  cfg.algorithms = {"random", "geese"};
  cfg.n_cases = 4;
  auto rows = run_experiment(cfg);
  for (const MetricsRow& row : rows) {
    auto lines = read_jsonl(out / ("traces_S1_" + row.algorithm + "_eps0.2_init4.jsonl"));
    REQUIRE(static_cast<int>(lines.size()) == row.n_cases);
    double mean = 0.0;
    int failures = 0;
    for (const json& j : lines) {
      bool success = j["success"].get<bool>();
      if (!success) ++failures;
      mean += success ? j["total_queries"].get<double>() : cfg.budget;
    }
    mean /= lines.size();
    double var = 0.0;
    for (const json& j : lines) {
      double q = j["success"].get<bool>() ? j["total_queries"].get<double>() : cfg.budget;
      var += (q - mean) * (q - mean);
    }
    double stddev = std::sqrt(var / lines.size());
    CHECK(std::abs(row.query_mean - mean) < 1e-9);
    CHECK(std::abs(row.query_std - stddev) < 1e-9);
    CHECK(row.failure_times == failures);
  }
}

TEST_CASE("run_experiment: all-fail cells report the budget with zero spread") {
  fs::path out = fresh_dir("geese_harness_allfail");
  ExperimentConfig cfg = small_config(out.string());
  cfg.algorithms = {"random"};
  cfg.epsilons = {1e-9};  // below the attainable minimum
  cfg.n_cases = 3;
  cfg.budget = 25;
  auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].failure_times == 3);
  CHECK(rows[0].query_mean == doctest::Approx(25.0));
  CHECK(rows[0].query_std == doctest::Approx(0.0));
}

TEST_CASE("run_experiment: permuting algorithm order leaves traces bit-identical") {
  fs::path out_a = fresh_dir("geese_harness_order_a");
  fs::path out_b = fresh_dir("geese_harness_order_b");
  ExperimentConfig cfg = small_config(out_a.string());
  cfg.algorithms = {"random", "ga"};
  run_experiment(cfg);
  cfg.algorithms = {"ga", "random"};
  cfg.out_dir = out_b.string();
  run_experiment(cfg);
  for (const std::string algo : {"random", "ga"}) {
    std::string name = "traces_S1_" + algo + "_eps0.2_init4.jsonl";
    CHECK(slurp(out_a / name) == slurp(out_b / name));
  }
}

TEST_CASE("run_experiment: sweep over epsilon and init grids fills every cell") {
  fs::path out = fresh_dir("geese_harness_sweep");
  ExperimentConfig cfg = small_config(out.string());
  cfg.algorithms = {"random"};
  cfg.epsilons = {0.15, 0.3};
  cfg.init_sizes = {4, 6};
  auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 4);
  for (double eps : cfg.epsilons)
    for (int init : cfg.init_sizes) {
      bool found = false;
      for (const MetricsRow& r : rows)
        if (r.epsilon == eps && r.init_size == init) found = true;
      CHECK(found);
      std::ostringstream name;
      name << "traces_S1_random_eps" << (eps == 0.15 ? "0.15" : "0.3") << "_init" << init
           << ".jsonl";
      CHECK(read_jsonl(out / name.str()).size() == 2);
    }
  // cases are regenerated per threshold: starts infeasible at that threshold
  for (double eps : cfg.epsilons) {
    ProblemSpec spec = builtin_problem("S1");
    spec.feasibility_threshold = eps;
    for (const CaseSpec& c : generate_cases(spec, cfg.n_cases, cfg.master_seed))
      CHECK_FALSE(evaluate_unledgered(spec, c.start_state).feasible);
  }
}

TEST_CASE("run_ablations: paired arms on identical case seeds") {
  fs::path out = fresh_dir("geese_harness_ablate");
  ExperimentConfig cfg = small_config(out.string());
  cfg.algorithms = {"geese"};
  cfg.n_cases = 2;
  cfg.budget = 25;
  cfg.ablations = {1, 2, 3, 4};
  auto rows = run_ablations(cfg);
  REQUIRE(rows.size() == 5);  // geese + four arms

  json meta = json::parse(slurp(out / "ablation_cases_S1_eps0.2.json"));
  const auto& per_arm = meta["case_seeds_by_arm"];
  REQUIRE(per_arm.size() == 5);
  json reference = per_arm["geese"];
  for (const auto& [arm, seeds] : per_arm.items()) CHECK(seeds == reference);

  // focus-off arm never skips exploitation
  for (const json& j : read_jsonl(out / "traces_S1_geese_no_focus_eps0.2_init4.jsonl"))
    for (const json& tr : j["traces"]) CHECK_FALSE(tr["exploit_skipped"].get<bool>());

  // early-stop-off arm reports zero early-stopped members throughout
  for (const json& j : read_jsonl(out / "traces_S1_geese_no_earlystop_eps0.2_init4.jsonl"))
    for (const json& tr : j["traces"]) CHECK(tr["n_early"] == 0);
}

TEST_CASE("run_sensitivity: one arm per grid value") {
  fs::path out = fresh_dir("geese_harness_sense");
  ExperimentConfig cfg = small_config(out.string());
  cfg.algorithms = {"geese"};
  cfg.n_cases = 1;
  cfg.budget = 20;
  cfg.sensitivity_grids = {"L"};
  cfg.grid_ensemble = {2, 4};
  auto rows = run_sensitivity(cfg);
  REQUIRE(rows.size() == 3);  // geese, geese_L2, geese_L4
  CHECK(rows[1].algorithm == "geese_L2");
  CHECK(rows[2].algorithm == "geese_L4");
}

TEST_CASE("csv io round-trips") {
  fs::path out = fresh_dir("geese_harness_csv");
  MetricsRow row;
  row.algorithm = "geese";
  row.problem = "S1";
  row.epsilon = 0.075;
  row.init_size = 16;
  row.failure_times = 1;
  row.query_mean = 23.25;
  row.query_std = 4.5;
  row.query_mean_excl_init = 7.25;
  row.n_cases = 4;
  row.seed = 42;
  write_csv((out / "t.csv").string(), {row});
  auto rows = read_csv((out / "t.csv").string());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].algorithm == "geese");
  CHECK(rows[0].epsilon == doctest::Approx(0.075));
  CHECK(rows[0].query_mean == doctest::Approx(23.25));
  CHECK(rows[0].seed == 42);
}

TEST_CASE("emit_plots: empty results warn and write nothing") {
  fs::path out = fresh_dir("geese_harness_plot_empty");
  write_csv((out / "empty.csv").string(), {});
  auto files = emit_plots((out / "empty.csv").string());
  CHECK(files.empty());
}

TEST_CASE("emit_plots: two algorithms in one cell give one well-formed svg") {
  fs::path out = fresh_dir("geese_harness_plot");
  MetricsRow a;
  a.algorithm = "geese";
  a.problem = "S1";
  a.epsilon = 0.075;
  a.init_size = 16;
  a.query_mean = 20.0;
  a.query_std = 5.0;
  a.n_cases = 10;
  MetricsRow b = a;
  b.algorithm = "random";
  b.query_mean = 31.0;
  write_csv((out / "s.csv").string(), {a, b});
  auto files = emit_plots((out / "s.csv").string());
  REQUIRE(files.size() == 1);
  std::string svg = slurp(files[0]);
  CHECK(xml_well_formed(svg));
  CHECK(svg.find("geese") != std::string::npos);
  CHECK(svg.find("random") != std::string::npos);
}

TEST_CASE("emit_plots: malformed csv raises") {
  fs::path out = fresh_dir("geese_harness_plot_bad");
  std::ofstream f(out / "bad.csv");
  f << "not,a,real,header\n";
  f.close();
  CHECK_THROWS_AS(emit_plots((out / "bad.csv").string()), std::runtime_error);
}
