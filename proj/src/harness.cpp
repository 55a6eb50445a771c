#include "geese/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace geese {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  if (n_cases < 1) throw std::invalid_argument("experiment: n_cases must be >= 1");
  if (budget < 1) throw std::invalid_argument("experiment: budget must be >= 1");
  if (algorithms.empty() || epsilons.empty() || init_sizes.empty())
    throw std::invalid_argument("experiment: algorithm/epsilon/init lists must be nonempty");
  for (double e : epsilons)
    if (e <= 0.0) throw std::invalid_argument("experiment: epsilon must be > 0");
  for (int n : init_sizes)
    if (n < 1) throw std::invalid_argument("experiment: init size must be >= 1");
}

std::vector<CaseSpec> generate_cases(const ProblemSpec& spec, int n_cases,
                                     std::uint64_t master_seed) {
  if (n_cases < 1) throw std::invalid_argument("generate_cases: n_cases must be >= 1");
  spec.validate();
  Rng root(master_seed ^ fnv1a(spec.name));
  std::vector<CaseSpec> cases;
  cases.reserve(n_cases);
  for (int i = 0; i < n_cases; ++i) {
    CaseSpec c;
    c.index = i;
    c.seed = root.next();
    Rng state_rng = Rng(c.seed).split(0xCA5E);
    bool found = false;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vec x = spec.bounds.sample_uniform(state_rng);
      EvalResult r = evaluate_unledgered(spec, x);
      if (!r.feasible) {
        c.start_state = std::move(x);
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument("generate_cases: cannot draw an infeasible start for " +
                                  spec.name + " (threshold too permissive)");
    cases.push_back(std::move(c));
  }
  return cases;
}

namespace {

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

ExploitMode parse_mode(const std::string& s) {
  if (s == "network") return ExploitMode::Network;
  if (s == "direct" || s == "direct_state") return ExploitMode::DirectState;
  throw std::invalid_argument("unknown exploit mode: " + s);
}

}  // namespace

GeeseConfig geese_config_for_arm(const ExperimentConfig& cfg, const std::string& arm,
                                 double epsilon, int init_size, std::uint64_t case_seed) {
  (void)epsilon;
  GeeseConfig g;
  try {
    g = default_config_for(cfg.problem);
  } catch (const std::invalid_argument&) {
    // non-builtin problems run with the generic defaults
  }
  if (!cfg.exploit_mode.empty()) g.exploit_mode = parse_mode(cfg.exploit_mode);
  if (!cfg.net_hidden.empty()) {
    g.surrogate_hidden = cfg.net_hidden;
    g.generator_hidden = cfg.net_hidden;
  }
  if (cfg.ensemble_size > 0) g.ensemble_size = cfg.ensemble_size;
  if (cfg.n_exploit > 0) g.latent.n_exploit = cfg.n_exploit;
  if (cfg.lr_generator > 0.0) g.lr_generator = cfg.lr_generator;
  if (cfg.lr_base > 0.0) g.lr_base = cfg.lr_base;
  if (cfg.early_stop >= 0.0) g.early_stop = cfg.early_stop;
  if (cfg.max_train_iters > 0) g.max_train_iters = cfg.max_train_iters;
  if (cfg.init_train_iters >= 0) g.init_train_iters = cfg.init_train_iters;
  if (cfg.train_freq_coeff > 0) g.train_freq_coeff = cfg.train_freq_coeff;
  if (cfg.focus_coefficient >= 1.0) g.focus_coefficient = cfg.focus_coefficient;
  if (cfg.explore_hidden > 0) g.explore_hidden = cfg.explore_hidden;
  if (cfg.n_explore > 0) g.latent.n_explore = cfg.n_explore;

  g.budget = cfg.budget;
  g.init_size = init_size;
  g.seed = mix64(case_seed ^ fnv1a(arm));

  if (arm == "geese") {
    // stock configuration
  } else if (arm == "geese_sum_error") {
    g.sum_error_mode = true;
  } else if (arm == "geese_trained_explore") {
    g.train_exploration = true;
  } else if (arm == "geese_no_earlystop") {
    g.early_stop = 0.0;
  } else if (arm == "geese_no_focus") {
    g.focus_coefficient = std::numeric_limits<double>::infinity();
  } else if (starts_with(arm, "geese_NIT")) {
    g.latent.n_exploit = std::stoi(arm.substr(9));
  } else if (starts_with(arm, "geese_L")) {
    g.ensemble_size = std::stoi(arm.substr(7));
  } else if (starts_with(arm, "geese_lr")) {
    g.lr_generator = std::stod(arm.substr(8));
  } else if (starts_with(arm, "geese_eps_e")) {
    g.early_stop = std::stod(arm.substr(11));
  } else {
    throw std::invalid_argument("unknown geese arm: " + arm);
  }
  return g;
}

RunOutcome run_case(const ProblemSpec& spec, const ExperimentConfig& cfg,
                    const std::string& algorithm, const CaseSpec& kase, int init_size) {
  if (starts_with(algorithm, "geese")) {
    GeeseConfig g = geese_config_for_arm(cfg, algorithm, spec.feasibility_threshold,
                                         init_size, kase.seed);
    return run(spec, g);
  }
  BaselineConfig b;
  b.algo = baseline_from_name(algorithm);
  b.population = init_size;
  b.seed = mix64(kase.seed ^ fnv1a(algorithm));
  return run_baseline(spec, b, cfg.budget);
}

MetricsRow aggregate(const std::string& algorithm, const ProblemSpec& spec, int init_size,
                     std::uint64_t master_seed, const std::vector<RunOutcome>& outcomes,
                     int budget) {
  MetricsRow row;
  row.algorithm = algorithm;
  row.problem = spec.name;
  row.epsilon = spec.feasibility_threshold;
  row.init_size = init_size;
  row.n_cases = static_cast<int>(outcomes.size());
  row.seed = master_seed;

  double n = static_cast<double>(outcomes.size());
  double mean = 0.0, mean_excl = 0.0;
  for (const RunOutcome& o : outcomes) {
    if (!o.success) ++row.failure_times;
    mean += o.success ? o.total_queries : budget;
    mean_excl += o.success ? o.queries_excluding_init
                           : budget - (o.total_queries - o.queries_excluding_init);
  }
  mean /= n;
  mean_excl /= n;
  double var = 0.0;
  for (const RunOutcome& o : outcomes) {
    double q = o.success ? o.total_queries : budget;
    var += (q - mean) * (q - mean);
  }
  row.query_mean = mean;
  row.query_std = std::sqrt(var / n);
  row.query_mean_excl_init = mean_excl;
  return row;
}

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mtx;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mtx);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// shortest round-trip formatting, so CSV values reparse bit-exactly
std::string fmt_num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json trace_to_json(const IterationTrace& tr) {
  json j;
  j["t"] = tr.iteration;
  j["tg_used"] = tr.tg_used;
  j["exploit_skipped"] = tr.exploit_skipped;
  j["exploit_state"] = tr.exploit_state;
  j["exploit_estimate"] = tr.exploit_estimate;
  if (tr.exploit_true_error) j["exploit_true_error"] = *tr.exploit_true_error;
  if (tr.explore_state) j["explore_state"] = *tr.explore_state;
  if (tr.explore_true_error) j["explore_true_error"] = *tr.explore_true_error;
  j["n_early"] = tr.n_early;
  j["archive_size"] = tr.archive_size;
  j["queries"] = tr.queries;
  return j;
}

json outcome_to_json(const RunOutcome& o) {
  json j;
  j["success"] = o.success;
  j["final_state"] = o.final_state;
  j["final_accumulated_error"] = o.final_accumulated_error;
  j["total_queries"] = o.total_queries;
  j["queries_excluding_init"] = o.queries_excluding_init;
  j["iterations"] = o.traces.size();
  json ts = json::array();
  for (const IterationTrace& tr : o.traces) ts.push_back(trace_to_json(tr));
  j["traces"] = std::move(ts);
  return j;
}

struct CellResult {
  MetricsRow row;
  std::vector<RunOutcome> outcomes;
};

CellResult run_cell(const ExperimentConfig& cfg, const ProblemSpec& spec,
                    const std::string& algorithm, int init_size,
                    const std::vector<CaseSpec>& cases) {
  CellResult cell;
  cell.outcomes.resize(cases.size());
  parallel_for(static_cast<int>(cases.size()), cfg.jobs, [&](int i) {
    cell.outcomes[i] = run_case(spec, cfg, algorithm, cases[i], init_size);
  });
  cell.row = aggregate(algorithm, spec, init_size, cfg.master_seed, cell.outcomes,
                       cfg.budget);
  return cell;
}

void write_traces(const std::string& path, const ExperimentConfig& cfg,
                  const ProblemSpec& spec, const std::string& algorithm, int init_size,
                  const std::vector<CaseSpec>& cases,
                  const std::vector<RunOutcome>& outcomes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write traces: " + path);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    json j = outcome_to_json(outcomes[i]);
    j["case"] = cases[i].index;
    j["case_seed"] = cases[i].seed;
    j["start_state"] = cases[i].start_state;
    j["algorithm"] = algorithm;
    j["problem"] = spec.name;
    j["epsilon"] = spec.feasibility_threshold;
    j["init_size"] = init_size;
    j["budget"] = cfg.budget;
    out << j.dump() << "\n";
  }
}

std::string cell_stem(const ProblemSpec& spec, const std::string& algorithm,
                      int init_size) {
  std::ostringstream os;
  os << spec.name << "_" << algorithm << "_eps" << fmt_num(spec.feasibility_threshold)
     << "_init" << init_size;
  return os.str();
}

void write_case_metadata(const std::string& path, const ProblemSpec& spec,
                         const std::vector<std::string>& arms,
                         const std::vector<CaseSpec>& cases) {
  json meta;
  meta["problem"] = spec.name;
  meta["epsilon"] = spec.feasibility_threshold;
  json per_arm = json::object();
  for (const std::string& arm : arms) {
    json seeds = json::array();
    for (const CaseSpec& c : cases) seeds.push_back(c.seed);
    per_arm[arm] = std::move(seeds);
  }
  meta["case_seeds_by_arm"] = std::move(per_arm);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metadata: " + path);
  out << meta.dump(2) << "\n";
}

std::vector<MetricsRow> run_arms(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& arms,
                                 const std::string& summary_name,
                                 const std::string& meta_name) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  std::vector<MetricsRow> rows;
  for (double eps : cfg.epsilons) {
    ProblemSpec spec = builtin_problem(cfg.problem, cfg.fixture_dir);
    spec.feasibility_threshold = eps;
    std::vector<CaseSpec> cases = generate_cases(spec, cfg.n_cases, cfg.master_seed);
    write_case_metadata(cfg.out_dir + "/" + meta_name + "_" + spec.name + "_eps" +
                            fmt_num(eps) + ".json",
                        spec, arms, cases);
    for (int init_size : cfg.init_sizes) {
      for (const std::string& arm : arms) {
        CellResult cell = run_cell(cfg, spec, arm, init_size, cases);
        write_traces(cfg.out_dir + "/traces_" + cell_stem(spec, arm, init_size) + ".jsonl",
                     cfg, spec, arm, init_size, cases, cell.outcomes);
        rows.push_back(cell.row);
      }
    }
  }
  write_csv(cfg.out_dir + "/" + summary_name, rows);
  return rows;
}

}  // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
  return run_arms(cfg, cfg.algorithms, "summary.csv", "cases");
}

std::vector<MetricsRow> run_ablations(const ExperimentConfig& cfg) {
  std::vector<std::string> arms = {"geese"};
  for (int which : cfg.ablations) {
    switch (which) {
      case 1: arms.push_back("geese_sum_error"); break;
      case 2: arms.push_back("geese_trained_explore"); break;
      case 3: arms.push_back("geese_no_earlystop"); break;
      case 4: arms.push_back("geese_no_focus"); break;
      default: throw std::invalid_argument("ablation id must be in 1..4");
    }
  }
  return run_arms(cfg, arms, "ablation_summary.csv", "ablation_cases");
}

std::vector<MetricsRow> run_sensitivity(const ExperimentConfig& cfg) {
  std::vector<std::string> arms = {"geese"};
  for (const std::string& grid : cfg.sensitivity_grids) {
    if (grid == "L") {
      for (int v : cfg.grid_ensemble) arms.push_back("geese_L" + std::to_string(v));
    } else if (grid == "NIT") {
      for (int v : cfg.grid_n_exploit) arms.push_back("geese_NIT" + std::to_string(v));
    } else if (grid == "lr") {
      for (double v : cfg.grid_lr_gen) arms.push_back("geese_lr" + fmt_num(v));
    } else if (grid == "eps_e") {
      for (double v : cfg.grid_eps_e) arms.push_back("geese_eps_e" + fmt_num(v));
    } else {
      throw std::invalid_argument("unknown sensitivity grid: " + grid);
    }
  }
  return run_arms(cfg, arms, "sensitivity_summary.csv", "sensitivity_cases");
}

std::string csv_header() {
  return "algorithm,problem,epsilon,init_size,failure_times,query_mean,query_std,"
         "query_mean_excl_init,n_cases,seed";
}

std::string csv_line(const MetricsRow& r) {
  std::ostringstream os;
  os << r.algorithm << "," << r.problem << "," << fmt_num(r.epsilon) << "," << r.init_size
     << "," << r.failure_times << "," << fmt_num(r.query_mean) << ","
     << fmt_num(r.query_std) << "," << fmt_num(r.query_mean_excl_init) << "," << r.n_cases
     << "," << r.seed;
  return os.str();
}

void write_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << csv_header() << "\n";
  for (const MetricsRow& r : rows) out << csv_line(r) << "\n";
}

std::vector<MetricsRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  if (line != csv_header()) throw std::runtime_error("malformed csv header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 10) throw std::runtime_error("malformed csv row in " + path);
    MetricsRow r;
    r.algorithm = f[0];
    r.problem = f[1];
    r.epsilon = std::stod(f[2]);
    r.init_size = std::stoi(f[3]);
    r.failure_times = std::stoi(f[4]);
    r.query_mean = std::stod(f[5]);
    r.query_std = std::stod(f[6]);
    r.query_mean_excl_init = std::stod(f[7]);
    r.n_cases = std::stoi(f[8]);
    r.seed = std::stoull(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string svg_bar_chart(const std::string& title, const std::vector<MetricsRow>& rows) {
  const int bar_w = 70, gap = 40, margin = 70;
  const int height = 340, plot_h = 240;
  int width = margin * 2 + static_cast<int>(rows.size()) * (bar_w + gap);
  double peak = 1.0;
  for (const MetricsRow& r : rows) peak = std::max(peak, r.query_mean + r.query_std);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n"
      << "  <line x1=\"" << margin - 10 << "\" y1=\"" << 40 + plot_h << "\" x2=\""
      << width - margin + 10 << "\" y2=\"" << 40 + plot_h
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricsRow& r = rows[i];
    int x = margin + static_cast<int>(i) * (bar_w + gap);
    double h = plot_h * (r.query_mean / peak);
    double y = 40 + plot_h - h;
    double whisker = plot_h * (r.query_std / peak);
    svg << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w
        << "\" height=\"" << h << "\" fill=\"#4878a8\"/>\n";
    double cx = x + bar_w / 2.0;
    svg << "  <line x1=\"" << cx << "\" y1=\"" << std::max(30.0, y - whisker)
        << "\" x2=\"" << cx << "\" y2=\"" << std::min(40.0 + plot_h, y + whisker)
        << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg << "  <text x=\"" << cx << "\" y=\"" << 40 + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << r.algorithm << "</text>\n";
    svg << "  <text x=\"" << cx << "\" y=\"" << y - whisker - 6
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_num(r.query_mean) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& csv_path) {
  std::vector<MetricsRow> rows = read_csv(csv_path);
  std::vector<std::string> written;
  if (rows.empty()) {
    std::cerr << "emit_plots: no result rows in " << csv_path << ", nothing to plot\n";
    return written;
  }
  // group rows per (problem, epsilon, init_size)
  std::map<std::string, std::vector<MetricsRow>> groups;
  for (const MetricsRow& r : rows) {
    std::string key = r.problem + "_eps" + fmt_num(r.epsilon) + "_init" +
                      std::to_string(r.init_size);
    groups[key].push_back(r);
  }
  fs::path base(csv_path);
  for (const auto& [key, group] : groups) {
    fs::path out = base.parent_path() /
                   (base.stem().string() + "_" + key + ".svg");
    std::string title = group.front().problem + "  eps=" + fmt_num(group.front().epsilon) +
                        "  N=" + std::to_string(group.front().init_size) +
                        "  mean queries";
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write plot: " + out.string());
    f << svg_bar_chart(title, group);
    written.push_back(out.string());
  }
  return written;
}

}  // namespace geese
