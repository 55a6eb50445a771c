#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geese/harness.hpp"

namespace {

struct CliState {
  geese::ExperimentConfig cfg;
  double single_eps = 0.075;
  int single_init = 64;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& s, F conv) {
  std::vector<T> out;
  for (const std::string& tok : split_list(s)) out.push_back(conv(tok));
  return out;
}

// Flat key=value configuration; CLI flags parsed afterwards override these.
void apply_config_kv(CliState& st, const std::string& key, const std::string& value) {
  auto& cfg = st.cfg;
  auto to_int = [](const std::string& v) { return std::stoi(v); };
  auto to_dbl = [](const std::string& v) { return std::stod(v); };
  if (key == "problem") cfg.problem = value;
  else if (key == "algos") cfg.algorithms = split_list(value);
  else if (key == "cases") cfg.n_cases = to_int(value);
  else if (key == "budget") cfg.budget = to_int(value);
  else if (key == "seed") cfg.master_seed = std::stoull(value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "fixtures") cfg.fixture_dir = value;
  else if (key == "jobs") cfg.jobs = to_int(value);
  else if (key == "exploit-mode") cfg.exploit_mode = value;
  else if (key == "net-hidden") cfg.net_hidden = parse_list<int>(value, to_int);
  else if (key == "ensemble") cfg.ensemble_size = to_int(value);
  else if (key == "n-exploit") cfg.n_exploit = to_int(value);
  else if (key == "n-explore") cfg.n_explore = to_int(value);
  else if (key == "explore-hidden") cfg.explore_hidden = to_int(value);
  else if (key == "lr-gen") cfg.lr_generator = to_dbl(value);
  else if (key == "lr-base") cfg.lr_base = to_dbl(value);
  else if (key == "eps-e") cfg.early_stop = to_dbl(value);
  else if (key == "train-iters") cfg.max_train_iters = to_int(value);
  else if (key == "init-train-iters") cfg.init_train_iters = to_int(value);
  else if (key == "delta-g") cfg.train_freq_coeff = to_int(value);
  else if (key == "focus") cfg.focus_coefficient = to_dbl(value);
  else if (key == "which") cfg.ablations = parse_list<int>(value, to_int);
  else if (key == "grid") cfg.sensitivity_grids = split_list(value);
  else if (key == "epsilon") {
    cfg.epsilons = parse_list<double>(value, to_dbl);
    st.single_eps = cfg.epsilons.front();
  } else if (key == "init") {
    cfg.init_sizes = parse_list<int>(value, to_int);
    st.single_init = cfg.init_sizes.front();
  } else {
    throw std::runtime_error("unknown config key: " + key);
  }
}

void load_config_file(CliState& st, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    std::size_t eq = line.find('=', start);
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(start, eq - start);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(value);
    apply_config_kv(st, key, value);
  }
}

void add_common_options(CLI::App* cmd, CliState& st) {
  auto& cfg = st.cfg;
  cmd->add_option("--config", "Flat key=value config file; flags override it")
      ->check(CLI::ExistingFile);
  cmd->add_option("--problem", cfg.problem, "Built-in problem name (S1, S2, S3)");
  cmd->add_option("--algos", cfg.algorithms,
                  "Comma-separated algorithms: geese,random,ga,pso")
      ->delimiter(',');
  cmd->add_option("--cases", cfg.n_cases, "Number of experimental cases");
  cmd->add_option("--budget", cfg.budget, "Query budget T per case");
  cmd->add_option("--seed", cfg.master_seed, "Master seed");
  cmd->add_option("--out", cfg.out_dir, "Output directory");
  cmd->add_option("--fixtures", cfg.fixture_dir, "Fixture directory override");
  cmd->add_option("--jobs", cfg.jobs, "Worker pool size (0 = all cores)");
  cmd->add_option("--exploit-mode", cfg.exploit_mode, "network or direct");
  cmd->add_option("--net-hidden", cfg.net_hidden, "Hidden layer widths, e.g. 64,128,64")
      ->delimiter(',');
  cmd->add_option("--ensemble", cfg.ensemble_size, "Base net count L");
  cmd->add_option("--n-exploit", cfg.n_exploit, "Exploitation candidate count N_IT");
  cmd->add_option("--n-explore", cfg.n_explore, "Exploration candidate count N_R");
  cmd->add_option("--explore-hidden", cfg.explore_hidden, "Exploration net hidden width");
  cmd->add_option("--lr-gen", cfg.lr_generator, "Generator learning rate");
  cmd->add_option("--lr-base", cfg.lr_base, "Base net learning rate");
  cmd->add_option("--eps-e", cfg.early_stop, "Early stopping threshold eps_e");
  cmd->add_option("--train-iters", cfg.max_train_iters, "Per-update train iterations T_e");
  cmd->add_option("--init-train-iters", cfg.init_train_iters,
                  "Initial ensemble fit iterations (0 = T_e)");
  cmd->add_option("--delta-g", cfg.train_freq_coeff, "Training frequency coefficient");
  cmd->add_option("--focus", cfg.focus_coefficient, "Focus coefficient c");
}

void print_rows(const std::vector<geese::MetricsRow>& rows) {
  std::cout << geese::csv_header() << "\n";
  for (const auto& r : rows) std::cout << geese::csv_line(r) << "\n";
}

// --config must act before the other flags so they can override it.
void preload_config(CliState& st, int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") load_config_file(st, argv[i + 1]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-budgeted correction of failed inverse-problem state estimations"};
  app.require_subcommand(1);

  CliState st;
  try {
    preload_config(st, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto& cfg = st.cfg;

  CLI::App* cmd_run = app.add_subcommand("run", "Run algorithms on one (epsilon, N) cell");
  add_common_options(cmd_run, st);
  cmd_run->add_option("--epsilon", st.single_eps, "Feasibility threshold");
  cmd_run->add_option("--init", st.single_init, "Initial sample size N");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Sweep epsilon and init-size grids");
  add_common_options(cmd_sweep, st);
  cmd_sweep->add_option("--epsilon", cfg.epsilons, "Feasibility thresholds")->delimiter(',');
  cmd_sweep->add_option("--init", cfg.init_sizes, "Initial sample sizes")->delimiter(',');

  CLI::App* cmd_ablate = app.add_subcommand("ablate", "Paired ablation arms");
  add_common_options(cmd_ablate, st);
  cmd_ablate->add_option("--epsilon", st.single_eps, "Feasibility threshold");
  cmd_ablate->add_option("--init", st.single_init, "Initial sample size N");
  cmd_ablate->add_option("--which", cfg.ablations, "Ablation ids (1..4)")->delimiter(',');

  CLI::App* cmd_sense = app.add_subcommand("sense", "Hyperparameter sensitivity grids");
  add_common_options(cmd_sense, st);
  cmd_sense->add_option("--epsilon", st.single_eps, "Feasibility threshold");
  cmd_sense->add_option("--init", st.single_init, "Initial sample size N");
  cmd_sense->add_option("--grid", cfg.sensitivity_grids, "Grids: L,NIT,lr,eps_e")
      ->delimiter(',');

  std::string csv_path;
  CLI::App* cmd_plot = app.add_subcommand("plot", "Render SVG charts from a summary CSV");
  cmd_plot->add_option("csv", csv_path, "Path to a summary CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_plot->parsed()) {
      auto files = geese::emit_plots(csv_path);
      for (const auto& f : files) std::cout << "wrote " << f << "\n";
      return 0;
    }
    if (cmd_run->parsed() || cmd_ablate->parsed() || cmd_sense->parsed()) {
      cfg.epsilons = {st.single_eps};
      cfg.init_sizes = {st.single_init};
    }
    std::vector<geese::MetricsRow> rows;
    if (cmd_run->parsed() || cmd_sweep->parsed())
      rows = geese::run_experiment(cfg);
    else if (cmd_ablate->parsed())
      rows = geese::run_ablations(cfg);
    else if (cmd_sense->parsed())
      rows = geese::run_sensitivity(cfg);
    print_rows(rows);
    std::cout << "results written to " << cfg.out_dir << "/\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
