// pibo: command-line front end for the stack-up optimizer.
//
//   pibo run     --config cfg.json [--out trace.csv] [--dataset data.csv] [--seed N]
//   pibo solo    --config cfg.json [--out trace.csv] [--seed N]
//   pibo brute   --config cfg.json [--table all.csv]
//   pibo bench   --config cfg.json [--seeds 50 | --seed-list 1,2,3] [--out report.csv]
//   pibo compare --config cfg.json [--seeds 50] [--out compare.csv]
//   pibo eval    --w 5 --s 5 --t 1.2 --h1 4 --h2 9 --er 3.7 [--config cfg.json]
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pibo/config.hpp"
#include "pibo/pibo.hpp"

namespace {

using namespace pibo;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string describe(const DesignPoint& p, const SearchSpace& space) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.values.size(); ++i)
    os << (i ? " " : "") << space.axis(i).name << "=" << io::format_physical(p.values[i]);
  return os.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

RunConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = parse_config(path);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  if (seed) {
    cfg.seed = *seed;
    cfg.pibo.master_seed = *seed;
  }
  return cfg;
}

io::MetricsFn metrics_of(const stripline::StriplineObjective& objective) {
  return [objective](const DesignPoint& p) -> std::optional<std::pair<double, double>> {
    try {
      const auto m = objective.metrics(p);
      return std::make_pair(m.z_diff, m.loss);
    } catch (const InvalidGeometryError&) {
      return std::nullopt;
    }
  };
}

void write_trace(const std::string& path, const SearchSpace& space, const RunTrace& trace,
                 const stripline::StriplineObjective& objective) {
  if (path.empty()) return;
  auto out = open_output(path);
  io::write_trace_csv(out, space, trace, metrics_of(objective));
  std::cout << "trace: " << path << " (" << trace.size() << " rows)\n";
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t count, const std::string& explicit_list) {
  std::vector<std::uint64_t> seeds;
  if (!explicit_list.empty()) {
    std::istringstream in(explicit_list);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item.empty()) continue;
      std::size_t used = 0;
      const auto value = std::stoull(item, &used);
      if (used != item.size()) throw Error("bad seed '" + item + "'");
      seeds.push_back(value);
    }
    return seeds;
  }
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(base + i);
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel Bayesian optimization of a differential stripline stack-up"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string dataset_path;
  std::string table_path;
  std::size_t seed_count = 50;
  std::string seed_csv;
  double w = 0, s = 0, t = 0, h1 = 0, h2 = 0, er = 0;

  auto* run = app.add_subcommand("run", "Parallel BO (workers, merge, final BO)");
  auto* solo = app.add_subcommand("solo", "Single classic BO");
  auto* brute = app.add_subcommand("brute", "Exhaustive search of the grid");
  auto* bench = app.add_subcommand("bench", "Repeated parallel BO against the brute-force optimum");
  auto* compare = app.add_subcommand("compare", "Solo BO vs parallel BO at equal budget");
  auto* eval = app.add_subcommand("eval", "Metrics and objective of one stack-up");

  for (auto* sub : {run, solo, brute, bench, compare}) {
    sub->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
  }
  for (auto* sub : {run, solo, bench, compare}) sub->add_option("--out", out_path, "Output CSV");
  run->add_option("--dataset", dataset_path, "Write the final dataset CSV");
  brute->add_option("--table", table_path, "Write every point and its objective");
  for (auto* sub : {bench, compare}) {
    sub->add_option("--seeds", seed_count, "Number of consecutive seeds starting at the config seed");
    sub->add_option("--seed-list", seed_csv, "Explicit comma-separated seeds");
  }
  eval->add_option("--w", w, "Trace width (mil)")->required();
  eval->add_option("--s", s, "Trace spacing (mil)")->required();
  eval->add_option("--t", t, "Trace thickness (mil)")->required();
  eval->add_option("--h1", h1, "Core height (mil)")->required();
  eval->add_option("--h2", h2, "Total dielectric height (mil)")->required();
  eval->add_option("--er", er, "Dielectric constant")->required();
  eval->add_option("--config", config_path, "Take objective settings from this config")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*eval) {
      stripline::ObjectiveSpec spec;
      if (!config_path.empty()) spec = parse_config(config_path).objective;
      const stripline::Geometry g{w, s, t, h1, h2, er};
      const auto m = stripline::line_metrics(g, spec);
      std::cout << std::setprecision(12) << "z_diff=" << m.z_diff << "\nloss=" << m.loss
                << "\nobjective=" << stripline::objective(m, spec) << "\n";
      return 0;
    }

    const RunConfig cfg = load(config_path, seed);
    const SearchSpace space = cfg.space();
    const stripline::StriplineObjective objective(cfg.objective);
    std::cout << std::setprecision(10);

    if (*run) {
      const auto result = run_pibo(space, objective, cfg.pibo_config());
      std::cout << "evaluations: " << result.trace.size() << " (merged after phase 1: " << result.merged_size
                << ")\nbest: " << describe(result.best_point, space) << "\nbest value: " << result.best_value << "\n";
      write_trace(out_path.empty() ? cfg.output.trace : out_path, space, result.trace, objective);
      const auto data_out = dataset_path.empty() ? cfg.output.dataset : dataset_path;
      if (!data_out.empty()) {
        auto out = open_output(data_out);
        io::write_dataset_csv(out, space, result.dataset);
      }
    } else if (*solo) {
      const auto result = run_bo(space, objective, cfg.solo_config());
      const auto best = result.dataset.argmin();
      std::cout << "evaluations: " << result.trace.size() << " (stop: " << to_string(result.stop_reason)
                << ")\nbest: " << describe(result.dataset.point(best), space)
                << "\nbest value: " << result.dataset.value(best) << "\n";
      write_trace(out_path.empty() ? cfg.output.trace : out_path, space, result.trace, objective);
    } else if (*brute) {
      std::ofstream table;
      BruteForceOptions opts;
      if (!table_path.empty()) {
        table = open_output(table_path);
        table << "flat_index";
        for (const auto& a : space.axes()) table << ',' << a.name;
        table << ",objective\n";
        opts.on_point = [&](const DesignPoint& p, double v) {
          table << space.flat_index(p);
          for (double x : p.values) table << ',' << io::format_physical(x);
          table << ',' << io::format_exact(v) << '\n';
        };
      }
      const auto bf = brute_force(space, objective, opts);
      std::cout << "evaluated: " << bf.evaluated << " (invalid geometry: " << bf.invalid
                << ")\nbest: " << describe(bf.best_point, space) << "\nbest value: " << bf.best_value << "\n";
    } else if (*bench) {
      const auto oracle = brute_force(space, objective);
      const auto seeds = seed_list(cfg.seed, seed_count, seed_csv);
      const auto report = benchmark(space, objective, cfg.pibo_config(), seeds, oracle.best_value);
      const auto agg = report.aggregates();
      auto opt = [](const std::optional<double>& v) { return v ? io::format_physical(*v) : std::string("n/a"); };
      std::cout << "oracle value: " << oracle.best_value << "\nruns: " << agg.runs << " failures: " << agg.failures
                << "\nsuccess rate (exact optimum): " << opt(agg.success_rate)
                << "\nwithin 1% of optimum: " << opt(agg.within_tol_rate)
                << "\nmedian evaluations to optimum: " << opt(agg.median_evals_to_global)
                << "\nmedian evaluations to within 1%: " << opt(agg.median_evals_to_within_tol)
                << "\nbest value q10/median/q90: " << opt(agg.best_value_q10) << " / " << opt(agg.best_value_median)
                << " / " << opt(agg.best_value_q90) << "\n";
      const auto path = out_path.empty() ? cfg.output.report : out_path;
      if (!path.empty()) {
        auto out = open_output(path);
        io::write_bench_csv(out, space, report);
      }
      if (agg.failures > 0) return kExitRuntime;
    } else if (*compare) {
      const auto seeds = seed_list(cfg.seed, seed_count, seed_csv);
      const auto cmp = compare_solo_vs_pibo(space, objective, cfg.pibo_config(), seeds);
      const auto sum = cmp.summary();
      std::cout << "budget per run: " << cmp.total_budget << "\nruns: " << sum.runs << "\nsolo mean/variance: "
                << sum.solo_mean << " / " << sum.solo_variance << "\npibo mean/variance: " << sum.pibo_mean << " / "
                << sum.pibo_variance << "\npibo wins/solo wins/ties: " << sum.pibo_wins << " / " << sum.solo_wins
                << " / " << sum.ties << "\n";
      const auto path = out_path.empty() ? cfg.output.report : out_path;
      if (!path.empty()) {
        auto out = open_output(path);
        io::write_comparison_csv(out, cmp);
      }
      if (sum.runs != cmp.rows.size()) return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
