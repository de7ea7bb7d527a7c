// probit-mix: command-line driver for meeting-time tables, TV curves, bounds and sampling.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "probit_mix/probit_mix.hpp"
#include "probit_mix/scenario.hpp"

namespace fs = std::filesystem;
using namespace probit_mix;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out = "out";
  bool check = false;
};

ScenarioConfig load(const Options& opt) {
  ScenarioConfig cfg = load_scenario(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

std::size_t thread_count(const Options& opt) { return opt.threads == 0 ? default_thread_count() : opt.threads; }

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int bench_table(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = load(opt);
  const fs::path out_dir(opt.out);
  fs::create_directories(out_dir / "meetings");
  std::vector<CellResult> results;
  json summary = json::array();
  bool all_pass = true;
  std::printf("%-48s %8s %8s %6s %6s %s\n", "cell", "t_mix", "se", "cens", "reference", "check");
  for (const auto& cell : cfg.cells) {
    CellResult r = run_cell(cfg, cell, thread_count(opt));
    {
      std::ofstream meetings(out_dir / "meetings" / (cell.label + ".csv"));
      io::write_meeting_csv(meetings, r.records);
    }
    const auto check = r.check();
    if (check && !*check) all_pass = false;
    if (!r.error.empty()) std::fprintf(stderr, "cell %s failed: %s\n", cell.label.c_str(), r.error.c_str());
    std::printf("%-48s %8s %8.2f %6zu %6s %s\n", cell.label.c_str(),
                r.t_mix ? std::to_string(*r.t_mix).c_str() : "-", r.t_mix_se,
                r.curve ? r.curve->n_censored : std::size_t{0},
                cell.reference ? std::to_string(static_cast<long>(*cell.reference)).c_str() : "-",
                check ? (*check ? "pass" : "FAIL") : "");
    std::fflush(stdout);
    summary.push_back(cell_summary(r));
    results.push_back(std::move(r));
  }
  {
    std::ofstream table(out_dir / "table.csv");
    write_table_csv(table, results);
  }
  write_json(out_dir / "summary.json", summary);
  write_json(out_dir / "manifest.json", manifest(cfg, "bench-table", elapsed(start), thread_count(opt)));
  return opt.check && !all_pass ? 1 : 0;
}

int tv_curve(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = load(opt);
  const fs::path out_dir(opt.out);
  fs::create_directories(out_dir / "curves");
  int status = 0;
  for (const auto& cell : cfg.cells) {
    CellResult r = run_cell(cfg, cell, thread_count(opt));
    if (!r.curve) {
      std::fprintf(stderr, "cell %s failed: %s\n", cell.label.c_str(), r.error.c_str());
      status = 1;
      continue;
    }
    {
      std::ofstream curve(out_dir / "curves" / (cell.label + ".csv"));
      io::write_curve_csv(curve, *r.curve);
    }
    json s{{"epsilon", cell.epsilon_tv},
           {"t_mix_upper", r.t_mix ? json(*r.t_mix) : json(nullptr)},
           {"n_used", r.curve->n_used},
           {"n_censored", r.curve->n_censored},
           {"L", r.curve->lag},
           {"kernel", kernel_name(cell.kernel)},
           {"n", cell.n},
           {"p", cell.p}};
    write_json(out_dir / "curves" / (cell.label + ".json"), s);
    std::printf("%-48s t_mix<=%s (L=%lld, used %zu, censored %zu)\n", cell.label.c_str(),
                r.t_mix ? std::to_string(*r.t_mix).c_str() : "-", static_cast<long long>(r.curve->lag),
                r.curve->n_used, r.curve->n_censored);
    std::fflush(stdout);
  }
  write_json(out_dir / "manifest.json", manifest(cfg, "tv-curve", elapsed(start), thread_count(opt)));
  return status;
}

int bounds(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = load(opt);
  const fs::path out_dir(opt.out);
  fs::create_directories(out_dir);
  json reports = json::array();
  std::set<std::string> seen;
  std::printf("%-40s %10s %10s %10s %10s %10s\n", "cell", "lam_max", "lam_min", "DA", "CG", "CG refined");
  for (const auto& cell : cfg.cells) {
    if (!seen.insert(cell.data_key()).second) continue;
    const ProbitModel model = build_model(cfg, cell);
    const PosteriorCache cache = build_cache(model);
    const BoundReport r = bound_report(model, cache, cell.epsilon_tv);
    json j = bound_report_json(r);
    j["label"] = cell.label;
    j["n"] = model.n();
    j["p"] = model.p();
    reports.push_back(j);
    std::printf("%-40s %10.4g %10.4g %10.4g %10.4g %10.4g\n", cell.label.c_str(), r.lam_max, r.lam_min, r.da_upper,
                r.cg_upper, r.cg_refined_upper);
  }
  write_json(out_dir / "bounds.json", reports);
  write_json(out_dir / "manifest.json", manifest(cfg, "bounds", elapsed(start), 1));
  return 0;
}

int sample(const Options& opt) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = load(opt);
  const fs::path out_dir(opt.out);
  fs::create_directories(out_dir);
  const SampleSettings settings = parse_sample_settings(cfg.raw.value("sample", json::object()));
  for (const auto& cell : cfg.cells) {
    const ProbitModel model = build_model(cfg, cell);
    const PosteriorCache cache = build_cache(model);
    std::ofstream draws(out_dir / ("draws_" + cell.label + ".csv"));
    run_sample(model, cache, cell.kernel, cell.rwm, settings, replicate_seed(cfg, cell), draws);
    std::printf("%s: %lld draws\n", cell.label.c_str(), static_cast<long long>(settings.iterations / settings.thin));
  }
  write_json(out_dir / "manifest.json", manifest(cfg, "sample", elapsed(start), 1));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-augmentation Gibbs samplers for probit regression: couplings, TV bounds, mixing bounds"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Override the master seed");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
    sub->add_option("--out", opt.out, "Output directory");
  };
  auto* bench = app.add_subcommand("bench-table", "Mixing-time upper bounds for table cells");
  add_common(bench);
  bench->add_flag("--check", opt.check, "Exit non-zero if a cell misses its reference value band");
  auto* curve = app.add_subcommand("tv-curve", "TV upper-bound curves dbar(t)");
  add_common(curve);
  auto* bnd = app.add_subcommand("bounds", "Closed-form mixing-time bounds");
  add_common(bnd);
  auto* smp = app.add_subcommand("sample", "Run a single chain and write draws");
  add_common(smp);
  CLI11_PARSE(app, argc, argv);
  try {
    if (*bench) return bench_table(opt);
    if (*curve) return tv_curve(opt);
    if (*bnd) return bounds(opt);
    if (*smp) return sample(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
