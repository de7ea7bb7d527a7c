#pragma once

// JSON-configured experiments: table cells, TV curves, bound reports and plain
// sampling runs. Each cell's data and replicate seeds are derived from the
// master seed and the cell's own content, so cells are independent of order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "probit_mix/bounds.hpp"
#include "probit_mix/couplings.hpp"
#include "probit_mix/datagen.hpp"
#include "probit_mix/diagnostics.hpp"
#include "probit_mix/io.hpp"
#include "probit_mix/model.hpp"
#include "probit_mix/replicates.hpp"
#include "probit_mix/samplers.hpp"

namespace probit_mix {

inline constexpr const char* kVersion = "0.3.0";

using nlohmann::json;

/// 64-bit FNV-1a, used for content-derived seeds and config hashes.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

struct CellConfig {
  std::string label;
  DesignKind design = DesignKind::assumption2;
  BaseDistribution base = BaseDistribution::normal;
  Eigen::Index n = 10;
  Eigen::Index p = 50;
  std::optional<std::string> model_file;  // JSON bundle replacing design, prior and responses
  json prior = json{{"kind", "isotropic"}, {"variance", 1.0}};
  ResponseKind responses = ResponseKind::all_ones;
  Kernel kernel = Kernel::da;
  CouplingConfig coupling;
  RwmConfig rwm;
  std::size_t replicates = 500;
  double epsilon_tv = 0.1;
  std::optional<double> reference;
  json design_json;  // canonical description used for seeding

  std::string data_key() const { return design_json.dump(); }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::vector<CellConfig> cells;
  json raw;
};

namespace detail {

inline std::vector<json> expand_field(const std::vector<json>& cells, const std::string& key) {
  std::vector<json> out;
  for (const auto& c : cells) {
    if (c.contains(key) && c.at(key).is_array()) {
      for (const auto& v : c.at(key)) {
        json copy = c;
        copy[key] = v;
        out.push_back(std::move(copy));
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

inline CellConfig parse_cell(const json& j) {
  CellConfig c;
  c.design = parse_design_kind(j.value("design", "assumption2"));
  c.base = parse_base_distribution(j.value("base", "normal"));
  c.p = j.value("p", 50);
  if (j.contains("n")) {
    c.n = j.at("n").get<Eigen::Index>();
  } else if (j.contains("n_over_p")) {
    c.n = static_cast<Eigen::Index>(std::floor(j.at("n_over_p").get<double>() * static_cast<double>(c.p)));
  }
  if (j.contains("model_file")) c.model_file = j.at("model_file").get<std::string>();
  if (j.contains("prior")) c.prior = j.at("prior");
  c.responses = parse_response_kind(j.value("responses", "all_ones"));
  c.kernel = parse_kernel(j.value("kernel", "da"));
  const json coupling = j.value("coupling", json::object());
  c.coupling.lag = coupling.value("lag", std::int64_t{200});
  c.coupling.max_sweeps = coupling.value("max_sweeps", std::int64_t{100000});
  c.coupling.epsilon = coupling.contains("epsilon") ? coupling.at("epsilon").get<double>() : default_epsilon(c.kernel);
  c.rwm.sigma = j.value("rwm", json::object()).value("sigma", 1.0);
  c.replicates = j.value("replicates", std::size_t{500});
  c.epsilon_tv = j.value("epsilon", 0.1);
  if (j.contains("reference") && j.at("reference").is_number()) c.reference = j.at("reference").get<double>();
  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.coupling.lag < 1) throw ConfigError("lag must be >= 1");
  if (!(c.rwm.sigma > 0.0)) throw ConfigError("rwm sigma must be > 0");
  if (c.n < 1 && !c.model_file) throw ConfigError("cells need n >= 1");
  c.design_json = json{{"design", j.value("design", "assumption2")}, {"base", j.value("base", "normal")},
                       {"n", c.n},
                       {"p", c.p},
                       {"prior", c.prior},
                       {"responses", j.value("responses", "all_ones")},
                       {"model_file", c.model_file.value_or("")}};
  std::ostringstream label;
  if (j.contains("label")) {
    label << j.at("label").get<std::string>();
  } else if (c.model_file) {
    label << std::filesystem::path(*c.model_file).stem().string();
  } else {
    label << j.value("design", "assumption2") << "_" << c.prior.value("kind", "isotropic");
  }
  label << "_n" << c.n << "_p" << c.p << "_" << kernel_name(c.kernel);
  if (c.responses == ResponseKind::well_specified) label << "_ws";
  c.label = label.str();
  return c;
}

}  // namespace detail

/// Top-level keys act as defaults for every entry of "cells"; array values of
/// n, n_over_p, kernel and responses expand into one cell each. "reference" may be
/// an array parallel to the "n" / "n_over_p" list.
inline ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig cfg;
  cfg.raw = j;
  cfg.name = j.value("name", "scenario");
  cfg.seed = j.value("seed", std::uint64_t{1});
  json defaults = j;
  defaults.erase("cells");
  defaults.erase("name");
  defaults.erase("seed");
  std::vector<json> raw_cells;
  if (j.contains("cells")) {
    for (const auto& c : j.at("cells")) {
      json merged = defaults;
      merged.update(c);
      raw_cells.push_back(std::move(merged));
    }
  } else {
    raw_cells.push_back(defaults);
  }
  // Pair "reference" arrays with the size list before expanding.
  std::vector<json> paired;
  for (auto c : raw_cells) {
    const char* size_key = c.contains("n") ? "n" : "n_over_p";
    if (c.contains("reference") && c.at("reference").is_array() && c.contains(size_key) && c.at(size_key).is_array()) {
      if (c.at("reference").size() != c.at(size_key).size())
        throw ConfigError("'reference' must have one entry per value of '" + std::string(size_key) + "'");
      for (std::size_t k = 0; k < c.at(size_key).size(); ++k) {
        json copy = c;
        copy[size_key] = c.at(size_key)[k];
        copy["reference"] = c.at("reference")[k];
        paired.push_back(std::move(copy));
      }
    } else {
      paired.push_back(std::move(c));
    }
  }
  std::vector<json> expanded = paired;
  for (const char* key : {"n", "n_over_p", "kernel", "responses"}) expanded = detail::expand_field(expanded, key);
  std::map<std::string, int> uses;
  for (const auto& c : expanded) {
    CellConfig cell = detail::parse_cell(c);
    const int k = ++uses[cell.label];
    if (k > 1) cell.label += "_" + std::to_string(k);
    cfg.cells.push_back(std::move(cell));
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(j);
}

inline std::uint64_t data_seed(const ScenarioConfig& cfg, const CellConfig& cell) {
  return derive_seed(cfg.seed, fnv1a(cell.data_key()));
}

inline std::uint64_t replicate_seed(const ScenarioConfig& cfg, const CellConfig& cell) {
  return derive_seed(data_seed(cfg, cell), fnv1a(kernel_name(cell.kernel)));
}

/// Builds the model of a cell: generated design and responses, or a JSON bundle.
inline ProbitModel build_model(const ScenarioConfig& cfg, const CellConfig& cell) {
  if (cell.model_file) return io::read_model_json(*cell.model_file);
  Rng gen(data_seed(cfg, cell));
  const Eigen::MatrixXd x = gen_design(DesignScheme{cell.design, cell.n, cell.p, cell.base}, gen);
  const PriorSpec prior = io::prior_from_json(cell.prior);
  Responses r = gen_responses(cell.responses, x, prior, gen);
  return ProbitModel(x, std::move(r.y), prior);
}

/// Standard error of the mixing-time estimate from a fixed-seed bootstrap over records.
inline double bootstrap_mixing_time_se(const std::vector<MeetingRecord>& records, double epsilon,
                                       std::size_t resamples = 200, std::uint64_t seed = 7) {
  std::vector<MeetingRecord> used;
  for (const auto& r : records)
    if (!r.censored) used.push_back(r);
  if (used.size() < 2) return 0.0;
  Rng gen(seed);
  std::vector<MeetingRecord> sample(used.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t ok = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& s : sample) s = used[uniform_index(gen, used.size())];
    try {
      const double t = static_cast<double>(tv_mixing_time_upper(tv_bound_curve(sample, {}, nullptr), epsilon));
      sum += t;
      sum_sq += t * t;
      ++ok;
    } catch (const GridExhaustedError&) {
    }
  }
  if (ok < 2) return 0.0;
  const double mean = sum / static_cast<double>(ok);
  return std::sqrt(std::max(0.0, (sum_sq - static_cast<double>(ok) * mean * mean) / static_cast<double>(ok - 1)));
}

/// A cell passes if the reference value lies within max(5, 3 se, 50%) of the estimate.
inline bool within_reference_band(double estimate, double se, double reference) {
  return std::abs(estimate - reference) <= std::max({5.0, 3.0 * se, 0.5 * reference});
}

struct CellResult {
  CellConfig cell;
  std::vector<MeetingRecord> records;
  std::optional<TVBoundCurve> curve;
  std::optional<std::int64_t> t_mix;
  double t_mix_se = 0.0;
  double lam_max = 0.0;
  double seconds = 0.0;
  std::string error;

  std::optional<bool> check() const {
    if (!cell.reference) return std::nullopt;
    if (!t_mix) return false;
    return within_reference_band(static_cast<double>(*t_mix), t_mix_se, *cell.reference);
  }
};

/// Runs the meeting-time replicates of one cell. Failures are recorded, not thrown.
inline CellResult run_cell(const ScenarioConfig& cfg, const CellConfig& cell, std::size_t threads,
                           std::ostream* warn = &std::cerr) {
  CellResult out;
  out.cell = cell;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ProbitModel model = build_model(cfg, cell);
    const PosteriorCache cache = build_cache(model);
    out.lam_max = cache.lam_max;
    out.records = sample_meeting_times(cell.kernel, model, cache, cell.coupling, cell.rwm, cell.replicates,
                                       replicate_seed(cfg, cell), threads);
    out.curve = tv_bound_curve(out.records, {}, warn);
    out.t_mix = tv_mixing_time_upper(*out.curve, cell.epsilon_tv);
    out.t_mix_se = bootstrap_mixing_time_se(out.records, cell.epsilon_tv);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline json cell_summary(const CellResult& r) {
  json j{{"label", r.cell.label},
         {"kernel", kernel_name(r.cell.kernel)},
         {"n", r.cell.n},
         {"p", r.cell.p},
         {"L", r.cell.coupling.lag},
         {"N", r.cell.replicates},
         {"epsilon", r.cell.epsilon_tv},
         {"coupling_epsilon", r.cell.coupling.epsilon},
         {"lam_max", r.lam_max}};
  j["t_mix_upper"] = r.t_mix ? json(*r.t_mix) : json(nullptr);
  j["t_mix_se"] = r.t_mix_se;
  j["n_used"] = r.curve ? r.curve->n_used : 0;
  j["n_censored"] = r.curve ? r.curve->n_censored : 0;
  if (r.cell.reference) j["reference"] = *r.cell.reference;
  if (auto c = r.check()) j["check"] = *c;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline void write_table_csv(std::ostream& out, const std::vector<CellResult>& results) {
  out << "label,kernel,n,p,L,N,t_mix_upper,t_mix_se,n_censored,reference,check\n";
  out << std::setprecision(6);
  for (const auto& r : results) {
    out << r.cell.label << ',' << kernel_name(r.cell.kernel) << ',' << r.cell.n << ',' << r.cell.p << ','
        << r.cell.coupling.lag << ',' << r.cell.replicates << ',';
    if (r.t_mix) out << *r.t_mix;
    out << ',' << r.t_mix_se << ',' << (r.curve ? r.curve->n_censored : 0) << ',';
    if (r.cell.reference) out << *r.cell.reference;
    out << ',';
    if (auto c = r.check()) out << (*c ? "pass" : "fail");
    out << '\n';
  }
}

inline json manifest(const ScenarioConfig& cfg, const std::string& command, double seconds, std::size_t threads) {
  return json{{"command", command},
              {"config_name", cfg.name},
              {"config_hash", fnv1a(cfg.raw.dump())},
              {"seed", cfg.seed},
              {"threads", threads},
              {"version", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"band_policy", "reference value within max(5, 3 se, 50%) of the estimate"},
              {"seconds", seconds}};
}

inline json bound_report_json(const BoundReport& r) {
  json j{{"lam_max", r.lam_max},
         {"lam_min", r.lam_min},
         {"epsilon", r.epsilon},
         {"kl_start_log", r.kl_start_log},
         {"log_kl_over_eps", r.log_kl_over_eps},
         {"condition_number_bound", r.condition_number},
         {"da_upper", r.da_upper},
         {"cg_upper", r.cg_upper},
         {"cg_refined_upper", r.cg_refined_upper},
         {"da_factor", 2.0 + r.lam_max},
         {"cg_factor", (1.0 + r.lam_max) / (1.0 + r.lam_min)}};
  if (r.var_beta1) j["var_beta1"] = *r.var_beta1;
  if (r.lower_intercept) j["lower_intercept"] = *r.lower_intercept;
  return j;
}

struct SampleSettings {
  std::int64_t iterations = 1000;
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  bool write_z = false;
};

inline SampleSettings parse_sample_settings(const json& j) {
  SampleSettings s;
  s.iterations = j.value("iterations", std::int64_t{1000});
  s.burn_in = j.value("burn_in", std::int64_t{0});
  s.thin = j.value("thin", std::int64_t{1});
  s.write_z = j.value("write_z", false);
  if (s.iterations < 1 || s.burn_in < 0 || s.thin < 1) throw ConfigError("invalid sampling settings");
  return s;
}

/// One chain from the prior start; writes retained draws as CSV.
/// The collapsed and z-marginal chains report beta drawn from beta | z.
inline void run_sample(const ProbitModel& model, const PosteriorCache& cache, Kernel kernel, const RwmConfig& rwm,
                       const SampleSettings& s, std::uint64_t seed, std::ostream& out) {
  Rng gen(seed);
  ChainState state = sample_prior_start(model, cache, gen, kernel);
  out << std::setprecision(17);
  for (Eigen::Index j = 0; j < model.p(); ++j) out << (j ? "," : "") << "beta" << (j + 1);
  if (s.write_z)
    for (Eigen::Index i = 0; i < model.n(); ++i) out << ",z" << (i + 1);
  out << '\n';
  Rng output_gen(derive_seed(seed, 1));
  for (std::int64_t t = 1; t <= s.burn_in + s.iterations; ++t) {
    kernel_step(kernel, model, cache, state, rwm, gen);
    if (t <= s.burn_in || (t - s.burn_in) % s.thin != 0) continue;
    Eigen::VectorXd beta = state.beta;
    if (kernel == Kernel::cg || kernel == Kernel::da_marginal) {
      refresh_B(cache, state);
      beta = state.B;
      beta.noalias() += cache.chol_V.triangularView<Eigen::Lower>() * std_normal_vector(output_gen, model.p());
    }
    for (Eigen::Index j = 0; j < model.p(); ++j) out << (j ? "," : "") << beta(j);
    if (s.write_z)
      for (Eigen::Index i = 0; i < model.n(); ++i) out << ',' << state.z(i);
    out << '\n';
  }
}

}  // namespace probit_mix
