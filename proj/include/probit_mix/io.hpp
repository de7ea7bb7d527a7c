#pragma once

// CSV and JSON readers/writers for models, draws, meeting times and TV curves.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "probit_mix/diagnostics.hpp"
#include "probit_mix/errors.hpp"
#include "probit_mix/model.hpp"

namespace probit_mix::io {

using nlohmann::json;

inline std::vector<std::vector<double>> read_csv_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(path + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  const auto rows = read_csv_numbers(path);
  if (rows.empty()) throw Error(path + ": empty matrix");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

inline std::vector<int> read_responses_csv(const std::string& path) {
  const auto rows = read_csv_numbers(path);
  std::vector<int> y;
  for (const auto& r : rows) {
    if (r.size() != 1) throw Error(path + ": responses must be a single column");
    y.push_back(static_cast<int>(r[0]));
  }
  return y;
}

inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& x) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << x(i, j);
    out << '\n';
  }
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a non-empty array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw ConfigError("ragged matrix rows");
    for (std::size_t k = 0; k < j[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(std::move(row));
  }
  return j;
}

/// {"kind": "isotropic" | "scaled_isotropic" | "g_prior" | "recipe" | "general", ..., "mean": [...]}
inline PriorSpec prior_from_json(const json& j) {
  PriorSpec spec;
  const std::string kind = j.value("kind", "isotropic");
  if (kind == "isotropic") {
    spec.form = prior::Isotropic{j.value("variance", j.value("c", 1.0))};
  } else if (kind == "scaled_isotropic") {
    spec.form = prior::ScaledIsotropic{j.value("c", 1.0)};
  } else if (kind == "g_prior") {
    spec.form = prior::GPrior{j.value("g", 1.0), j.value("c", 0.0)};
  } else if (kind == "recipe") {
    spec.form = prior::Recipe{j.value("b", 10.0)};
  } else if (kind == "general") {
    spec.form = prior::GeneralSpd{matrix_from_json(j.at("precision"))};
  } else {
    throw ConfigError("unknown prior kind '" + kind + "'");
  }
  if (j.contains("mean")) spec.mean = vector_from_json(j.at("mean"));
  return spec;
}

inline json prior_to_json(const PriorSpec& spec) {
  json j = std::visit(
      detail::overloaded{
          [](const prior::Isotropic& f) { return json{{"kind", "isotropic"}, {"variance", f.variance}}; },
          [](const prior::ScaledIsotropic& f) { return json{{"kind", "scaled_isotropic"}, {"c", f.c}}; },
          [](const prior::GPrior& f) { return json{{"kind", "g_prior"}, {"g", f.g}, {"c", f.c}}; },
          [](const prior::Recipe& f) { return json{{"kind", "recipe"}, {"b", f.b}}; },
          [](const prior::GeneralSpd& f) { return json{{"kind", "general"}, {"precision", matrix_to_json(f.precision)}}; }},
      spec.form);
  if (spec.mean.size() != 0) j["mean"] = vector_to_json(spec.mean);
  return j;
}

inline ProbitModel model_from_json(const json& j) {
  return ProbitModel(matrix_from_json(j.at("X")), j.at("y").get<std::vector<int>>(),
                     prior_from_json(j.value("prior", json::object())));
}

inline json model_to_json(const ProbitModel& model) {
  return json{{"X", matrix_to_json(model.X)}, {"y", model.y}, {"prior", prior_to_json(model.prior)}};
}

inline ProbitModel read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return model_from_json(json::parse(in));
}

inline void write_meeting_csv(std::ostream& out, const std::vector<MeetingRecord>& records) {
  out << "replicate,seed,L,tau,censored\n";
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& m = records[r];
    out << r << ',' << m.seed << ',' << m.lag << ',' << m.tau << ',' << (m.censored ? 1 : 0) << '\n';
  }
}

inline void write_curve_csv(std::ostream& out, const TVBoundCurve& curve) {
  out << "t,dbar,se\n" << std::setprecision(10);
  for (std::size_t k = 0; k < curve.t_grid.size(); ++k)
    out << curve.t_grid[k] << ',' << curve.dbar[k] << ',' << curve.se[k] << '\n';
}

}  // namespace probit_mix::io
