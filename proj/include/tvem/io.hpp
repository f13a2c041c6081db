#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvem/dataset.hpp"
#include "tvem/diagnostics.hpp"
#include "tvem/engine.hpp"
#include "tvem/error.hpp"
#include "tvem/mixture.hpp"

// JSON forms of models, trace records and configurations. Doubles are written
// in shortest round-trip form, so a parse recovers identical values.

namespace tvem {

using json = nlohmann::json;

namespace detail {

inline json matrix_to_json(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string(what) + " rows must all have the same length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model snapshots

inline json to_json(const IsotropicGMM& m) {
  return json{{"kind", "iso"}, {"means", detail::matrix_to_json(m.means)}, {"sigma2", m.sigma2}};
}

inline json to_json(const GeneralGMM& m) {
  json covs = json::array();
  for (const auto& cov : m.covariances) covs.push_back(detail::matrix_to_json(cov));
  json weights = json::array();
  for (Eigen::Index c = 0; c < m.weights.size(); ++c) weights.push_back(m.weights(c));
  return json{{"kind", "general"}, {"means", detail::matrix_to_json(m.means)}, {"weights", weights}, {"covs", covs}};
}

inline json to_json(const Model& m) {
  return std::visit([](const auto& v) { return to_json(v); }, m);
}

inline Model model_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "iso") {
      IsotropicGMM m{detail::matrix_from_json(j.at("means"), "means"), j.at("sigma2").get<double>()};
      m.validate();
      return m;
    }
    if (kind == "general") {
      GeneralGMM m;
      m.means = detail::matrix_from_json(j.at("means"), "means");
      const auto w = j.at("weights").get<std::vector<double>>();
      m.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
      for (const auto& cov : j.at("covs")) m.covariances.emplace_back(detail::matrix_from_json(cov, "covs"));
      m.validate();
      return m;
    }
    throw ConfigError("model kind must be 'iso' or 'general'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad model JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Trace records

inline json to_json(const TraceRecord& r) {
  return json{{"iter", r.iter}, {"J", r.J}, {"F", r.F}, {"L", r.L}, {"gap", r.gap},
              {"sigma2", r.sigma2}, {"n_changed", r.n_changed}, {"events", r.events}};
}

inline TraceRecord trace_record_from_json(const json& j) {
  TraceRecord r;
  r.iter = j.at("iter").get<std::size_t>();
  r.J = j.at("J").get<double>();
  r.F = j.at("F").get<double>();
  r.L = j.at("L").get<double>();
  r.gap = j.at("gap").get<double>();
  r.sigma2 = j.at("sigma2").get<double>();
  r.n_changed = j.at("n_changed").get<std::size_t>();
  r.events = j.at("events").get<std::vector<std::string>>();
  return r;
}

/// One compact JSON object per line.
inline std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
  std::string out;
  for (const auto& r : trace) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<TraceRecord> trace_from_jsonl(const std::string& text) {
  std::vector<TraceRecord> trace;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      trace.push_back(trace_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Configuration

inline json to_json(const RunConfig& c) {
  json j{{"algorithm", std::string(to_string(c.algorithm))},
         {"c", c.c},
         {"seeding", std::string(to_string(c.seeding))},
         {"max_iters", c.max_iters},
         {"tol", c.tol},
         {"seed", c.seed}};
  if (c.c_prime) j["c_prime"] = *c.c_prime;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  return j;
}

inline RunConfig run_config_from_json(const json& j) {
  try {
    RunConfig c;
    c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    c.c = j.at("c").get<std::size_t>();
    if (j.contains("c_prime")) c.c_prime = j.at("c_prime").get<std::size_t>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    c.seeding = parse_seeding(j.value("seeding", std::string("dsquared")));
    c.max_iters = j.value("max_iters", std::size_t{200});
    c.tol = j.value("tol", 1e-9);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
}

inline std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::grid: return "grid";
    case GeneratorKind::uniform: return "uniform";
    case GeneratorKind::explicit_gmm: return "explicit_gmm";
  }
  return "?";
}

inline GeneratorKind parse_generator_kind(std::string_view s) {
  for (auto k : {GeneratorKind::grid, GeneratorKind::uniform, GeneratorKind::explicit_gmm}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown generator kind '" + std::string(s) + "'");
}

inline json to_json(const GeneratorSpec& g) {
  json j{{"kind", std::string(to_string(g.kind))},
         {"c_true", g.c_true},
         {"per_cluster_n", g.per_cluster_n},
         {"dim", g.dim},
         {"gen_sigma", g.gen_sigma},
         {"seed", g.seed}};
  if (g.spacing) j["spacing"] = *g.spacing;
  if (g.domain_box) j["domain_box"] = json::array({g.domain_box->first, g.domain_box->second});
  if (g.kind == GeneratorKind::explicit_gmm) j["centers"] = detail::matrix_to_json(g.explicit_centers);
  return j;
}

inline GeneratorSpec generator_spec_from_json(const json& j) {
  try {
    GeneratorSpec g;
    g.kind = parse_generator_kind(j.at("kind").get<std::string>());
    g.c_true = j.value("c_true", g.c_true);
    g.per_cluster_n = j.value("per_cluster_n", g.per_cluster_n);
    g.dim = j.value("dim", g.dim);
    g.gen_sigma = j.value("gen_sigma", g.gen_sigma);
    g.seed = j.value("seed", g.seed);
    if (j.contains("spacing")) g.spacing = j.at("spacing").get<double>();
    if (j.contains("domain_box")) {
      const auto box = j.at("domain_box").get<std::vector<double>>();
      if (box.size() != 2) throw ConfigError("domain_box must be [lo, hi]");
      g.domain_box = std::pair{box[0], box[1]};
    }
    if (j.contains("centers")) g.explicit_centers = detail::matrix_from_json(j.at("centers"), "centers");
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad generator spec: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

inline void emit_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path) {
  write_text(path, trace_to_jsonl(trace));
}

}  // namespace tvem
