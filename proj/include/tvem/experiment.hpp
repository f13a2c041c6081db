#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "tvem/dataset.hpp"
#include "tvem/engine.hpp"
#include "tvem/error.hpp"
#include "tvem/io.hpp"
#include "tvem/rng.hpp"

namespace tvem {

struct ExperimentSpec {
  std::variant<GeneratorSpec, std::filesystem::path> source;
  RunConfig run;
  std::size_t restarts = 1;
  std::filesystem::path out_dir;

  void validate() const {
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
  }
};

inline json to_json(const ExperimentSpec& s) {
  json data;
  if (const auto* g = std::get_if<GeneratorSpec>(&s.source)) {
    data = json{{"generator", to_json(*g)}};
  } else {
    data = json{{"csv", std::get<std::filesystem::path>(s.source).generic_string()}};
  }
  return json{{"data", data}, {"run", to_json(s.run)}, {"restarts", s.restarts}, {"out", s.out_dir.generic_string()}};
}

inline ExperimentSpec experiment_spec_from_json(const json& j) {
  try {
    ExperimentSpec s;
    const auto& data = j.at("data");
    const bool has_gen = data.contains("generator");
    const bool has_csv = data.contains("csv");
    if (has_gen == has_csv) throw ConfigError("data needs exactly one of 'generator' or 'csv'");
    if (has_gen) {
      s.source = generator_spec_from_json(data.at("generator"));
    } else {
      s.source = std::filesystem::path(data.at("csv").get<std::string>());
    }
    s.run = run_config_from_json(j.at("run"));
    s.restarts = j.value("restarts", std::size_t{1});
    s.out_dir = j.value("out", std::string("."));
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment spec: ") + e.what());
  }
}

struct RestartOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<FitResult> result;  // empty when initialization itself failed
  std::string failure;

  bool failed() const { return !result || result->termination == Termination::numeric_failure; }
};

struct ExperimentSummary {
  std::size_t restarts = 0;
  std::vector<double> per_iter_mean_F;
  std::vector<double> per_iter_mean_L;
  std::optional<std::size_t> best_run;
  double best_final_F = -std::numeric_limits<double>::infinity();
  std::vector<std::optional<double>> final_F;
  std::vector<std::optional<double>> final_L;
  std::vector<std::size_t> failed_runs;
  Matrix final_means;
  json config_echo;
};

/// Worker count: TVEM_THREADS when it is a positive integer, otherwise the
/// available hardware parallelism.
inline std::size_t worker_threads() {
  if (const char* env = std::getenv("TVEM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Seed of restart r: derived from the configured seed and r.
inline std::uint64_t restart_seed(const RunConfig& config, std::size_t r) { return derive_seed(config.seed, r); }

/// Runs the restarts on a bounded pool. Outcomes are ordered by restart index
/// whatever the completion order.
inline std::vector<RestartOutcome> run_restarts(const Dataset& data, const RunConfig& config, std::size_t restarts,
                                                std::size_t threads = worker_threads()) {
  config.validate(data.n());
  std::vector<RestartOutcome> outcomes(restarts);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t r = next++; r < restarts; r = next++) {
      RestartOutcome& out = outcomes[r];
      out.index = r;
      RunConfig cfg = config;
      cfg.seed = restart_seed(config, r);
      out.seed = cfg.seed;
      try {
        out.result = run(data, cfg);
        if (out.result->termination == Termination::numeric_failure) out.failure = out.result->failure;
      } catch (const NumericError& e) {
        out.failure = e.what();
      }
    }
  };
  const std::size_t pool = std::min(std::max<std::size_t>(threads, 1), restarts);
  if (pool <= 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    workers.reserve(pool);
    for (std::size_t i = 0; i < pool; ++i) workers.emplace_back(work);
    for (auto& w : workers) w.join();
  }
  return outcomes;
}

/// Means over successful restarts at every iteration; a restart that stopped
/// early contributes its final value to the later iterations. The best run is
/// the one with the highest final free energy (first index on ties).
inline ExperimentSummary summarize(const std::vector<RestartOutcome>& outcomes, json config_echo) {
  ExperimentSummary s;
  s.restarts = outcomes.size();
  s.config_echo = std::move(config_echo);
  std::size_t longest = 0;
  std::size_t ok = 0;
  for (const auto& o : outcomes) {
    if (o.failed()) {
      s.failed_runs.push_back(o.index);
      s.final_F.emplace_back();
      s.final_L.emplace_back();
      continue;
    }
    ++ok;
    const auto& trace = o.result->trace;
    longest = std::max(longest, trace.size());
    s.final_F.emplace_back(trace.back().F);
    s.final_L.emplace_back(trace.back().L);
    if (!s.best_run || trace.back().F > s.best_final_F) {
      s.best_run = o.index;
      s.best_final_F = trace.back().F;
    }
  }
  if (ok == 0) return s;
  s.per_iter_mean_F.assign(longest, 0.0);
  s.per_iter_mean_L.assign(longest, 0.0);
  for (const auto& o : outcomes) {
    if (o.failed()) continue;
    const auto& trace = o.result->trace;
    for (std::size_t t = 0; t < longest; ++t) {
      const auto& rec = trace[std::min(t, trace.size() - 1)];
      s.per_iter_mean_F[t] += rec.F;
      s.per_iter_mean_L[t] += rec.L;
    }
  }
  for (std::size_t t = 0; t < longest; ++t) {
    s.per_iter_mean_F[t] /= static_cast<double>(ok);
    s.per_iter_mean_L[t] /= static_cast<double>(ok);
  }
  s.final_means = outcomes[*s.best_run].result->means();
  return s;
}

inline json to_json(const ExperimentSummary& s) {
  json finals_f = json::array();
  json finals_l = json::array();
  for (std::size_t r = 0; r < s.final_F.size(); ++r) {
    finals_f.push_back(s.final_F[r] ? json(*s.final_F[r]) : json(nullptr));
    finals_l.push_back(s.final_L[r] ? json(*s.final_L[r]) : json(nullptr));
  }
  json j{{"restarts", s.restarts},
         {"per_iter_mean_F", s.per_iter_mean_F},
         {"per_iter_mean_L", s.per_iter_mean_L},
         {"best_run", s.best_run ? json(*s.best_run) : json(nullptr)},
         {"best_final_F", s.best_run ? json(s.best_final_F) : json(nullptr)},
         {"final_F", finals_f},
         {"final_L", finals_l},
         {"failed_runs", s.failed_runs},
         {"final_means", s.best_run ? detail::matrix_to_json(s.final_means) : json::array()},
         {"config_echo", s.config_echo}};
  return j;
}

inline std::string trace_file_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trace_%03zu.jsonl", r);
  return buf;
}

inline Dataset load_source(const ExperimentSpec& spec) {
  if (const auto* g = std::get_if<GeneratorSpec>(&spec.source)) return generate(*g);
  return load_csv(std::get<std::filesystem::path>(spec.source));
}

/// Executes every restart, writes trace_XXX.jsonl per restart plus
/// summary.json and best_model.json into out_dir, and returns the summary.
/// Throws NumericError when every restart failed.
inline ExperimentSummary run_experiment(const ExperimentSpec& spec, std::size_t threads = worker_threads()) {
  spec.validate();
  const Dataset data = load_source(spec);
  const auto outcomes = run_restarts(data, spec.run, spec.restarts, threads);
  ExperimentSummary summary = summarize(outcomes, to_json(spec));

  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) throw IoError("cannot create " + spec.out_dir.string() + ": " + ec.message());
  for (const auto& o : outcomes) {
    const std::vector<TraceRecord> empty;
    emit_trace(o.result ? o.result->trace : empty, spec.out_dir / trace_file_name(o.index));
  }
  write_json(spec.out_dir / "summary.json", to_json(summary));
  if (summary.best_run) write_json(spec.out_dir / "best_model.json", to_json(outcomes[*summary.best_run].result->model));

  if (!summary.best_run) throw NumericError("numeric failure in all restarts");
  return summary;
}

}  // namespace tvem
