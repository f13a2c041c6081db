// Command-line front end: generate data, fit one run, run multi-restart
// experiments, and audit an externally produced result.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tvem/tvem.hpp>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct GenOptions {
  std::string kind = "grid";
  std::size_t c = 25;
  std::size_t n = 100;
  std::size_t dim = 2;
  double sigma = 1.0;
  std::optional<double> spacing;
  std::vector<double> box;
  std::uint64_t seed = 0;

  void add_to(CLI::App& app) {
    app.add_option("--gen-kind", kind, "grid | uniform")->capture_default_str();
    app.add_option("--gen-c", c, "true cluster count")->capture_default_str();
    app.add_option("--gen-n", n, "points per cluster")->capture_default_str();
    app.add_option("--gen-dim", dim, "dimension (uniform kind)")->capture_default_str();
    app.add_option("--gen-sigma", sigma, "per-axis standard deviation")->capture_default_str();
    app.add_option("--gen-spacing", spacing, "grid step (default 12 * sigma)");
    app.add_option("--gen-box", box, "uniform kind: lo hi")->expected(2);
    app.add_option("--gen-seed", seed, "generator seed")->capture_default_str();
  }

  tvem::GeneratorSpec spec() const {
    tvem::GeneratorSpec g;
    g.kind = tvem::parse_generator_kind(kind);
    if (g.kind == tvem::GeneratorKind::explicit_gmm) throw tvem::ConfigError("explicit_gmm needs a --config file");
    g.c_true = c;
    g.per_cluster_n = n;
    g.dim = dim;
    g.gen_sigma = sigma;
    g.spacing = spacing;
    if (!box.empty()) g.domain_box = std::pair{box[0], box[1]};
    g.seed = seed;
    g.validate();
    return g;
  }
};

struct RunOptions {
  std::string algorithm = "kmeans";
  std::size_t c = 2;
  std::optional<std::size_t> c_prime;
  std::optional<double> epsilon;
  std::string seeding = "dsquared";
  std::size_t max_iters = 200;
  double tol = 1e-9;
  std::uint64_t seed = 0;

  void add_to(CLI::App& app) {
    app.add_option("--algorithm", algorithm, "kmeans | em_gmm | kmeans_cprime | lazy_kmeans | sigma_pi")->capture_default_str();
    app.add_option("--c", c, "cluster count")->capture_default_str();
    app.add_option("--c-prime", c_prime, "truncation size (kmeans_cprime)");
    app.add_option("--epsilon", epsilon, "lazy threshold (lazy_kmeans)");
    app.add_option("--seeding", seeding, "uniform | dsquared")->capture_default_str();
    app.add_option("--max-iters", max_iters, "iteration cap")->capture_default_str();
    app.add_option("--tol", tol, "relative parameter tolerance")->capture_default_str();
    app.add_option("--seed", seed, "run seed")->capture_default_str();
  }

  tvem::RunConfig config() const {
    tvem::RunConfig r;
    r.algorithm = tvem::parse_algorithm(algorithm);
    r.c = c;
    r.c_prime = c_prime;
    r.epsilon = epsilon;
    r.seeding = tvem::parse_seeding(seeding);
    r.max_iters = max_iters;
    r.tol = tol;
    r.seed = seed;
    return r;
  }
};

std::variant<tvem::GeneratorSpec, std::filesystem::path> source(const std::string& data, const GenOptions& gen) {
  if (!data.empty()) return std::filesystem::path(data);
  return gen.spec();
}

tvem::Dataset load(const std::variant<tvem::GeneratorSpec, std::filesystem::path>& src) {
  if (const auto* g = std::get_if<tvem::GeneratorSpec>(&src)) return tvem::generate(*g);
  return tvem::load_csv(std::get<std::filesystem::path>(src));
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw tvem::IoError("cannot create " + dir.string() + ": " + ec.message());
}

int cmd_generate(const GenOptions& gen, const std::string& out) {
  if (out.empty()) throw tvem::ConfigError("generate needs --out <file.csv>");
  const auto data = tvem::generate(gen.spec());
  tvem::save_csv(data, out);
  std::cout << tvem::json{{"n", data.n()}, {"d", data.d()}, {"path", out}}.dump() << "\n";
  return 0;
}

int cmd_fit(const std::string& data_path, const GenOptions& gen, const RunOptions& opts, const std::string& out) {
  const auto config = opts.config();
  const auto data = load(source(data_path, gen));
  const auto result = tvem::run(data, config);
  if (!out.empty()) {
    ensure_dir(out);
    tvem::emit_trace(result.trace, std::filesystem::path(out) / "trace.jsonl");
    tvem::write_json(std::filesystem::path(out) / "model.json", tvem::to_json(result.model));
  }
  const auto& last = result.trace.back();
  tvem::json report{{"termination", std::string(tvem::to_string(result.termination))},
                    {"iterations", result.iterations()},
                    {"final", tvem::to_json(last)}};
  if (!result.failure.empty()) report["failure"] = result.failure;
  std::cout << report.dump() << "\n";
  return result.termination == tvem::Termination::numeric_failure ? kExitNumeric : 0;
}

int cmd_experiment(const std::string& config_path, const std::string& data_path, const GenOptions& gen, const RunOptions& opts,
                   std::size_t restarts, const std::string& out) {
  tvem::ExperimentSpec spec;
  if (!config_path.empty()) {
    spec = tvem::experiment_spec_from_json(tvem::read_json(config_path));
    if (!out.empty()) spec.out_dir = out;
  } else {
    spec.source = source(data_path, gen);
    spec.run = opts.config();
    spec.restarts = restarts;
    spec.out_dir = out.empty() ? std::filesystem::path(".") : std::filesystem::path(out);
  }
  const auto summary = tvem::run_experiment(spec);
  tvem::json report{{"best_run", *summary.best_run},
                    {"best_final_F", summary.best_final_F},
                    {"failed_runs", summary.failed_runs},
                    {"out", spec.out_dir.generic_string()}};
  std::cout << report.dump() << "\n";
  return 0;
}

std::vector<std::size_t> read_assignments(const std::filesystem::path& path, std::size_t n, std::size_t clusters) {
  const std::string text = tvem::read_text(path);
  std::vector<std::size_t> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = text.substr(start, end - start);
    start = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || v >= clusters) {
      throw tvem::ParseError(line_no, "assignment must be an integer in [0, C)");
    }
    out.push_back(v);
  }
  if (out.size() != n) throw tvem::ConfigError("assignment count does not match the data");
  return out;
}

int cmd_audit(const std::string& data_path, const std::string& model_path, const std::string& assign_path) {
  if (data_path.empty() || model_path.empty()) throw tvem::ConfigError("audit needs --data and --model");
  const auto data = tvem::load_csv(data_path);
  const auto model = tvem::model_from_json(tvem::read_json(model_path));
  const std::size_t clusters = std::visit([](const auto& m) { return m.components(); }, model);
  if (std::visit([](const auto& m) { return m.dim(); }, model) != data.d()) {
    throw tvem::ConfigError("model dimension does not match the data");
  }

  tvem::TruncationState state;
  if (!assign_path.empty()) {
    state = tvem::TruncationState::from_assignment(read_assignments(assign_path, data.n(), clusters), clusters);
  } else if (const auto* iso = std::get_if<tvem::IsotropicGMM>(&model)) {
    state = tvem::select_nearest(data, iso->means, 1);
  } else {
    state = tvem::select_highest_joint(tvem::log_joint_table(data, std::get<tvem::GeneralGMM>(model)), 1);
  }
  std::vector<std::size_t> hard(data.n());
  for (std::size_t n = 0; n < data.n(); ++n) hard[n] = state.set(n)[0];
  const auto assignments = tvem::Responsibilities::binary(hard, clusters);

  tvem::json report = std::visit(
      [&](const auto& m) {
        const double f = tvem::free_energy_trunc(data, m, state);
        const double l = tvem::log_likelihood(data, m);
        return tvem::json{{"n", data.n()}, {"d", data.d()}, {"c", clusters},
                          {"J", tvem::objective_j(data, assignments, m.means)},
                          {"F", f}, {"L", l}, {"gap", l - f}};
      },
      model);
  if (const auto* iso = std::get_if<tvem::IsotropicGMM>(&model)) {
    report["sigma2"] = iso->sigma2;
    report["F_kmeans"] = tvem::free_energy_kmeans(clusters, data.d(), iso->sigma2);
    report["kl_gap"] = tvem::kl_gap(data, *iso);
    const auto forms = tvem::appendix_forms(data, assignments, iso->means, clusters);
    report["appendix"] = tvem::json{{"J", forms.J}, {"F", forms.F}, {"L", forms.L}, {"gap", forms.gap}};
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated variational EM clustering: k-means, GMM-EM and their generalizations"};
  app.require_subcommand(1);

  GenOptions gen;
  RunOptions opts;
  std::string out;
  std::string data_path;
  std::string config_path;
  std::string model_path;
  std::string assign_path;
  std::size_t restarts = 1;

  auto* generate = app.add_subcommand("generate", "write a synthetic dataset to CSV");
  gen.add_to(*generate);
  generate->add_option("--out", out, "output CSV path")->required();

  auto* fit = app.add_subcommand("fit", "one run; writes trace.jsonl and model.json to --out");
  fit->add_option("--data", data_path, "CSV input (default: generate from --gen-*)");
  gen.add_to(*fit);
  opts.add_to(*fit);
  fit->add_option("--out", out, "output directory");

  auto* experiment = app.add_subcommand("experiment", "multi-restart experiment with summary");
  experiment->add_option("--config", config_path, "experiment spec JSON (replaces the other flags)");
  experiment->add_option("--data", data_path, "CSV input (default: generate from --gen-*)");
  gen.add_to(*experiment);
  opts.add_to(*experiment);
  experiment->add_option("--restarts", restarts, "number of restarts")->capture_default_str();
  experiment->add_option("--out", out, "output directory");

  auto* audit = app.add_subcommand("audit", "diagnostics of a model on a dataset");
  audit->add_option("--data", data_path, "CSV input")->required();
  audit->add_option("--model", model_path, "model JSON")->required();
  audit->add_option("--assignments", assign_path, "one cluster index per line (default: best per point)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*fit) return cmd_fit(data_path, gen, opts, out);
    if (*experiment) return cmd_experiment(config_path, data_path, gen, opts, restarts, out);
    if (*audit) return cmd_audit(data_path, model_path, assign_path);
  } catch (const tvem::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tvem::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitIo;
  } catch (const tvem::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const tvem::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
