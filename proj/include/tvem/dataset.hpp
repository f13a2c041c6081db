#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tvem/error.hpp"
#include "tvem/rng.hpp"

namespace tvem {

// Points, means and tables are stored row-major so that a row is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ConstRowRef = Eigen::Ref<const Eigen::RowVectorXd>;

/// Immutable N x D set of observations with optional ground truth.
class Dataset {
 public:
  explicit Dataset(Matrix points,
                   std::optional<std::vector<std::size_t>> labels = std::nullopt,
                   std::optional<Matrix> true_centers = std::nullopt)
      : points_(std::move(points)), labels_(std::move(labels)), true_centers_(std::move(true_centers)) {
    if (points_.rows() < 1 || points_.cols() < 1) {
      throw ConfigError("dataset needs at least one point and one dimension");
    }
    if (!points_.allFinite()) {
      throw ConfigError("dataset contains non-finite values");
    }
    if (true_centers_ && true_centers_->cols() != points_.cols()) {
      throw ConfigError("true centers have the wrong dimension");
    }
    if (labels_) {
      if (labels_->size() != n()) {
        throw ConfigError("label count does not match point count");
      }
      if (true_centers_) {
        const auto c_true = static_cast<std::size_t>(true_centers_->rows());
        for (std::size_t l : *labels_) {
          if (l >= c_true) throw ConfigError("label outside [0, C_true)");
        }
      }
    }
    const Eigen::RowVectorXd mean = points_.colwise().mean();
    const double spread = (points_.rowwise() - mean).rowwise().squaredNorm().mean();
    variance_floor_ = spread > 0.0 ? 1e-12 * spread : 1e-12;
  }

  std::size_t n() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(points_.cols()); }

  const Matrix& points() const { return points_; }
  auto point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }

  const std::optional<std::vector<std::size_t>>& labels() const { return labels_; }
  const std::optional<Matrix>& true_centers() const { return true_centers_; }

  /// Lower clamp for any fitted variance: 1e-12 times the mean squared norm
  /// of the centered data (1e-12 when all points coincide).
  double variance_floor() const { return variance_floor_; }

 private:
  Matrix points_;
  std::optional<std::vector<std::size_t>> labels_;
  std::optional<Matrix> true_centers_;
  double variance_floor_ = 0.0;
};

// ---------------------------------------------------------------------------
// Generators

enum class GeneratorKind { grid, uniform, explicit_gmm };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::grid;
  std::size_t c_true = 25;
  std::size_t per_cluster_n = 100;
  std::size_t dim = 2;                 // ignored for grid (always 2) and explicit_gmm
  double gen_sigma = 1.0;              // per-axis standard deviation
  std::optional<double> spacing;       // grid step; defaults to 12 * gen_sigma
  std::optional<std::pair<double, double>> domain_box;  // uniform kind; same range on every axis
  Matrix explicit_centers;             // explicit_gmm kind
  std::uint64_t seed = 0;

  double grid_spacing() const { return spacing.value_or(12.0 * gen_sigma); }

  /// Default box matches the density of a square grid with the same C.
  std::pair<double, double> box() const {
    if (domain_box) return *domain_box;
    const double side = std::ceil(std::sqrt(static_cast<double>(c_true)));
    return {0.0, side * grid_spacing()};
  }

  void validate() const {
    if (c_true < 1) throw ConfigError("c_true must be >= 1");
    if (per_cluster_n < 1) throw ConfigError("per_cluster_n must be >= 1");
    if (!(gen_sigma > 0.0) || !std::isfinite(gen_sigma)) throw ConfigError("gen_sigma must be > 0");
    switch (kind) {
      case GeneratorKind::grid: {
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(c_true))));
        if (side * side != c_true) throw ConfigError("grid kind needs a perfect-square c_true");
        if (!(grid_spacing() > 0.0)) throw ConfigError("grid spacing must be > 0");
        break;
      }
      case GeneratorKind::uniform: {
        if (dim < 1) throw ConfigError("dim must be >= 1");
        const auto [lo, hi] = box();
        if (!(hi > lo)) throw ConfigError("domain box must have hi > lo");
        break;
      }
      case GeneratorKind::explicit_gmm:
        if (explicit_centers.rows() != static_cast<Eigen::Index>(c_true) || explicit_centers.cols() < 1) {
          throw ConfigError("explicit_gmm needs a c_true x D center matrix");
        }
        if (!explicit_centers.allFinite()) throw ConfigError("explicit centers must be finite");
        break;
    }
  }
};

/// Cluster centers implied by the spec. The uniform kind consumes draws from
/// rng; the other kinds leave it untouched.
inline Matrix generator_centers(const GeneratorSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case GeneratorKind::grid: {
      const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(spec.c_true))));
      Matrix centers(static_cast<Eigen::Index>(spec.c_true), 2);
      for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
          const auto row = static_cast<Eigen::Index>(i * side + j);
          centers(row, 0) = static_cast<double>(i) * spec.grid_spacing();
          centers(row, 1) = static_cast<double>(j) * spec.grid_spacing();
        }
      }
      return centers;
    }
    case GeneratorKind::uniform: {
      const auto [lo, hi] = spec.box();
      Matrix centers(static_cast<Eigen::Index>(spec.c_true), static_cast<Eigen::Index>(spec.dim));
      for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        for (Eigen::Index k = 0; k < centers.cols(); ++k) centers(c, k) = lo + (hi - lo) * rng.uniform();
      }
      return centers;
    }
    case GeneratorKind::explicit_gmm:
      return spec.explicit_centers;
  }
  return {};
}

/// Draws per_cluster_n isotropic Gaussian points around every center, cluster
/// by cluster. Output is a pure function of the spec (seed included).
inline Dataset generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Matrix centers = generator_centers(spec, rng);
  const auto dim = centers.cols();
  const auto total = static_cast<Eigen::Index>(spec.c_true * spec.per_cluster_n);
  Matrix points(total, dim);
  std::vector<std::size_t> labels(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < spec.c_true; ++c) {
    for (std::size_t i = 0; i < spec.per_cluster_n; ++i, ++row) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        points(row, k) = centers(static_cast<Eigen::Index>(c), k) + spec.gen_sigma * rng.normal();
      }
      labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return Dataset(std::move(points), std::move(labels), std::move(centers));
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace detail

inline std::filesystem::path labels_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".labels");
}

/// Writes one point per row with shortest round-trip formatting. Labels, when
/// present, go to "<path>.labels".
inline void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t k = 0; k < data.d(); ++k) {
      if (k) out << ',';
      out << detail::format_double(data.points()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
  if (data.labels()) {
    std::ofstream lab(labels_path(path), std::ios::binary);
    if (!lab) throw IoError("cannot open " + labels_path(path).string() + " for writing");
    for (std::size_t l : *data.labels()) lab << l << '\n';
    if (!lab) throw IoError("write failed: " + labels_path(path).string());
  }
}

/// Reads comma-separated reals. A first row containing any non-numeric cell is
/// taken as a header. Blank lines are ignored. A "<path>.labels" sidecar is
/// loaded when it exists.
inline Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto cells = detail::split_commas(view);
    std::vector<double> row;
    row.reserve(cells.size());
    bool numeric = true;
    for (auto cell : cells) {
      auto v = detail::parse_double(cell);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (first_content) {
        first_content = false;
        cols = cells.size();
        continue;
      }
      throw ParseError(line_no, "non-numeric cell");
    }
    if (first_content) {
      first_content = false;
      cols = row.size();
    } else if (cols != 0 && row.size() != cols) {
      throw ParseError(line_no, "expected " + std::to_string(cols) + " fields, found " + std::to_string(row.size()));
    }
    if (cols == 0) cols = row.size();
    for (double v : row) {
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value");
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ParseError(line_no, "no data rows");

  Matrix points = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));

  std::optional<std::vector<std::size_t>> labels;
  const auto lpath = labels_path(path);
  if (std::filesystem::exists(lpath)) {
    std::ifstream lin(lpath, std::ios::binary);
    if (!lin) throw IoError("cannot open " + lpath.string());
    std::vector<std::size_t> ls;
    std::size_t lno = 0;
    while (std::getline(lin, line)) {
      ++lno;
      const auto view = detail::trim(line);
      if (view.empty()) continue;
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), v);
      if (ec != std::errc() || ptr != view.data() + view.size()) {
        throw ParseError(lno, "label is not a non-negative integer (" + lpath.string() + ")");
      }
      ls.push_back(v);
    }
    if (ls.size() != rows) throw ParseError(0, "label sidecar has " + std::to_string(ls.size()) + " rows, data has " + std::to_string(rows));
    labels = std::move(ls);
  }
  return Dataset(std::move(points), std::move(labels));
}

}  // namespace tvem
