#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <unistd.h>
#include <vector>

#include <tvem/tvem.hpp>

namespace support {

inline tvem::Matrix rows(const std::vector<std::vector<double>>& r) {
  tvem::Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.front().size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t k = 0; k < r[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[i][k];
  }
  return m;
}

inline tvem::Matrix column(std::initializer_list<double> v) {
  tvem::Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

inline tvem::Dataset line(std::initializer_list<double> v) { return tvem::Dataset(column(v)); }

inline std::vector<std::vector<double>> to_vectors(const tvem::Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) out[static_cast<std::size_t>(i)].push_back(m(i, k));
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> to_sets(const tvem::TruncationState& s) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t n = 0; n < s.size(); ++n) out.emplace_back(s.set(n).begin(), s.set(n).end());
  return out;
}

// Random Gaussian blobs around uniformly placed centers.
inline tvem::Dataset random_instance(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t c_true, double spread = 3.0) {
  tvem::Rng rng(seed);
  tvem::Matrix centers(static_cast<Eigen::Index>(c_true), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = spread * (2.0 * rng.uniform() - 1.0);
  tvem::Matrix pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(rng.uniform_index(c_true));
    for (Eigen::Index k = 0; k < pts.cols(); ++k) pts(i, k) = centers(c, k) + rng.normal();
  }
  return tvem::Dataset(std::move(pts));
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tvem_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace support
