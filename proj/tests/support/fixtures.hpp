#pragma once

#include "activeclust/dataset.hpp"
#include "activeclust/error.hpp"
#include "activeclust/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <numbers>
#include <vector>

#include <unistd.h>

namespace fixtures {

template <typename F>
std::optional<activeclust::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const activeclust::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("activeclust_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Isotropic Gaussian blobs with centers evenly spaced on a circle (first two
// coordinates) of the given radius. Samples are interleaved by class.
inline activeclust::Dataset blobs(int classes, int per_class, double radius, double spread, std::uint64_t seed,
                                  int dim = 2) {
  activeclust::Rng rng(seed);
  const int n = classes * per_class;
  Eigen::MatrixXd x(n, dim);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;
    const double angle = 2.0 * std::numbers::pi * c / classes;
    for (int d = 0; d < dim; ++d) x(i, d) = spread * activeclust::standard_normal(rng);
    x(i, 0) += radius * std::cos(angle);
    if (dim > 1) x(i, 1) += radius * std::sin(angle);
    labels[static_cast<std::size_t>(i)] = c;
  }
  activeclust::Dataset ds;
  ds.features = std::move(x);
  ds.labels = std::move(labels);
  for (int c = 0; c < classes; ++c) ds.class_names.push_back("c" + std::to_string(c));
  return ds;
}

inline activeclust::SimilarityMatrix random_similarity(int n, activeclust::Rng& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = activeclust::uniform01(rng);
  }
  return activeclust::SimilarityMatrix::symmetrized(m);
}

inline std::vector<int> random_partition(int n, int max_classes, activeclust::Rng& rng) {
  const int k = 1 + static_cast<int>(activeclust::uniform_index(rng, static_cast<std::uint64_t>(max_classes)));
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = static_cast<int>(activeclust::uniform_index(rng, static_cast<std::uint64_t>(k)));
  return out;
}

// Labeled CSV with a trailing "class" column, exact to the last bit.
inline std::string to_csv(const activeclust::Dataset& ds, bool with_labels = true) {
  std::string out;
  char buf[64];
  for (int d = 0; d < ds.dimension(); ++d) out += (d ? ",f" : "f") + std::to_string(d);
  out += with_labels ? ",class\n" : "\n";
  for (int i = 0; i < ds.size(); ++i) {
    for (int d = 0; d < ds.dimension(); ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, d));
      out += (d ? "," : "") + std::string(buf);
    }
    if (with_labels) out += "," + ds.class_names[static_cast<std::size_t>((*ds.labels)[static_cast<std::size_t>(i)])];
    out += "\n";
  }
  return out;
}

}  // namespace fixtures
