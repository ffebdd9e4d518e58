#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace activeclust {

// n samples x d features, with optional ground truth used only by simulated
// oracles and metrics. Labels are dense integers 0..C-1.
struct Dataset {
  Eigen::MatrixXd features;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> class_names;  // class_names[c] is the raw label of class c

  int size() const { return static_cast<int>(features.rows()); }
  int dimension() const { return static_cast<int>(features.cols()); }
  std::optional<int> class_count() const {
    if (!labels) return std::nullopt;
    return static_cast<int>(class_names.size());
  }

  // Builds a dataset from in-memory values, validating shape and
  // canonicalizing labels to 0..C-1 in order of first appearance.
  static Dataset from_values(Eigen::MatrixXd features,
                             std::optional<std::vector<int>> labels = std::nullopt);
};

enum class CsvFormat { Features, FeaturesLabeled };

struct CsvOptions {
  CsvFormat format = CsvFormat::FeaturesLabeled;
  // Label column by header name or zero-based index; the last column when neither is set.
  std::optional<std::string> label_name;
  std::optional<int> label_index;
};

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options = {});

// Z-score every feature column. Constant columns are centered only.
Dataset standardized(const Dataset& ds);

// Symmetric n x n affinity with a zero diagonal. Symmetry is exact: every
// mutation writes both (i,j) and (j,i).
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(int n) : w_(Eigen::MatrixXd::Zero(n, n)) {}

  // Takes (m + m^T) / 2 and zeroes the diagonal.
  static SimilarityMatrix symmetrized(const Eigen::MatrixXd& m);

  int size() const { return static_cast<int>(w_.rows()); }
  double operator()(int i, int j) const { return w_(i, j); }
  void set_pair(int i, int j, double value) {
    w_(i, j) = value;
    w_(j, i) = value;
  }
  const Eigen::MatrixXd& matrix() const { return w_; }

  friend bool operator==(const SimilarityMatrix& a, const SimilarityMatrix& b) {
    return a.w_.rows() == b.w_.rows() && a.w_ == b.w_;
  }

 private:
  Eigen::MatrixXd w_;
};

// exp(-|xi - xj|^2 / (2 sigma^2)) off the diagonal.
SimilarityMatrix gaussian_similarity(const Dataset& ds, double sigma);

// exp(-gamma * sum_k (xik - xjk)^2 / (xik + xjk + 1e-12)); features must be nonnegative.
SimilarityMatrix chi2_similarity(const Dataset& ds, double gamma);

// Median Euclidean distance over all unordered pairs, the default Gaussian bandwidth.
double median_pairwise_distance(const Dataset& ds);

inline constexpr double kChi2Epsilon = 1e-12;
inline constexpr double kMaxLoadAsymmetry = 1e-8;

// Square CSV or the "ACSM" binary format (magic, u64 n, n*n little-endian f64, row-major).
SimilarityMatrix load_precomputed_similarity(const std::filesystem::path& path);

enum class MatrixFileFormat { Csv, Binary };
void save_similarity(const SimilarityMatrix& w, const std::filesystem::path& path,
                     MatrixFileFormat format = MatrixFileFormat::Binary);

}  // namespace activeclust
