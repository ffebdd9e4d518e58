#include "activeclust/dataset.hpp"

#include "activeclust/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

namespace activeclust {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      fields.emplace_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::vector<int> canonicalize(const std::vector<std::string>& raw, std::vector<std::string>& names) {
  std::map<std::string, int> index;
  std::vector<int> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    auto [it, inserted] = index.emplace(r, static_cast<int>(names.size()));
    if (inserted) names.push_back(r);
    out.push_back(it->second);
  }
  return out;
}

void check_square_distances(const Dataset& ds) {
  if (ds.size() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
}

SimilarityMatrix from_loaded(const Eigen::MatrixXd& m) {
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kMaxLoadAsymmetry) {
    throw Error(ErrorCode::AsymmetryError, "max asymmetry " + std::to_string(asym));
  }
  return SimilarityMatrix::symmetrized(m);
}

}  // namespace

Dataset Dataset::from_values(Eigen::MatrixXd features, std::optional<std::vector<int>> labels) {
  if (features.rows() < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  if (features.cols() < 1) throw Error(ErrorCode::ShapeError, "need at least 1 feature");
  if (!features.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite feature value");
  Dataset ds;
  ds.features = std::move(features);
  if (labels) {
    if (static_cast<Eigen::Index>(labels->size()) != ds.features.rows()) {
      throw Error(ErrorCode::ShapeError, "label count does not match sample count");
    }
    std::vector<std::string> raw;
    raw.reserve(labels->size());
    for (int l : *labels) raw.push_back(std::to_string(l));
    ds.labels = canonicalize(raw, ds.class_names);
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options) {
  auto rows = read_csv_rows(path);
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + " is empty");

  const auto width = rows.front().size();
  const bool labeled = options.format == CsvFormat::FeaturesLabeled;

  // The label column has to be resolved before deciding whether row 0 is a header,
  // since label values are allowed to be non-numeric.
  std::optional<std::size_t> label_col;
  bool header = options.label_name.has_value();
  if (labeled && !options.label_name) {
    label_col = options.label_index ? static_cast<std::size_t>(*options.label_index) : width - 1;
  }
  for (std::size_t c = 0; c < width && !header; ++c) {
    if (label_col && c == *label_col) continue;
    if (!parse_double(rows.front()[c])) header = true;
  }
  if (header && labeled && options.label_name) {
    const auto& names = rows.front();
    auto it = std::find(names.begin(), names.end(), *options.label_name);
    if (it == names.end()) throw Error(ErrorCode::ParseError, "no column named " + *options.label_name);
    label_col = static_cast<std::size_t>(it - names.begin());
  }
  if (labeled && (!label_col || *label_col >= width)) {
    throw Error(ErrorCode::ParseError, "label column out of range");
  }

  const std::size_t first = header ? 1 : 0;
  const std::size_t n = rows.size() - first;
  const std::size_t d = width - (labeled ? 1 : 0);
  if (n == 0) throw Error(ErrorCode::ParseError, path.string() + " has no data rows");
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  if (d < 1) throw Error(ErrorCode::ParseError, "no feature columns");

  Eigen::MatrixXd features(n, d);
  std::vector<std::string> raw_labels;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[first + r];
    if (row.size() != width) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(first + r + 1) + " has " +
                                             std::to_string(row.size()) + " fields, expected " +
                                             std::to_string(width));
    }
    std::size_t f = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) {
        raw_labels.push_back(row[c]);
        continue;
      }
      auto v = parse_double(row[c]);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorCode::ParseError,
                    "non-numeric feature '" + row[c] + "' in row " + std::to_string(first + r + 1));
      }
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f++)) = *v;
    }
  }

  Dataset ds;
  ds.features = std::move(features);
  if (labeled) ds.labels = canonicalize(raw_labels, ds.class_names);
  return ds;
}

Dataset standardized(const Dataset& ds) {
  Dataset out = ds;
  const Eigen::RowVectorXd mean = ds.features.colwise().mean();
  out.features.rowwise() -= mean;
  for (Eigen::Index c = 0; c < out.features.cols(); ++c) {
    const double sd = std::sqrt(out.features.col(c).squaredNorm() / static_cast<double>(ds.size()));
    if (sd > 0.0) out.features.col(c) /= sd;
  }
  return out;
}

SimilarityMatrix SimilarityMatrix::symmetrized(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeError, "similarity matrix must be square");
  SimilarityMatrix s;
  s.w_ = (m + m.transpose()) * 0.5;
  s.w_.diagonal().setZero();
  return s;
}

SimilarityMatrix gaussian_similarity(const Dataset& ds, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidParameter, "sigma must be positive");
  check_square_distances(ds);
  const int n = ds.size();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  SimilarityMatrix w(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (ds.features.row(i) - ds.features.row(j)).squaredNorm();
      w.set_pair(i, j, std::exp(-d2 * scale));
    }
  }
  return w;
}

SimilarityMatrix chi2_similarity(const Dataset& ds, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidParameter, "gamma must be positive");
  check_square_distances(ds);
  if ((ds.features.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidInput, "chi-squared kernel needs nonnegative features");
  }
  const int n = ds.size();
  SimilarityMatrix w(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto a = ds.features.row(i).array();
      const auto b = ds.features.row(j).array();
      const double dist = ((a - b).square() / (a + b + kChi2Epsilon)).sum();
      w.set_pair(i, j, std::exp(-gamma * dist));
    }
  }
  return w;
}

double median_pairwise_distance(const Dataset& ds) {
  check_square_distances(ds);
  const int n = ds.size();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) dist.push_back((ds.features.row(i) - ds.features.row(j)).norm());
  }
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  if (dist.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dist.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

constexpr char kMagic[4] = {'A', 'C', 'S', 'M'};

template <typename T>
T from_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

SimilarityMatrix load_binary(std::ifstream& in, const std::filesystem::path& path) {
  std::uint64_t n = 0;
  if (!in.read(reinterpret_cast<char*>(&n), sizeof(n))) {
    throw Error(ErrorCode::ParseError, path.string() + ": truncated header");
  }
  n = from_little_endian(n);
  if (n > (1u << 20)) throw Error(ErrorCode::ShapeError, "implausible matrix order");
  const auto order = static_cast<Eigen::Index>(n);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(order, order);
  const auto bytes = static_cast<std::streamsize>(n * n * sizeof(double));
  if (!in.read(reinterpret_cast<char*>(m.data()), bytes)) {
    throw Error(ErrorCode::ParseError, path.string() + ": truncated payload");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = from_little_endian(m.data()[k]);
  }
  return from_loaded(m);
}

}  // namespace

SimilarityMatrix load_precomputed_similarity(const std::filesystem::path& path) {
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    char magic[4] = {};
    if (in.read(magic, 4) && std::equal(magic, magic + 4, kMagic)) return load_binary(in, path);
  }
  auto rows = read_csv_rows(path);
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + " is empty");
  const auto n = rows.size();
  Eigen::MatrixXd m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) throw Error(ErrorCode::ShapeError, "similarity matrix is not square");
    for (std::size_t c = 0; c < n; ++c) {
      auto v = parse_double(rows[r][c]);
      if (!v) throw Error(ErrorCode::ParseError, "non-numeric entry '" + rows[r][c] + "'");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return from_loaded(m);
}

void save_similarity(const SimilarityMatrix& w, const std::filesystem::path& path,
                     MatrixFileFormat format) {
  const auto n = static_cast<std::uint64_t>(w.size());
  if (format == MatrixFileFormat::Binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(kMagic, 4);
    const auto le_n = from_little_endian(n);
    out.write(reinterpret_cast<const char*>(&le_n), sizeof(le_n));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double v = from_little_endian(w.matrix()(i, j));
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (j) out << ',';
      out << w.matrix()(i, j);
    }
    out << '\n';
  }
}

}  // namespace activeclust
