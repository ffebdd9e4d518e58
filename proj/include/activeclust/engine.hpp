#pragma once

#include "activeclust/certain_sets.hpp"
#include "activeclust/constraints.hpp"
#include "activeclust/dataset.hpp"
#include "activeclust/oracle.hpp"
#include "activeclust/random.hpp"
#include "activeclust/spectral.hpp"
#include "activeclust/uncertainty.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace activeclust {

enum class Strategy { UrascN, UrascP, UrascGO, UrascNO, UrascPO, Random, RandomPairs };
enum class KernelKind { Gaussian, Chi2, Precomputed };
enum class OracleMode { Simulated, Interactive };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);
std::string_view to_string(KernelKind k);
std::optional<KernelKind> parse_kernel(std::string_view text);

struct SessionConfig {
  // Dataset source. For the precomputed kernel `data` is the similarity file
  // and `labels` an optional one-label-per-line file.
  std::string data;
  std::string format = "csv_features_labeled";
  std::optional<std::string> label_column;
  std::optional<std::string> labels;
  KernelKind kernel = KernelKind::Gaussian;
  std::optional<double> sigma;  // median pairwise distance when unset
  double gamma = 1.0;
  bool standardize = true;

  Strategy strategy = Strategy::UrascN;
  std::optional<int> n_c;  // nullopt: unknown, grown from 2
  int query_budget = 100;
  std::uint64_t seed = 0;
  double noise_rate = 0.0;
  int b = kDefaultCandidateBudget;
  int knn_k = kDefaultNeighbors;
  std::optional<int> eval_every;  // 1 for n <= 1000, else 10
  OracleMode oracle = OracleMode::Simulated;

  // Throws InvalidParameter describing the first bad field.
  void validate() const;
};

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

struct CurvePoint {
  int queries_used = 0;
  double jcc = 0.0;        // NaN without ground truth
  double v_measure = 0.0;  // NaN without ground truth
  int n_c = 0;
  double wall_ms = 0.0;
};

enum class Status { Running, AwaitingAnswer, Finished };
std::string_view to_string(Status s);
std::optional<Status> parse_status(std::string_view text);

// One active clustering run: spectral learning, informative sample selection,
// pairwise resolution, constraint expansion, repeated until the query budget
// is spent or every sample is certain.
class Session {
 public:
  static Session create(const SessionConfig& cfg);
  static Session create(const SessionConfig& cfg, const Dataset& ds);
  static Session create(const SessionConfig& cfg, SimilarityMatrix w, std::optional<std::vector<int>> labels);

  // One iteration: cluster, select, resolve, expand. An interactive session may
  // stop part way through with status AwaitingAnswer.
  void step();
  // Steps until Finished or AwaitingAnswer.
  void advance();
  // advance() for simulated oracles; returns the curve.
  const std::vector<CurvePoint>& run();

  // Interactive sessions: answer the pending pair, then advance.
  void submit_answer(int i, int j, LinkKind answer);
  // Records the answer for the pending pair without advancing; the next
  // step() or advance() picks it up.
  void accept_answer(int i, int j, LinkKind answer);
  std::optional<std::pair<int, int>> pending_pair() const;

  Status status() const { return status_; }
  int iteration() const { return iteration_; }
  int queries_used() const { return queries_used_; }
  int n_c() const { return n_c_; }
  int sample_count() const { return base_.size(); }
  const SessionConfig& config() const { return config_; }
  const CertainSets& certain_sets() const { return certain_; }
  const ConstraintSet& constraints() const { return constraints_; }
  const std::vector<QueryRecord>& records() const { return records_; }
  const std::vector<CurvePoint>& curve() const { return curve_; }
  const Oracle& oracle() const { return oracle_; }
  const SimilarityMatrix& base_similarity() const { return base_; }
  const std::optional<Dataset>& dataset() const { return dataset_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::optional<Resolution>& resolution() const { return resolution_; }
  int last_selected() const { return last_selected_; }

  // Clustering for the current constraints (computed if stale).
  const SpectralResult& clustering();
  bool has_clustering() const { return clustered_.has_value(); }

  nlohmann::json to_json() const;
  static Session from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Session load(const std::filesystem::path& path);

 private:
  Session() = default;
  void prepare();
  void initialize();
  void continue_resolution();
  void complete_resolution();
  void step_random_pairs();
  void evaluate();
  void finish();
  std::uint64_t kmeans_seed() const;
  SelectionMode selection_mode() const;

  SessionConfig config_;
  std::optional<Dataset> dataset_;  // absent for precomputed similarities
  SimilarityMatrix base_;
  std::optional<std::vector<int>> labels_;
  KnnIndex knn_;
  Oracle oracle_ = Oracle::interactive();
  Rng rng_;

  int iteration_ = 0;
  int queries_used_ = 0;
  int n_c_ = 2;
  Status status_ = Status::Running;
  CertainSets certain_;
  ConstraintSet constraints_;
  std::vector<QueryRecord> records_;
  std::optional<Resolution> resolution_;
  std::optional<std::pair<int, int>> pending_random_pair_;
  int last_selected_ = -1;
  std::vector<CurvePoint> curve_;
  double elapsed_ms_ = 0.0;

  std::optional<SpectralResult> clustered_;
  bool stale_ = true;
  std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

// Runs a simulated session to completion and returns its curve.
std::vector<CurvePoint> run(const SessionConfig& cfg);
std::vector<CurvePoint> run(const SessionConfig& cfg, const Dataset& ds);

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out);
nlohmann::json curve_to_json(const std::vector<CurvePoint>& curve);

// Mean curve over runs at every query count that appears in any run, each run
// contributing its latest point at or below that count. Counts below some
// run's first point are skipped.
std::vector<CurvePoint> mean_curve(const std::vector<std::vector<CurvePoint>>& curves);

inline constexpr int kSessionVersion = 1;

}  // namespace activeclust
