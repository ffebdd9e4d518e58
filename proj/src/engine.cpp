#include "activeclust/engine.hpp"

#include "activeclust/error.hpp"
#include "activeclust/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace activeclust {
namespace {

using Json = nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

constexpr std::pair<Strategy, std::string_view> kStrategies[] = {
    {Strategy::UrascN, "urasc_n"},   {Strategy::UrascP, "urasc_p"}, {Strategy::UrascGO, "urasc_go"},
    {Strategy::UrascNO, "urasc_no"}, {Strategy::UrascPO, "urasc_po"}, {Strategy::Random, "random"},
    {Strategy::RandomPairs, "random_pairs"},
};

constexpr std::pair<KernelKind, std::string_view> kKernels[] = {
    {KernelKind::Gaussian, "gaussian"}, {KernelKind::Chi2, "chi2"}, {KernelKind::Precomputed, "precomputed"}};

std::vector<int> load_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::string> raw;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) raw.push_back(line);
  }
  std::vector<std::string> names;
  std::vector<int> out;
  for (const auto& r : raw) {
    auto it = std::find(names.begin(), names.end(), r);
    if (it == names.end()) {
      names.push_back(r);
      it = names.end() - 1;
    }
    out.push_back(static_cast<int>(it - names.begin()));
  }
  return out;
}

template <typename T>
T get_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidParameter, std::string("config field '") + key + "' has the wrong type");
  }
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = n == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != d) throw Error(ErrorCode::IncompatibleSession, "ragged matrix");
    for (Eigen::Index c = 0; c < d; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

std::string rng_to_string(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

}  // namespace

std::string_view to_string(Strategy s) {
  for (const auto& [k, name] : kStrategies) {
    if (k == s) return name;
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (const auto& [k, name] : kStrategies) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(KernelKind kind) {
  for (const auto& [k, name] : kKernels) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<KernelKind> parse_kernel(std::string_view text) {
  for (const auto& [k, name] : kKernels) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::AwaitingAnswer: return "awaiting_answer";
    case Status::Finished: return "finished";
  }
  return "unknown";
}

std::optional<Status> parse_status(std::string_view text) {
  for (auto s : {Status::Running, Status::AwaitingAnswer, Status::Finished}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

void SessionConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidParameter, what); };
  if (query_budget < 1) bad("query_budget must be at least 1");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) bad("noise_rate must lie in [0, 1]");
  if (b < 1) bad("b must be at least 1");
  if (knn_k < 1) bad("knn_k must be at least 1");
  if (eval_every && *eval_every < 1) bad("eval_every must be at least 1");
  if (n_c && *n_c < 1) bad("n_c must be at least 1");
  if (sigma && !(*sigma > 0.0)) bad("sigma must be positive");
  if (!(gamma > 0.0)) bad("gamma must be positive");
  if (format != "csv_features" && format != "csv_features_labeled") bad("unknown format '" + format + "'");
}

void to_json(Json& j, const SessionConfig& c) {
  j = Json{{"data", c.data},
           {"format", c.format},
           {"kernel", to_string(c.kernel)},
           {"gamma", c.gamma},
           {"standardize", c.standardize},
           {"strategy", to_string(c.strategy)},
           {"query_budget", c.query_budget},
           {"seed", c.seed},
           {"noise_rate", c.noise_rate},
           {"b", c.b},
           {"knn_k", c.knn_k},
           {"oracle", c.oracle == OracleMode::Interactive ? "interactive" : "simulated"}};
  j["label_column"] = c.label_column ? Json(*c.label_column) : Json(nullptr);
  j["labels"] = c.labels ? Json(*c.labels) : Json(nullptr);
  j["sigma"] = c.sigma ? Json(*c.sigma) : Json(nullptr);
  j["n_c"] = c.n_c ? Json(*c.n_c) : Json("unknown");
  j["eval_every"] = c.eval_every ? Json(*c.eval_every) : Json(nullptr);
}

void from_json(const Json& j, SessionConfig& c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidParameter, "config must be a JSON object");
  static const char* known[] = {"data", "format", "label_column", "labels", "kernel", "sigma", "gamma",
                                "standardize", "strategy", "n_c", "query_budget", "seed", "noise_rate",
                                "b", "knn_k", "eval_every", "oracle"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known)) {
      throw Error(ErrorCode::InvalidParameter, "unknown config field '" + key + "'");
    }
  }
  SessionConfig out;
  out.data = get_field<std::string>(j, "data", out.data);
  out.format = get_field<std::string>(j, "format", out.format);
  if (j.contains("label_column") && !j["label_column"].is_null()) {
    const auto& lc = j["label_column"];
    out.label_column = lc.is_number_integer() ? std::to_string(lc.get<int>()) : get_field<std::string>(j, "label_column", "");
  }
  if (j.contains("labels") && !j["labels"].is_null()) out.labels = get_field<std::string>(j, "labels", "");
  const auto kernel = get_field<std::string>(j, "kernel", "gaussian");
  if (auto k = parse_kernel(kernel)) {
    out.kernel = *k;
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown kernel '" + kernel + "'");
  }
  if (j.contains("sigma") && !j["sigma"].is_null()) out.sigma = get_field<double>(j, "sigma", 0.0);
  out.gamma = get_field<double>(j, "gamma", out.gamma);
  out.standardize = get_field<bool>(j, "standardize", out.standardize);
  const auto strategy = get_field<std::string>(j, "strategy", "urasc_n");
  if (auto s = parse_strategy(strategy)) {
    out.strategy = *s;
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown strategy '" + strategy + "'");
  }
  if (j.contains("n_c") && !j["n_c"].is_null()) {
    const auto& nc = j["n_c"];
    if (nc.is_string()) {
      const auto text = nc.get<std::string>();
      if (text != "unknown" && text != "auto") throw Error(ErrorCode::InvalidParameter, "n_c must be an integer or \"unknown\"");
    } else {
      out.n_c = get_field<int>(j, "n_c", 0);
    }
  }
  out.query_budget = get_field<int>(j, "query_budget", out.query_budget);
  out.seed = get_field<std::uint64_t>(j, "seed", out.seed);
  out.noise_rate = get_field<double>(j, "noise_rate", out.noise_rate);
  out.b = get_field<int>(j, "b", out.b);
  out.knn_k = get_field<int>(j, "knn_k", out.knn_k);
  if (j.contains("eval_every") && !j["eval_every"].is_null()) out.eval_every = get_field<int>(j, "eval_every", 1);
  const auto oracle = get_field<std::string>(j, "oracle", "simulated");
  if (oracle == "interactive") {
    out.oracle = OracleMode::Interactive;
  } else if (oracle == "simulated") {
    out.oracle = OracleMode::Simulated;
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown oracle '" + oracle + "'");
  }
  out.validate();
  c = std::move(out);
}

// ---------------------------------------------------------------------------

Session Session::create(const SessionConfig& cfg) {
  cfg.validate();
  if (cfg.data.empty()) throw Error(ErrorCode::InvalidParameter, "config has no data path");
  if (cfg.kernel == KernelKind::Precomputed) {
    auto w = load_precomputed_similarity(cfg.data);
    std::optional<std::vector<int>> labels;
    if (cfg.labels) labels = load_label_file(*cfg.labels);
    return create(cfg, std::move(w), std::move(labels));
  }
  CsvOptions csv;
  csv.format = cfg.format == "csv_features" ? CsvFormat::Features : CsvFormat::FeaturesLabeled;
  if (cfg.label_column) {
    const auto& lc = *cfg.label_column;
    if (!lc.empty() && std::all_of(lc.begin(), lc.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      csv.label_index = std::stoi(lc);
    } else {
      csv.label_name = lc;
    }
  }
  return create(cfg, load_dataset(cfg.data, csv));
}

namespace {

SimilarityMatrix kernel_matrix(const SessionConfig& cfg, const Dataset& raw) {
  const Dataset ds = cfg.standardize ? standardized(raw) : raw;
  switch (cfg.kernel) {
    case KernelKind::Gaussian:
      return gaussian_similarity(ds, cfg.sigma ? *cfg.sigma : median_pairwise_distance(ds));
    case KernelKind::Chi2:
      // z-scoring would introduce negative bins
      return chi2_similarity(raw, cfg.gamma);
    case KernelKind::Precomputed:
      break;
  }
  throw Error(ErrorCode::InvalidParameter, "precomputed kernel needs a similarity matrix, not features");
}

}  // namespace

Session Session::create(const SessionConfig& cfg, const Dataset& ds) {
  cfg.validate();
  Session s;
  s.config_ = cfg;
  s.dataset_ = ds;
  s.base_ = kernel_matrix(cfg, ds);
  s.labels_ = ds.labels;
  s.initialize();
  return s;
}

Session Session::create(const SessionConfig& cfg, SimilarityMatrix w, std::optional<std::vector<int>> labels) {
  cfg.validate();
  if (labels && static_cast<int>(labels->size()) != w.size()) {
    throw Error(ErrorCode::ShapeError, "label count does not match the similarity matrix");
  }
  Session s;
  s.config_ = cfg;
  s.base_ = std::move(w);
  s.labels_ = std::move(labels);
  s.initialize();
  return s;
}

void Session::prepare() {
  const int n = base_.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  if (config_.n_c && *config_.n_c > n) throw Error(ErrorCode::InvalidParameter, "n_c exceeds the sample count");
  if (!config_.eval_every) config_.eval_every = n <= 1000 ? 1 : 10;

  if (config_.oracle == OracleMode::Interactive) {
    oracle_ = Oracle::interactive();
  } else {
    if (!labels_) throw Error(ErrorCode::NoGroundTruth, "simulated oracle needs ground-truth labels");
    oracle_ = config_.noise_rate > 0.0
                  ? Oracle::noisy(*labels_, config_.noise_rate, splitmix64(config_.seed ^ 0xd1b54a32d192ed03ULL))
                  : Oracle::ground_truth(*labels_);
  }
  if (config_.strategy == Strategy::UrascN || config_.strategy == Strategy::UrascNO) {
    knn_ = KnnIndex(base_, config_.knn_k);
  }

}

void Session::initialize() {
  prepare();
  const int n = base_.size();
  n_c_ = config_.n_c ? *config_.n_c : 2;
  rng_.seed(config_.seed);
  certain_ = CertainSets(n);
  certain_.init_first_sample(static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n))));
  mark_ = std::chrono::steady_clock::now();
  evaluate();
  elapsed_ms_ += elapsed_ms(mark_);
}

std::uint64_t Session::kmeans_seed() const {
  return splitmix64(config_.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iteration_ + 1)));
}

SelectionMode Session::selection_mode() const {
  switch (config_.strategy) {
    case Strategy::UrascP: return SelectionMode::P;
    case Strategy::UrascGO: return SelectionMode::GO;
    case Strategy::UrascNO: return SelectionMode::NO;
    case Strategy::UrascPO: return SelectionMode::PO;
    default: return SelectionMode::N;
  }
}

const SpectralResult& Session::clustering() {
  if (!clustered_ || stale_) {
    clustered_ = spectral_learning_cluster(base_, constraints_, n_c_, kmeans_seed());
    stale_ = false;
  }
  return *clustered_;
}

void Session::step() {
  if (status_ == Status::Finished) return;
  mark_ = std::chrono::steady_clock::now();
  if (resolution_) {
    continue_resolution();
  } else if (pending_random_pair_) {
    step_random_pairs();
  } else if (queries_used_ >= config_.query_budget) {
    finish();
  } else if (config_.strategy == Strategy::RandomPairs) {
    step_random_pairs();
  } else {
    const auto candidates = certain_.uncertain_samples();
    if (candidates.empty()) {
      finish();
    } else {
      const auto& cl = clustering();
      int chosen = -1;
      if (config_.strategy == Strategy::Random) {
        chosen = candidates[uniform_index(rng_, candidates.size())];
      } else {
        SelectionContext ctx{cl.edited, cl.embedding, cl.assignment, certain_};
        ctx.knn = config_.strategy == Strategy::UrascN || config_.strategy == Strategy::UrascNO ? &knn_ : nullptr;
        ctx.knn_k = config_.knn_k;
        chosen = select_informative(candidates, ctx, selection_mode(), config_.b).chosen;
      }
      last_selected_ = chosen;
      resolution_.emplace(chosen, certain_, cl.edited);
      continue_resolution();
    }
  }
  elapsed_ms_ += elapsed_ms(mark_);
}

void Session::continue_resolution() {
  while (auto pair = resolution_->next_pair()) {
    auto answer = oracle_.try_answer(pair->first, pair->second);
    if (!answer) {
      status_ = Status::AwaitingAnswer;
      return;
    }
    resolution_->record(*answer);
    ++queries_used_;
  }
  status_ = Status::Running;
  complete_resolution();
}

void Session::complete_resolution() {
  const int x = resolution_->sample();
  records_.push_back(resolution_->finish(certain_));
  resolution_.reset();
  constraints_.merge(expand_constraints(x, certain_));
  if (!config_.n_c) n_c_ = std::max(n_c_, certain_.set_count());
  ++iteration_;
  stale_ = true;
  if (queries_used_ >= config_.query_budget || certain_.certain_count() == sample_count()) {
    finish();
  } else if (iteration_ % *config_.eval_every == 0) {
    evaluate();
  }
}

void Session::step_random_pairs() {
  const int n = sample_count();
  if (!pending_random_pair_) {
    const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
    if (constraints_.size() >= total) {
      finish();
      return;
    }
    int i = 0, j = 0;
    do {
      i = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n)));
      j = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n)));
    } while (i == j || constraints_.find(i, j));
    pending_random_pair_ = {i, j};
  }
  auto answer = oracle_.try_answer(pending_random_pair_->first, pending_random_pair_->second);
  if (!answer) {
    status_ = Status::AwaitingAnswer;
    return;
  }
  constraints_.add(pending_random_pair_->first, pending_random_pair_->second, *answer);
  pending_random_pair_.reset();
  status_ = Status::Running;
  ++queries_used_;
  ++iteration_;
  stale_ = true;
  if (queries_used_ >= config_.query_budget) {
    finish();
  } else if (iteration_ % *config_.eval_every == 0) {
    evaluate();
  }
}

void Session::evaluate() {
  if (!curve_.empty() && curve_.back().queries_used == queries_used_) return;
  const auto& cl = clustering();
  CurvePoint p;
  p.queries_used = queries_used_;
  p.n_c = n_c_;
  if (labels_) {
    p.jcc = jaccard(cl.assignment.labels, *labels_);
    p.v_measure = v_measure(cl.assignment.labels, *labels_).v;
  } else {
    p.jcc = std::numeric_limits<double>::quiet_NaN();
    p.v_measure = std::numeric_limits<double>::quiet_NaN();
  }
  p.wall_ms = elapsed_ms_ + elapsed_ms(mark_);
  curve_.push_back(p);
}

void Session::finish() {
  status_ = Status::Finished;
  evaluate();
}

void Session::advance() {
  while (status_ == Status::Running) step();
}

const std::vector<CurvePoint>& Session::run() {
  if (config_.oracle == OracleMode::Interactive) {
    throw Error(ErrorCode::InvalidParameter, "run() needs a simulated oracle; drive interactive sessions with submit_answer");
  }
  advance();
  return curve_;
}

std::optional<std::pair<int, int>> Session::pending_pair() const {
  if (status_ != Status::AwaitingAnswer) return std::nullopt;
  if (resolution_) return resolution_->next_pair();
  return pending_random_pair_;
}

void Session::accept_answer(int i, int j, LinkKind answer) {
  const auto pending = pending_pair();
  if (!pending) throw Error(ErrorCode::InvalidPair, "no query is pending");
  if (*pending != std::pair{i, j}) {
    throw Error(ErrorCode::InvalidPair, "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                            ") is not the pending query");
  }
  oracle_.supply(i, j, answer);
  status_ = Status::Running;
}

void Session::submit_answer(int i, int j, LinkKind answer) {
  accept_answer(i, j, answer);
  advance();
}

// ---------------------------------------------------------------------------

nlohmann::json Session::to_json() const {
  Json j;
  j["format"] = "activeclust-session";
  j["version"] = kSessionVersion;
  j["config"] = config_;
  if (dataset_) {
    j["features"] = matrix_to_json(dataset_->features);
    j["class_names"] = dataset_->class_names;
  } else {
    j["similarity"] = matrix_to_json(base_.matrix());
  }
  j["labels"] = labels_ ? Json(*labels_) : Json(nullptr);

  Json st;
  st["iteration"] = iteration_;
  st["queries_used"] = queries_used_;
  st["n_c"] = n_c_;
  st["status"] = to_string(status_);
  st["rng"] = rng_to_string(rng_);
  st["elapsed_ms"] = elapsed_ms_;
  st["last_selected"] = last_selected_;
  st["certain_sets"] = certain_.sets();
  Json q = Json::array();
  for (const auto& c : constraints_.entries()) q.push_back(Json::array({c.i, c.j, to_string(c.kind)}));
  st["constraints"] = std::move(q);
  st["constraint_conflicts"] = constraints_.conflicts();
  Json recs = Json::array();
  for (const auto& r : records_) {
    Json asked = Json::array();
    for (const auto& [rep, ans] : r.asked) asked.push_back(Json::array({rep, to_string(ans)}));
    recs.push_back({{"sample", r.sample},
                    {"asked", std::move(asked)},
                    {"outcome", r.outcome == QueryRecord::Outcome::JoinedSet ? "joined" : "new"},
                    {"set", r.set}});
  }
  st["records"] = std::move(recs);
  if (resolution_) {
    Json reps = Json::array();
    for (const auto& r : resolution_->order()) reps.push_back(Json::array({r.set, r.sample, r.similarity}));
    Json asked = Json::array();
    for (const auto& [rep, ans] : resolution_->asked()) asked.push_back(Json::array({rep, to_string(ans)}));
    st["resolution"] = {{"sample", resolution_->sample()}, {"order", std::move(reps)}, {"asked", std::move(asked)}};
  } else {
    st["resolution"] = nullptr;
  }
  st["pending_random_pair"] =
      pending_random_pair_ ? Json::array({pending_random_pair_->first, pending_random_pair_->second}) : Json(nullptr);
  st["curve"] = curve_to_json(curve_);
  Json log = Json::array();
  for (const auto& a : oracle_.log()) log.push_back(Json::array({a.i, a.j, to_string(a.answer), a.flipped}));
  st["oracle"] = {{"log", std::move(log)}, {"rng", oracle_.rng_state()}};
  j["state"] = std::move(st);
  return j;
}

Session Session::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "activeclust-session") {
      throw Error(ErrorCode::IncompatibleSession, "not a session file");
    }
    const int version = j.at("version").get<int>();
    if (version != kSessionVersion) {
      throw Error(ErrorCode::IncompatibleSession, "session version " + std::to_string(version) +
                                                      ", expected " + std::to_string(kSessionVersion));
    }
    Session s;
    s.config_ = j.at("config").get<SessionConfig>();
    if (!j.at("labels").is_null()) s.labels_ = j.at("labels").get<std::vector<int>>();
    if (j.contains("features")) {
      Dataset ds;
      ds.features = matrix_from_json(j.at("features"));
      ds.labels = s.labels_;
      ds.class_names = j.at("class_names").get<std::vector<std::string>>();
      s.base_ = kernel_matrix(s.config_, ds);
      s.dataset_ = std::move(ds);
    } else {
      s.base_ = SimilarityMatrix::symmetrized(matrix_from_json(j.at("similarity")));
    }
    s.prepare();

    const auto& st = j.at("state");
    s.iteration_ = st.at("iteration").get<int>();
    s.queries_used_ = st.at("queries_used").get<int>();
    s.n_c_ = st.at("n_c").get<int>();
    const auto status = parse_status(st.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::IncompatibleSession, "bad status");
    s.status_ = *status;
    std::istringstream rng_in(st.at("rng").get<std::string>());
    rng_in >> s.rng_;
    if (!rng_in) throw Error(ErrorCode::IncompatibleSession, "bad generator state");
    s.elapsed_ms_ = st.at("elapsed_ms").get<double>();
    s.last_selected_ = st.at("last_selected").get<int>();
    s.certain_ = CertainSets::from_sets(s.sample_count(), st.at("certain_sets").get<std::vector<std::vector<int>>>());

    s.constraints_ = ConstraintSet();
    for (const auto& c : st.at("constraints")) {
      auto kind = parse_link_kind(c.at(2).get<std::string>());
      if (!kind) throw Error(ErrorCode::IncompatibleSession, "bad constraint kind");
      s.constraints_.add(c.at(0).get<int>(), c.at(1).get<int>(), *kind);
    }
    s.constraints_.restore_conflicts(st.at("constraint_conflicts").get<std::size_t>());

    auto parse_asked = [](const Json& arr) {
      std::vector<std::pair<int, LinkKind>> out;
      for (const auto& a : arr) {
        auto kind = parse_link_kind(a.at(1).get<std::string>());
        if (!kind) throw Error(ErrorCode::IncompatibleSession, "bad answer kind");
        out.emplace_back(a.at(0).get<int>(), *kind);
      }
      return out;
    };
    s.records_.clear();
    for (const auto& r : st.at("records")) {
      QueryRecord rec;
      rec.sample = r.at("sample").get<int>();
      rec.asked = parse_asked(r.at("asked"));
      rec.outcome = r.at("outcome").get<std::string>() == "joined" ? QueryRecord::Outcome::JoinedSet
                                                                   : QueryRecord::Outcome::NewSet;
      rec.set = r.at("set").get<int>();
      s.records_.push_back(std::move(rec));
    }
    s.resolution_.reset();
    if (!st.at("resolution").is_null()) {
      const auto& r = st.at("resolution");
      std::vector<Representative> order;
      for (const auto& o : r.at("order")) order.push_back({o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<double>()});
      s.resolution_.emplace(r.at("sample").get<int>(), std::move(order), parse_asked(r.at("asked")));
    }
    s.pending_random_pair_.reset();
    if (!st.at("pending_random_pair").is_null()) {
      const auto& p = st.at("pending_random_pair");
      s.pending_random_pair_ = std::pair{p.at(0).get<int>(), p.at(1).get<int>()};
    }
    s.curve_.clear();
    for (const auto& c : st.at("curve")) {
      CurvePoint p;
      p.queries_used = c.at("queries").get<int>();
      p.jcc = c.at("jcc").is_null() ? std::numeric_limits<double>::quiet_NaN() : c.at("jcc").get<double>();
      p.v_measure =
          c.at("vmeasure").is_null() ? std::numeric_limits<double>::quiet_NaN() : c.at("vmeasure").get<double>();
      p.n_c = c.at("n_c").get<int>();
      p.wall_ms = c.at("wall_ms").get<double>();
      s.curve_.push_back(p);
    }
    std::vector<AnswerRecord> log;
    for (const auto& a : st.at("oracle").at("log")) {
      auto kind = parse_link_kind(a.at(2).get<std::string>());
      if (!kind) throw Error(ErrorCode::IncompatibleSession, "bad logged answer");
      log.push_back({a.at(0).get<int>(), a.at(1).get<int>(), *kind, a.at(3).get<bool>()});
    }
    s.oracle_.restore(std::move(log), st.at("oracle").at("rng").get<std::string>());
    s.clustered_.reset();
    s.stale_ = true;
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IncompatibleSession, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IncompatibleSession) throw;
    throw Error(ErrorCode::IncompatibleSession, e.what());
  }
}

void Session::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json().dump();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Session Session::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IncompatibleSession, e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------

std::vector<CurvePoint> run(const SessionConfig& cfg) { return Session::create(cfg).run(); }

std::vector<CurvePoint> run(const SessionConfig& cfg, const Dataset& ds) { return Session::create(cfg, ds).run(); }

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out) {
  out << "queries,jcc,vmeasure,n_c,wall_ms\n";
  const auto old = out.precision(10);
  for (const auto& p : curve) {
    out << p.queries_used << ',' << p.jcc << ',' << p.v_measure << ',' << p.n_c << ',' << p.wall_ms << '\n';
  }
  out.precision(old);
}

nlohmann::json curve_to_json(const std::vector<CurvePoint>& curve) {
  Json arr = Json::array();
  auto num = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
  for (const auto& p : curve) {
    arr.push_back({{"queries", p.queries_used},
                   {"jcc", num(p.jcc)},
                   {"vmeasure", num(p.v_measure)},
                   {"n_c", p.n_c},
                   {"wall_ms", p.wall_ms}});
  }
  return arr;
}

std::vector<CurvePoint> mean_curve(const std::vector<std::vector<CurvePoint>>& curves) {
  std::vector<CurvePoint> out;
  if (curves.empty()) return out;
  std::vector<int> counts;
  for (const auto& c : curves) {
    for (const auto& p : c) counts.push_back(p.queries_used);
  }
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  std::vector<std::size_t> cursor(curves.size(), 0);
  for (int q : counts) {
    CurvePoint mean;
    mean.queries_used = q;
    double nc = 0.0;
    bool complete = true;
    for (std::size_t r = 0; r < curves.size(); ++r) {
      const auto& c = curves[r];
      while (cursor[r] + 1 < c.size() && c[cursor[r] + 1].queries_used <= q) ++cursor[r];
      if (c.empty() || c[cursor[r]].queries_used > q) {
        complete = false;
        break;
      }
      const auto& at = c[cursor[r]];
      mean.jcc += at.jcc;
      mean.v_measure += at.v_measure;
      mean.wall_ms += at.wall_ms;
      nc += at.n_c;
    }
    if (!complete) continue;
    const auto runs = static_cast<double>(curves.size());
    mean.jcc /= runs;
    mean.v_measure /= runs;
    mean.wall_ms /= runs;
    mean.n_c = static_cast<int>(std::lround(nc / runs));
    out.push_back(mean);
  }
  return out;
}

}  // namespace activeclust
