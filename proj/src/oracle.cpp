#include "activeclust/oracle.hpp"

#include "activeclust/error.hpp"

#include <algorithm>
#include <sstream>

namespace activeclust {

Oracle Oracle::ground_truth(std::vector<int> labels) {
  Oracle o;
  o.kind_ = OracleKind::GroundTruth;
  o.labels_ = std::move(labels);
  return o;
}

Oracle Oracle::noisy(std::vector<int> labels, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorCode::InvalidParameter, "noise rate must lie in [0, 1]");
  Oracle o;
  o.kind_ = OracleKind::Noisy;
  o.labels_ = std::move(labels);
  o.rate_ = rate;
  o.rng_.seed(seed);
  return o;
}

Oracle Oracle::interactive() {
  Oracle o;
  o.kind_ = OracleKind::Interactive;
  return o;
}

Oracle Oracle::replaying(std::vector<AnswerRecord> log) {
  Oracle o;
  o.kind_ = OracleKind::Replay;
  o.replay_source_ = std::move(log);
  return o;
}

void Oracle::check_pair(int i, int j) const {
  if (i == j) throw Error(ErrorCode::InvalidPair, "query on a single sample");
  if (i < 0 || j < 0) throw Error(ErrorCode::InvalidPair, "negative sample index");
  if (kind_ == OracleKind::GroundTruth || kind_ == OracleKind::Noisy) {
    if (labels_.empty()) throw Error(ErrorCode::NoGroundTruth, "simulated oracle needs labels");
    if (static_cast<std::size_t>(std::max(i, j)) >= labels_.size()) {
      throw Error(ErrorCode::InvalidPair, "sample index out of range");
    }
  }
}

LinkKind Oracle::truth(int i, int j) const {
  return labels_[static_cast<std::size_t>(i)] == labels_[static_cast<std::size_t>(j)] ? LinkKind::MustLink
                                                                                      : LinkKind::CannotLink;
}

LinkKind Oracle::answer(int i, int j) {
  auto a = try_answer(i, j);
  if (!a) throw Error(ErrorCode::Pending, "no answer yet for (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  return *a;
}

std::optional<LinkKind> Oracle::try_answer(int i, int j) {
  check_pair(i, j);
  std::lock_guard lock(*mutex_);
  AnswerRecord rec{i, j, LinkKind::MustLink, false};
  switch (kind_) {
    case OracleKind::GroundTruth:
      rec.answer = truth(i, j);
      break;
    case OracleKind::Noisy:
      rec.answer = truth(i, j);
      if (uniform01(rng_) < rate_) {
        rec.flipped = true;
        rec.answer = rec.answer == LinkKind::MustLink ? LinkKind::CannotLink : LinkKind::MustLink;
      }
      break;
    case OracleKind::Interactive:
      if (!supplied_ || supplied_->first != std::pair{i, j}) return std::nullopt;
      rec.answer = supplied_->second;
      supplied_.reset();
      break;
    case OracleKind::Replay:
      rec.answer = replay(replay_source_, i, j);
      break;
  }
  log_.push_back(rec);
  return rec.answer;
}

void Oracle::supply(int i, int j, LinkKind answer) {
  if (kind_ != OracleKind::Interactive) throw Error(ErrorCode::InvalidParameter, "only interactive oracles take answers");
  check_pair(i, j);
  std::lock_guard lock(*mutex_);
  supplied_ = {{i, j}, answer};
}

std::vector<AnswerRecord> Oracle::log() const {
  std::lock_guard lock(*mutex_);
  return log_;
}

std::string Oracle::rng_state() const {
  std::ostringstream out;
  out << rng_;
  return out.str();
}

void Oracle::restore(std::vector<AnswerRecord> log, const std::string& rng_state) {
  std::lock_guard lock(*mutex_);
  log_ = std::move(log);
  std::istringstream in(rng_state);
  in >> rng_;
  if (!in) throw Error(ErrorCode::IncompatibleSession, "bad oracle generator state");
}

LinkKind replay(const std::vector<AnswerRecord>& log, int i, int j) {
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if ((it->i == i && it->j == j) || (it->i == j && it->j == i)) return it->answer;
  }
  throw Error(ErrorCode::NotLogged, "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") not in log");
}

}  // namespace activeclust
