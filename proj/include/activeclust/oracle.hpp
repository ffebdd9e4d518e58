#pragma once

#include "activeclust/constraints.hpp"
#include "activeclust/random.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace activeclust {

struct AnswerRecord {
  int i = 0;
  int j = 0;
  LinkKind answer = LinkKind::MustLink;
  bool flipped = false;

  friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

enum class OracleKind { GroundTruth, Noisy, Interactive, Replay };

// Source of must-link / cannot-link answers. Every answer given is appended to
// log(). An interactive oracle never blocks: try_answer() returns nullopt until
// a human answer for that exact pair has been supplied.
class Oracle {
 public:
  static Oracle ground_truth(std::vector<int> labels);
  static Oracle noisy(std::vector<int> labels, double rate, std::uint64_t seed);
  static Oracle interactive();
  static Oracle replaying(std::vector<AnswerRecord> log);

  Oracle(Oracle&&) noexcept = default;
  Oracle& operator=(Oracle&&) noexcept = default;

  // Throws Pending for an interactive oracle with no answer for (i, j).
  LinkKind answer(int i, int j);
  std::optional<LinkKind> try_answer(int i, int j);

  // Interactive only: queue the human's answer for (i, j).
  void supply(int i, int j, LinkKind answer);

  OracleKind kind() const { return kind_; }
  double rate() const { return rate_; }
  const std::vector<int>& labels() const { return labels_; }
  std::vector<AnswerRecord> log() const;

  // Generator state, so a restored noisy oracle continues the same stream.
  std::string rng_state() const;
  void restore(std::vector<AnswerRecord> log, const std::string& rng_state);

 private:
  Oracle() : mutex_(std::make_unique<std::mutex>()) {}

  LinkKind truth(int i, int j) const;
  void check_pair(int i, int j) const;

  OracleKind kind_ = OracleKind::GroundTruth;
  std::vector<int> labels_;
  double rate_ = 0.0;
  Rng rng_;
  std::optional<std::pair<std::pair<int, int>, LinkKind>> supplied_;
  std::vector<AnswerRecord> replay_source_;
  std::vector<AnswerRecord> log_;
  std::unique_ptr<std::mutex> mutex_;
};

// The most recent logged answer for the unordered pair {i, j}; NotLogged if absent.
LinkKind replay(const std::vector<AnswerRecord>& log, int i, int j);

}  // namespace activeclust
