#include "activeclust/certain_sets.hpp"

#include "activeclust/error.hpp"

#include <algorithm>
#include <string>

namespace activeclust {

CertainSets::CertainSets(int sample_count) : membership_(static_cast<std::size_t>(std::max(sample_count, 0)), -1) {}

void CertainSets::check_index(int x) const {
  if (x < 0 || x >= sample_count()) throw Error(ErrorCode::InvalidParameter, "sample index " + std::to_string(x) + " out of range");
}

std::optional<int> CertainSets::membership(int x) const {
  check_index(x);
  const int m = membership_[static_cast<std::size_t>(x)];
  if (m < 0) return std::nullopt;
  return m;
}

void CertainSets::init_first_sample(int x) {
  if (!sets_.empty()) throw Error(ErrorCode::AlreadyInitialized, "certain sets already seeded");
  create_set(x);
}

std::vector<int> CertainSets::certain_samples() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(certain_));
  for (int x = 0; x < sample_count(); ++x) {
    if (membership_[static_cast<std::size_t>(x)] >= 0) out.push_back(x);
  }
  return out;
}

std::vector<int> CertainSets::uncertain_samples() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(sample_count() - certain_));
  for (int x = 0; x < sample_count(); ++x) {
    if (membership_[static_cast<std::size_t>(x)] < 0) out.push_back(x);
  }
  return out;
}

void CertainSets::join(int x, int set_index) {
  if (is_certain(x)) throw Error(ErrorCode::AlreadyCertain, "sample " + std::to_string(x) + " is already certain");
  if (set_index < 0 || set_index >= set_count()) throw Error(ErrorCode::InvalidParameter, "no such certain set");
  sets_[static_cast<std::size_t>(set_index)].push_back(x);
  membership_[static_cast<std::size_t>(x)] = set_index;
  ++certain_;
}

int CertainSets::create_set(int x) {
  if (is_certain(x)) throw Error(ErrorCode::AlreadyCertain, "sample " + std::to_string(x) + " is already certain");
  sets_.push_back({x});
  membership_[static_cast<std::size_t>(x)] = set_count() - 1;
  ++certain_;
  return set_count() - 1;
}

CertainSets CertainSets::from_sets(int sample_count, std::vector<std::vector<int>> sets) {
  CertainSets z(sample_count);
  for (auto& members : sets) {
    if (members.empty()) throw Error(ErrorCode::InvalidParameter, "empty certain set");
    const int index = z.create_set(members.front());
    for (std::size_t k = 1; k < members.size(); ++k) z.join(members[k], index);
  }
  return z;
}

std::vector<Representative> representatives(int x, const CertainSets& z, const SimilarityMatrix& w) {
  if (z.is_certain(x)) throw Error(ErrorCode::AlreadyCertain, "sample " + std::to_string(x) + " is already certain");
  std::vector<Representative> reps;
  reps.reserve(static_cast<std::size_t>(z.set_count()));
  for (int s = 0; s < z.set_count(); ++s) {
    Representative best{s, -1, 0.0};
    for (int member : z.set(s)) {
      const double sim = w(x, member);
      if (best.sample < 0 || sim > best.similarity || (sim == best.similarity && member < best.sample)) {
        best.sample = member;
        best.similarity = sim;
      }
    }
    reps.push_back(best);
  }
  std::stable_sort(reps.begin(), reps.end(), [](const Representative& a, const Representative& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.set != b.set) return a.set < b.set;
    return a.sample < b.sample;
  });
  return reps;
}

Resolution::Resolution(int x, const CertainSets& z, const SimilarityMatrix& w)
    : sample_(x), reps_(representatives(x, z, w)) {
  if (reps_.empty()) throw Error(ErrorCode::NoCertainSets, "no certain sets to query against");
}

Resolution::Resolution(int x, std::vector<Representative> reps, std::vector<std::pair<int, LinkKind>> asked)
    : sample_(x), reps_(std::move(reps)), asked_(std::move(asked)) {
  if (asked_.size() > reps_.size()) throw Error(ErrorCode::InvalidParameter, "more answers than representatives");
}

bool Resolution::done() const {
  if (!asked_.empty() && asked_.back().second == LinkKind::MustLink) return true;
  return asked_.size() == reps_.size();
}

std::optional<std::pair<int, int>> Resolution::next_pair() const {
  if (done()) return std::nullopt;
  return std::pair{sample_, reps_[asked_.size()].sample};
}

void Resolution::record(LinkKind answer) {
  if (done()) throw Error(ErrorCode::InvalidParameter, "resolution already complete");
  asked_.emplace_back(reps_[asked_.size()].sample, answer);
}

QueryRecord Resolution::finish(CertainSets& z) const {
  if (!done()) throw Error(ErrorCode::InvalidParameter, "resolution still has open questions");
  QueryRecord rec;
  rec.sample = sample_;
  rec.asked = asked_;
  if (asked_.back().second == LinkKind::MustLink) {
    rec.outcome = QueryRecord::Outcome::JoinedSet;
    rec.set = reps_[asked_.size() - 1].set;
    z.join(sample_, rec.set);
  } else {
    rec.outcome = QueryRecord::Outcome::NewSet;
    rec.set = z.create_set(sample_);
  }
  return rec;
}

ResolveResult resolve_sample(int x, CertainSets& z, const SimilarityMatrix& w, Oracle& oracle) {
  Resolution res(x, z, w);
  while (auto pair = res.next_pair()) {
    std::optional<LinkKind> answer;
    try {
      answer = oracle.try_answer(pair->first, pair->second);
    } catch (const Error& e) {
      throw Error(ErrorCode::OracleUnavailable, e.what());
    }
    if (!answer) throw Error(ErrorCode::OracleUnavailable, "oracle has no answer for the pending pair");
    res.record(*answer);
  }
  ResolveResult out;
  out.record = res.finish(z);
  out.constraints = expand_constraints(x, z);
  return out;
}

ConstraintSet expand_constraints(int x, const CertainSets& z) {
  const auto own = z.membership(x);
  if (!own) throw Error(ErrorCode::NotCertain, "sample " + std::to_string(x) + " is not certain");
  ConstraintSet q;
  for (int s = 0; s < z.set_count(); ++s) {
    const LinkKind kind = s == *own ? LinkKind::MustLink : LinkKind::CannotLink;
    for (int member : z.set(s)) {
      if (member != x) q.add(x, member, kind);
    }
  }
  return q;
}

}  // namespace activeclust
