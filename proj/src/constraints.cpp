#include "activeclust/constraints.hpp"

#include "activeclust/error.hpp"

#include <algorithm>
#include <string>

namespace activeclust {

bool ConstraintSet::add(int i, int j, LinkKind kind) {
  if (i == j) throw Error(ErrorCode::InvalidConstraint, "constraint on a single sample " + std::to_string(i));
  if (i < 0 || j < 0) throw Error(ErrorCode::InvalidConstraint, "negative sample index");
  const auto key = std::minmax(i, j);
  auto [it, inserted] = entries_.try_emplace({key.first, key.second}, kind);
  if (inserted || it->second == kind) return false;
  it->second = kind;
  ++conflicts_;
  return true;
}

void ConstraintSet::merge(const ConstraintSet& other) {
  for (const auto& [key, kind] : other.entries_) add(key.first, key.second, kind);
}

std::optional<LinkKind> ConstraintSet::find(int i, int j) const {
  const auto key = std::minmax(i, j);
  auto it = entries_.find({key.first, key.second});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<Constraint> ConstraintSet::entries() const {
  std::vector<Constraint> out;
  out.reserve(entries_.size());
  for (const auto& [key, kind] : entries_) out.push_back({key.first, key.second, kind});
  return out;
}

std::string_view to_string(LinkKind kind) { return kind == LinkKind::MustLink ? "must" : "cannot"; }

std::optional<LinkKind> parse_link_kind(std::string_view text) {
  if (text == "must" || text == "must_link" || text == "MustLink") return LinkKind::MustLink;
  if (text == "cannot" || text == "cannot_link" || text == "CannotLink") return LinkKind::CannotLink;
  return std::nullopt;
}

}  // namespace activeclust
