#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace activeclust {

enum class LinkKind { MustLink, CannotLink };

struct Constraint {
  int i = 0;
  int j = 0;
  LinkKind kind = LinkKind::MustLink;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

// Pairwise constraints keyed on the unordered pair. A later entry for the same
// pair replaces the earlier one; replacements of the opposite kind are counted
// as conflicts (they only arise from a noisy oracle).
class ConstraintSet {
 public:
  // Returns true when an existing entry of the other kind was overwritten.
  bool add(int i, int j, LinkKind kind);
  void merge(const ConstraintSet& other);

  std::optional<LinkKind> find(int i, int j) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t conflicts() const { return conflicts_; }
  void restore_conflicts(std::size_t count) { conflicts_ = count; }

  // Entries ordered by (min index, max index), stored with i < j.
  std::vector<Constraint> entries() const;

 private:
  std::map<std::pair<int, int>, LinkKind> entries_;
  std::size_t conflicts_ = 0;
};

std::string_view to_string(LinkKind kind);  // "must" / "cannot"
std::optional<LinkKind> parse_link_kind(std::string_view text);

}  // namespace activeclust
