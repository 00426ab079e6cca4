#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "echosim/catalog.hpp"

namespace echosim {

/// External string ids mapped to contiguous indices in first-seen order.
class IdIndex {
 public:
  int intern(const std::string& id);
  std::optional<int> find(const std::string& id) const;
  const std::string& id(int index) const { return ids_[static_cast<std::size_t>(index)]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  int size() const noexcept { return static_cast<int>(ids_.size()); }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
};

/// Ratings at or above this value count as positive interactions.
inline constexpr double kPositiveRating = 3.0;

struct ItemsData {
  ItemCatalog catalog;
  IdIndex items;
  /// Integer category labels in ascending order; index o is label category_labels[o].
  std::vector<long long> category_labels;
};

/// Items rows `item_id,category_ids` with `;` between integer category labels.
/// Labels map to contiguous indices in ascending label order.
ItemsData ingest_items(const std::filesystem::path& items);

struct InteractionData {
  ItemCatalog catalog;
  IdIndex items;
  IdIndex users;
  /// Integer category labels in ascending order; index o is label categories[o].
  std::vector<long long> category_labels;
  std::vector<std::vector<int>> positives;
  std::vector<std::vector<int>> negatives;
};

/// Items rows `item_id,category_ids` with `;` between categories; interaction
/// rows `user_id,item_id,rating`. Blank lines, `#` comments and a leading
/// header row are skipped.
InteractionData ingest_interactions(const std::filesystem::path& interactions, const std::filesystem::path& items);

struct HistoryInit {
  UserStates states;
  /// Users whose history cancelled out and got a random vector instead.
  std::vector<int> substituted;
};

/// Eq.-style history init per user; degenerate histories fall back to
/// init_user_random with a seed derived from (seed, user).
HistoryInit initial_states_from_history(const InteractionData& data, std::uint64_t seed);

struct TrustData {
  SocialGraph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t unknown_skipped = 0;
};

/// Rows `truster_id,trustee_id` resolved through `users`. Unknown ids raise
/// ParseError unless skip_unknown is set, in which case they are counted.
TrustData ingest_trust(const std::filesystem::path& trust, const IdIndex& users, bool skip_unknown = false);
/// Same, with ids taken as integer indices in [0, n).
TrustData ingest_trust(const std::filesystem::path& trust, int user_count);

struct SyntheticDataset {
  ItemCatalog catalog;
  UserStates initial;
  SocialGraph graph;
};

/// One uniform category per item, random unit users, and `links` distinct
/// ordered pairs drawn uniformly without replacement.
SyntheticDataset generate_synthetic(int users, int items, int categories, std::size_t links, std::uint64_t seed);

/// Writes normalized columns as `user_id,coord_0,...` in shortest round-trip
/// form. `ids` may be empty, in which case column indices are used.
void export_states(const Matrix& users, const std::filesystem::path& path, const std::vector<std::string>& ids = {});

struct StatesFile {
  Matrix users;
  std::vector<std::string> ids;
};

StatesFile read_states(const std::filesystem::path& path);

void write_items(const ItemCatalog& catalog, const std::filesystem::path& path);
void write_trust(const SocialGraph& graph, const std::filesystem::path& path);

}  // namespace echosim
