#include "echosim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "echosim/errors.hpp"
#include "echosim/format.hpp"
#include "echosim/rng.hpp"

namespace echosim {

int IdIndex::intern(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, static_cast<int>(ids_.size()));
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::optional<int> IdIndex::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + what);
}

// Calls row(fields, line_number) for each data row. The first data row is
// dropped when its first field equals `header`.
template <typename Row>
void read_csv(const std::filesystem::path& path, std::size_t columns, const std::string& header, Row&& row) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, ',');
    if (first) {
      first = false;
      if (fields.front() == header) continue;
    }
    if (fields.size() != columns) {
      parse_error(path, number, "expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    row(fields, number);
  }
}

template <typename T>
std::optional<T> parse_number(const std::string& s) {
  T value{};
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

TrustData finish_trust(std::vector<Edge> edges, int user_count, TrustData data) {
  std::vector<Edge> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  data.duplicates_dropped = static_cast<std::size_t>(sorted.end() - std::unique(sorted.begin(), sorted.end()));
  data.graph = build_social_graph(edges, user_count);
  return data;
}

}  // namespace

ItemsData ingest_items(const std::filesystem::path& items) {
  ItemsData data;
  std::vector<std::vector<long long>> raw_sets;
  std::set<long long> labels;
  read_csv(items, 2, "item_id", [&](const std::vector<std::string>& f, std::size_t line) {
    if (f[0].empty()) parse_error(items, line, "empty item id");
    if (data.items.find(f[0])) parse_error(items, line, "duplicate item '" + f[0] + "'");
    std::vector<long long> set;
    for (const auto& token : split(f[1], ';')) {
      if (token.empty()) continue;
      const auto label = parse_number<long long>(token);
      if (!label) parse_error(items, line, "category '" + token + "' is not an integer");
      set.push_back(*label);
      labels.insert(*label);
    }
    if (set.empty()) parse_error(items, line, "item '" + f[0] + "' has no categories");
    data.items.intern(f[0]);
    raw_sets.push_back(std::move(set));
  });

  data.category_labels.assign(labels.begin(), labels.end());
  std::map<long long, int> label_index;
  for (std::size_t o = 0; o < data.category_labels.size(); ++o) label_index[data.category_labels[o]] = static_cast<int>(o);
  std::vector<std::vector<int>> sets;
  sets.reserve(raw_sets.size());
  for (const auto& raw : raw_sets) {
    std::vector<int> set;
    for (long long label : raw) set.push_back(label_index.at(label));
    sets.push_back(std::move(set));
  }
  data.catalog = ItemCatalog(std::move(sets), std::max<int>(1, static_cast<int>(labels.size())));
  return data;
}

InteractionData ingest_interactions(const std::filesystem::path& interactions, const std::filesystem::path& items) {
  InteractionData data;
  {
    ItemsData loaded = ingest_items(items);
    data.catalog = std::move(loaded.catalog);
    data.items = std::move(loaded.items);
    data.category_labels = std::move(loaded.category_labels);
  }
  read_csv(interactions, 3, "user_id", [&](const std::vector<std::string>& f, std::size_t line) {
    const auto item = data.items.find(f[1]);
    if (!item) parse_error(interactions, line, "unknown item '" + f[1] + "'");
    const auto rating = parse_number<double>(f[2]);
    if (!rating || !std::isfinite(*rating)) parse_error(interactions, line, "rating '" + f[2] + "' is not numeric");
    if (f[0].empty()) parse_error(interactions, line, "empty user id");
    const auto user = static_cast<std::size_t>(data.users.intern(f[0]));
    if (user == data.positives.size()) {
      data.positives.emplace_back();
      data.negatives.emplace_back();
    }
    (*rating >= kPositiveRating ? data.positives : data.negatives)[user].push_back(*item);
  });
  return data;
}

HistoryInit initial_states_from_history(const InteractionData& data, std::uint64_t seed) {
  HistoryInit out;
  const int n = data.users.size();
  out.states.users.resize(data.catalog.category_count(), n);
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out.states.users.col(i) = init_user_from_history(data.positives[idx], data.negatives[idx], data.catalog);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateHistory) throw;
      out.states.users.col(i) = init_user_random(derive_seed(seed, static_cast<std::uint64_t>(i), 0,
                                                             static_cast<std::uint64_t>(Stream::Fallback)),
                                                 data.catalog.category_count());
      out.substituted.push_back(i);
    }
  }
  return out;
}

TrustData ingest_trust(const std::filesystem::path& trust, const IdIndex& users, bool skip_unknown) {
  TrustData data;
  std::vector<Edge> edges;
  read_csv(trust, 2, "truster_id", [&](const std::vector<std::string>& f, std::size_t line) {
    const auto from = users.find(f[0]);
    const auto to = users.find(f[1]);
    if (!from || !to) {
      if (skip_unknown) {
        ++data.unknown_skipped;
        return;
      }
      parse_error(trust, line, "unknown user '" + (from ? f[1] : f[0]) + "'");
    }
    if (*from == *to) {
      ++data.self_loops_dropped;
      return;
    }
    edges.push_back({*from, *to});
  });
  return finish_trust(std::move(edges), users.size(), std::move(data));
}

TrustData ingest_trust(const std::filesystem::path& trust, int user_count) {
  TrustData data;
  std::vector<Edge> edges;
  read_csv(trust, 2, "truster_id", [&](const std::vector<std::string>& f, std::size_t line) {
    const auto from = parse_number<int>(f[0]);
    const auto to = parse_number<int>(f[1]);
    if (!from || *from < 0 || *from >= user_count) parse_error(trust, line, "unknown user '" + f[0] + "'");
    if (!to || *to < 0 || *to >= user_count) parse_error(trust, line, "unknown user '" + f[1] + "'");
    if (*from == *to) {
      ++data.self_loops_dropped;
      return;
    }
    edges.push_back({*from, *to});
  });
  return finish_trust(std::move(edges), user_count, std::move(data));
}

SyntheticDataset generate_synthetic(int users, int items, int categories, std::size_t links, std::uint64_t seed) {
  if (users < 0 || items < 0) fail(ErrorCode::InvalidRequest, "negative dataset size");
  if (categories < 1) fail(ErrorCode::InvalidRequest, "category count must be positive");
  const auto n = static_cast<std::uint64_t>(users);
  const std::uint64_t possible = n < 2 ? 0 : n * (n - 1);
  if (links > possible) {
    fail(ErrorCode::InvalidRequest,
         std::to_string(links) + " links exceed the " + std::to_string(possible) + " ordered pairs available");
  }

  SyntheticDataset out;
  Rng item_rng = Rng::stream(seed, 0, 0, Stream::ItemCategories);
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(items));
  for (auto& s : sets) s = {static_cast<int>(item_rng.below(static_cast<std::uint64_t>(categories)))};
  out.catalog = ItemCatalog(std::move(sets), categories);

  out.initial.users.resize(categories, users);
  for (int i = 0; i < users; ++i) {
    out.initial.users.col(i) =
        init_user_random(derive_seed(seed, static_cast<std::uint64_t>(i), 0, static_cast<std::uint64_t>(Stream::UserInit)),
                         categories);
  }

  // Floyd's sampling of distinct indices in [0, n(n-1)), decoded to (i, j != i).
  Rng link_rng = Rng::stream(seed, 0, 0, Stream::SocialLinks);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(links);
  std::vector<std::uint64_t> order;
  order.reserve(links);
  for (std::uint64_t r = possible - links; r < possible; ++r) {
    const std::uint64_t t = link_rng.below(r + 1);
    const std::uint64_t pick = chosen.insert(t).second ? t : r;
    if (pick == r) chosen.insert(r);
    order.push_back(pick);
  }
  std::vector<Edge> edges;
  edges.reserve(links);
  for (std::uint64_t code : order) {
    const auto i = code / (n - 1);
    auto j = code % (n - 1);
    if (j >= i) ++j;
    edges.push_back({static_cast<int>(i), static_cast<int>(j)});
  }
  out.graph = build_social_graph(edges, users);
  return out;
}

void export_states(const Matrix& users, const std::filesystem::path& path, const std::vector<std::string>& ids) {
  if (!ids.empty() && ids.size() != static_cast<std::size_t>(users.cols())) {
    fail(ErrorCode::InvalidRequest, "id list does not match user count");
  }
  const Matrix unit = normalize_columns(users);
  std::ofstream out = open_out(path);
  out << "user_id";
  for (Eigen::Index o = 0; o < unit.rows(); ++o) out << ",coord_" << o;
  out << '\n';
  for (Eigen::Index i = 0; i < unit.cols(); ++i) {
    out << (ids.empty() ? std::to_string(i) : ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index o = 0; o < unit.rows(); ++o) out << ',' << format_double(unit(o, i));
    out << '\n';
  }
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

StatesFile read_states(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  StatesFile out;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t number = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(t, ',');
    if (f.front() == "user_id") {
      width = f.size() - 1;
      continue;
    }
    if (width == 0) width = f.size() - 1;
    if (f.size() != width + 1 || width == 0) parse_error(path, number, "unexpected field count");
    std::vector<double> row;
    for (std::size_t o = 1; o < f.size(); ++o) {
      const auto x = parse_number<double>(f[o]);
      if (!x) parse_error(path, number, "coordinate '" + f[o] + "' is not numeric");
      row.push_back(*x);
    }
    out.ids.push_back(f[0]);
    rows.push_back(std::move(row));
  }
  out.users.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t o = 0; o < width; ++o) {
      out.users(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) = rows[i][o];
    }
  }
  return out;
}

void write_items(const ItemCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "item_id,category_ids\n";
  for (int j = 0; j < catalog.item_count(); ++j) {
    out << j << ',';
    const auto& cats = catalog.categories(j);
    for (std::size_t r = 0; r < cats.size(); ++r) out << (r ? ";" : "") << cats[r];
    out << '\n';
  }
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

void write_trust(const SocialGraph& graph, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "truster_id,trustee_id\n";
  for (const Edge& e : graph.edges()) out << e.from << ',' << e.to << '\n';
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace echosim
