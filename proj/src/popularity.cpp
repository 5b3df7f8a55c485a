#include "roadpop/popularity.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <tuple>

namespace roadpop {

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::global: return "global";
    case Scope::p1: return "P1";
    case Scope::p2: return "P2";
    case Scope::p3: return "P3";
    case Scope::p4: return "P4";
    case Scope::p5: return "P5";
  }
  return "?";
}

std::optional<Scope> parse_scope(std::string_view s) {
  for (auto sc : kScopes) {
    if (to_string(sc) == s) return sc;
  }
  return std::nullopt;
}

std::optional<Scope> scope_of(Period p) {
  switch (p) {
    case Period::p1: return Scope::p1;
    case Period::p2: return Scope::p2;
    case Period::p3: return Scope::p3;
    case Period::p4: return Scope::p4;
    case Period::p5: return Scope::p5;
    case Period::crossing: break;
  }
  return std::nullopt;
}

void UsageTable::add(const std::string& segment_id, const std::string& user_id, std::int64_t n) {
  if (n <= 0) return;
  counts[segment_id][user_id] += n;
}

void UsageTable::merge(const UsageTable& other) {
  if (other.scope != scope || other.kind != kind) {
    throw std::invalid_argument("cannot merge usage tables of different scope or kind");
  }
  for (const auto& [seg, users] : other.counts) {
    auto& mine = counts[seg];
    for (const auto& [user, n] : users) mine[user] += n;
  }
}

UsageTables::UsageTables() {
  for (auto k : kActivityKinds) {
    for (auto s : kScopes) {
      auto& t = tables_[slot(s, k)];
      t.scope = s;
      t.kind = k;
    }
  }
}

void UsageTables::add(const ActivityUsage& a) {
  std::vector<std::reference_wrapper<const std::string>> distinct(a.traversed.begin(), a.traversed.end());
  std::sort(distinct.begin(), distinct.end(), std::less<const std::string&>{});
  distinct.erase(std::unique(distinct.begin(), distinct.end(),
                             [](const std::string& x, const std::string& y) { return x == y; }),
                 distinct.end());
  auto& global = table(Scope::global, a.kind);
  const auto period_scope = scope_of(a.period);
  for (const std::string& seg : distinct) {
    global.add(seg, a.user_id);
    if (period_scope) table(*period_scope, a.kind).add(seg, a.user_id);
  }
}

void UsageTables::merge(const UsageTables& other) {
  for (std::size_t i = 0; i < tables_.size(); ++i) tables_[i].merge(other.tables_[i]);
}

UsageTables accumulate(std::span<const ActivityUsage> activities) {
  UsageTables out;
  for (const auto& a : activities) out.add(a);
  return out;
}

std::int64_t p_index(std::span<const std::int64_t> counts) {
  std::vector<std::int64_t> sorted(counts.begin(), counts.end());
  for (auto n : sorted) {
    if (n <= 0) throw std::invalid_argument("p_index: activity counts must be >= 1");
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>{});
  std::int64_t h = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto rank = static_cast<std::int64_t>(i + 1);
    // Past the first N_i < i, min(N_i, i) = N_i <= i - 1, so it never beats h.
    if (sorted[i] < rank) break;
    h = rank;
  }
  return h;
}

std::vector<PopularityScore> evaluate(const UsageTable& table) {
  std::vector<PopularityScore> out;
  out.reserve(table.counts.size());
  std::vector<std::int64_t> buf;
  for (const auto& [seg, users] : table.counts) {
    if (users.empty()) continue;
    buf.clear();
    std::int64_t total = 0;
    for (const auto& [user, n] : users) {
      buf.push_back(n);
      total += n;
    }
    out.push_back({seg, table.scope, table.kind, p_index(buf), static_cast<std::int64_t>(users.size()), total});
  }
  return out;
}

std::vector<PopularityScore> evaluate(const UsageTables& tables) {
  std::vector<PopularityScore> out;
  for (const auto& t : tables.all()) {
    auto part = evaluate(t);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  std::sort(out.begin(), out.end(), [](const PopularityScore& a, const PopularityScore& b) {
    return std::forward_as_tuple(to_string(a.kind), to_string(a.scope), a.segment_id) <
           std::forward_as_tuple(to_string(b.kind), to_string(b.scope), b.segment_id);
  });
  return out;
}

}  // namespace roadpop
