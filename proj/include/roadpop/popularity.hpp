#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roadpop/tracks.hpp"

namespace roadpop {

/// Aggregation scope: the whole day or one of the five periods.
enum class Scope { global, p1, p2, p3, p4, p5 };
inline constexpr std::array<Scope, 6> kScopes{Scope::global, Scope::p1, Scope::p2,
                                              Scope::p3,     Scope::p4, Scope::p5};

std::string_view to_string(Scope s);
std::optional<Scope> parse_scope(std::string_view s);
/// Scope of a non-crossing period; nullopt for crossing.
std::optional<Scope> scope_of(Period p);

/// What one matched activity contributes to the tables.
struct ActivityUsage {
  std::string user_id;
  ActivityKind kind = ActivityKind::walk_run;
  Period period = Period::crossing;
  std::vector<std::string> traversed;  // segment ids, may repeat non-consecutively
};

/// segment id -> (user id -> number of activities), zero entries absent.
struct UsageTable {
  using UserCounts = std::map<std::string, std::int64_t>;

  Scope scope = Scope::global;
  ActivityKind kind = ActivityKind::walk_run;
  std::map<std::string, UserCounts> counts;

  void add(const std::string& segment_id, const std::string& user_id, std::int64_t n = 1);
  /// Pointwise sum. Tables must share scope and kind.
  void merge(const UsageTable& other);

  friend bool operator==(const UsageTable&, const UsageTable&) = default;
};

/// One UsageTable per (scope, kind).
class UsageTables {
 public:
  UsageTables();

  UsageTable& table(Scope s, ActivityKind k) { return tables_[slot(s, k)]; }
  const UsageTable& table(Scope s, ActivityKind k) const { return tables_[slot(s, k)]; }
  std::span<const UsageTable> all() const { return tables_; }

  /// Each distinct segment of the activity adds 1 for its user, in the
  /// global table and, unless crossing, in its period's table.
  void add(const ActivityUsage& a);
  void merge(const UsageTables& other);

  friend bool operator==(const UsageTables&, const UsageTables&) = default;

 private:
  static std::size_t slot(Scope s, ActivityKind k) {
    return static_cast<std::size_t>(k) * kScopes.size() + static_cast<std::size_t>(s);
  }
  std::array<UsageTable, kScopes.size() * kActivityKinds.size()> tables_;
};

UsageTables accumulate(std::span<const ActivityUsage> activities);

/// max over i of min(N_i, i) with N sorted descending (1-based i): the
/// largest h such that h users each used the segment at least h times.
/// Empty input gives 0; throws std::invalid_argument for a count <= 0.
std::int64_t p_index(std::span<const std::int64_t> counts);

struct PopularityScore {
  std::string segment_id;
  Scope scope = Scope::global;
  ActivityKind kind = ActivityKind::walk_run;
  std::int64_t p_index = 0;
  std::int64_t user_count = 0;
  std::int64_t activity_count = 0;

  friend bool operator==(const PopularityScore&, const PopularityScore&) = default;
};

std::vector<PopularityScore> evaluate(const UsageTable& table);

/// Scores for every non-empty (segment, scope, kind), sorted by the byte
/// order of (kind name, scope name, segment id).
std::vector<PopularityScore> evaluate(const UsageTables& tables);

}  // namespace roadpop
