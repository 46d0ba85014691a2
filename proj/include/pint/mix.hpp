#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pint/corpus.hpp"

namespace pint::mix {

using corpus::Role;

struct Available {
  Role role = Role::web;
  std::uint64_t tokens = 0;
  double score = 0.0;  // review mean score; ranks datasets within a role
};

struct MixPlan {
  std::map<std::string, std::uint64_t> allocations;  // selected datasets only
  std::map<Role, std::uint64_t> role_budgets;
  std::map<Role, std::uint64_t> role_totals;
  std::uint64_t grand_total = 0;
  std::map<Role, double> realized_proportions;
  std::vector<std::string> warnings;  // role shortfalls
};

// Per-role budget is llround(fraction * total); datasets are chosen whole by
// review::select_datasets. Shortfalls are reported, never renormalized.
MixPlan plan_mix(const std::map<std::string, Available>& available, const std::map<Role, double>& targets,
                 std::uint64_t total);

struct ProportionRow {
  std::string name;
  std::uint64_t tokens = 0;
  std::int64_t hundredths = 0;  // percent * 100, rounded half up

  std::string percent() const;
};

struct ProportionReport {
  std::vector<ProportionRow> datasets;  // input order
  std::vector<ProportionRow> roles;     // per-role subtotals, when roles are given
  std::uint64_t grand_total = 0;
};

// 100 * tokens / grand_total to two decimals, half-up. `roles` is optional;
// datasets missing from it are left out of the role rows.
ProportionReport report_proportions(const std::vector<std::pair<std::string, std::uint64_t>>& counts,
                                    const std::map<std::string, Role>& roles = {});

std::string format_report(const ProportionReport& report);

// Counts file: one JSON object per line, {"dataset": ..., "tokens": ...,
// "score": ...}; score is optional (0 when absent).
struct CountRecord {
  std::string dataset;
  std::uint64_t tokens = 0;
  double score = 0.0;
};
std::vector<CountRecord> read_counts(const std::filesystem::path& path);

// Plan file: one allocation per line, then a trailing summary line.
void write_plan(const MixPlan& plan, const std::map<std::string, Available>& available,
                const std::filesystem::path& path);

}  // namespace pint::mix
