#include <cmath>
#include <fstream>
#include <sstream>

#include "pint/lines.hpp"
#include "pint/mix.hpp"
#include "pint/percent.hpp"
#include "pint/review.hpp"

namespace pint::mix {

MixPlan plan_mix(const std::map<std::string, Available>& available, const std::map<Role, double>& targets,
                 std::uint64_t total) {
  double sum = 0.0;
  for (const auto& [role, fraction] : targets) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
      throw ValidationError("target fraction for " + std::string(corpus::to_string(role)) + " must lie in [0, 1]");
    sum += fraction;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "target proportions sum to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }

  MixPlan plan;
  for (const auto& [role, fraction] : targets) {
    const auto budget = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(total)));
    plan.role_budgets[role] = budget;

    std::vector<review::DatasetScore> scores;
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [name, a] : available) {
      if (a.role != role) continue;
      review::DatasetScore s;
      s.dataset = name;
      s.mean_score = a.score;
      scores.push_back(std::move(s));
      counts[name] = a.tokens;
    }
    const auto selection = review::select_datasets(scores, counts, budget);
    for (const auto& name : selection.datasets) plan.allocations[name] = counts.at(name);
    plan.role_totals[role] = selection.total;
    plan.grand_total += selection.total;
    if (selection.shortfall > 0) {
      plan.warnings.push_back(std::string(corpus::to_string(role)) + ": short by " +
                              std::to_string(selection.shortfall) + " tokens (budget " + std::to_string(budget) +
                              ", available " + std::to_string(selection.total) + ")");
    }
  }
  for (const auto& [role, tokens] : plan.role_totals)
    plan.realized_proportions[role] =
        plan.grand_total ? static_cast<double>(tokens) / static_cast<double>(plan.grand_total) : 0.0;
  return plan;
}

std::string ProportionRow::percent() const { return format_hundredths(hundredths); }

ProportionReport report_proportions(const std::vector<std::pair<std::string, std::uint64_t>>& counts,
                                    const std::map<std::string, Role>& roles) {
  ProportionReport report;
  for (const auto& [name, tokens] : counts) {
    if (tokens > static_cast<std::uint64_t>(INT64_MAX) - report.grand_total) throw ValidationError("token total overflows");
    report.grand_total += tokens;
  }
  if (report.grand_total == 0) throw ValidationError("all token counts are zero");
  const auto total = static_cast<std::int64_t>(report.grand_total);

  std::map<Role, std::uint64_t> by_role;
  for (const auto& [name, tokens] : counts) {
    report.datasets.push_back({name, tokens, percent_hundredths(static_cast<std::int64_t>(tokens), total)});
    if (auto it = roles.find(name); it != roles.end()) by_role[it->second] += tokens;
  }
  for (const auto& [role, tokens] : by_role)
    report.roles.push_back(
        {std::string(corpus::to_string(role)), tokens, percent_hundredths(static_cast<std::int64_t>(tokens), total)});
  return report;
}

std::string format_report(const ProportionReport& report) {
  std::size_t width = 7;
  for (const auto& r : report.datasets) width = std::max(width, r.name.size());
  for (const auto& r : report.roles) width = std::max(width, r.name.size());
  std::ostringstream out;
  auto row = [&](const std::string& name, std::uint64_t tokens, const std::string& pct) {
    out << name << std::string(width + 2 - name.size(), ' ') << tokens;
    const auto digits = std::to_string(tokens).size();
    out << std::string(digits < 16 ? 16 - digits : 1, ' ') << pct << '\n';
  };
  for (const auto& r : report.datasets) row(r.name, r.tokens, r.percent());
  if (!report.roles.empty()) {
    out << '\n';
    for (const auto& r : report.roles) row(r.name, r.tokens, r.percent());
  }
  out << '\n';
  row("total", report.grand_total, "100.00");
  return out.str();
}

std::vector<CountRecord> read_counts(const std::filesystem::path& path) {
  std::vector<CountRecord> out;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    if (is_blank(line)) return;
    auto where = [&] { return path.string() + ":" + std::to_string(lineno) + ": "; };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where() + e.what());
    }
    if (!j.is_object() || !j.contains("dataset") || !j["dataset"].is_string())
      throw ParseError(where() + "record needs a string 'dataset'");
    if (!j.contains("tokens") || !j["tokens"].is_number_unsigned())
      throw ParseError(where() + "record needs a non-negative integer 'tokens'");
    CountRecord r{j["dataset"].get<std::string>(), j["tokens"].get<std::uint64_t>(), 0.0};
    if (j.contains("score")) {
      if (!j["score"].is_number()) throw ParseError(where() + "'score' must be a number");
      r.score = j["score"].get<double>();
    }
    out.push_back(std::move(r));
  });
  return out;
}

void write_plan(const MixPlan& plan, const std::map<std::string, Available>& available,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [name, tokens] : plan.allocations) {
    nlohmann::ordered_json j;
    j["dataset"] = name;
    j["role"] = corpus::to_string(available.at(name).role);
    j["tokens"] = tokens;
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["grand_total"] = plan.grand_total;
  for (const auto& [role, tokens] : plan.role_totals) {
    summary["roles"][std::string(corpus::to_string(role))] = {
        {"budget", plan.role_budgets.at(role)},
        {"tokens", tokens},
        {"proportion", plan.realized_proportions.at(role)}};
  }
  summary["warnings"] = plan.warnings;
  out << summary.dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace pint::mix
