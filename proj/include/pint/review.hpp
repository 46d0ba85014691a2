#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pint/error.hpp"

namespace pint::review {

struct SamplingParams {
  double z = 1.96;  // confidence Z-value
  double p = 0.5;   // estimated proportion
  double e = 0.05;  // margin of error
};

// ceil(z^2 p (1-p) / e^2). Throws ValidationError on out-of-range params.
std::uint64_t required_sample_size(const SamplingParams& params);

// Uniform sample without replacement of min(n, |population|) ids, in draw
// order. Partial Fisher-Yates driven by mt19937_64 with rejection sampling,
// so the output depends only on (population order, n, seed).
std::vector<std::string> draw_sample(std::span<const std::string> population, std::size_t n, std::uint64_t seed);

enum class SessionKind { pretrain_rubric, finetune_hallucination };

std::string_view to_string(SessionKind kind);
std::optional<SessionKind> session_kind_from_string(std::string_view s);

// With several judges, `every_judge` needs each judge on each sample;
// `any_judge` lets judges split the sample.
enum class Coverage { every_judge, any_judge };

std::string_view to_string(Coverage coverage);
std::optional<Coverage> coverage_from_string(std::string_view s);

struct Rubric {
  bool expository = false;
  bool toxic = false;
  bool clean = false;

  bool operator==(const Rubric&) const = default;
};

struct Hallucination {
  bool flagged = false;

  bool operator==(const Hallucination&) const = default;
};

struct Judgment {
  std::string sample_id;
  std::string judge_id;
  std::variant<Rubric, Hallucination> verdict;
  std::string timestamp;  // UTC, e.g. 2024-05-01T12:00:00Z

  SessionKind kind() const {
    return std::holds_alternative<Rubric>(verdict) ? SessionKind::pretrain_rubric : SessionKind::finetune_hallucination;
  }
  bool operator==(const Judgment&) const = default;
};

// Current UTC time in the Judgment timestamp format.
std::string utc_now();

nlohmann::ordered_json to_json(const Judgment& j);
Judgment judgment_from_json(const nlohmann::json& j);

class ReviewError : public Error {
 public:
  enum class Code { duplicate_judgment, wrong_session_kind, unknown_sample, unknown_judge, incomplete_session, session_closed };

  ReviewError(Code code, const std::string& message) : Error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view to_string(ReviewError::Code code);

// 2*expository - 2*toxic + clean. Throws ReviewError(wrong_session_kind) for
// hallucination judgments.
int score_sample(const Judgment& j);

struct SessionHeader {
  std::string id;
  std::string dataset;
  SessionKind kind = SessionKind::pretrain_rubric;
  std::uint64_t seed = 0;
  std::vector<std::string> sample_ids;
  std::vector<std::string> judges;
  Coverage coverage = Coverage::every_judge;
};

// In-memory session state: a header plus an append-only judgment list.
class ReviewSession {
 public:
  // Throws ValidationError for duplicate sample ids, duplicate judges or no judges.
  explicit ReviewSession(SessionHeader header);

  const SessionHeader& header() const { return header_; }
  const std::vector<Judgment>& judgments() const { return judgments_; }

  // Throws ReviewError when the judgment does not fit the session. The
  // session is left untouched in that case.
  void check(const Judgment& j) const;
  void record(Judgment j);

  bool is_complete() const;
  // Samples whose coverage requirement is met.
  std::size_t samples_done() const;
  bool has_judged(std::string_view judge, std::size_t sample_index) const;
  // Lowest sample index `judge` has not judged; nullopt when none remain.
  std::optional<std::size_t> next_for(std::string_view judge) const;
  bool is_judge(std::string_view judge) const;
  std::optional<std::size_t> sample_index(std::string_view sample_id) const;

  // Judgments grouped by sample index, in recording order.
  std::vector<std::vector<const Judgment*>> by_sample() const;

 private:
  SessionHeader header_;
  std::vector<Judgment> judgments_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::size_t, std::less<>> judge_index_;
  // judged_[judge][sample]
  std::vector<std::vector<bool>> judged_;
  std::vector<std::size_t> judges_per_sample_;
};

struct YesRates {
  double expository = 0.0;
  double toxic = 0.0;
  double clean = 0.0;
};

struct DatasetScore {
  std::string dataset;
  std::size_t n = 0;  // samples scored
  double mean_score = 0.0;
  YesRates yes_rates;
};

// Per-sample mean over its judgments, then mean over samples. Samples with no
// judgments are ignored, so this also serves as a running tally.
DatasetScore tally_rubric(const ReviewSession& session);

// Requires a complete rubric session.
DatasetScore score_dataset(const ReviewSession& session);

struct Selection {
  std::vector<std::string> datasets;  // in selection order
  std::uint64_t total = 0;
  std::uint64_t shortfall = 0;  // role_target - total when everything was taken
};

// Highest score first (ties: more tokens, then name); whole datasets until the
// cumulative count reaches role_target, the crossing dataset included.
Selection select_datasets(std::span<const DatasetScore> scores, const std::map<std::string, std::uint64_t>& token_counts,
                          std::uint64_t role_target);

// Nearest-rank 95th percentile: sorted ascending, the value at 1-based index
// ceil(0.95 n).
std::uint64_t p95_threshold(std::span<const std::uint64_t> lengths);

struct GateResult {
  bool accept = true;
  std::size_t flagged = 0;
  std::size_t reviewed = 0;

  double flagged_fraction() const { return reviewed ? static_cast<double>(flagged) / static_cast<double>(reviewed) : 0.0; }
};

// Reject iff 10 * flagged > reviewed.
GateResult gate_decision(std::size_t flagged, std::size_t reviewed);

// A sample counts as flagged when any of its judges flagged it. Samples with
// no judgments are ignored.
GateResult tally_hallucination(const ReviewSession& session);

// Requires a complete fine-tune session.
GateResult finetune_gate(const ReviewSession& session);

}  // namespace pint::review
