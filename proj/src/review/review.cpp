#include <algorithm>
#include <cmath>
#include <ctime>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "pint/review.hpp"

namespace pint::review {

namespace {

// Uniform integer in [0, bound) without modulo bias. std::uniform_int_distribution
// is implementation-defined, which would make samples toolchain-dependent.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::uint64_t required_sample_size(const SamplingParams& params) {
  if (!(params.z > 0.0) || !std::isfinite(params.z)) throw ValidationError("z must be positive");
  if (!(params.p > 0.0 && params.p < 1.0)) throw ValidationError("p must lie in (0, 1)");
  if (!(params.e > 0.0 && params.e <= 1.0)) throw ValidationError("e must lie in (0, 1]");
  const double n = params.z * params.z * params.p * (1.0 - params.p) / (params.e * params.e);
  return static_cast<std::uint64_t>(std::ceil(n));
}

std::vector<std::string> draw_sample(std::span<const std::string> population, std::size_t n, std::uint64_t seed) {
  const std::size_t size = population.size();
  const std::size_t take = std::min(n, size);
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, size - i));
    std::swap(idx[i], idx[j]);
    out.push_back(population[idx[i]]);
  }
  return out;
}

std::string_view to_string(SessionKind kind) {
  return kind == SessionKind::pretrain_rubric ? "pretrain_rubric" : "finetune_hallucination";
}

std::optional<SessionKind> session_kind_from_string(std::string_view s) {
  if (s == "pretrain_rubric") return SessionKind::pretrain_rubric;
  if (s == "finetune_hallucination") return SessionKind::finetune_hallucination;
  return std::nullopt;
}

std::string_view to_string(Coverage coverage) { return coverage == Coverage::every_judge ? "every_judge" : "any_judge"; }

std::optional<Coverage> coverage_from_string(std::string_view s) {
  if (s == "every_judge") return Coverage::every_judge;
  if (s == "any_judge") return Coverage::any_judge;
  return std::nullopt;
}

std::string_view to_string(ReviewError::Code code) {
  switch (code) {
    case ReviewError::Code::duplicate_judgment: return "duplicate_judgment";
    case ReviewError::Code::wrong_session_kind: return "wrong_session_kind";
    case ReviewError::Code::unknown_sample: return "unknown_sample";
    case ReviewError::Code::unknown_judge: return "unknown_judge";
    case ReviewError::Code::incomplete_session: return "incomplete_session";
    case ReviewError::Code::session_closed: return "session_closed";
  }
  return "unknown";
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json to_json(const Judgment& j) {
  nlohmann::ordered_json out;
  out["sample_id"] = j.sample_id;
  out["judge_id"] = j.judge_id;
  if (const auto* r = std::get_if<Rubric>(&j.verdict)) {
    out["expository"] = r->expository;
    out["toxic"] = r->toxic;
    out["clean"] = r->clean;
  } else {
    out["hallucination"] = std::get<Hallucination>(j.verdict).flagged;
  }
  out["timestamp"] = j.timestamp;
  return out;
}

Judgment judgment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("judgment must be an object");
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string() || j[key].get_ref<const std::string&>().empty())
      throw ParseError(std::string("judgment needs a non-empty string '") + key + "'");
    return j[key].get<std::string>();
  };
  auto flag = [&](const char* key) {
    if (!j[key].is_boolean()) throw ParseError(std::string("'") + key + "' must be true or false");
    return j[key].get<bool>();
  };
  Judgment out;
  out.sample_id = str("sample_id");
  out.judge_id = str("judge_id");
  const bool has_rubric = j.contains("expository") || j.contains("toxic") || j.contains("clean");
  const bool has_flag = j.contains("hallucination");
  if (has_rubric && has_flag) throw ParseError("judgment mixes rubric answers with a hallucination flag");
  if (has_flag) {
    out.verdict = Hallucination{flag("hallucination")};
  } else {
    for (const char* key : {"expository", "toxic", "clean"})
      if (!j.contains(key)) throw ParseError(std::string("rubric judgment needs '") + key + "'");
    out.verdict = Rubric{flag("expository"), flag("toxic"), flag("clean")};
  }
  if (j.contains("timestamp")) {
    if (!j["timestamp"].is_string()) throw ParseError("'timestamp' must be a string");
    out.timestamp = j["timestamp"].get<std::string>();
  }
  return out;
}

int score_sample(const Judgment& j) {
  const auto* r = std::get_if<Rubric>(&j.verdict);
  if (!r) throw ReviewError(ReviewError::Code::wrong_session_kind, "hallucination judgments carry no rubric score");
  return 2 * r->expository - 2 * r->toxic + r->clean;
}

// --- ReviewSession ------------------------------------------------------------

ReviewSession::ReviewSession(SessionHeader header) : header_(std::move(header)) {
  if (header_.judges.empty()) throw ValidationError("a session needs at least one judge");
  for (std::size_t i = 0; i < header_.sample_ids.size(); ++i)
    if (!index_.emplace(header_.sample_ids[i], i).second)
      throw ValidationError("duplicate sample id '" + header_.sample_ids[i] + "'");
  for (std::size_t i = 0; i < header_.judges.size(); ++i) {
    if (header_.judges[i].empty()) throw ValidationError("judge ids must not be empty");
    if (!judge_index_.emplace(header_.judges[i], i).second)
      throw ValidationError("duplicate judge '" + header_.judges[i] + "'");
  }
  judged_.assign(header_.judges.size(), std::vector<bool>(header_.sample_ids.size(), false));
  judges_per_sample_.assign(header_.sample_ids.size(), 0);
}

void ReviewSession::check(const Judgment& j) const {
  using Code = ReviewError::Code;
  if (j.kind() != header_.kind)
    throw ReviewError(Code::wrong_session_kind, "session '" + header_.id + "' expects " +
                                                    std::string(to_string(header_.kind)) + " judgments");
  auto judge = judge_index_.find(j.judge_id);
  if (judge == judge_index_.end())
    throw ReviewError(Code::unknown_judge, "judge '" + j.judge_id + "' is not enrolled in session '" + header_.id + "'");
  auto sample = index_.find(j.sample_id);
  if (sample == index_.end())
    throw ReviewError(Code::unknown_sample, "sample '" + j.sample_id + "' is not in session '" + header_.id + "'");
  if (judged_[judge->second][sample->second])
    throw ReviewError(Code::duplicate_judgment,
                      "judge '" + j.judge_id + "' already judged sample '" + j.sample_id + "'");
  if (is_complete()) throw ReviewError(Code::session_closed, "session '" + header_.id + "' is complete");
}

void ReviewSession::record(Judgment j) {
  check(j);
  const auto judge = judge_index_.find(j.judge_id)->second;
  const auto sample = index_.find(j.sample_id)->second;
  judged_[judge][sample] = true;
  ++judges_per_sample_[sample];
  judgments_.push_back(std::move(j));
}

std::size_t ReviewSession::samples_done() const {
  const std::size_t need = header_.coverage == Coverage::every_judge ? header_.judges.size() : 1;
  return static_cast<std::size_t>(
      std::count_if(judges_per_sample_.begin(), judges_per_sample_.end(), [&](std::size_t c) { return c >= need; }));
}

bool ReviewSession::is_complete() const { return samples_done() == header_.sample_ids.size(); }

bool ReviewSession::is_judge(std::string_view judge) const { return judge_index_.find(judge) != judge_index_.end(); }

bool ReviewSession::has_judged(std::string_view judge, std::size_t sample_index) const {
  auto it = judge_index_.find(judge);
  return it != judge_index_.end() && judged_[it->second].at(sample_index);
}

std::optional<std::size_t> ReviewSession::next_for(std::string_view judge) const {
  auto it = judge_index_.find(judge);
  if (it == judge_index_.end())
    throw ReviewError(ReviewError::Code::unknown_judge,
                      "judge '" + std::string(judge) + "' is not enrolled in session '" + header_.id + "'");
  const auto& mine = judged_[it->second];
  const bool shared = header_.coverage == Coverage::any_judge;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i]) continue;
    if (shared && judges_per_sample_[i] > 0) continue;
    return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> ReviewSession::sample_index(std::string_view sample_id) const {
  auto it = index_.find(sample_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<const Judgment*>> ReviewSession::by_sample() const {
  std::vector<std::vector<const Judgment*>> out(header_.sample_ids.size());
  for (const auto& j : judgments_) out[index_.find(j.sample_id)->second].push_back(&j);
  return out;
}

// --- scoring ------------------------------------------------------------------

DatasetScore tally_rubric(const ReviewSession& session) {
  if (session.header().kind != SessionKind::pretrain_rubric)
    throw ReviewError(ReviewError::Code::wrong_session_kind, "session '" + session.header().id + "' is not a rubric session");
  DatasetScore out;
  out.dataset = session.header().dataset;
  double score_sum = 0.0;
  YesRates sums;
  for (const auto& judgments : session.by_sample()) {
    if (judgments.empty()) continue;
    const double k = static_cast<double>(judgments.size());
    double s = 0.0, e = 0.0, t = 0.0, c = 0.0;
    for (const auto* j : judgments) {
      const auto& r = std::get<Rubric>(j->verdict);
      s += score_sample(*j);
      e += r.expository;
      t += r.toxic;
      c += r.clean;
    }
    score_sum += s / k;
    sums.expository += e / k;
    sums.toxic += t / k;
    sums.clean += c / k;
    ++out.n;
  }
  if (out.n > 0) {
    const double n = static_cast<double>(out.n);
    out.mean_score = score_sum / n;
    out.yes_rates = {sums.expository / n, sums.toxic / n, sums.clean / n};
  }
  return out;
}

DatasetScore score_dataset(const ReviewSession& session) {
  if (!session.is_complete())
    throw ReviewError(ReviewError::Code::incomplete_session,
                      "session '" + session.header().id + "' is incomplete: " + std::to_string(session.samples_done()) +
                          "/" + std::to_string(session.header().sample_ids.size()) + " samples judged");
  return tally_rubric(session);
}

Selection select_datasets(std::span<const DatasetScore> scores, const std::map<std::string, std::uint64_t>& token_counts,
                          std::uint64_t role_target) {
  struct Entry {
    const DatasetScore* score;
    std::uint64_t tokens;
  };
  std::vector<Entry> entries;
  std::set<std::string> names;
  for (const auto& s : scores) {
    auto it = token_counts.find(s.dataset);
    if (it == token_counts.end()) throw ValidationError("no token count for dataset '" + s.dataset + "'");
    if (!names.insert(s.dataset).second) throw ValidationError("dataset '" + s.dataset + "' scored twice");
    entries.push_back({&s, it->second});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score->mean_score != b.score->mean_score) return a.score->mean_score > b.score->mean_score;
    if (a.tokens != b.tokens) return a.tokens > b.tokens;
    return a.score->dataset < b.score->dataset;
  });
  Selection out;
  for (const auto& e : entries) {
    if (out.total >= role_target) break;
    out.datasets.push_back(e.score->dataset);
    out.total += e.tokens;
  }
  if (out.total < role_target) out.shortfall = role_target - out.total;
  return out;
}

std::uint64_t p95_threshold(std::span<const std::uint64_t> lengths) {
  if (lengths.empty()) throw ValidationError("percentile of an empty list");
  std::vector<std::uint64_t> sorted(lengths.begin(), lengths.end());
  const std::size_t n = sorted.size();
  const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n), exact
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

GateResult gate_decision(std::size_t flagged, std::size_t reviewed) {
  if (flagged > reviewed) throw ValidationError("more samples flagged than reviewed");
  return GateResult{10 * flagged <= reviewed, flagged, reviewed};
}

GateResult tally_hallucination(const ReviewSession& session) {
  if (session.header().kind != SessionKind::finetune_hallucination)
    throw ReviewError(ReviewError::Code::wrong_session_kind,
                      "session '" + session.header().id + "' is not a hallucination session");
  std::size_t flagged = 0, reviewed = 0;
  for (const auto& judgments : session.by_sample()) {
    if (judgments.empty()) continue;
    ++reviewed;
    if (std::any_of(judgments.begin(), judgments.end(),
                    [](const Judgment* j) { return std::get<Hallucination>(j->verdict).flagged; }))
      ++flagged;
  }
  return gate_decision(flagged, reviewed);
}

GateResult finetune_gate(const ReviewSession& session) {
  if (!session.is_complete())
    throw ReviewError(ReviewError::Code::incomplete_session,
                      "session '" + session.header().id + "' is incomplete: " + std::to_string(session.samples_done()) +
                          "/" + std::to_string(session.header().sample_ids.size()) + " samples judged");
  return tally_hallucination(session);
}

}  // namespace pint::review
