#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "pint/corpus.hpp"
#include "pint/interface.hpp"
#include "pint/utf8.hpp"

namespace pint::api {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_request: return "invalid_request";
    case ErrorCode::unknown_dataset: return "unknown_dataset";
    case ErrorCode::unknown_session: return "unknown_session";
    case ErrorCode::unknown_judge: return "unknown_judge";
    case ErrorCode::unknown_sample: return "unknown_sample";
    case ErrorCode::duplicate_judgment: return "duplicate_judgment";
    case ErrorCode::wrong_session_kind: return "wrong_session_kind";
    case ErrorCode::incomplete_session: return "incomplete_session";
    case ErrorCode::session_closed: return "session_closed";
    case ErrorCode::corrupt_session: return "corrupt_session";
    case ErrorCode::internal_error: return "internal_error";
  }
  return "internal_error";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_request:
    case ErrorCode::wrong_session_kind: return 400;
    case ErrorCode::unknown_dataset:
    case ErrorCode::unknown_session:
    case ErrorCode::unknown_judge:
    case ErrorCode::unknown_sample: return 404;
    case ErrorCode::duplicate_judgment:
    case ErrorCode::incomplete_session:
    case ErrorCode::session_closed: return 409;
    case ErrorCode::corrupt_session:
    case ErrorCode::internal_error: return 500;
  }
  return 500;
}

ordered_json ApiError::to_json() const {
  ordered_json out;
  out["code"] = to_string(code_);
  out["message"] = what();
  if (!detail_.is_null()) out["detail"] = detail_;
  return out;
}

ApiError to_api_error(const std::exception& e) {
  if (const auto* api = dynamic_cast<const ApiError*>(&e)) return *api;
  if (const auto* r = dynamic_cast<const review::ReviewError*>(&e)) {
    using C = review::ReviewError::Code;
    switch (r->code()) {
      case C::duplicate_judgment: return ApiError(ErrorCode::duplicate_judgment, r->what());
      case C::wrong_session_kind: return ApiError(ErrorCode::wrong_session_kind, r->what());
      case C::unknown_sample: return ApiError(ErrorCode::unknown_sample, r->what());
      case C::unknown_judge: return ApiError(ErrorCode::unknown_judge, r->what());
      case C::incomplete_session: return ApiError(ErrorCode::incomplete_session, r->what());
      case C::session_closed: return ApiError(ErrorCode::session_closed, r->what());
    }
  }
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e))
    return ApiError(ErrorCode::invalid_request, e.what());
  return ApiError(ErrorCode::internal_error, e.what());
}

fs::path data_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("PINT_DATA_DIR"); env && *env) return env;
  return "data";
}

namespace {

bool safe_name(std::string_view s) {
  if (s.empty() || s.front() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
           c == '-';
  });
}

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("write failed: " + path.string() + ": " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void write_file_atomic(const fs::path& path, std::string_view data) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot write " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, data, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

review::SessionHeader header_from_meta(const json& meta) {
  review::SessionHeader h;
  h.id = meta.at("id").get<std::string>();
  h.dataset = meta.at("dataset").get<std::string>();
  auto kind = review::session_kind_from_string(meta.at("kind").get<std::string>());
  if (!kind) throw ParseError("unknown session kind");
  h.kind = *kind;
  h.seed = meta.at("seed").get<std::uint64_t>();
  h.sample_ids = meta.at("sample_ids").get<std::vector<std::string>>();
  h.judges = meta.at("judges").get<std::vector<std::string>>();
  auto coverage = review::coverage_from_string(meta.value("coverage", std::string("every_judge")));
  if (!coverage) throw ParseError("unknown coverage rule");
  h.coverage = *coverage;
  return h;
}

json read_meta(const fs::path& dir, const std::string& id) {
  try {
    return json::parse(read_file(dir / "session.meta"));
  } catch (const std::exception& e) {
    throw ApiError(ErrorCode::corrupt_session, "session '" + id + "': unreadable session.meta: " + e.what());
  }
}

// Drops an unterminated final line left by an interrupted append.
void repair_log(const fs::path& log) {
  if (!fs::exists(log)) return;
  const auto text = read_file(log);
  const auto keep = text.empty() ? 0 : text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
  if (keep != text.size()) fs::resize_file(log, keep);
}

ordered_json document_json(const Document& d) {
  ordered_json out = to_json(d);
  return out;
}

}  // namespace

ordered_json session_report(const review::ReviewSession& session) {
  const auto& h = session.header();
  ordered_json out;
  out["session"] = h.id;
  out["dataset"] = h.dataset;
  out["kind"] = review::to_string(h.kind);
  out["status"] = session.is_complete() ? "complete" : "partial";
  out["progress"] = {{"done", session.samples_done()},
                     {"total", h.sample_ids.size()},
                     {"judgments", session.judgments().size()}};
  if (h.kind == review::SessionKind::pretrain_rubric) {
    const auto score = review::tally_rubric(session);
    ordered_json s;
    s["n"] = score.n;
    s["mean_score"] = score.mean_score;
    s["yes_rates"] = {{"expository", score.yes_rates.expository},
                      {"toxic", score.yes_rates.toxic},
                      {"clean", score.yes_rates.clean}};
    out["score"] = std::move(s);
  } else {
    const auto gate = review::tally_hallucination(session);
    ordered_json g;
    g["decision"] = gate.accept ? "accept" : "reject";
    g["flagged"] = gate.flagged;
    g["reviewed"] = gate.reviewed;
    g["flagged_fraction"] = gate.flagged_fraction();
    out["gate"] = std::move(g);
  }
  return out;
}

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {}

std::string SessionStore::session_id(const std::string& dataset, review::SessionKind kind, std::uint64_t seed) {
  return dataset + "-" + std::string(kind == review::SessionKind::pretrain_rubric ? "rubric" : "finetune") + "-" +
         std::to_string(seed);
}

fs::path SessionStore::dataset_path(const std::string& name) const { return root_ / "datasets" / (name + ".jsonl"); }

fs::path SessionStore::session_dir(const std::string& id) const { return root_ / "sessions" / id; }

CreateResult SessionStore::create_session(const CreateRequest& req) {
  if (!safe_name(req.dataset))
    throw ApiError(ErrorCode::invalid_request, "dataset names may only use letters, digits, '.', '_' and '-'");
  if (req.judges.empty()) throw ApiError(ErrorCode::invalid_request, "at least one judge is required");
  std::set<std::string> unique(req.judges.begin(), req.judges.end());
  if (unique.size() != req.judges.size() || unique.count(""))
    throw ApiError(ErrorCode::invalid_request, "judge ids must be unique and non-empty");

  CreateResult result;
  result.id = session_id(req.dataset, req.kind, req.seed);
  const auto dir = session_dir(result.id);

  std::lock_guard lock(entries_mutex_);
  if (fs::exists(dir / "session.meta")) return result;

  const auto path = dataset_path(req.dataset);
  if (!fs::exists(path))
    throw ApiError(ErrorCode::unknown_dataset, "no dataset '" + req.dataset + "' under " + (root_ / "datasets").string());

  corpus::DatasetSpec spec;
  spec.name = req.dataset;
  spec.inputs = {path};
  spec.order = corpus::Order::file_order;
  auto read = corpus::read_documents(spec);
  if (read.skipped() > 0)
    result.warnings.push_back("skipped " + std::to_string(read.skipped()) + " malformed records in " + path.string());
  if (read.documents.empty())
    throw ApiError(ErrorCode::invalid_request, "dataset '" + req.dataset + "' has no documents");

  std::vector<std::string> population;
  std::optional<std::uint64_t> threshold;
  if (req.kind == review::SessionKind::pretrain_rubric) {
    for (const auto& d : read.documents) population.push_back(d.id);
  } else {
    std::vector<std::uint64_t> lengths;
    lengths.reserve(read.documents.size());
    for (const auto& d : read.documents) lengths.push_back(utf8::length(d.text));
    threshold = review::p95_threshold(lengths);
    for (std::size_t i = 0; i < lengths.size(); ++i)
      if (lengths[i] >= *threshold) population.push_back(read.documents[i].id);
  }

  std::size_t n = population.size();
  if (req.n) {
    n = static_cast<std::size_t>(*req.n);
  } else if (req.kind == review::SessionKind::pretrain_rubric) {
    n = static_cast<std::size_t>(review::required_sample_size({}));
  }
  if (n > population.size()) {
    result.warnings.push_back("requested " + std::to_string(n) + " samples but only " +
                              std::to_string(population.size()) + " are available; using all of them");
  }
  auto sample = review::draw_sample(population, n, req.seed);

  ordered_json meta;
  meta["id"] = result.id;
  meta["dataset"] = req.dataset;
  meta["kind"] = review::to_string(req.kind);
  meta["seed"] = req.seed;
  meta["n_requested"] = req.n ? json(*req.n) : json("auto");
  meta["judges"] = req.judges;
  meta["coverage"] = review::to_string(req.coverage);
  if (threshold) meta["length_threshold"] = *threshold;
  meta["population"] = population.size();
  meta["sample_ids"] = sample;
  meta["created"] = review::utc_now();
  meta["warnings"] = result.warnings;

  review::ReviewSession check(header_from_meta(json(meta)));
  (void)check;

  fs::create_directories(dir);
  if (!fs::exists(dir / "judgments.log")) std::ofstream(dir / "judgments.log", std::ios::binary);
  write_file_atomic(dir / "session.meta", meta.dump() + "\n");
  result.created = true;
  return result;
}

std::vector<std::string> SessionStore::list_sessions() const {
  std::vector<std::string> ids;
  const auto dir = root_ / "sessions";
  if (!fs::exists(dir)) return ids;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "session.meta")) ids.push_back(e.path().filename().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

review::ReviewSession SessionStore::replay(const std::string& id) const {
  if (!safe_name(id)) throw ApiError(ErrorCode::unknown_session, "no session '" + id + "'");
  const auto dir = session_dir(id);
  if (!fs::exists(dir / "session.meta")) throw ApiError(ErrorCode::unknown_session, "no session '" + id + "'");
  const auto meta = read_meta(dir, id);

  std::unique_ptr<review::ReviewSession> session;
  try {
    session = std::make_unique<review::ReviewSession>(header_from_meta(meta));
  } catch (const std::exception& e) {
    throw ApiError(ErrorCode::corrupt_session, "session '" + id + "': bad session.meta: " + e.what());
  }

  const auto log = dir / "judgments.log";
  if (!fs::exists(log)) return std::move(*session);
  const auto text = read_file(log);
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (true) {
    const auto end = text.find('\n', start);
    if (end == std::string::npos) break;  // unterminated tail: interrupted write
    ++lineno;
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      session->record(review::judgment_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ApiError(ErrorCode::corrupt_session,
                     "session '" + id + "': judgments.log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return std::move(*session);
}

std::map<std::string, Document> SessionStore::load_samples(const std::string& dataset,
                                                            const std::vector<std::string>& ids) const {
  std::map<std::string, Document> out;
  const auto path = dataset_path(dataset);
  if (!fs::exists(path)) return out;
  std::set<std::string_view> wanted(ids.begin(), ids.end());
  corpus::DatasetSpec spec;
  spec.name = dataset;
  spec.inputs = {path};
  for (auto& d : corpus::read_documents(spec).documents)
    if (wanted.count(d.id)) out.emplace(d.id, std::move(d));
  return out;
}

std::shared_ptr<SessionStore::Entry> SessionStore::open(const std::string& id) {
  std::lock_guard lock(entries_mutex_);
  if (auto it = entries_.find(id); it != entries_.end()) return it->second;
  if (safe_name(id)) repair_log(session_dir(id) / "judgments.log");
  auto entry = std::make_shared<Entry>();
  entry->session = std::make_unique<review::ReviewSession>(replay(id));
  entry->meta = read_meta(session_dir(id), id);
  entry->documents = load_samples(entry->session->header().dataset, entry->session->header().sample_ids);
  entries_.emplace(id, entry);
  return entry;
}

ordered_json SessionStore::summary(const std::string& id) {
  auto entry = open(id);
  std::shared_lock lock(entry->mutex);
  const auto& s = *entry->session;
  const auto& h = s.header();
  ordered_json out;
  out["id"] = h.id;
  out["dataset"] = h.dataset;
  out["kind"] = review::to_string(h.kind);
  out["seed"] = h.seed;
  out["judges"] = h.judges;
  out["coverage"] = review::to_string(h.coverage);
  out["status"] = s.is_complete() ? "complete" : "open";
  out["progress"] = {{"done", s.samples_done()}, {"total", h.sample_ids.size()}, {"judgments", s.judgments().size()}};
  if (entry->meta.contains("length_threshold")) out["length_threshold"] = entry->meta["length_threshold"];
  out["sample_ids"] = h.sample_ids;
  return out;
}

ordered_json SessionStore::next_sample(const std::string& id, const std::string& judge) {
  auto entry = open(id);
  std::shared_lock lock(entry->mutex);
  const auto& s = *entry->session;
  if (!s.is_judge(judge)) throw ApiError(ErrorCode::unknown_judge, "judge '" + judge + "' is not enrolled in session '" + id + "'");
  ordered_json out;
  const auto index = s.next_for(judge);
  if (!index) {
    out["done"] = true;
    out["status"] = s.is_complete() ? "complete" : "open";
    return out;
  }
  const auto& sample_id = s.header().sample_ids[*index];
  out["done"] = false;
  out["index"] = *index;
  out["total"] = s.header().sample_ids.size();
  out["sample_id"] = sample_id;
  if (auto it = entry->documents.find(sample_id); it != entry->documents.end())
    out["document"] = document_json(it->second);
  else
    out["document"] = nullptr;
  return out;
}

ordered_json SessionStore::submit_judgment(const std::string& id, review::Judgment judgment) {
  auto entry = open(id);
  std::unique_lock lock(entry->mutex);
  auto& s = *entry->session;
  judgment.timestamp = review::utc_now();
  s.check(judgment);

  const auto log = session_dir(id) / "judgments.log";
  const int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot append to " + log.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, review::to_json(judgment).dump() + "\n", log);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fdatasync(fd);
  ::close(fd);

  s.record(judgment);
  ordered_json out;
  out["ok"] = true;
  out["judgment"] = review::to_json(judgment);
  out["tallies"] = session_report(s);
  return out;
}

ordered_json SessionStore::report(const std::string& id) {
  auto entry = open(id);
  std::shared_lock lock(entry->mutex);
  return session_report(*entry->session);
}

}  // namespace pint::api
