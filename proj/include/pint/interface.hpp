#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "pint/document.hpp"
#include "pint/error.hpp"
#include "pint/review.hpp"

namespace pint::api {

// Closed set of machine-readable error codes; see docs/API.md.
enum class ErrorCode {
  invalid_request,
  unknown_dataset,
  unknown_session,
  unknown_judge,
  unknown_sample,
  duplicate_judgment,
  wrong_session_kind,
  incomplete_session,
  session_closed,
  corrupt_session,
  internal_error,
};

std::string_view to_string(ErrorCode code);
int http_status(ErrorCode code);

class ApiError : public Error {
 public:
  ApiError(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
      : Error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const nlohmann::json& detail() const { return detail_; }
  nlohmann::ordered_json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

// Maps any exception escaping an operation onto an ApiError.
ApiError to_api_error(const std::exception& e);

// Resolves the data root: the flag if given, else $PINT_DATA_DIR, else "./data".
std::filesystem::path data_root(const std::optional<std::string>& flag);

struct CreateRequest {
  std::string dataset;
  review::SessionKind kind = review::SessionKind::pretrain_rubric;
  std::optional<std::uint64_t> n;  // nullopt means auto
  std::uint64_t seed = 0;
  std::vector<std::string> judges;
  review::Coverage coverage = review::Coverage::every_judge;
};

struct CreateResult {
  std::string id;
  bool created = false;  // false when an existing session was returned
  std::vector<std::string> warnings;
};

// Session persistence rooted at a data directory:
//   datasets/<name>.jsonl              cleaned documents (read-only here)
//   sessions/<id>/session.meta         header, one JSON object
//   sessions/<id>/judgments.log        one judgment per line, append-only
// The log is the source of truth; state is rebuilt by replaying it. A
// truncated final line (a write cut short by a crash) is ignored.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Idempotent per (dataset, kind, seed): the session id is derived from them.
  CreateResult create_session(const CreateRequest& req);

  std::vector<std::string> list_sessions() const;

  nlohmann::ordered_json summary(const std::string& id);
  // {"done": false, "index": i, "sample_id": ..., "document": {...}} or {"done": true, ...}
  nlohmann::ordered_json next_sample(const std::string& id, const std::string& judge);
  // Appends the judgment; returns an acknowledgment with running tallies.
  nlohmann::ordered_json submit_judgment(const std::string& id, review::Judgment judgment);
  nlohmann::ordered_json report(const std::string& id);

  // Replays a session from disk, bypassing the cache.
  review::ReviewSession replay(const std::string& id) const;

  static std::string session_id(const std::string& dataset, review::SessionKind kind, std::uint64_t seed);

 private:
  struct Entry {
    std::shared_mutex mutex;
    std::unique_ptr<review::ReviewSession> session;
    std::map<std::string, Document> documents;  // sampled documents only
    nlohmann::json meta;
  };

  std::shared_ptr<Entry> open(const std::string& id);
  std::filesystem::path dataset_path(const std::string& name) const;
  std::filesystem::path session_dir(const std::string& id) const;
  std::map<std::string, Document> load_samples(const std::string& dataset, const std::vector<std::string>& ids) const;

  std::filesystem::path root_;
  std::mutex entries_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

// Report body shared by the service and the CLI.
nlohmann::ordered_json session_report(const review::ReviewSession& session);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  std::optional<std::filesystem::path> ui_dir;  // static assets, mounted at /
};

// HTTP front end over a SessionStore.
class Service {
 public:
  Service(SessionStore& store, ServeOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the socket; returns the bound port. Throws Error on failure.
  int bind();
  // Serves until stop() is called. Requires bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pint::api
