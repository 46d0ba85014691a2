#include <httplib.h>

#include "pint/interface.hpp"

namespace pint::api {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", kJson);
}

void send_error(httplib::Response& res, const ApiError& e) { send(res, http_status(e.code()), e.to_json()); }

json parse_body(const httplib::Request& req) {
  try {
    auto body = json::parse(req.body);
    if (!body.is_object()) throw ApiError(ErrorCode::invalid_request, "request body must be a JSON object");
    return body;
  } catch (const json::exception& e) {
    throw ApiError(ErrorCode::invalid_request, std::string("request body is not valid JSON: ") + e.what());
  }
}

CreateRequest create_request(const json& body) {
  CreateRequest req;
  try {
    req.dataset = body.at("dataset").get<std::string>();
    if (body.contains("kind")) {
      auto kind = review::session_kind_from_string(body["kind"].get<std::string>());
      if (!kind) throw ApiError(ErrorCode::invalid_request, "kind must be pretrain_rubric or finetune_hallucination");
      req.kind = *kind;
    }
    if (body.contains("n") && !(body["n"].is_string() && body["n"] == "auto")) {
      if (!body["n"].is_number_unsigned()) throw ApiError(ErrorCode::invalid_request, "n must be \"auto\" or a non-negative integer");
      req.n = body["n"].get<std::uint64_t>();
    }
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned()) throw ApiError(ErrorCode::invalid_request, "seed must be a non-negative integer");
      req.seed = body["seed"].get<std::uint64_t>();
    }
    req.judges = body.at("judges").get<std::vector<std::string>>();
    if (body.contains("coverage")) {
      auto coverage = review::coverage_from_string(body["coverage"].get<std::string>());
      if (!coverage) throw ApiError(ErrorCode::invalid_request, "coverage must be every_judge or any_judge");
      req.coverage = *coverage;
    }
  } catch (const json::exception& e) {
    throw ApiError(ErrorCode::invalid_request, std::string("bad session request: ") + e.what());
  }
  return req;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const std::exception& e) {
      send_error(res, to_api_error(e));
    }
  };
}

}  // namespace

struct Service::Impl {
  SessionStore& store;
  ServeOptions options;
  httplib::Server server;
  int port = -1;

  Impl(SessionStore& s, ServeOptions o) : store(s), options(std::move(o)) {}

  void routes() {
    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto result = store.create_session(create_request(parse_body(req)));
      ordered_json body;
      body["id"] = result.id;
      body["created"] = result.created;
      body["warnings"] = result.warnings;
      body["session"] = store.summary(result.id);
      send(res, result.created ? 201 : 200, body);
    }));

    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      ordered_json list = ordered_json::array();
      for (const auto& id : store.list_sessions()) {
        try {
          auto s = store.summary(id);
          s.erase("sample_ids");
          list.push_back(std::move(s));
        } catch (const ApiError& e) {
          list.push_back({{"id", id}, {"error", e.to_json()}});
        }
      }
      send(res, 200, {{"sessions", list}});
    }));

    server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, store.summary(req.matches[1]));
    }));

    server.Get(R"(/sessions/([^/]+)/next)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("judge")) throw ApiError(ErrorCode::invalid_request, "missing query parameter 'judge'");
      send(res, 200, store.next_sample(req.matches[1], req.get_param_value("judge")));
    }));

    server.Post(R"(/sessions/([^/]+)/judgments)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto judgment = review::judgment_from_json(parse_body(req));
      send(res, 201, store.submit_judgment(req.matches[1], std::move(judgment)));
    }));

    server.Get(R"(/sessions/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, store.report(req.matches[1]));
    }));

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, to_api_error(e));
      } catch (...) {
        send_error(res, ApiError(ErrorCode::internal_error, "unknown failure"));
      }
    });

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const int status = res.status;
      send_error(res, ApiError(ErrorCode::invalid_request, "no route for " + req.method + " " + req.path));
      res.status = status;
    });

    if (options.ui_dir && !server.set_mount_point("/", options.ui_dir->string()))
      throw Error("UI directory not found: " + options.ui_dir->string());
  }
};

Service::Service(SessionStore& store, ServeOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->routes();
}

Service::~Service() = default;

int Service::bind() {
  if (impl_->options.port == 0)
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
  else
    impl_->port = impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
  if (impl_->port < 0)
    throw Error("cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  return impl_->port;
}

void Service::run() {
  if (impl_->port < 0) throw Error("Service::run called before bind");
  impl_->server.listen_after_bind();
}

void Service::stop() { impl_->server.stop(); }

}  // namespace pint::api
