#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include <json.hpp>

#include "rts/error.hpp"
#include "rts/ranker.hpp"
#include "rts/session.hpp"
#include "rts/store.hpp"
#include "rts/verification.hpp"

namespace rts {

struct ServiceConfig {
  std::string listen = "127.0.0.1";
  int port = 8080;
  std::string store_dir = "rts-store";
  std::string ui_dir;  // static assets mounted under /ui when set
  AdequacyThresholds thresholds;
  TrainConfig train;
  int max_iterations = kDefaultMaxIterations;
  std::size_t max_body_bytes = 16u << 20;

  void validate() const;
};

ServiceConfig service_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ServiceConfig& c);

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string actor;  // optional, from the X-Actor header
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

// HTTP status used for an error code.
int http_status(ErrorCode code);

// The selection export document of an accepted session.
nlohmann::json build_export(const Session& s);

// Routes API requests onto the core modules and the session state machine.
// Holds no state besides the stores on disk, so instances are
// interchangeable across restarts. Each mutating request claims its session,
// applies exactly one transition event and persists the result.
class Service {
 public:
  explicit Service(ServiceConfig config);

  HttpResponse handle(const HttpRequest& req);
  const ServiceConfig& config() const { return config_; }

 private:
  HttpResponse dispatch(const HttpRequest& req);
  HttpResponse create_session(const HttpRequest& req, const nlohmann::json& body);
  HttpResponse session_route(const HttpRequest& req, const std::string& id,
                             const std::string& action, const nlohmann::json& body);
  Session mutate(const std::string& id, const HttpRequest& req,
                 const std::function<Event(const Session&)>& make_event);
  std::string fresh_session_id(const std::string& dataset_id);

  ServiceConfig config_;
  SessionStore sessions_;
  DatasetStore datasets_;
  std::atomic<std::uint64_t> counter_{0};
};

nlohmann::json session_summary(const Session& s);

}  // namespace rts
