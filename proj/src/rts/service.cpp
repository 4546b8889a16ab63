#include "rts/service.hpp"

#include <random>
#include <sstream>

#include "rts/error.hpp"
#include "rts/features.hpp"
#include "rts/serialize.hpp"
#include "rts/validation.hpp"

namespace rts {

using nlohmann::json;

void ServiceConfig::validate() const {
  thresholds.validate();
  train.validate();
  if (port < 0 || port > 65535) fail(ErrorCode::InvalidArgument, "port out of range");
  if (max_iterations < 0) fail(ErrorCode::InvalidArgument, "max_iterations must be >= 0");
  if (max_body_bytes == 0) fail(ErrorCode::InvalidArgument, "max_body_bytes must be positive");
  if (store_dir.empty()) fail(ErrorCode::InvalidArgument, "store_dir must not be empty");
}

ServiceConfig service_config_from_json(const json& j) {
  ServiceConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "service config must be a JSON object");
  try {
    c.listen = j.value("listen", c.listen);
    c.port = j.value("port", c.port);
    c.store_dir = j.value("store_dir", c.store_dir);
    c.ui_dir = j.value("ui_dir", c.ui_dir);
    c.thresholds.adequate = j.value("tau_adequate", c.thresholds.adequate);
    c.thresholds.marginal = j.value("tau_marginal", c.thresholds.marginal);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.max_body_bytes = j.value("max_body_bytes", c.max_body_bytes);
    if (auto it = j.find("train"); it != j.end()) c.train = train_config_from_json(*it, c.train);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("service config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const ServiceConfig& c) {
  return {{"listen", c.listen},
          {"port", c.port},
          {"store_dir", c.store_dir},
          {"ui_dir", c.ui_dir},
          {"tau_adequate", c.thresholds.adequate},
          {"tau_marginal", c.thresholds.marginal},
          {"max_iterations", c.max_iterations},
          {"max_body_bytes", c.max_body_bytes},
          {"train", to_json(c.train)}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::IllegalTransition:
    case ErrorCode::Conflict:
    case ErrorCode::IterationLimit:
    case ErrorCode::CutoffOutsideInterval:
    case ErrorCode::InadequateRanking:
      return 409;
    case ErrorCode::StoreCorrupt:
    case ErrorCode::IoError:
      return 500;
    default:
      return 400;
  }
}

json build_export(const Session& s) {
  if (!s.selection || !s.suite) {
    fail(ErrorCode::IllegalTransition, "session '" + s.id + "' has no accepted selection");
  }
  json ranked = json::array();
  for (const auto& e : s.suite->entries) {
    ranked.push_back({{"rank", e.rank},
                      {"test_id", e.test_id},
                      {"score", round9(e.score)},
                      {"selected", e.rank <= s.selection->cutoff_rank}});
  }
  json adequacy = nullptr;
  if (!s.reports.empty()) {
    adequacy = {{"pair_overlap", s.reports.back().pair_overlap},
                {"verdict", to_string(s.reports.back().verdict)}};
  }
  return {{"release", s.scope ? s.scope->target_release : std::string()},
          {"session_id", s.id},
          {"ranked", std::move(ranked)},
          {"cutoff_rank", s.selection->cutoff_rank},
          {"t_e_test_id", s.selection->t_e_test_id},
          {"override_used", s.selection->override_used},
          {"adequacy", std::move(adequacy)}};
}

json session_summary(const Session& s) {
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  return {{"session_id", s.id},
          {"state", to_string(s.state)},
          {"dataset_id", s.dataset_ref},
          {"scope", s.scope ? to_json(*s.scope) : json(nullptr)},
          {"iteration", s.iteration},
          {"max_iterations", s.max_iterations},
          {"labels",
           {{"training_in", s.labels.count(Role::Training, Label::In)},
            {"training_out", s.labels.count(Role::Training, Label::Out)},
            {"verification_in", s.labels.count(Role::Verification, Label::In)},
            {"verification_out", s.labels.count(Role::Verification, Label::Out)}}},
          {"reports", std::move(reports)},
          {"available_decisions", available_decisions(s)},
          {"audit_length", s.audit.size()}};
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)), sessions_(config_.store_dir), datasets_(config_.store_dir) {
  config_.validate();
}

namespace {

HttpResponse error_response(ErrorCode code, const std::string& message) {
  return {http_status(code), {{"code", to_string(code)}, {"message", message}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

void require_state_allows(const Session& s, EventKind event) {
  if (!next_state(s.state, event)) {
    fail(ErrorCode::IllegalTransition, "event " + std::string(to_string(event)) +
                                           " is not allowed in state " +
                                           std::string(to_string(s.state)));
  }
}

json ranking_payload(const Session& s) {
  if (!s.suite) fail(ErrorCode::IllegalTransition, "session '" + s.id + "' has no ranking yet");
  json overlay = json::array();
  for (const auto& e : s.suite->entries) {
    const LabelEntry* l = s.labels.find(e.test_id);
    if (l && l->role == Role::Verification) {
      overlay.push_back({{"rank", e.rank}, {"test_id", e.test_id}, {"label", to_string(l->label)}});
    }
  }
  return {{"session_id", s.id},
          {"ranked", suite_to_api_json(*s.suite)},
          {"overlay", std::move(overlay)},
          {"draw", s.draw ? to_json(*s.draw) : json(nullptr)}};
}

json adequacy_payload(const Session& s) {
  json out = to_json(s.reports.back());
  out["iteration"] = s.iteration;
  out["available_decisions"] = available_decisions(s);
  return out;
}

}  // namespace

HttpResponse Service::handle(const HttpRequest& req) {
  if (req.body.size() > config_.max_body_bytes) {
    return {413,
            {{"code", "PayloadTooLarge"},
             {"message", "request body exceeds " + std::to_string(config_.max_body_bytes) +
                             " bytes"}}};
  }
  try {
    return dispatch(req);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(ErrorCode::PayloadInvalid, e.what());
  } catch (const std::exception& e) {
    return {500, {{"code", "Internal"}, {"message", e.what()}}};
  }
}

Session Service::mutate(const std::string& id, const HttpRequest& req,
                        const std::function<Event(const Session&)>& make_event) {
  SessionClaim claim = sessions_.claim(id);
  const Session current = sessions_.restore(id);
  Event ev = make_event(current);
  if (!req.actor.empty()) ev.actor = req.actor;
  Session next = transition(current, ev);
  sessions_.persist(next);
  return next;
}

std::string Service::fresh_session_id(const std::string& dataset_id) {
  static thread_local std::mt19937_64 entropy{std::random_device{}()};
  const std::string seed = dataset_id + utc_now() + std::to_string(counter_++) +
                           std::to_string(entropy());
  return "s" + hex64(fnv1a64(seed));
}

HttpResponse Service::dispatch(const HttpRequest& req) {
  const auto parts = split_path(req.path);
  json body = json::object();
  if (!req.body.empty() && !(parts.size() == 1 && parts[0] == "datasets")) {
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::PayloadInvalid, std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object()) fail(ErrorCode::PayloadInvalid, "request body must be a JSON object");
  }

  if (parts.size() == 1 && parts[0] == "datasets" && req.method == "POST") {
    const std::string id = datasets_.put(req.body);
    const Dataset d = datasets_.get(id);
    const ValidationReport rep = validate_dataset(d);
    return {201,
            {{"dataset_id", id},
             {"project", d.project},
             {"releases", d.releases},
             {"tests", d.tests.size()},
             {"validation", to_json(rep)}}};
  }
  if (parts.size() == 3 && parts[0] == "datasets" && parts[2] == "catalog" && req.method == "GET") {
    auto rel = req.query.find("release");
    if (rel == req.query.end()) fail(ErrorCode::PayloadInvalid, "query parameter 'release' is required");
    return {200, to_json(build_catalog(datasets_.get(parts[1]), rel->second))};
  }
  if (parts.size() == 1 && parts[0] == "sessions" && req.method == "POST") {
    return create_session(req, body);
  }
  if (parts.size() >= 2 && parts[0] == "sessions") {
    std::string action;
    for (std::size_t i = 2; i < parts.size(); ++i) action += (i > 2 ? "/" : "") + parts[i];
    return session_route(req, parts[1], action, body);
  }
  fail(ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
}

HttpResponse Service::create_session(const HttpRequest& req, const json& body) {
  if (!body.contains("dataset_id") || !body["dataset_id"].is_string()) {
    fail(ErrorCode::PayloadInvalid, "'dataset_id' is required");
  }
  const std::string dataset_id = body["dataset_id"].get<std::string>();
  if (!datasets_.exists(dataset_id)) fail(ErrorCode::NotFound, "no dataset '" + dataset_id + "'");

  std::string id;
  if (auto it = body.find("session_id"); it != body.end()) {
    if (!it->is_string() || !valid_store_id(it->get<std::string>())) {
      fail(ErrorCode::PayloadInvalid, "session_id must match [A-Za-z0-9_-]{1,128}");
    }
    id = it->get<std::string>();
  } else {
    id = fresh_session_id(dataset_id);
  }

  SessionClaim claim = sessions_.claim(id);
  if (sessions_.exists(id)) fail(ErrorCode::Conflict, "session '" + id + "' already exists");
  Event ev{EventKind::LoadData, {{"dataset_ref", dataset_id}}};
  if (!req.actor.empty()) ev.actor = req.actor;
  const Session s = transition(new_session(id, config_.max_iterations), ev);
  sessions_.persist(s);
  return {201, session_summary(s)};
}

HttpResponse Service::session_route(const HttpRequest& req, const std::string& id,
                                    const std::string& action, const json& body) {
  const std::string& method = req.method;

  if (method == "GET") {
    if (action.empty()) return {200, session_summary(sessions_.restore(id))};
    if (action == "ranking") return {200, ranking_payload(sessions_.restore(id))};
    if (action == "export") return {200, build_export(sessions_.restore(id))};
    if (action == "adequacy") {
      Session s = sessions_.restore(id);
      if (s.state == SessionState::VerificationLabeled) {
        s = mutate(id, req, [this](const Session& cur) {
          require_state_allows(cur, EventKind::Assess);
          const AdequacyReport rep = assess_adequacy(*cur.suite, cur.labels, config_.thresholds);
          return Event{EventKind::Assess, {{"report", to_json(rep)}}};
        });
      } else if (s.reports.empty() || s.state == SessionState::TrainingLabeled ||
                 s.state == SessionState::Trained) {
        fail(ErrorCode::IllegalTransition,
             "no adequacy report in state " + std::string(to_string(s.state)));
      }
      return {200, adequacy_payload(s)};
    }
    fail(ErrorCode::NotFound, "no route for GET " + req.path);
  }
  if (method != "POST") fail(ErrorCode::NotFound, "no route for " + method + " " + req.path);

  Session s;
  if (action == "scope") {
    s = mutate(id, req, [&](const Session& cur) {
      require_state_allows(cur, EventKind::ScopeFeatures);
      const FeatureScope scope = scope_from_json(body);
      check_scope(datasets_.get(cur.dataset_ref), scope);
      return Event{EventKind::ScopeFeatures, {{"scope", to_json(scope)}}};
    });
  } else if (action == "labels") {
    s = mutate(id, req, [&](const Session& cur) {
      const LabelSet incoming = labels_from_json(body.contains("entries") ? body["entries"] : json());
      if (incoming.entries.empty()) fail(ErrorCode::PayloadInvalid, "no label entries");
      const Dataset d = datasets_.get(cur.dataset_ref);
      for (const auto& e : incoming.entries) {
        if (!d.find_test(e.test_id)) {
          fail(ErrorCode::UnknownTestId, "test '" + e.test_id + "' is not in the dataset");
        }
      }
      if (body.value("relabel", false)) {
        if (incoming.entries.size() != 1) {
          fail(ErrorCode::PayloadInvalid, "a relabel request carries exactly one entry");
        }
        const auto& e = incoming.entries.front();
        return Event{EventKind::Relabel, {{"test_id", e.test_id}, {"label", to_string(e.label)}}};
      }
      const Role role = incoming.entries.front().role;
      const EventKind kind =
          role == Role::Training ? EventKind::LabelTraining : EventKind::LabelVerification;
      require_state_allows(cur, kind);
      return Event{kind, {{"entries", to_json(incoming)["entries"]}}};
    });
  } else if (action == "train") {
    s = mutate(id, req, [&](const Session& cur) {
      require_state_allows(cur, EventKind::Train);
      const Dataset d = datasets_.get(cur.dataset_ref);
      const TrainConfig cfg = train_config_from_json(body, config_.train);
      const FeatureMatrix matrix = extract_features(d, *cur.scope);
      const RankModel model = train(matrix, cur.labels, cfg);
      const RankedSuite suite = rank(model, matrix, d, *cur.scope, cur.labels.ids(Role::Training));
      return Event{EventKind::Train, {{"model", to_json(model)}, {"suite", to_json(suite)}}};
    });
  } else if (action == "verification/draw") {
    s = mutate(id, req, [&](const Session& cur) {
      require_state_allows(cur, EventKind::DrawVerification);
      std::size_t k = 0;
      std::uint64_t seed = 0;
      try {
        k = body.at("k").get<std::size_t>();
        seed = body.value("seed", std::uint64_t{0});
      } catch (const json::exception& e) {
        fail(ErrorCode::PayloadInvalid, std::string("draw request: ") + e.what());
      }
      return Event{EventKind::DrawVerification, {{"draw", to_json(draw_verification(*cur.suite, k, seed))}}};
    });
    return {200, ranking_payload(s)};
  } else if (action == "decision") {
    const std::string decision = body.value("decision", std::string());
    s = mutate(id, req, [&](const Session& cur) {
      if (decision == "accept") {
        require_state_allows(cur, EventKind::Accept);
        if (!body.contains("cutoff_rank") || !body["cutoff_rank"].is_number_unsigned()) {
          fail(ErrorCode::PayloadInvalid, "accept needs a positive integer 'cutoff_rank'");
        }
        const bool allow_override = body.value("allow_override", false);
        const SelectionResult sel = choose_cutoff(*cur.suite, cur.reports.back(),
                                                  body["cutoff_rank"].get<std::size_t>(),
                                                  allow_override);
        return Event{EventKind::Accept,
                     {{"selection", to_json(sel)}, {"allow_override", allow_override}}};
      }
      if (decision == "iterate") return Event{EventKind::Iterate, json::object()};
      if (decision == "abort") {
        return Event{EventKind::Abort, {{"reason", body.value("reason", std::string())}}};
      }
      fail(ErrorCode::PayloadInvalid, "decision must be accept, iterate or abort");
    });
  } else if (action == "posttest") {
    s = mutate(id, req, [&](const Session&) {
      return Event{EventKind::RecordPostTest,
                   {{"reflection", body.value("reflection", std::string())},
                    {"improvement_notes", body.value("improvement_notes", std::string())}}};
    });
  } else {
    fail(ErrorCode::NotFound, "no route for POST " + req.path);
  }
  return {200, session_summary(s)};
}

}  // namespace rts
