#include "rts/rts.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rts/datamodel.hpp"
#include "rts/error.hpp"
#include "rts/evaluation.hpp"
#include "rts/fixtures.hpp"
#include "rts/serialize.hpp"
#include "rts/service.hpp"
#include "rts/store.hpp"
#include "rts/validation.hpp"

struct rts_dataset {
  rts::Dataset data;
};

struct rts_service {
  std::unique_ptr<rts::Service> impl;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

rts_status to_status(rts::ErrorCode c) {
  using rts::ErrorCode;
  switch (c) {
    case ErrorCode::MalformedInput: return RTS_MALFORMED_INPUT;
    case ErrorCode::SchemaViolation: return RTS_SCHEMA_VIOLATION;
    case ErrorCode::UnknownRelease: return RTS_UNKNOWN_RELEASE;
    case ErrorCode::ScopeMismatch: return RTS_SCOPE_MISMATCH;
    case ErrorCode::DimensionMismatch: return RTS_DIMENSION_MISMATCH;
    case ErrorCode::DegenerateLabels: return RTS_DEGENERATE_LABELS;
    case ErrorCode::UnknownTestId: return RTS_UNKNOWN_TEST_ID;
    case ErrorCode::EmptySuite: return RTS_EMPTY_SUITE;
    case ErrorCode::CutoffOutsideInterval: return RTS_CUTOFF_OUTSIDE_INTERVAL;
    case ErrorCode::InadequateRanking: return RTS_INADEQUATE_RANKING;
    case ErrorCode::NoFaults: return RTS_NO_FAULTS;
    case ErrorCode::IllegalTransition: return RTS_ILLEGAL_TRANSITION;
    case ErrorCode::PayloadInvalid: return RTS_PAYLOAD_INVALID;
    case ErrorCode::NotFound: return RTS_NOT_FOUND;
    case ErrorCode::StoreCorrupt: return RTS_STORE_CORRUPT;
    case ErrorCode::Conflict: return RTS_CONFLICT;
    case ErrorCode::IterationLimit: return RTS_ITERATION_LIMIT;
    case ErrorCode::InvalidArgument: return RTS_INVALID_ARGUMENT;
    case ErrorCode::IoError: return RTS_IO_ERROR;
  }
  return RTS_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

// Runs f, translating exceptions into a status and the thread's last error.
template <class F>
rts_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return RTS_OK;
  } catch (const rts::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return RTS_PAYLOAD_INVALID;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RTS_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return RTS_INTERNAL;
  }
}

rts_status null_arg(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return RTS_INVALID_ARGUMENT;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string url_decode(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 &&
               hex_value(s[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(const char* query) {
  std::map<std::string, std::string> out;
  if (!query) return out;
  std::string q(query);
  std::size_t start = 0;
  while (start <= q.size()) {
    std::size_t amp = q.find('&', start);
    if (amp == std::string::npos) amp = q.size();
    std::string part = q.substr(start, amp - start);
    if (!part.empty()) {
      std::size_t eq = part.find('=');
      if (eq == std::string::npos) {
        out[url_decode(part)] = "";
      } else {
        out[url_decode(part.substr(0, eq))] = url_decode(part.substr(eq + 1));
      }
    }
    start = amp + 1;
  }
  return out;
}

}  // namespace

extern "C" {

const char* rts_version(void) { return "1.0.0"; }

const char* rts_status_name(rts_status status) {
  switch (status) {
    case RTS_OK: return "Ok";
    case RTS_MALFORMED_INPUT: return "MalformedInput";
    case RTS_SCHEMA_VIOLATION: return "SchemaViolation";
    case RTS_UNKNOWN_RELEASE: return "UnknownRelease";
    case RTS_SCOPE_MISMATCH: return "ScopeMismatch";
    case RTS_DIMENSION_MISMATCH: return "DimensionMismatch";
    case RTS_DEGENERATE_LABELS: return "DegenerateLabels";
    case RTS_UNKNOWN_TEST_ID: return "UnknownTestId";
    case RTS_EMPTY_SUITE: return "EmptySuite";
    case RTS_CUTOFF_OUTSIDE_INTERVAL: return "CutoffOutsideInterval";
    case RTS_INADEQUATE_RANKING: return "InadequateRanking";
    case RTS_NO_FAULTS: return "NoFaults";
    case RTS_ILLEGAL_TRANSITION: return "IllegalTransition";
    case RTS_PAYLOAD_INVALID: return "PayloadInvalid";
    case RTS_NOT_FOUND: return "NotFound";
    case RTS_STORE_CORRUPT: return "StoreCorrupt";
    case RTS_CONFLICT: return "Conflict";
    case RTS_ITERATION_LIMIT: return "IterationLimit";
    case RTS_INVALID_ARGUMENT: return "InvalidArgument";
    case RTS_IO_ERROR: return "IoError";
    case RTS_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* rts_last_error(void) { return g_last_error.c_str(); }

void rts_string_free(char* s) { std::free(s); }

rts_status rts_dataset_load_file(const char* path, rts_dataset** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new rts_dataset{rts::load_dataset_file(path)}; });
}

rts_status rts_dataset_load_buffer(const char* data, size_t len, rts_dataset** out) {
  if (!data && len > 0) return null_arg("data");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    *out = new rts_dataset{rts::load_dataset(std::string_view(data ? data : "", len))};
  });
}

void rts_dataset_free(rts_dataset* ds) { delete ds; }

rts_status rts_dataset_validate(const rts_dataset* ds, int as_json, char** out, int* corrupt) {
  if (!ds) return null_arg("dataset");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const rts::ValidationReport report = rts::validate_dataset(ds->data);
    *out = dup_string(as_json ? rts::to_json(report).dump(2) + "\n" : rts::render_text(report));
    if (corrupt) *corrupt = report.corrupt ? 1 : 0;
  });
}

rts_status rts_dataset_serialize(const rts_dataset* ds, char** out) {
  if (!ds) return null_arg("dataset");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = dup_string(rts::serialize_dataset(ds->data)); });
}

rts_status rts_backtest(const rts_dataset* ds, const char* options_json, int as_json, char** out,
                        size_t* evaluated, size_t* skipped) {
  if (!ds) return null_arg("dataset");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    json opts = json::object();
    if (options_json) {
      try {
        opts = json::parse(options_json);
      } catch (const json::parse_error& e) {
        rts::fail(rts::ErrorCode::PayloadInvalid, std::string("backtest options: ") + e.what());
      }
    }
    if (!opts.is_object()) rts::fail(rts::ErrorCode::PayloadInvalid, "backtest options must be an object");
    if (!opts.contains("releases") || !opts["releases"].is_array() || opts["releases"].empty()) {
      rts::fail(rts::ErrorCode::InvalidArgument, "backtest needs at least one release");
    }
    const auto releases = opts["releases"].get<std::vector<std::string>>();

    rts::FeatureScope scope;
    if (opts.contains("deselected_groups")) {
      for (const auto& g : opts["deselected_groups"].get<std::vector<std::string>>()) {
        scope.deselected_groups.insert(g);
      }
    }
    rts::TrainConfig cfg;
    if (opts.contains("train")) cfg = rts::train_config_from_json(opts["train"], cfg);

    rts::BacktestOptions bo;
    bo.baseline_trials = opts.value("trials", std::size_t{0});
    bo.seed = opts.value("seed", std::uint64_t{0});
    bo.window = opts.value("window", bo.window);

    const rts::BacktestReport report = rts::backtest(ds->data, scope, cfg, releases, bo);
    *out = dup_string(as_json ? rts::to_json(report).dump(2) + "\n" : rts::render_table(report));
    if (evaluated) *evaluated = report.per_release.size();
    if (skipped) *skipped = report.skipped.size();
  });
}

rts_status rts_fixture_generate(const char* kind, uint64_t seed, char** out) {
  if (!kind) return null_arg("kind");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    rts::fixtures::PlantedOptions options;
    options.seed = seed;
    const std::string k(kind);
    if (k == "planted") {
      *out = dup_string(rts::serialize_dataset(rts::fixtures::planted_corpus(options).dataset));
    } else if (k == "shuffled") {
      *out = dup_string(rts::serialize_dataset(rts::fixtures::shuffled_corpus(options).dataset));
    } else {
      rts::fail(rts::ErrorCode::InvalidArgument, "unknown fixture kind '" + k + "'");
    }
  });
}

rts_status rts_service_open(const char* config_json, rts_service** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    rts::ServiceConfig cfg;
    if (config_json) {
      json j;
      try {
        j = json::parse(config_json);
      } catch (const json::parse_error& e) {
        rts::fail(rts::ErrorCode::PayloadInvalid, std::string("service config: ") + e.what());
      }
      cfg = rts::service_config_from_json(j);
    }
    auto svc = std::make_unique<rts_service>();
    svc->impl = std::make_unique<rts::Service>(std::move(cfg));
    *out = svc.release();
  });
}

void rts_service_free(rts_service* svc) { delete svc; }

rts_status rts_service_config(const rts_service* svc, char** out) {
  if (!svc) return null_arg("service");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = dup_string(rts::to_json(svc->impl->config()).dump(2)); });
}

rts_status rts_service_handle(rts_service* svc, const char* method, const char* path,
                              const char* query, const char* body, size_t body_len,
                              const char* actor, int* http_status, char** out) {
  if (!svc) return null_arg("service");
  if (!method) return null_arg("method");
  if (!path) return null_arg("path");
  if (!body && body_len > 0) return null_arg("body");
  if (!http_status) return null_arg("http_status");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    rts::HttpRequest req;
    req.method = method;
    req.path = path;
    req.query = parse_query(query);
    req.body.assign(body ? body : "", body_len);
    if (actor) req.actor = actor;
    const rts::HttpResponse resp = svc->impl->handle(req);
    *http_status = resp.status;
    *out = dup_string(resp.body.dump());
  });
}

rts_status rts_session_export(const char* store_dir, const char* session_id, char** out) {
  if (!store_dir) return null_arg("store_dir");
  if (!session_id) return null_arg("session_id");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    rts::SessionStore store(store_dir);
    *out = dup_string(rts::build_export(store.restore(session_id)).dump(2) + "\n");
  });
}

}  // extern "C"
