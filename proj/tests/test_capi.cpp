#include <cstring>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "rts/rts.h"

using nlohmann::json;

namespace {

struct Str {
  char* p = nullptr;
  ~Str() { rts_string_free(p); }
  std::string s() const { return p ? p : ""; }
};

const char* kSmall = R"({"schema_version":1,"releases":["R1","R2"],
  "tests":[{"id":"T1","description":"login timeout","history":[{"release":"R1","verdict":"fail"}]},
           {"id":"T2","description":"report page","history":[{"release":"R1","verdict":"pass"}]}]})";

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(rts_status_name(RTS_OK)) == "Ok");
  CHECK(std::string(rts_status_name(RTS_UNKNOWN_RELEASE)) == "UnknownRelease");
  CHECK(std::string(rts_status_name(static_cast<rts_status>(999))) == "Unknown");
  CHECK(std::string(rts_version()) == "1.0.0");
}

TEST_CASE("null arguments are rejected") {
  rts_dataset* ds = nullptr;
  CHECK(rts_dataset_load_file(nullptr, &ds) == RTS_INVALID_ARGUMENT);
  CHECK(std::string(rts_last_error()).find("path") != std::string::npos);
  CHECK(rts_dataset_load_buffer(kSmall, std::strlen(kSmall), nullptr) == RTS_INVALID_ARGUMENT);
  Str out;
  CHECK(rts_dataset_validate(nullptr, 0, &out.p, nullptr) == RTS_INVALID_ARGUMENT);
  CHECK(out.p == nullptr);
  rts_dataset_free(nullptr);
  rts_service_free(nullptr);
  rts_string_free(nullptr);
}

TEST_CASE("load, validate and serialize") {
  rts_dataset* ds = nullptr;
  REQUIRE(rts_dataset_load_buffer(kSmall, std::strlen(kSmall), &ds) == RTS_OK);
  CHECK(std::string(rts_last_error()).empty());
  Str text, js, ser;
  int corrupt = -1;
  CHECK(rts_dataset_validate(ds, 0, &text.p, &corrupt) == RTS_OK);
  CHECK(text.s() == "0 issues (0 errors, 0 warnings)\n");
  CHECK(corrupt == 0);
  CHECK(rts_dataset_validate(ds, 1, &js.p, nullptr) == RTS_OK);
  CHECK(json::parse(js.s())["corrupt"] == false);
  CHECK(rts_dataset_serialize(ds, &ser.p) == RTS_OK);
  rts_dataset* again = nullptr;
  REQUIRE(rts_dataset_load_buffer(ser.p, std::strlen(ser.p), &again) == RTS_OK);
  Str ser2;
  rts_dataset_serialize(again, &ser2.p);
  CHECK(ser.s() == ser2.s());
  rts_dataset_free(again);
  rts_dataset_free(ds);
}

TEST_CASE("load errors carry codes and messages") {
  rts_dataset* ds = reinterpret_cast<rts_dataset*>(0x1);
  CHECK(rts_dataset_load_buffer("", 0, &ds) == RTS_MALFORMED_INPUT);
  CHECK(ds == nullptr);
  const char* nameless = R"({"schema_version":1,"tests":[{}]})";
  CHECK(rts_dataset_load_buffer(nameless, std::strlen(nameless), &ds) == RTS_SCHEMA_VIOLATION);
  CHECK(std::string(rts_last_error()).find("tests[0].id") != std::string::npos);
  CHECK(rts_dataset_load_file("/no/such/file.json", &ds) == RTS_IO_ERROR);
}

TEST_CASE("corrupt flag") {
  const char* dup = R"({"schema_version":1,"tests":[{"id":"A"},{"id":"A"}]})";
  rts_dataset* ds = nullptr;
  REQUIRE(rts_dataset_load_buffer(dup, std::strlen(dup), &ds) == RTS_OK);
  Str text;
  int corrupt = 0;
  CHECK(rts_dataset_validate(ds, 0, &text.p, &corrupt) == RTS_OK);
  CHECK(corrupt == 1);
  CHECK(text.s().find("DUP_ID") != std::string::npos);
  rts_dataset_free(ds);
}

TEST_CASE("backtest through the C API") {
  Str corpus;
  REQUIRE(rts_fixture_generate("planted", 20190607, &corpus.p) == RTS_OK);
  rts_dataset* ds = nullptr;
  REQUIRE(rts_dataset_load_buffer(corpus.p, std::strlen(corpus.p), &ds) == RTS_OK);
  Str out, out2;
  std::size_t evaluated = 0, skipped = 0;
  const char* opts = R"({"releases":["R1","R4"],"trials":20,"seed":42})";
  REQUIRE(rts_backtest(ds, opts, 1, &out.p, &evaluated, &skipped) == RTS_OK);
  CHECK(evaluated == 1);
  CHECK(skipped == 1);
  const json report = json::parse(out.s());
  CHECK(report["per_release"][0]["release"] == "R4");
  REQUIRE(rts_backtest(ds, opts, 1, &out2.p, nullptr, nullptr) == RTS_OK);
  CHECK(out.s() == out2.s());

  Str e1, e2, e3, e4;
  CHECK(rts_backtest(ds, R"({"releases":["R42"]})", 0, &e1.p, nullptr, nullptr) == RTS_UNKNOWN_RELEASE);
  CHECK(std::string(rts_last_error()).find("R42") != std::string::npos);
  CHECK(rts_backtest(ds, R"({"releases":[]})", 0, &e2.p, nullptr, nullptr) == RTS_INVALID_ARGUMENT);
  CHECK(rts_backtest(ds, "{oops", 0, &e3.p, nullptr, nullptr) == RTS_PAYLOAD_INVALID);
  CHECK(rts_backtest(ds, R"({"releases":["R4"],"deselected_groups":["nope"]})", 0, &e4.p, nullptr,
                     nullptr) == RTS_SCOPE_MISMATCH);
  CHECK(e4.p == nullptr);
  rts_dataset_free(ds);
}

TEST_CASE("fixtures") {
  Str a, b, c;
  CHECK(rts_fixture_generate("planted", 1, &a.p) == RTS_OK);
  CHECK(rts_fixture_generate("shuffled", 1, &b.p) == RTS_OK);
  CHECK(a.s() != b.s());
  CHECK(json::parse(a.s())["tests"].size() == 400);
  CHECK(rts_fixture_generate("other", 1, &c.p) == RTS_INVALID_ARGUMENT);
}

TEST_CASE("service handle") {
  const std::string store = "capi-store-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  const std::string cfg = json{{"store_dir", store}, {"port", 0}}.dump();
  rts_service* svc = nullptr;
  REQUIRE(rts_service_open(cfg.c_str(), &svc) == RTS_OK);
  Str cfg_out;
  REQUIRE(rts_service_config(svc, &cfg_out.p) == RTS_OK);
  CHECK(json::parse(cfg_out.s())["store_dir"] == store);

  int status = 0;
  Str r1;
  REQUIRE(rts_service_handle(svc, "POST", "/datasets", nullptr, kSmall, std::strlen(kSmall), nullptr,
                             &status, &r1.p) == RTS_OK);
  CHECK(status == 201);
  const std::string dataset_id = json::parse(r1.s())["dataset_id"];

  Str r2;
  REQUIRE(rts_service_handle(svc, "GET", ("/datasets/" + dataset_id + "/catalog").c_str(),
                             "release=R%32&x", nullptr, 0, nullptr, &status, &r2.p) == RTS_OK);
  CHECK(status == 200);
  CHECK(json::parse(r2.s()).size() == 6);

  const std::string body = json{{"dataset_id", dataset_id}, {"session_id", "c1"}}.dump();
  Str r3, r4;
  REQUIRE(rts_service_handle(svc, "POST", "/sessions", nullptr, body.data(), body.size(), "alice",
                             &status, &r3.p) == RTS_OK);
  CHECK(status == 201);
  REQUIRE(rts_service_handle(svc, "GET", "/sessions/c1/export", nullptr, nullptr, 0, nullptr, &status,
                             &r4.p) == RTS_OK);
  CHECK(status == 409);
  CHECK(json::parse(r4.s())["code"] == "IllegalTransition");

  Str ex;
  CHECK(rts_session_export(store.c_str(), "c1", &ex.p) == RTS_ILLEGAL_TRANSITION);
  CHECK(rts_session_export(store.c_str(), "zzz", &ex.p) == RTS_NOT_FOUND);
  rts_service_free(svc);

  rts_service* bad = nullptr;
  CHECK(rts_service_open(R"({"tau_adequate":0.9,"tau_marginal":0.1})", &bad) == RTS_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  CHECK(rts_service_open("[", &bad) == RTS_PAYLOAD_INVALID);
  std::filesystem::remove_all(store);
}

TEST_CASE("last error is per thread") {
  rts_dataset* ds = nullptr;
  CHECK(rts_dataset_load_buffer("", 0, &ds) == RTS_MALFORMED_INPUT);
  std::string other;
  std::thread t([&] { other = rts_last_error(); });
  t.join();
  CHECK(other.empty());
  CHECK_FALSE(std::string(rts_last_error()).empty());
}
