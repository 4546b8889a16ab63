// rts: command line front end. Everything goes through the C API in rts/rts.h.
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "rts/rts.h"

namespace {

using nlohmann::json;

struct CString {
  char* p = nullptr;
  ~CString() { rts_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct DatasetHandle {
  rts_dataset* p = nullptr;
  ~DatasetHandle() { rts_dataset_free(p); }
};

struct ServiceHandle {
  rts_service* p = nullptr;
  ~ServiceHandle() { rts_service_free(p); }
};

void report(rts_status st) {
  std::cerr << "rts: " << rts_status_name(st) << ": " << rts_last_error() << "\n";
}

bool read_text(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

// Emit to --out when given, else stdout.
int emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  if (!write_text(out_path, text)) {
    std::cerr << "rts: cannot write " << out_path << "\n";
    return 1;
  }
  return 0;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int cmd_validate(const std::string& path, bool as_json) {
  DatasetHandle ds;
  rts_status st = rts_dataset_load_file(path.c_str(), &ds.p);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  CString text;
  int corrupt = 0;
  st = rts_dataset_validate(ds.p, as_json ? 1 : 0, &text.p, &corrupt);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  std::cout << text.str();
  return corrupt ? 2 : 0;
}

struct BacktestArgs {
  std::string path;
  std::vector<std::string> releases;
  std::vector<std::string> deselect;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t window = 2;
  bool as_json = false;
};

int cmd_backtest(const BacktestArgs& a) {
  DatasetHandle ds;
  rts_status st = rts_dataset_load_file(a.path.c_str(), &ds.p);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  json opts = {{"releases", split_list(a.releases)},
               {"trials", a.trials},
               {"seed", a.seed},
               {"window", a.window},
               {"deselected_groups", split_list(a.deselect)}};
  CString text;
  std::size_t evaluated = 0, skipped = 0;
  st = rts_backtest(ds.p, opts.dump().c_str(), a.as_json ? 1 : 0, &text.p, &evaluated, &skipped);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  std::cout << text.str();
  return evaluated == 0 ? 3 : 0;
}

std::string config_text(const std::string& path, bool& ok) {
  ok = true;
  if (path.empty()) return {};
  std::string text;
  if (!read_text(path, text)) {
    std::cerr << "rts: cannot read config " << path << "\n";
    ok = false;
  }
  return text;
}

std::unique_ptr<httplib::Server> g_server;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& config_path) {
  bool ok = true;
  const std::string cfg_text = config_text(config_path, ok);
  if (!ok) return 1;
  ServiceHandle svc;
  rts_status st = rts_service_open(cfg_text.empty() ? nullptr : cfg_text.c_str(), &svc.p);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  CString cfg_out;
  if ((st = rts_service_config(svc.p, &cfg_out.p)) != RTS_OK) {
    report(st);
    return 1;
  }
  const json cfg = json::parse(cfg_out.str());
  const std::string listen = cfg.at("listen").get<std::string>();
  const int port = cfg.at("port").get<int>();
  const std::string ui_dir = cfg.value("ui_dir", std::string());
  const std::size_t max_body = cfg.at("max_body_bytes").get<std::size_t>();

  g_server = std::make_unique<httplib::Server>();
  auto& server = *g_server;
  server.set_payload_max_length(max_body);
  if (!ui_dir.empty() && !server.set_mount_point("/ui", ui_dir)) {
    std::cerr << "rts: ui directory " << ui_dir << " does not exist\n";
    return 1;
  }

  auto forward = [&svc](const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    if (req.is_multipart_form_data() && !req.files.empty()) {
      body = req.files.begin()->second.content;
    }
    std::string query;
    if (auto q = req.target.find('?'); q != std::string::npos) query = req.target.substr(q + 1);
    const std::string actor = req.get_header_value("X-Actor");
    int status = 500;
    CString out;
    rts_status st = rts_service_handle(svc.p, req.method.c_str(), req.path.c_str(), query.c_str(),
                                       body.data(), body.size(),
                                       actor.empty() ? nullptr : actor.c_str(), &status, &out.p);
    if (st != RTS_OK) {
      status = 500;
      res.set_content(json{{"code", rts_status_name(st)}, {"message", rts_last_error()}}.dump(),
                      "application/json");
    } else {
      res.set_content(out.str(), "application/json");
    }
    res.status = status;
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);
  server.Delete(".*", forward);
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 413) {
      res.set_content(json{{"code", "PayloadTooLarge"}, {"message", "request body too large"}}.dump(),
                      "application/json");
    }
  });

  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cerr << "rts: listening on " << listen << ":" << port << "\n";
  if (!server.listen(listen, port)) {
    std::cerr << "rts: cannot listen on " << listen << ":" << port << "\n";
    return 1;
  }
  return 0;
}

int cmd_export(const std::string& id, const std::string& out_path, std::string store_dir,
               const std::string& config_path) {
  if (store_dir.empty()) {
    bool ok = true;
    const std::string cfg_text = config_text(config_path, ok);
    if (!ok) return 1;
    ServiceHandle svc;
    rts_status st = rts_service_open(cfg_text.empty() ? nullptr : cfg_text.c_str(), &svc.p);
    if (st != RTS_OK) {
      report(st);
      return 1;
    }
    CString cfg_out;
    if ((st = rts_service_config(svc.p, &cfg_out.p)) != RTS_OK) {
      report(st);
      return 1;
    }
    store_dir = json::parse(cfg_out.str()).at("store_dir").get<std::string>();
  }
  CString doc;
  rts_status st = rts_session_export(store_dir.c_str(), id.c_str(), &doc.p);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  return emit(out_path, doc.str());
}

int cmd_fixture(const std::string& kind, std::uint64_t seed, const std::string& out_path) {
  CString doc;
  rts_status st = rts_fixture_generate(kind.c_str(), seed, &doc.p);
  if (st != RTS_OK) {
    report(st);
    return 1;
  }
  return emit(out_path, doc.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression test selection toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rts_version()));

  int exit_code = 0;

  std::string validate_path;
  bool validate_json = false;
  auto* validate = app.add_subcommand("validate", "Check a dataset for corruption");
  validate->add_option("path", validate_path, "Dataset JSON file")->required();
  validate->add_flag("--json", validate_json, "Print the report as JSON");
  validate->callback([&] { exit_code = cmd_validate(validate_path, validate_json); });

  BacktestArgs bt;
  auto* backtest = app.add_subcommand("backtest", "Replay the ranking on past releases");
  backtest->add_option("path", bt.path, "Dataset JSON file")->required();
  backtest->add_option("--releases", bt.releases, "Comma separated releases")
      ->required()
      ->delimiter(',');
  backtest->add_option("--trials", bt.trials, "Random baseline trials (0 disables)")
      ->capture_default_str();
  backtest->add_option("--seed", bt.seed, "Random baseline seed")->capture_default_str();
  backtest->add_option("--window", bt.window, "Prior releases used for labels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  backtest->add_option("--deselect", bt.deselect, "Feature groups to leave out")->delimiter(',');
  backtest->add_flag("--json", bt.as_json, "Print the report as JSON");
  backtest->callback([&] { exit_code = cmd_backtest(bt); });

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", serve_config, "Service config JSON file");
  serve->callback([&] { exit_code = cmd_serve(serve_config); });

  auto* session = app.add_subcommand("session", "Session store operations");
  session->require_subcommand(1);
  std::string export_id, export_out, export_store, export_config;
  auto* exp = session->add_subcommand("export", "Write the selection of an accepted session");
  exp->add_option("id", export_id, "Session id")->required();
  exp->add_option("--out", export_out, "Output file (default stdout)");
  exp->add_option("--store", export_store, "Session store directory");
  exp->add_option("--config", export_config, "Service config JSON file (for the store)");
  exp->callback([&] { exit_code = cmd_export(export_id, export_out, export_store, export_config); });

  std::string fixture_kind, fixture_out;
  std::uint64_t fixture_seed = 20190607;
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic corpus");
  fixture->add_option("kind", fixture_kind, "planted or shuffled")
      ->required()
      ->check(CLI::IsMember({"planted", "shuffled"}));
  fixture->add_option("--seed", fixture_seed, "Corpus seed")->capture_default_str();
  fixture->add_option("--out", fixture_out, "Output file (default stdout)");
  fixture->callback([&] { exit_code = cmd_fixture(fixture_kind, fixture_seed, fixture_out); });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
