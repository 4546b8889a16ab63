#include "rts/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include "rts/error.hpp"

namespace fs = std::filesystem;

namespace rts {

bool valid_store_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c == '-' || c == '_';
  });
}

namespace {

void require_id(std::string_view id) {
  if (!valid_store_id(id)) fail(ErrorCode::NotFound, "invalid id '" + std::string(id) + "'");
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot replace " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SessionClaim::SessionClaim(SessionClaim&& other) noexcept : lock_(std::move(other.lock_)) {
  other.lock_.clear();
}

SessionClaim::~SessionClaim() {
  if (!lock_.empty()) {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
}

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create session store " + root_.string());
}

fs::path SessionStore::path_for(std::string_view id) const {
  require_id(id);
  return root_ / (std::string(id) + ".json");
}

bool SessionStore::exists(std::string_view id) const {
  return valid_store_id(id) && fs::exists(path_for(id));
}

void SessionStore::persist(const Session& s) const {
  write_file_atomic(path_for(s.id), to_json(s).dump(2));
}

Session SessionStore::restore(std::string_view id) const {
  const fs::path path = path_for(id);
  if (!fs::exists(path)) fail(ErrorCode::NotFound, "no session '" + std::string(id) + "'");
  const std::string bytes = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::StoreCorrupt, "session '" + std::string(id) + "' is not valid JSON");
  }
  Session s = session_from_json(doc);
  if (s.id != id) fail(ErrorCode::StoreCorrupt, "session file holds id '" + s.id + "'");
  verify_integrity(s);
  return s;
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

SessionClaim SessionStore::claim(std::string_view id) const {
  require_id(id);
  fs::path lock = root_ / (std::string(id) + ".lock");
  const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    fail(ErrorCode::Conflict, "session '" + std::string(id) + "' is being modified by another writer");
  }
  ::close(fd);
  return SessionClaim(std::move(lock));
}

DatasetStore::DatasetStore(fs::path root) : dir_(std::move(root) / "datasets") {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create dataset store " + dir_.string());
}

std::string DatasetStore::put(std::string_view bytes) const {
  load_dataset(bytes);
  const std::string id = "d" + hex64(fnv1a64(bytes));
  const fs::path path = dir_ / (id + ".json");
  if (!fs::exists(path)) write_file_atomic(path, bytes);
  return id;
}

Dataset DatasetStore::get(std::string_view id) const {
  require_id(id);
  const fs::path path = dir_ / (std::string(id) + ".json");
  if (!fs::exists(path)) fail(ErrorCode::NotFound, "no dataset '" + std::string(id) + "'");
  return load_dataset(read_file(path));
}

bool DatasetStore::exists(std::string_view id) const {
  return valid_store_id(id) && fs::exists(dir_ / (std::string(id) + ".json"));
}

}  // namespace rts
