#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rts/datamodel.hpp"
#include "rts/session.hpp"

namespace rts {

// Ids used as file names: [A-Za-z0-9_-]{1,128}.
bool valid_store_id(std::string_view id);

class SessionStore;

// Exclusive writer claim on one session id, held for the lifetime of the
// object. Backed by an O_EXCL lock file so it also excludes other processes.
class SessionClaim {
 public:
  SessionClaim(SessionClaim&& other) noexcept;
  SessionClaim& operator=(SessionClaim&&) = delete;
  SessionClaim(const SessionClaim&) = delete;
  ~SessionClaim();

 private:
  friend class SessionStore;
  explicit SessionClaim(std::filesystem::path lock) : lock_(std::move(lock)) {}
  std::filesystem::path lock_;
};

// One `<session-id>.json` document per session under `root`.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(std::string_view id) const;

  bool exists(std::string_view id) const;
  // Writes atomically (temp file + rename).
  void persist(const Session& s) const;
  // Throws NotFound or StoreCorrupt.
  Session restore(std::string_view id) const;
  std::vector<std::string> list() const;

  // Throws Conflict when another writer holds the claim.
  SessionClaim claim(std::string_view id) const;

 private:
  std::filesystem::path root_;
};

// Content-addressed dataset uploads under `<root>/datasets/`.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path root);

  // Validates that `bytes` load as a Dataset, then stores them; the id is
  // "d" + hex FNV-1a of the bytes.
  std::string put(std::string_view bytes) const;
  Dataset get(std::string_view id) const;
  bool exists(std::string_view id) const;

 private:
  std::filesystem::path dir_;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace rts
