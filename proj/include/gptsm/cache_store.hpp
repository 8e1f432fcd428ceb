#pragma once

// Content-addressed, append-only store of LLM exchanges.
//
// On disk the store is a single JSON-lines file (`cache.jsonl` inside the
// store directory). Each line is one entry:
//
//   {"k":"<sha256 hex>","req":{...},"resp":<string|array>,"t":"<ISO-8601>",
//    "sum":"<sha256 hex>"}
//
// `k` is the SHA-256 of the canonical request serialization (see
// RequestSummary::canonical). `sum` is the SHA-256 of the line's other fields
// serialized without it, so any byte flip in a line is detected by verify().
// The whole file is indexed in memory on open.

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "gptsm/digest.hpp"

namespace gptsm {

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Endpoint { chat, embedding };

struct RequestSummary {
  Endpoint endpoint = Endpoint::chat;
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  std::size_t sample_index = 0;

  /// ["chat"|"embed", model, prompt, temperature, sample_index] as compact
  /// JSON (UTF-8, no whitespace, shortest round-trip number formatting).
  std::string canonical() const;

  friend bool operator==(const RequestSummary&, const RequestSummary&) = default;
};

struct CacheKey {
  Sha256 digest{};

  static CacheKey of(const RequestSummary& request);
  std::string hex() const { return to_hex(digest); }
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

using CachedResponse = std::variant<std::string, std::vector<double>>;

struct CacheEntry {
  CacheKey key;
  RequestSummary request;
  CachedResponse response;
  std::string created_at;
};

struct CacheOptions {
  bool writable = true;
  /// fsync after every append so an entry is durable before put() returns.
  bool sync = true;
};

struct VerifyReport {
  std::size_t entries = 0;
  std::vector<std::string> problems;  // "line N: reason"
  bool ok() const { return problems.empty(); }
};

class CacheStore {
 public:
  static constexpr const char* kFileName = "cache.jsonl";

  /// Opens (creating when writable) the store directory and indexes it.
  /// Throws StorageError on unreadable or corrupt content.
  explicit CacheStore(std::filesystem::path dir, CacheOptions options = {});

  CacheStore(const CacheStore&) = delete;
  CacheStore& operator=(const CacheStore&) = delete;

  std::optional<CacheEntry> get(const CacheKey& key) const;

  /// Idempotent for identical values; throws VersionConflict when the key is
  /// already bound to a different response.
  void put(const CacheEntry& entry);

  /// Convenience: builds the entry (key, timestamp) and puts it.
  void put(const RequestSummary& request, CachedResponse response);

  std::size_t size() const;
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file() const { return dir_ / kFileName; }

  /// Re-digests every line of the store file at `dir` without loading it.
  static VerifyReport verify(const std::filesystem::path& dir);

 private:
  void load();
  void append_line(const std::string& line);

  std::filesystem::path dir_;
  CacheOptions options_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, CacheEntry> index_;
};

std::string iso8601_now();

}  // namespace gptsm
